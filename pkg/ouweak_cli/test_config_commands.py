from ouweak.test import TestCase, setenv
from .environment import ENV_OUTPUT_DIR, KEYS
from .test_robot import Robot


class Test_config(TestCase):

    # fixtures
    def robot(self):
        return self.useFixture(Robot())

    # tests
    def test_show_defaults(self, robot):
        robot.cli('config show')
        shown = dict(line.split(': ', 1) for line in robot.stdout.splitlines())
        assert set(shown) == set(KEYS)
        assert shown['quadrature_order'] == '64'
        assert shown['output_dir'] == 'None'

    def test_set_is_persistent(self, robot):
        robot.cli('config set t_grid_size 50')
        assert robot.stdout == 't_grid_size: 50\n'
        robot.cli('config show')
        assert 't_grid_size: 50' in robot.stdout
        with robot.environment as env:
            assert env.get('t_grid_size') == 50

    def test_unknown_key(self, robot):
        assert robot.cli_exit('config set no_such_key 1') == 2
        assert 'unknown key' in robot.stderr

    def test_bad_value(self, robot):
        assert robot.cli_exit('config set threads many') == 2

    def test_output_dir(self, robot):
        robot.cli('config set output_dir results')
        robot.cli('kernel --lambdas 1 --t 1 --x 0 --u 0')
        assert robot.stdout == ''
        header, row = robot.csv_rows(robot.read_file('results/kernel.csv'))
        assert header[0] == 't'

    def test_output_dir_from_environment_variable(self, robot):
        robot.cli('config set output_dir results')
        with robot.environment as env:
            with setenv(ENV_OUTPUT_DIR, 'from-env'):
                assert env.output_dir == 'from-env'
            assert env.output_dir == 'results'

    def test_explicit_output_wins(self, robot):
        robot.cli('config set output_dir results')
        robot.cli('kernel --lambdas 1 --t 1 --x 0 --u 0 --output -')
        header, row = robot.csv_rows()
        assert header[0] == 't'


class Test_main(TestCase):

    # fixtures
    def robot(self):
        return self.useFixture(Robot())

    # tests
    def test_version(self, robot):
        robot.cli('version')
        assert 'Python:' in robot.stdout

    def test_help(self, robot):
        assert robot.cli_exit('--help') == -1
        assert 'verify-all' in robot.stdout

    def test_incomplete_command(self, robot):
        assert robot.cli_exit('config') == -1
        assert 'not a full command' in robot.stdout

    def test_unknown_command(self, robot):
        assert robot.cli_exit('frobnicate') == 2


class Test_broken_config(TestCase):

    # fixtures
    def robot(self):
        robot = self.useFixture(Robot())
        robot.config_dir.mkdir()
        return robot

    # tests
    def test_invalid_json(self, robot):
        (robot.config_dir / 'env.json').write_text('{"threads": ')
        assert robot.cli_exit('config show') == 2
        assert 'env.json is not valid JSON' in robot.stderr

    def test_not_an_object(self, robot):
        (robot.config_dir / 'env.json').write_text('[1, 2]')
        assert robot.cli_exit('config show') == 2
        assert 'does not hold a JSON object' in robot.stderr
