'''
Test helpers: a TestCase with fixtures linked by parameter name, and small
set-up/clean-up fixtures for the command line tests.
'''

import contextlib
import io
import os
import pathlib
import tempfile

import numpy as np

import tests.arglinker


@contextlib.contextmanager
def chdir(directory):
    previous = os.getcwd()
    os.chdir(directory)
    try:
        yield
    finally:
        os.chdir(previous)


@contextlib.contextmanager
def setenv(variable, value):
    missing = object()
    previous = os.environ.get(variable, missing)
    os.environ[variable] = value
    try:
        yield
    finally:
        if previous is missing:
            os.environ.pop(variable, None)
        else:
            os.environ[variable] = previous


class Fixture:
    '''
    Something set up before use and cleaned up after, also a context manager.

    Clean-ups run in reverse order of registration.
    '''

    def __init__(self):
        self._cleanups = contextlib.ExitStack()

    def setUp(self):
        pass

    def cleanUp(self):
        self._cleanups.close()

    def addCleanup(self, cleanup, *args, **kwargs):
        self._cleanups.callback(cleanup, *args, **kwargs)

    def useFixture(self, fixture):
        fixture.setUp()
        self.addCleanup(fixture.cleanUp)
        return fixture

    def __enter__(self):
        self.setUp()
        return self

    def __exit__(self, *_exc):
        self.cleanUp()


class TempDir(Fixture):

    def setUp(self):
        super().setUp()
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.path = pathlib.Path(directory.name)


class _Capture(Fixture):

    def __init__(self, redirect):
        super().__init__()
        self._redirect = redirect
        self._buffer = io.StringIO()

    def setUp(self):
        super().setUp()
        self._cleanups.enter_context(self._redirect(self._buffer))

    @property
    def text(self):
        return self._buffer.getvalue()


def CaptureStdout():
    return _Capture(contextlib.redirect_stdout)


def CaptureStderr():
    return _Capture(contextlib.redirect_stderr)


class TestCase(tests.arglinker.TestCase):

    def useFixture(self, fixture):
        fixture.setUp()
        self.addCleanup(fixture.cleanUp)
        return fixture

    def new_temp_dir(self):
        return self.useFixture(TempDir()).path

    def assert_close(self, actual, expected, atol=0.0, rtol=0.0):
        np.testing.assert_allclose(actual, expected, atol=atol, rtol=rtol)
