import sys
assert sys.version_info >= (3, 8), "Python version 3.8 or newer is required"

if __name__ == "__main__":
    import ouweak_cli.main
    ouweak_cli.main.main()
