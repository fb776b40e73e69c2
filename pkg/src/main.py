import sys

from src.cli.main import main

# python3 -m src.main --config configs/check_rev.ini
if __name__ == "__main__":
    sys.exit(main())
