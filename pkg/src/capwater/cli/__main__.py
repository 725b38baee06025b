"""Entry point for `python -m capwater.cli`."""

from .app import main

if __name__ == "__main__":
    raise SystemExit(main())
