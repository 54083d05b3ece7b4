"""Module entry point: python -m dirac_tunnel."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
