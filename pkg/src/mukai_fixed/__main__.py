"""Entry point for running mukai-fixed as a module."""

from mukai_fixed.cli import main

if __name__ == "__main__":
    main()
