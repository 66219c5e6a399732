"""Module entry point so ``python -m mqspace`` reaches the CLI."""

from .cli import run

if __name__ == "__main__":
    run()
