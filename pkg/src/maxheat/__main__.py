"""Module entry point: python -m maxheat ..."""

from .cli import entry

if __name__ == "__main__":
    entry()
