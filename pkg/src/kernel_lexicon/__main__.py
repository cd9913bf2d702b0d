"""Entry point for running as python -m kernel_lexicon."""

from kernel_lexicon.cli import main

if __name__ == "__main__":
    main()
