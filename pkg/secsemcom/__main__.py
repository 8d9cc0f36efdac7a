"""Allow ``python -m secsemcom``."""

from secsemcom.main import main

main()
