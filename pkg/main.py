"""CLI entrypoint for guarded-match.

Runs the packaged command line (``match``, ``verify``, ``gen``, ``bench``).
For API usage, run: `uvicorn guarded_match.api:app --reload`.
"""

import sys

from guarded_match.cli import main

if __name__ == "__main__":
    sys.exit(main())
