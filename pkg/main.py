"""
This is the main script for simulating, reconstructing and verifying.
"""

import sys

from pnpmri.bench import app

if __name__ == "__main__":
    if len(sys.argv) < 2:
        print(
            "Please specify what to run: simulate, reconstruct, combine, "
            "n2n-train, n2n-apply or verify"
        )
        sys.exit(2)
    sys.exit(app.main(sys.argv[1:]))
