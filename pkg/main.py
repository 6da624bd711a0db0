"""
Main entry point - run this to use the path-loss toolkit from the command line

    python main.py predict --model sui --freq-mhz 800 --hb 32
    python main.py evaluate drive_tests/*.csv --config sites/
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from cli import main, logger

if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Interrupted")
        sys.exit(130)
