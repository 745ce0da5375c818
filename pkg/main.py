"""
Main entry point for the band selection toolkit
"""
import sys
from dotenv import load_dotenv

# Load environment variables (BANDSEL_* defaults)
load_dotenv()

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
