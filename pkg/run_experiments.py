#!/usr/bin/env python3
"""
Run the DAS generalization experiments CLI
"""
from src.harness.cli import main

if __name__ == '__main__':
    main()
