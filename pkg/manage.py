#!/usr/bin/env python
"""Command-line entry point for the ImNet simulator (imnet_check, imnet_run, ...)."""
import os
import sys


def main():
    """Run ImNet management commands."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'App.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages listed in "
            "requirements.txt into the active virtual environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
