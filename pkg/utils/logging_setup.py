"""
Colored console logging for the command-line front end.
"""

import logging

import coloredlogs

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def setup_logging(level: str = "WARNING", verbose: bool = False) -> None:
    """
    Install coloredlogs on the root logger (stderr). Safe to call repeatedly;
    the previous handler is replaced.

    Args:
        level: Base level name
        verbose: Force DEBUG
    """
    chosen = "DEBUG" if verbose else level.upper()
    coloredlogs.install(level=chosen, fmt=LOG_FORMAT)
    # joblib worker chatter stays quiet unless debugging
    logging.getLogger("joblib").setLevel(logging.DEBUG if verbose else logging.WARNING)
