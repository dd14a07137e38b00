import logging

from stressnet import settings


def configure_numeric_logs():
    """Keep third-party numeric libraries quiet below warnings."""
    for name in ("matplotlib", "numexpr", "pathos"):
        logging.getLogger(name).setLevel(logging.WARNING)


def configure():
    """Load logging configuration from our own defaults."""
    log_levels = {
        5: logging.NOTSET,
        4: logging.DEBUG,
        3: logging.INFO,
        2: logging.WARNING,
        1: logging.ERROR,
        0: logging.ERROR
    }

    logging.captureWarnings(True)
    root_logger = logging.getLogger()
    if settings.CFG["debug"]:
        details_format = logging.Formatter(
            '%(name)s (%(filename)s:%(lineno)s) [%(levelname)s] %(message)s'
        )
        handler = logging.StreamHandler()
        handler.setFormatter(details_format)
    else:
        brief_format = logging.Formatter('%(message)s')
        handler = logging.StreamHandler()
        handler.setFormatter(brief_format)
    root_logger.handlers = [handler]
    verbosity = min(max(int(settings.CFG["verbosity"]), 0), 5)
    root_logger.setLevel(log_levels[verbosity])

    configure_numeric_logs()
