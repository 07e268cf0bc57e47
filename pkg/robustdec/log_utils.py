import logging

__all__ = ['LOG_FORMAT', 'configure_logging']

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level='WARNING', stream=None):
    """
    Attach a single stream handler to the package logger.

    Library modules only create loggers; the command line (or a notebook) calls
    this once. Calling it again replaces the previous handler.

    Inputs:
        level - Logging level name or number. (Default: 'WARNING')
        stream - Stream for the handler. If None, stderr is used. (Default: None)
    Outputs:
        logger - The configured 'robustdec' logger.
    """

    logger = logging.getLogger('robustdec')
    for handler in list(logger.handlers):
        if getattr(handler, '_robustdec', False):
            logger.removeHandler(handler)

    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._robustdec = True
    logger.addHandler(handler)

    if isinstance(level, str):
        level = level.upper()
    logger.setLevel(level)
    return logger
