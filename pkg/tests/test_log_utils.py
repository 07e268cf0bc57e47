import io
import logging

from robustdec import configure_logging


def test_single_handler_and_level():
    stream = io.StringIO()
    configure_logging('info', stream=stream)
    logger = configure_logging('debug', stream=stream)
    ours = [h for h in logger.handlers if getattr(h, '_robustdec', False)]
    assert len(ours) == 1
    assert logger.level == logging.DEBUG
    logging.getLogger('robustdec.harness_utils').debug('seed %d done', 3)
    assert stream.getvalue().rstrip().endswith('DEBUG robustdec.harness_utils: seed 3 done')
    configure_logging('WARNING')
