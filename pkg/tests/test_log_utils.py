import io
import logging
import operator
import warnings

from pytest import raises

from gevreych import log_utils


def test_log_to_level_restores_level():
    logger = logging.getLogger('gevreych.tests.level')
    logger.setLevel(logging.INFO)
    with log_utils.LogToLevel(logger, logging.ERROR) as inner:
        assert inner.level == logging.ERROR
    assert logger.level == logging.INFO
    with raises(ValueError):
        log_utils.LogToLevel(logger, 15)
    with raises(TypeError):
        log_utils.LogToLevel('gevreych', logging.INFO)


def test_conditional_filter():
    record = logging.LogRecord('x', logging.WARNING, __file__, 1, 'msg', None, None)
    assert log_utils.ConditionalFilter(logging.WARNING, operator.eq).filter(record)
    assert not log_utils.ConditionalFilter(logging.INFO, operator.le).filter(record)
    with raises(TypeError):
        log_utils.ConditionalFilter(logging.INFO, lambda a, b: a <= b)


def test_reindent():
    assert log_utils._reindent('first\nsecond\n') == 'first\n' + ' ' * 16 + 'second'


def test_silence_logger():
    level = log_utils.logger.level

    @log_utils.silence_logger
    def quiet():
        return log_utils.logger.level

    assert quiet() == logging.WARNING
    assert log_utils.logger.level == level


def test_progress_bar():
    stream = io.StringIO()
    bar = log_utils.ProgressBar(max_items=10, completed_items=0, stream=stream)
    bar.update(5)
    assert '50.0%' in stream.getvalue()
    bar.close()
    assert '100.0%' in stream.getvalue()
    assert 'completed in' in stream.getvalue()
    with raises(RuntimeError):
        log_utils.ProgressBar(stream=io.StringIO()).update(1)


def test_print_time():
    text = log_utils.ProgressBar._print_time(3725)
    assert '1h' in text
    assert '2m' in text
    assert '5.0s' in text


def test_log_file(tmp_path):
    logger = logging.getLogger('gevreych.tests.file')
    filename = str(tmp_path / 'run.log')
    showwarning = warnings.showwarning
    try:
        log_utils.initialise_logger(logger, to_file=filename, level=logging.INFO)
        logger.info('first line\nsecond line')
        logger.debug('hidden')
    finally:
        for h in list(logger.handlers):
            logger.removeHandler(h)
            h.close()
        warnings.showwarning = showwarning
    with open(filename) as fp:
        text = fp.read()
    assert 'Logging started' in text
    assert 'first line' in text
    assert 'hidden' not in text


def test_initialise_logger_type():
    with raises(TypeError):
        log_utils.initialise_logger('gevreych')
