"""Tests for the exception hierarchy, validators and logging helpers."""
import logging

import pytest

from utils.error_handler import (
    CFLViolationError,
    ChemowaveError,
    DomainTooSmallError,
    ErrorCategory,
    ErrorSeverity,
    InputValidator,
    InvalidGridError,
    InvalidInputError,
    InvalidParameterError,
    NonResonanceError,
    ProfileError,
    ScatteringError,
    SimulationAbortedError,
    StabilityBoundError,
    handle_errors,
)
from utils.logger import RepeatFilter, SimulationLogger, get_logger


def make_record(message, level=logging.WARNING):
    return logging.LogRecord('test', level, __file__, 1, message, None, None)


# ============================================================================
# Exceptions
# ============================================================================

def test_error_to_dict():
    error = InvalidInputError("dx must be positive", field='dx')
    report = error.to_dict()
    assert report['error_type'] == 'InvalidInputError'
    assert report['message'] == "dx must be positive"
    assert report['category'] == ErrorCategory.CONFIGURATION.value
    assert report['details']['field'] == 'dx'


@pytest.mark.parametrize("error_class,parent,category", [
    (InvalidParameterError, InvalidInputError, ErrorCategory.CONFIGURATION),
    (InvalidGridError, InvalidInputError, ErrorCategory.QUADRATURE),
    (NonResonanceError, ScatteringError, ErrorCategory.SCATTERING),
    (StabilityBoundError, CFLViolationError, ErrorCategory.PARABOLIC),
    (DomainTooSmallError, ProfileError, ErrorCategory.WAVES),
])
def test_hierarchy_and_categories(error_class, parent, category):
    error = error_class("failure")
    assert isinstance(error, parent)
    assert isinstance(error, ChemowaveError)
    assert error.category == category


def test_category_can_be_overridden():
    error = InvalidInputError("bad", category=ErrorCategory.OUTPUT, severity=ErrorSeverity.LOW)
    assert error.category == ErrorCategory.OUTPUT
    assert error.severity == ErrorSeverity.LOW


def test_aborted_run_records_time_and_step():
    error = SimulationAbortedError("stopped", time=1.5, step=30)
    assert error.details['time'] == 1.5
    assert error.details['step'] == 30


# ============================================================================
# Decorator
# ============================================================================

def test_handle_errors_returns_fallback():
    @handle_errors(fallback_value=-1.0)
    def failing():
        raise ProfileError("no profile")

    @handle_errors(fallback_value=[])
    def crashing():
        raise RuntimeError("boom")

    assert failing() == -1.0
    assert crashing() == []


def test_handle_errors_reraises():
    @handle_errors(reraise=True, log_traceback=False)
    def failing():
        raise ScatteringError("singular")

    with pytest.raises(ScatteringError):
        failing()


def test_handle_errors_passes_results_through():
    @handle_errors(fallback_value=None)
    def square(x):
        return x * x

    assert square(3) == 9
    assert square.__name__ == 'square'


# ============================================================================
# Validators
# ============================================================================

def test_validate_positive():
    InputValidator.validate_positive(0.1, 'dx')
    for value in (0.0, -1.0, float('nan'), float('inf')):
        with pytest.raises(InvalidInputError):
            InputValidator.validate_positive(value, 'dx')


def test_validate_non_negative():
    InputValidator.validate_non_negative(0.0, 'gamma')
    with pytest.raises(InvalidInputError):
        InputValidator.validate_non_negative(-1e-3, 'gamma')


def test_validate_choice():
    InputValidator.validate_choice('wb', ('wb', 'ts'), 'kinetic')
    with pytest.raises(InvalidInputError, match='kinetic must be one of wb, ts'):
        InputValidator.validate_choice('spectral', ('wb', 'ts'), 'kinetic')


@pytest.mark.parametrize("chi_m,chi_n", [(0.6, 0.4), (1.0, 0.0), (-0.1, 0.2), (0.2, 1.2)])
def test_validate_sensitivities_rejects(chi_m, chi_n):
    with pytest.raises(InvalidParameterError):
        InputValidator.validate_sensitivities(chi_m, chi_n)


def test_validate_sensitivities_accepts():
    InputValidator.validate_sensitivities(0.48, 0.44)
    InputValidator.validate_sensitivities(0.0, 0.0)


# ============================================================================
# Logging
# ============================================================================

def test_repeat_filter_throttles_warnings():
    repeat = RepeatFilter(max_repeats=3)
    passed = [repeat.filter(make_record("peak near wall")) for _ in range(5)]
    assert passed == [True, True, True, False, False]


def test_repeat_filter_marks_last_message():
    repeat = RepeatFilter(max_repeats=2)
    repeat.filter(make_record("singular matrix"))
    record = make_record("singular matrix")
    repeat.filter(record)
    assert record.msg.endswith("(further repeats suppressed)")


def test_repeat_filter_ignores_other_levels():
    repeat = RepeatFilter(max_repeats=1)
    for level in (logging.DEBUG, logging.INFO, logging.ERROR, logging.CRITICAL):
        assert all(repeat.filter(make_record("again", level)) for _ in range(3))


def test_repeat_filter_reset():
    repeat = RepeatFilter(max_repeats=1)
    assert repeat.filter(make_record("once"))
    assert not repeat.filter(make_record("once"))
    repeat.reset()
    assert repeat.filter(make_record("once"))


def test_get_logger_configuration(tmp_path):
    log = get_logger('chemowave.test', log_level='WARNING', log_dir=tmp_path)
    assert isinstance(log, SimulationLogger)
    assert log.logger.level == logging.WARNING
    assert not log.logger.propagate
    assert any(isinstance(f, RepeatFilter) for f in log.logger.filters)
    log.warning("written to file")
    for handler in log.logger.handlers:
        handler.flush()
    assert any(tmp_path.iterdir())


def test_get_logger_without_throttle():
    log = get_logger('chemowave.plain', throttle=False)
    assert not log.logger.filters
