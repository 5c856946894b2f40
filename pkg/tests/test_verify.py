import pytest

from zslearn import format_report, verify_suite


def test_fast_suite_green():
    results = verify_suite("fast")
    failing = [r for r in results if not r.passed]
    assert not failing, format_report(failing)
    assert len(results) == 15


def test_full_suite_green():
    results = verify_suite("full")
    failing = [r for r in results if not r.passed]
    assert not failing, format_report(failing)
    assert len(results) == 25


def test_unknown_level_rejected():
    with pytest.raises(ValueError):
        verify_suite("medium")


def test_report_formatting():
    results = verify_suite("fast")
    text = format_report(results)
    assert "PASS" in text
    assert text.strip().endswith("checks passed")
