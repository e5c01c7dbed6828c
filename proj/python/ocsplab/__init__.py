"""Python access to the ocsplab OCSP prediction and collision lab."""

from ._core import (
    OcspLabError,
    aggregate_dir,
    aggregate_texts,
    audit_mock,
    canonical_request,
    canonical_response,
    digest,
    expected_trials,
    one_decimal_percent,
    parse_report,
    risk_grade,
    run_demo,
    status_request,
)

__all__ = [
    "OcspLabError",
    "aggregate_dir",
    "aggregate_texts",
    "audit_mock",
    "canonical_request",
    "canonical_response",
    "digest",
    "expected_trials",
    "one_decimal_percent",
    "parse_report",
    "risk_grade",
    "run_demo",
    "status_request",
]
