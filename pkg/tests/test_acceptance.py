"""Acceptance suite: every criterion at its stated tolerance and time limit.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion.
"""
from __future__ import annotations

import pytest

from mupir import cli, verify

_RESULTS: dict[int, verify.Timed] = {}


def _line(number: int, title: str, passed: bool, detail: str) -> str:
    return f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title} ({detail})"


@pytest.mark.parametrize("number,limit", [(n, lim) for n, _, lim in verify.CHECKS],
                         ids=[f"criterion-{n}" for n, _, _ in verify.CHECKS])
def test_criterion(number, limit):
    timed = verify.run_check(number, seed=0)
    _RESULTS[number] = timed
    r = timed.result
    print("\n" + _line(number, r.title, timed.passed, f"{timed.seconds:.2f}s, limit {limit:g}s"))
    assert r.passed, r.details
    assert timed.in_time, f"took {timed.seconds:.2f}s, limit {limit}s"


def test_criterion_11_determinism(tmp_path, capsys):
    """Two verify-all runs with the same seed write byte-identical reports."""
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = [cli.main(["verify-all", "--seed", "0", "--out", str(p)]) for p in (a, b)]
    capsys.readouterr()
    same = a.read_bytes() == b.read_bytes()
    with capsys.disabled():
        print("\n" + _line(11, "verify-all determinism", same, f"exit codes {codes}"))
    assert same
    assert codes == [0, 0]
