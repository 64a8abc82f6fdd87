"""Acceptance criteria at their stated tolerances; one PASS/FAIL line per criterion.

Run directly (python tests/test_acceptance.py) or through pytest; under pytest the
lines are written past output capture so they appear in the log either way."""

import sys

import pytest

from mtlab.acceptance import CRITERIA


@pytest.mark.slow
@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, capsys):
    res = CRITERIA[cid]()
    with capsys.disabled():
        print("\n" + res.line())
        for c in res.checks:
            info = {k: v for k, v in c.items() if k not in ("name", "ok")}
            print(f"    [{'ok' if c['ok'] else 'FAIL'}] {c['name']} {info}")
    assert res.passed, res.line()


if __name__ == "__main__":
    results = [CRITERIA[i]() for i in sorted(CRITERIA)]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
