"""Acceptance criteria, one test each.  Every test prints a pass/fail line."""

import json
import os
import subprocess
import sys

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))

CRITERIA = [
    (1, "Kummer-type table (rank, r, disc) for 8 groups", 10),
    (2, "Nikulin-type table (rank, r, disc) for 14 groups", 30),
    (3, "root coincidence on all 22 rows", 120),
    (4, "d(L) = r^2 d(M) on 22 rows and 100 random glues", None),
    (5, "corrections for D8' and D12", 1),
    (6, "divisibility code dimensions and length-15 certificate", 60),
    (7, "counterexample H for Z/2 has new roots", 5),
    (8, "NS classification over M_Z3 for d = 1..45", 10),
    (9, "primitive embeddings M_(Z3)^2 in K_Z3 and M_Z4 in K_Z4", 5),
    (10, "property suites", None),
]


def _run_job(n):
    code = f"import json, acceptance_jobs as j; print(json.dumps(j.c{n}()))"
    proc = subprocess.run([sys.executable, "-c", code], cwd=HERE, capture_output=True, text=True, timeout=900)
    if proc.returncode:
        return {"ok": False, "elapsed": 0.0, "detail": proc.stderr.strip().splitlines()[-1]}
    return json.loads(proc.stdout.strip().splitlines()[-1])


@pytest.mark.parametrize("n,title,limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(n, title, limit, capsys):
    res = _run_job(n)
    in_time = limit is None or res["elapsed"] < limit
    ok = res["ok"] and in_time
    budget = f" (limit {limit} s)" if limit is not None else ""
    line = (f"criterion {n}: {'PASS' if ok else 'FAIL'}: {title}: {res['detail']}; "
            f"{res['elapsed']:.2f} s{budget}")
    with capsys.disabled():
        print("\n" + line)
    assert res["ok"], res["detail"]
    assert in_time, f"took {res['elapsed']:.2f} s, limit {limit} s"
