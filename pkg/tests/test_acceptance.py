"""The acceptance suite: one printed PASS/FAIL line per criterion.

Lines are echoed live and repeated in the terminal summary.  Criterion 9
is marked slow; deselect it with ``-m "not slow"``.
"""

import os
import shutil
import subprocess
import sys

import pytest

from laguerre_riesz.lab.acceptance import CRITERIA, SLOW, criterion_11

SEED = 7
LINES = []


def _record(result, capsys):
    line = result.line()
    LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    return result


def _params():
    out = []
    for cid in CRITERIA:
        marks = [pytest.mark.slow] if cid in SLOW else []
        out.append(pytest.param(cid, marks=marks, id=f"criterion_{cid}"))
    return out


@pytest.mark.parametrize("cid", _params())
def test_criterion(cid, capsys):
    r = _record(CRITERIA[cid](SEED), capsys)
    assert r.passed, r.details


def _verify_cmd():
    exe = shutil.which("laguerre-riesz")
    return [exe] if exe else [sys.executable, "-m", "laguerre_riesz.lab.cli"]


def test_criterion_11_determinism(tmp_path, capsys):
    dirs = [tmp_path / "first", tmp_path / "second"]
    for d in dirs:
        res = subprocess.run(_verify_cmd() + ["verify", "--seed", str(SEED), "--out", str(d)],
                             capture_output=True, text=True, timeout=1200)
        assert (d / "samples.csv").exists(), res.stderr
    r = _record(criterion_11(dirs[0] / "samples.csv", dirs[1] / "samples.csv"), capsys)
    assert os.path.getsize(dirs[0] / "samples.csv") > 0
    assert r.passed
