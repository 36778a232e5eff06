import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = sorted((Path(__file__).resolve().parent.parent / "scripts").glob("*.py"))


@pytest.mark.parametrize("script", SCRIPTS, ids=lambda p: p.stem)
def test_script_help(script):
    proc = subprocess.run([sys.executable, str(script), "--help"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "usage" in proc.stdout


def test_rule_ranking_small_run():
    script = SCRIPTS[0].parent / "rule_ranking.py"
    proc = subprocess.run([sys.executable, str(script), "--seeds", "1", "--replications", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "median final static regret" in proc.stdout
