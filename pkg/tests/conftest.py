import json
import subprocess
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
_LINES = []


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def selftest_report(tmp_path_factory):
    """Run ``benchmark --selftest`` once through the CLI and return its JSON report."""
    out = tmp_path_factory.mktemp("selftest") / "report.json"
    proc = subprocess.run([sys.executable, "-m", "gausscauchy", "benchmark", "--selftest",
                           "--json", str(out)], capture_output=True, text=True)
    if not out.exists():
        pytest.fail(f"self-test produced no report (exit {proc.returncode}):\n{proc.stderr}")
    report = json.loads(out.read_text())
    report["exit_code"] = proc.returncode
    report["stdout"] = proc.stdout
    return report


def record_line(line: str) -> None:
    _LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0].split()[0])):
            terminalreporter.write_line(line)
