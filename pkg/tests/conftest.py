import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mint_eval import _backend  # noqa: E402

BACKENDS = ["python"] + (["compiled"] if _backend.compiled_available() else [])

# acceptance lines collected by test_acceptance and echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
