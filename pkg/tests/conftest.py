import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctspline import gram_matrix
from ctspline.experiment import DemoSpec, generate_data, paper_system, paper_times


@pytest.fixture(scope="session")
def model():
    return paper_system()


@pytest.fixture(scope="session")
def gram(model):
    return gram_matrix(model, paper_times())


@pytest.fixture(scope="session")
def demo_samples():
    return generate_data(DemoSpec())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
