import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from twotype.model import TwoTypeModel, equal_split_types, sample_responses, sample_truth  # noqa: E402


def two_type_data(r1, r2, d=200, seed=0, prior=0.5):
    """Dense responses plus the model that generated them."""
    model = TwoTypeModel(np.vstack([r1, r2]), equal_split_types(d), sample_truth(d, prior, seed=seed), seed=seed + 1)
    return sample_responses(model), model


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
