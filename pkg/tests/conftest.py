import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import settings

from capx.severity import Regime, Severity, TailIndexInfo

settings.register_profile("capx", deadline=None, max_examples=60)
settings.load_profile("capx")


@dataclass(frozen=True)
class UnitLoss(Severity):
    """Every loss equals 1, so the annual loss is the claim count."""

    def logpdf(self, x):
        return np.where(np.asarray(x) == 1.0, 0.0, -np.inf)

    def logsf(self, x):
        return np.where(np.asarray(x) < 1.0, 0.0, -np.inf)

    def logcdf(self, x):
        return np.where(np.asarray(x) < 1.0, -np.inf, 0.0)

    def mean(self):
        return 1.0

    def tail_info(self):
        return TailIndexInfo(Regime.LIGHT_TAIL, True)

    def sample(self, rng, size=None):
        return np.ones(size) if size is not None else 1.0


@pytest.fixture
def unit_loss():
    return UnitLoss()


def binomial_se(p, n):
    return math.sqrt(p * (1.0 - p) / n)


ACCEPTANCE_LINES = []


def record_criterion(label, passed, detail):
    """Log one acceptance line and return ``passed`` for the caller to assert."""
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
