import math
from pathlib import Path

import numpy as np
import pytest

from rdsthermo.core import BaseSystem, RandomSFT
from rdsthermo.potentials import Additive, MatrixCocycle, Zero, table_from_exp

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "rdsthermo" / "fixtures"
SHIPPED = ["full2_zero", "bernoulli_log2", "s2_goldmean", "diag_cocycle"]

LOG2, LOG3 = math.log(2), math.log(3)
GOLDEN = [[1, 1], [1, 0]]


def full(a=2):
    return RandomSFT.full_shift(a)


def s2():
    base = BaseSystem([1, 0], [0.5, 0.5])
    return RandomSFT(base, 2, np.array([np.ones((2, 2)), GOLDEN], dtype=np.uint8))


def golden():
    return RandomSFT(BaseSystem([0], [1.0]), 2, np.array([GOLDEN], dtype=np.uint8))


def bern_log2(sys=None):
    sys = sys or full()
    return Additive(sys, 1, table_from_exp([[1, 2]] * sys.m))


def diag(sys=None):
    sys = sys or full()
    M = np.array([np.diag([2.0, 1.0]), np.diag([1.0, 3.0])])
    return MatrixCocycle(sys, np.broadcast_to(M, (sys.m, 2, 2, 2)).copy())


def zero_cocycle(sys=None):
    sys = sys or full()
    return MatrixCocycle(sys, np.zeros((sys.m, 2, 2, 2)))


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / f"{name}.json"


def case(name):
    """``(system, potential)`` for one of the shipped fixtures."""
    sys = s2() if name == "s2_goldmean" else full()
    phi = {"full2_zero": Zero, "s2_goldmean": Zero, "bernoulli_log2": bern_log2, "diag_cocycle": diag}[name]
    return sys, phi(sys)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
