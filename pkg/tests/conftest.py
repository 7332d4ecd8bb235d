import numpy as np
import pytest

from fracweak.elliptic import assemble_operator, eigensolve
from fracweak.kernels import DistributedOrder, MultiTerm, VariableOrder


@pytest.fixture(scope="session")
def prob31():
    return assemble_operator(1, 31)


@pytest.fixture(scope="session")
def prob127():
    return assemble_operator(1, 127)


@pytest.fixture(scope="session")
def mode127(prob127):
    basis = eigensolve(prob127, 1)
    return basis.eigenvalues[0], basis.vectors[:, 0].copy()


@pytest.fixture(scope="session")
def kernels31():
    return {
        "const": VariableOrder.constant(0.5, 31),
        "dist": DistributedOrder.builtin("uniform"),
        "multi": MultiTerm((0.3, 0.7), (1.0, 1.0)),
    }


def rel(a, b):
    return float(np.linalg.norm(np.ravel(a) - np.ravel(b)) / np.linalg.norm(np.ravel(b)))


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
