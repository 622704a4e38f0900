import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from qfnsynth import SystemParams
from qfnsynth.serialize import system_from_dict

DATA = Path(__file__).resolve().parent.parent / "data"

ACCEPTANCE = {}


def random_unitary(rng, m):
    z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_system(rng, n, m, identity_S=True, scale=1.0):
    K = scale * (rng.normal(size=(m, 2 * n)) + 1j * rng.normal(size=(m, 2 * n)))
    A = scale * rng.normal(size=(2 * n, 2 * n))
    S = np.eye(m) if identity_S else random_unitary(rng, m)
    return SystemParams(S, K, A + A.T)


def random_passive(rng, n, m, identity_S=True):
    from qfnsynth.slh import from_passive_form
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Kt = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    S = np.eye(m) if identity_S else random_unitary(rng, m)
    return from_passive_form(X + X.conj().T, Kt, S)


@st.composite
def systems(draw, max_n=3, max_m=2, identity_S=False):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_system(np.random.default_rng(seed), n, m, identity_S=identity_S)


def load_example(name):
    return system_from_dict(json.loads((DATA / f"{name}.json").read_text()))


@pytest.fixture
def example1():
    return load_example("example1")


@pytest.fixture
def example2():
    return load_example("example2")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
