import numpy as np
import pytest

from petzcirc import channels, codes
from petzcirc.petz import construct_code_petz


def random_unitary(d, rng):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d, rng, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_channel(d, n_kraus, rng):
    v = random_unitary(d * n_kraus, rng)[:, :d]
    return channels.KrausChannel(tuple(v[i * d:(i + 1) * d] for i in range(n_kraus)))


def opnorm(a):
    return np.linalg.norm(np.asarray(a), 2)


def bloch_sample(count=10):
    """Deterministic spread of logical states over the Bloch sphere."""
    k = np.arange(count) + 0.5
    theta = np.arccos(1 - 2 * k / count)
    phi = np.pi * (1 + 5**0.5) * k
    return [codes.logical_state(t, p) for t, p in zip(theta, phi)]


@pytest.fixture(scope="session")
def leung():
    return codes.leung_code()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_PETZ = {}


def ad_noise(gamma, n=4):
    return channels.tensor_power(channels.amplitude_damping(gamma), n)


def petz_ad(gamma):
    if gamma not in _PETZ:
        _PETZ[gamma] = construct_code_petz(codes.leung_code(), ad_noise(gamma))
    return _PETZ[gamma]


ACCEPTANCE_LINES = []


def report(number, ok, detail):
    """Record and print one acceptance verdict."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
