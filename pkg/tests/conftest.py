import math

import numpy as np
import pytest
from hypothesis import settings

from holosim import calibration
from holosim.device import DetuningParams, ResonatorParams, SystemParams, TransmonParams
from holosim.units import khz, mhz

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

G_MHZ, DELTA_MHZ, ALPHA_MHZ = 65.0, 1000.0, 400.0


@pytest.fixture(scope="session")
def noisy_transmon():
    r = khz(10)
    return TransmonParams(mhz(ALPHA_MHZ), 3, r, r, r, r)


@pytest.fixture(scope="session")
def pair_params():
    r = khz(10)
    return SystemParams(
        TransmonParams(mhz(ALPHA_MHZ), 4, r, r, r, r),
        ResonatorParams((mhz(G_MHZ), mhz(G_MHZ)), 3, khz(10)),
        DetuningParams(mhz(DELTA_MHZ)),
    )


@pytest.fixture(scope="session")
def single_curve():
    return calibration.calibrate_omega(
        mhz(G_MHZ), calibration.default_grid(), mhz(DELTA_MHZ), mhz(ALPHA_MHZ)
    )


@pytest.fixture(scope="session")
def pair_curve():
    return calibration.calibrate_omega(
        mhz(G_MHZ), calibration.default_grid(), mhz(DELTA_MHZ), mhz(ALPHA_MHZ), model="pair"
    )


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_density(rng, n, rank=None):
    rank = rank or n
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


PI = math.pi


@pytest.fixture(scope="session")
def cyclic_two_qubit_run(pair_params, pair_curve):
    """Two-qubit gate at the cyclic duration for a 2pi x 377 MHz peak drive, with decoherence."""
    from holosim import lindblad

    T = lindblad.cyclic_duration(pair_curve, mhz(377))
    return lindblad.two_qubit_gate_run(pair_params, pair_curve, T)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
