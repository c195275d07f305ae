import os

import numpy as np
import pytest
from hypothesis import settings
from scipy.linalg import expm

from lindblad_pair.closed_form import ClosedFormParams
from lindblad_pair.dynamics import LindbladCouplings, OscillatorParams
from lindblad_pair.simon import SimonParams
from lindblad_pair.state_space import CovarianceState

settings.register_profile("ci", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

CASE_A = SimonParams(0.5, 0.5, 0.5, 0.5, 0.0, 0.0)
CASE_B = SimonParams(0.5, 0.5, 0.5, 0.5, 0.5, -0.5)


@pytest.fixture
def osc():
    return OscillatorParams(omega_a=1.0, omega_b=3.0, lam=1.0)


@pytest.fixture
def couplings(osc):
    return LindbladCouplings.from_damping(
        osc, 0.25, 0.25, h11=1.0, h22=2.0, h33=1.0, h44=4.0, h13r=1.0, h24r=1.0, h12r=1.0
    )


@pytest.fixture
def cf_params(osc, couplings):
    return ClosedFormParams.from_couplings(osc, couplings, CASE_A)


@pytest.fixture
def cf_params_b(osc, couplings):
    return ClosedFormParams.from_couplings(osc, couplings, CASE_B)


def random_valid_state(rng, scale=1.0, max_entry=1.5):
    """Random physical state: Sigma = S diag(nu, nu) S^T with S symplectic and nu >= 1/2.

    Draws are rejected until every coefficient is at most ``max_entry`` in size,
    which keeps finite-difference and quadrature oracles in their accurate range.
    """
    omega = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
    while True:
        n = rng.uniform(0.5, 0.5 + 0.4 * scale, size=2)
        z = rng.normal(scale=0.3 * scale, size=(4, 4))
        # exp of a Hamiltonian matrix is symplectic
        s = expm(omega @ (z + z.T))
        sigma = s @ np.diag([n[0], n[1], n[0], n[1]]) @ s.T
        # ordering (R1, R2, p1, p2): [[C, B^T], [B, A]]
        state = CovarianceState.from_blocks(sigma[2:, 2:], sigma[2:, :2], sigma[:2, :2])
        if np.abs(state.as_array()).max() <= max_entry:
            return state
