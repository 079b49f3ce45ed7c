import numpy as np
import pytest

from spinpoint import (BodyState, GainSet, PlantParams, ReferenceSample,
                       antipodal_frame, assemble_A, classify_equilibrium,
                       constraint_row, eig6)
from spinpoint.geometry import E3


@pytest.fixture(scope="session")
def gains():
    return GainSet()  # lam 25e6, eta 12e3, gamma 500, spin 1000 rad/s


@pytest.fixture(scope="session")
def plant():
    return PlantParams()


@pytest.fixture(scope="session")
def static_ref(gains):
    return ReferenceSample.static_pointing(np.eye(3), gains.spin_rate)


@pytest.fixture(scope="session")
def desired_state(static_ref):
    return BodyState(R=static_ref.R_d.copy(), w=static_ref.w_d.copy())


@pytest.fixture(scope="session")
def antipodal_state(static_ref):
    return BodyState(R=antipodal_frame(static_ref.R_d), w=-static_ref.w_d)


@pytest.fixture(scope="session")
def es_desired(desired_state, static_ref, gains):
    lin = assemble_A(desired_state, static_ref, gains)
    return classify_equilibrium(eig6(lin.A), constraint_row(desired_state.q))


@pytest.fixture(scope="session")
def es_antipodal(antipodal_state, static_ref, gains):
    lin = assemble_A(antipodal_state, static_ref, gains)
    return classify_equilibrium(eig6(lin.A), constraint_row(antipodal_state.q))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
