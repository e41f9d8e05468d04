from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from qent.physics import ScenarioParams
from qent.spectrum import spectrum_for

settings.register_profile(
    "qent", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("qent")

# reference scenario: gamma = 1, Delta = 10, Omega = 1, delta = 0.01, eta = 0.001
FIG2 = ScenarioParams(gamma=1.0, epsilon=1.0, omega=1.0, delta_big=10.0, delta_rel=0.01, eta=1e-3)


@pytest.fixture(scope="session")
def fig2():
    return FIG2


@pytest.fixture(scope="session")
def fig2_spectrum():
    return spectrum_for(FIG2)
