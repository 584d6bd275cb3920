import numpy as np
import pytest

import relustab
from relustab import RnnModel, hinf_norm

# Keep pytest from trying to collect these as test classes.
relustab.TestId.__test__ = False
relustab.TestResult.__test__ = False


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_stable_model(rng: np.random.Generator, n: int = 3,
                        m: int = 2, rho: float = 0.8) -> RnnModel:
    """A random model with spectral radius scaled to ``rho``."""
    A = rng.standard_normal((n, n))
    radius = max(abs(np.linalg.eigvals(A)))
    A = A * (rho / radius)
    return RnnModel(A, rng.standard_normal((n, m)),
                    rng.standard_normal((m, n)))


def random_contractive_model(rng: np.random.Generator, n: int = 3,
                             m: int = 2, rho: float = 0.3,
                             gain: float = 0.8) -> RnnModel:
    """A random model whose linear part has hinf norm about ``gain`` < 1,
    so the whole test battery is feasible on it."""
    model = random_stable_model(rng, n, m, rho)
    g = hinf_norm(model, tol=1e-3)
    return RnnModel(model.Lambda, model.W_in * (gain / g), model.W_out)
