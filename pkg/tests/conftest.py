import numpy as np
import pytest

from siqnet.params import ModelParams

PROB_FIELDS = ("v", "lam", "p_q", "gamma_t", "gamma_q", "sigma_v", "sigma_n")


def random_params(rng: np.random.Generator, size: int, **fixed) -> ModelParams:
    """Vectorized draw: probabilities U[0,1], theta U[0,0.99], beta log-uniform on [1e-3, 1]."""
    fields = {f: rng.uniform(0.0, 1.0, size) for f in PROB_FIELDS}
    fields["theta"] = rng.uniform(0.0, 0.99, size)
    fields["beta"] = np.exp(rng.uniform(np.log(1e-3), 0.0, size))
    fields["tau"] = rng.uniform(0.0, 1.0, size)
    fields.update(fixed)
    return ModelParams(**fields)


def scalar_draws(rng: np.random.Generator, count: int, **fixed):
    batch = random_params(rng, count, **fixed)
    for k in range(count):
        yield ModelParams(**{f: (np.asarray(getattr(batch, f)).ravel()[k]
                                 if np.ndim(getattr(batch, f)) else getattr(batch, f))
                             for f in ("v", "lam", "p_q", "beta", "gamma_t", "gamma_q", "tau",
                                       "theta", "sigma_v", "sigma_n")})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
