import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_simplex(rng, c):
    """A random interior point of the c-simplex (Dirichlet(1,...,1))."""
    return rng.dirichlet(np.ones(c))


def fd_grad(loss_fn, h, step=1e-6):
    """Central finite differences of a scalar loss over a logit vector."""
    h = np.asarray(h, dtype=np.float64)
    grad = np.zeros_like(h)
    for i in range(h.size):
        hp, hm = h.copy(), h.copy()
        hp[i] += step
        hm[i] -= step
        grad[i] = (loss_fn(hp) - loss_fn(hm)) / (2 * step)
    return grad


def assert_grad_close(analytic, numeric, abs_tol=1e-5, rel_tol=1e-3):
    """The gradient-oracle tolerance used throughout: max(abs, rel)."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    err = np.abs(analytic - numeric)
    bound = np.maximum(abs_tol, rel_tol * np.abs(numeric))
    assert np.all(err <= bound), (
        f"gradient mismatch: max err {err.max():.3e}, "
        f"analytic {analytic}, numeric {numeric}"
    )
