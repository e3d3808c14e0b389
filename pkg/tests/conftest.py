import numpy as np
import pytest

from qharmonic import model

# walks reused across the suite, as {(k, l): weight}
WALKS = {
    "sym": {(1, 0): .25, (-1, 0): .25, (0, 1): .25, (0, -1): .25},
    "sep": {(1, 0): .5, (-1, 0): .125, (0, 1): .25, (0, -1): .125},
    "diag": {(1, 1): .25, (1, -1): .25, (-1, 1): .25, (-1, -1): .25},
    "all8": {(k, l): .125 for k in (-1, 0, 1) for l in (-1, 0, 1) if (k, l) != (0, 0)},
    "deg3": {(-1, 0): .2, (-1, -1): .1, (-1, 1): .1, (1, 0): .2, (0, 1): .2, (0, -1): .2},
    "drift": {(1, 1): .3, (1, 0): .1, (0, 1): .15, (-1, 0): .1, (0, -1): .15,
              (-1, -1): .1, (1, -1): .05, (-1, 1): .05},
}


def walk(name):
    return model.from_dict(WALKS[name])


@pytest.fixture
def sym():
    return walk("sym")


@pytest.fixture
def sep():
    return walk("sep")


def random_weights(rng, zero_drift=False):
    """Random valid weights; optionally re-balanced to zero drift."""
    while True:
        w = rng.random((3, 3))
        w[1, 1] = 0
        w[rng.random((3, 3)) < 0.2] = 0
        w[1, 1] = 0
        if zero_drift:
            # symmetrise so that every step has a mirror of equal weight
            w = 0.5 * (w + w[::-1, ::-1])
        if w.sum() == 0:
            continue
        w = w / w.sum()
        try:
            return model.validate(w)
        except Exception:
            continue


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
