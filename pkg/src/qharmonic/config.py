"""Named numerical tolerances.

Every tolerance used by the library lives in :class:`Tolerances`.  The
environment variable ``QH_TOL_OVERRIDE`` may hold a JSON object mapping field
names to replacement values, e.g. ``{"classify": 1e-7}``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

ENV_VAR = "QH_TOL_OVERRIDE"


@dataclass(frozen=True)
class Tolerances:
    weight_sum: float = 1e-12
    renormalize: float = 1e-9
    newton_gradient: float = 1e-10
    classify: float = 1e-9
    level: float = 1e-12
    tilt_level: float = 1e-10
    snap_imag: float = 1e-9
    # near-double roots of the discriminant split into a complex pair whose
    # imaginary part is O(sqrt(eps)); they are merged below this threshold
    merge_double: float = 1e-6
    degree3: float = 1e-14
    degenerate_leading: float = 1e-14
    quadrature: float = 1e-10
    round_trip: float = 1e-9
    realness: float = 1e-9
    derivative: float = 1e-8
    pole: float = 1e-10
    zero_derivative: float = 1e-13
    pole_collision: float = 1e-12
    coefficient_imag: float = 1e-9
    gluing: float = 1e-8
    harmonicity: float = 1e-6
    boundary: float = 1e-8
    growth: float = 1e-3
    proportional: float = 1e-6


def load_tolerances(env: dict | None = None) -> Tolerances:
    """Default tolerances with ``QH_TOL_OVERRIDE`` applied."""
    env = os.environ if env is None else env
    raw = env.get(ENV_VAR)
    if not raw:
        return Tolerances()
    overrides = json.loads(raw)
    known = {f.name for f in dataclasses.fields(Tolerances)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown tolerance names in {ENV_VAR}: {sorted(unknown)}")
    return Tolerances(**{k: float(v) for k, v in overrides.items()})


DEFAULT = Tolerances()
