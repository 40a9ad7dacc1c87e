"""
Seeded sampling of the points of the extended phase space, and the point syntax.
"""
from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from noetherlab import exprcore
from noetherlab.errors import ConfigurationError, ContactDegenerate, DomainError
from noetherlab.geometry import PhasePoint, SystemSpec, perturbed_elementary_action

logger = logging.getLogger(__name__)

BOX = (-2.0, 2.0)
MAX_TRIES = 100
DEFAULT_SEED = 20190425

Guard = Callable[[PhasePoint], bool]


def sample_points(
        sys: SystemSpec,
        count: int,
        seed: int = DEFAULT_SEED,
        *,
        box: tuple[float, float] | Sequence[tuple[float, float]] = BOX,
        rho_min: float | None = None,
        guard: Guard | None = None,
        max_tries: int = MAX_TRIES,
) -> tuple[PhasePoint, ...]:
    """
    Draw points uniformly in the box, keeping only the admissible ones.

    A draw is rejected if H or any of the system's integrals is undefined
    there, if the guard rejects it, or if ``|ρ| ≤ rho_min``. The box is either
    one interval for all coordinates or one interval per coordinate.
    Deterministic given the seed.
    """
    if count < 0:
        raise ConfigurationError(f"The sample count must be non-negative, got {count}.")
    if max_tries < 1:
        raise ConfigurationError(f"The number of tries must be positive, got {max_tries}.")
    size = 2 * sys.n + 1
    bounds = np.array([box] * size if np.ndim(box) == 1 else box, dtype=float)
    if bounds.shape != (size, 2) or np.any(bounds[:, 0] > bounds[:, 1]):
        raise ConfigurationError(f"Invalid sampling box: {box!r}.")

    rng = np.random.default_rng(seed)
    points: list[PhasePoint] = []
    retries = 0
    for index in range(count):
        for attempt in range(max_tries):
            point = PhasePoint.from_vector(rng.uniform(bounds[:, 0], bounds[:, 1]))
            if _admissible(sys, point, rho_min, guard):
                points.append(point)
                retries += attempt
                break
        else:
            raise ConfigurationError(f"Could not sample point #{index} of {sys.n}-dimensional "
                                     f"system in {max_tries} tries.")
    if count and retries > count * max_tries // 10:
        logger.warning(f"Sampling needed {retries} retries for {count} points.")
    else:
        logger.debug(f"Sampled {count} points with {retries} retries (seed {seed}).")
    return tuple(points)


def _admissible(sys: SystemSpec, point: PhasePoint, rho_min: float | None, guard: Guard | None) -> bool:
    try:
        if guard is not None and not guard(point):
            return False
        for expr in (sys.hamiltonian, *sys.integrals.values()):
            exprcore.eval_jet(expr, point, sys.params, order=2)
        if rho_min is not None and not abs(perturbed_elementary_action(sys, point)) > rho_min:
            return False
    except (DomainError, ContactDegenerate):
        return False
    return True


def parse_point(text: str, n: int) -> PhasePoint:
    """Parse the comma-separated ``t,q1..qn,p1..pn``."""
    parts = [part.strip() for part in text.split(',')]
    if len(parts) != 2 * n + 1:
        raise ConfigurationError(f"Expected {2 * n + 1} comma-separated coordinates "
                                 f"for n={n}, got {len(parts)}: {text!r}.")
    try:
        values = [float(part) for part in parts]
    except ValueError as e:
        raise ConfigurationError(f"Malformed point {text!r}: {e}") from e
    return PhasePoint.from_vector(values)
