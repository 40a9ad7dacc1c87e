"""
Trajectories of the canonical equations and of symmetry fields.

Integration is the classical fixed-step 4th-order Runge–Kutta scheme over
the whole state ``(t, q, p)``, so that the same stepping serves both the
characteristic field Z (where ``dt(Z) = 1``) and arbitrary symmetry fields.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from typing import Callable, Sequence, TextIO, Union

import numpy as np

from noetherlab import exprcore
from noetherlab.errors import ConfigurationError, DomainError
from noetherlab.exprcore import Expression
from noetherlab.geometry import FieldValue, PhasePoint, SystemSpec, characteristic_field, \
                                contact_form, is_horizontal
from noetherlab.noether import SymmetryCandidate, kernel_membership

logger = logging.getLogger(__name__)

SYMMETRY_STEPS = 16  # per sample, when mapping trajectories through symmetry flows

Scalar = Union[Expression, Callable[[PhasePoint], float]]


@dataclasses.dataclass(frozen=True)
class Trajectory:
    """
    A discrete curve: a read-only ``(k, 2n+1)`` array of samples.

    The step is the uniform step of the curve parameter (time for the
    characteristic curves, ``s`` for the symmetry flows; negative if backwards).
    """
    states: np.ndarray
    step: float
    generator: str = 'characteristic'

    def __post_init__(self) -> None:
        states = np.array(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 2 or states.shape[1] % 2 == 0:
            raise ConfigurationError(f"A trajectory needs ≥2 samples of 2n+1 coordinates, "
                                     f"got shape {states.shape}.")
        states.setflags(write=False)
        object.__setattr__(self, 'states', states)

    @classmethod
    def from_states(cls, states: Sequence[Sequence[float]] | np.ndarray, step: float,
                    generator: str = 'curve') -> Trajectory:
        return cls(np.asarray(states, dtype=float), step, generator)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def n(self) -> int:
        return (self.states.shape[1] - 1) // 2

    @property
    def samples(self) -> tuple[PhasePoint, ...]:
        return tuple(PhasePoint.from_vector(row) for row in self.states)

    @property
    def initial(self) -> PhasePoint:
        return PhasePoint.from_vector(self.states[0])

    @property
    def final(self) -> PhasePoint:
        return PhasePoint.from_vector(self.states[-1])

    @property
    def times(self) -> np.ndarray:
        return self.states[:, 0]

    def header(self) -> list[str]:
        return ['t'] + [f"q{i}" for i in range(1, self.n + 1)] + [f"p{i}" for i in range(1, self.n + 1)]

    def to_csv(self, stream: TextIO) -> None:
        """Write the samples with a ``t,q1..qn,p1..pn`` header, floats at 17 significant digits."""
        stream.write(','.join(self.header()) + '\n')
        for row in self.states:
            stream.write(','.join(f"{value:.17g}" for value in row) + '\n')


def _grid(length: float, step: float) -> tuple[int, float]:
    """The number of steps and the uniform step that ends exactly at the length."""
    if not step > 0:
        raise ConfigurationError(f"The step must be positive, got {step}.")
    if not math.isfinite(length) or length < 0:
        raise ConfigurationError(f"The integration length must be non-negative, got {length}.")
    count = round(length / step)
    if count < 1 or abs(count * step - length) > 1e-9 * max(length, step):
        count = max(1, math.ceil(length / step))
    return count, length / count


def _rk4(fn: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, h: float, count: int) -> np.ndarray:
    states = np.empty((count + 1, len(x0)))
    states[0] = x0
    x = x0
    for k in range(count):
        try:
            k1 = fn(x)
            k2 = fn(x + 0.5 * h * k1)
            k3 = fn(x + 0.5 * h * k2)
            k4 = fn(x + h * k3)
        except DomainError as e:
            raise e.at_index(k) from e
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = x
    return states


def integrate_characteristic(sys: SystemSpec, x0: PhasePoint, duration: float, step: float) -> Trajectory:
    """
    Integrate ``ṫ = 1, q̇ = ∂H/∂p, ṗ = −∂H/∂q`` from the point for the duration.

    If the duration is not a multiple of the step, the step is shrunk so that
    the grid stays uniform and ends exactly at the duration. The times are
    ``t0 + k·step``, not accumulated.
    """
    if x0.n != sys.n:
        raise ConfigurationError(f"The point has n={x0.n}, the system has n={sys.n}.")
    if not duration > 0:
        raise ConfigurationError(f"The duration must be positive, got {duration}.")
    count, h = _grid(duration, step)
    if h != step:
        logger.debug(f"Step {step!r} shrunk to {h!r} to fit the duration {duration!r}.")
    logger.debug(f"Integrating the characteristic field: {count} steps of {h!r}.")

    def fn(x: np.ndarray) -> np.ndarray:
        return characteristic_field(sys, PhasePoint.from_vector(x)).vector

    states = _rk4(fn, x0.vector, h, count)
    states[:, 0] = x0.t + h * np.arange(count + 1)
    return Trajectory(states, h, 'characteristic')


def flow_symmetry(sys: SystemSpec, zeta: SymmetryCandidate, x0: PhasePoint, s: float, step: float) -> Trajectory:
    """Integrate ``dx/ds = ζ(x)`` from the point for the parameter length s (negative: backwards)."""
    if x0.n != sys.n:
        raise ConfigurationError(f"The point has n={x0.n}, the system has n={sys.n}.")
    count, h = _grid(abs(s), step)
    h = math.copysign(h, s)
    logger.debug(f"Integrating the {zeta.tag} symmetry field: {count} steps of {h!r}.")
    states = _rk4(lambda x: zeta.vector(sys, PhasePoint.from_vector(x)), x0.vector, h, count)
    return Trajectory(states, h, f"symmetry({zeta.tag})")


def _scalar(fn: Scalar, params: dict[str, float] | None) -> Callable[[PhasePoint], float]:
    if isinstance(fn, Expression):
        expr = fn
        return lambda x: exprcore.evaluate(expr, x, params)
    return fn


def conservation_drift(fn: Scalar, traj: Trajectory, params: dict[str, float] | None = None) -> float:
    """The largest deviation of the function from its initial value along the samples."""
    scalar = _scalar(fn, params)
    values = []
    for index, sample in enumerate(traj.samples):
        try:
            values.append(scalar(sample))
        except DomainError as e:
            raise e.at_index(index) from e
    return float(np.max(np.abs(np.array(values) - values[0])))


def action_integral(sys: SystemSpec, traj: Trajectory) -> float:
    """The trapezoidal ``∫ p dq − H dt + β`` over the consecutive samples."""
    if traj.n != sys.n:
        raise ConfigurationError(f"The trajectory has n={traj.n}, the system has n={sys.n}.")
    forms = np.array([contact_form(sys, sample).vector for sample in traj.samples])
    increments = np.diff(traj.states, axis=0)
    return float(np.sum(0.5 * (forms[:-1] + forms[1:]) * increments))


def image_curve(sys: SystemSpec, zeta: SymmetryCandidate, traj: Trajectory, s: float,
                step: float | None = None) -> Trajectory:
    """The samples mapped through the flow of ζ by the parameter s."""
    if s == 0:
        return Trajectory(traj.states, traj.step, 'symmetry-image')
    step = abs(s) / SYMMETRY_STEPS if step is None else step
    images = [flow_symmetry(sys, zeta, sample, s, step).states[-1] for sample in traj.samples]
    return Trajectory(np.array(images), traj.step, 'symmetry-image')


def permutation_check(sys: SystemSpec, zeta: SymmetryCandidate, traj: Trajectory, s: float,
                      step: float | None = None) -> float:
    """
    How far the image of a characteristic curve is from a characteristic curve.

    The tangents of the image curve are taken by the centred five-point stencil
    at the interior samples (two samples at each end are excluded), and their
    ``i_v dα`` is measured relative to the tangent itself.
    """
    if len(traj) < 5:
        raise ConfigurationError(f"The permutation check needs ≥5 samples, got {len(traj)}.")
    image = image_curve(sys, zeta, traj, s, step)
    x, h = image.states, traj.step
    worst = 0.0
    for k in range(2, len(x) - 2):
        tangent = (-x[k + 2] + 8 * x[k + 1] - 8 * x[k - 1] + x[k - 2]) / (12 * h)
        v = FieldValue.from_vector(tangent)
        norm = v.max_norm()
        if norm > 0:
            worst = max(worst, kernel_membership(sys, v, PhasePoint.from_vector(x[k])) / norm)
    return worst


def bump_profile(traj: Trajectory, direction: FieldValue | Sequence[float] | np.ndarray) -> np.ndarray:
    """The variation ``sin(πθ)·direction`` over the samples; exactly zero at both ends."""
    vector = direction.vector if isinstance(direction, FieldValue) else np.asarray(direction, dtype=float)
    if vector.shape != (traj.states.shape[1],):
        raise ConfigurationError(f"The direction has shape {vector.shape}, "
                                 f"the trajectory samples have {traj.states.shape[1]} coordinates.")
    theta = np.linspace(0.0, 1.0, len(traj))
    weights = np.sin(np.pi * theta)
    weights[0] = weights[-1] = 0.0
    return np.outer(weights, vector)


@dataclasses.dataclass(frozen=True)
class ProbeResult:
    """The actions of the varied curves, with the fitted ``action ≈ c + slope·a + curvature·a²``."""
    pairs: tuple[tuple[float, float], ...]
    slope: float
    curvature: float


def stationarity_probe(sys: SystemSpec, traj: Trajectory, profile: np.ndarray,
                       amplitudes: Sequence[float], tol: float = 1e-9) -> ProbeResult:
    """
    Vary the curve by ``amplitude·profile`` and recompute the action for each amplitude.

    The profile must vanish at both ends or be horizontal there.
    For the characteristic curves, the fitted slope at zero amplitude vanishes.
    """
    profile = np.asarray(profile, dtype=float)
    if profile.shape != traj.states.shape:
        raise ConfigurationError(f"The profile has shape {profile.shape}, "
                                 f"the trajectory has {traj.states.shape}.")
    for index in (0, -1):
        end = profile[index]
        if np.any(end != 0.0):
            point = PhasePoint.from_vector(traj.states[index])
            if not is_horizontal(sys, FieldValue.from_vector(end), point, tol).horizontal:
                raise ConfigurationError("The variation is neither vanishing nor horizontal at the ends.")
    if len(set(amplitudes)) < 3:
        raise ConfigurationError("The probe needs at least 3 distinct amplitudes.")

    pairs = []
    for amplitude in amplitudes:
        varied = Trajectory(traj.states + amplitude * profile, traj.step, 'variation')
        pairs.append((float(amplitude), action_integral(sys, varied)))
    curvature, slope, _ = np.polyfit([a for a, _ in pairs], [s for _, s in pairs], 2)
    return ProbeResult(tuple(pairs), float(slope), float(curvature))
