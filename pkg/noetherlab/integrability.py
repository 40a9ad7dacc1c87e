"""
The hypotheses of the integrability by Noether symmetries, checked at sample points.

Given symmetries ``ζ1..ζm`` of which the first ``r`` are expected to commute
with all of them, the checks are: the commuting corrections ``ζ̃ = ζ − dt(ζ)·Z``
commute (and commute with Z), the Noether integrals are independent, and the
derivatives ``ζi(Jj)`` vanish (or are constant, for the weak symmetries).
Nothing here is a global certificate: every statement is about the sampled points.
"""
from __future__ import annotations

import dataclasses
import logging
from typing import Sequence, Union

import numpy as np

from noetherlab.errors import ConfigurationError, ContactDegenerate, DomainError
from noetherlab.exprcore import Expression
from noetherlab.geometry import FieldValue, PhasePoint, SystemSpec, characteristic_field
from noetherlab.noether import AdjustedSymmetry, CharacteristicSymmetry, SymmetryCandidate, \
                               integral_gradient, lie_bracket

logger = logging.getLogger(__name__)

SV_TOLERANCE = 1e-8
BRACKET_TOLERANCE = 1e-6
INVARIANCE_TOLERANCE = 1e-8

Integral = Union[Expression, SymmetryCandidate]


def commuting_adjust(sys: SystemSpec, zeta: SymmetryCandidate, x: PhasePoint) -> FieldValue:
    """``ζ − τ·Z`` with ``τ = dt(ζ)``; the result has no dt-component."""
    return AdjustedSymmetry(zeta).value(sys, x)


def _check_points(points: Sequence[PhasePoint]) -> None:
    if not points:
        raise ConfigurationError("At least one sample point is needed.")


@dataclasses.dataclass(frozen=True)
class CommutationReport:
    """
    The max-norms of the brackets of the adjusted fields, maximised over the points.

    ``matrix[i, j]`` is for ``[ζ̃i, ζ̃j]`` (i < r); ``characteristic[j]`` for ``[Z, ζ̃j]``.
    """
    matrix: np.ndarray
    characteristic: np.ndarray

    @property
    def worst(self) -> float:
        values = np.concatenate((self.matrix.ravel(), self.characteristic.ravel()))
        return float(np.max(values)) if values.size else 0.0


def commutation_report(sys: SystemSpec, symmetries: Sequence[SymmetryCandidate], r: int,
                       points: Sequence[PhasePoint]) -> CommutationReport:
    m = len(symmetries)
    if not 0 <= r <= m:
        raise ConfigurationError(f"The commuting count r={r} must be within 0..{m}.")
    _check_points(points)
    adjusted = [AdjustedSymmetry(zeta) for zeta in symmetries]
    z = CharacteristicSymmetry()
    matrix = np.zeros((r, m))
    characteristic = np.zeros(m)
    for x in points:
        for j in range(m):
            characteristic[j] = max(characteristic[j], lie_bracket(sys, z, adjusted[j], x).max_norm())
            for i in range(r):
                if i != j:
                    matrix[i, j] = max(matrix[i, j], lie_bracket(sys, adjusted[i], adjusted[j], x).max_norm())
    return CommutationReport(matrix, characteristic)


def _gradient(sys: SystemSpec, integral: Integral, x: PhasePoint) -> np.ndarray:
    if isinstance(integral, Expression):
        return sys.jet(integral, x, order=1).gradient
    return integral_gradient(sys, integral, x)


@dataclasses.dataclass(frozen=True)
class IndependenceResult:
    """The minimal rank over the points, with the per-point ranks and singular values."""
    rank: int
    ranks: tuple[int, ...]
    singular_values: tuple[tuple[float, ...], ...]


def numerical_rank(matrix: np.ndarray, sv_tol: float = SV_TOLERANCE) -> tuple[int, tuple[float, ...]]:
    """The count of singular values above ``sv_tol`` times the largest one."""
    if matrix.size == 0:
        return 0, ()
    values = np.linalg.svd(matrix, compute_uv=False)
    if values[0] == 0:
        return 0, tuple(float(v) for v in values)
    return int(np.sum(values > sv_tol * values[0])), tuple(float(v) for v in values)


def independence_rank(sys: SystemSpec, integrals: Sequence[Integral], points: Sequence[PhasePoint],
                      sv_tol: float = SV_TOLERANCE) -> IndependenceResult:
    """The rank of the differentials ``dJ1..dJm`` as ``m×(2n+1)`` matrices at the points."""
    _check_points(points)
    ranks, values = [], []
    for x in points:
        matrix = np.array([_gradient(sys, integral, x) for integral in integrals]).reshape(len(integrals), -1)
        rank, singular = numerical_rank(matrix, sv_tol)
        ranks.append(rank)
        values.append(singular)
    return IndependenceResult(min(ranks), tuple(ranks), tuple(values))


def field_rank(sys: SystemSpec, symmetries: Sequence[SymmetryCandidate], points: Sequence[PhasePoint],
               sv_tol: float = SV_TOLERANCE) -> IndependenceResult:
    """The rank of ``{Z, ζ1..ζm}`` as vectors at the points."""
    _check_points(points)
    ranks, values = [], []
    for x in points:
        rows = [characteristic_field(sys, x).vector] + [zeta.vector(sys, x) for zeta in symmetries]
        rank, singular = numerical_rank(np.array(rows), sv_tol)
        ranks.append(rank)
        values.append(singular)
    return IndependenceResult(min(ranks), tuple(ranks), tuple(values))


@dataclasses.dataclass(frozen=True)
class InvarianceResult:
    """
    The derivatives ``ζi(Jj)`` at every point: ``values[k, i, j]``.

    Strong symmetries must have them vanish; weak ones only constant.
    """
    values: np.ndarray
    strong: tuple[bool, ...]

    @property
    def mean(self) -> np.ndarray:
        return np.mean(self.values, axis=0)

    @property
    def deviation(self) -> np.ndarray:
        return np.std(self.values, axis=0)

    def passed(self, tolerance: float = INVARIANCE_TOLERANCE) -> bool:
        for i, strong in enumerate(self.strong):
            if np.any(self.deviation[i] > tolerance):
                return False
            if strong and np.any(np.abs(self.mean[i]) > tolerance):
                return False
        return True


def invariance_matrix(sys: SystemSpec, symmetries: Sequence[SymmetryCandidate], integrals: Sequence[Integral],
                      points: Sequence[PhasePoint]) -> InvarianceResult:
    _check_points(points)
    values = np.zeros((len(points), len(symmetries), len(integrals)))
    for k, x in enumerate(points):
        gradients = [_gradient(sys, integral, x) for integral in integrals]
        for i, zeta in enumerate(symmetries):
            v = zeta.vector(sys, x)
            for j, gradient in enumerate(gradients):
                values[k, i, j] = float(np.dot(gradient, v))
    strong = tuple(zeta.default_weak(sys).trivial for zeta in symmetries)
    return InvarianceResult(values, strong)


def gauge_asymmetry(sys: SystemSpec, symmetries: Sequence[SymmetryCandidate], gauges: Sequence[Expression],
                    points: Sequence[PhasePoint]) -> np.ndarray:
    """The measured ``ζi(fj) − ζj(fi)`` at every point: ``values[k, i, j]``. Reported only."""
    if len(gauges) != len(symmetries):
        raise ConfigurationError(f"Got {len(gauges)} gauge functions for {len(symmetries)} symmetries.")
    _check_points(points)
    m = len(symmetries)
    values = np.zeros((len(points), m, m))
    for k, x in enumerate(points):
        derivatives = np.array([[float(np.dot(sys.jet(f, x, order=1).gradient, zeta.vector(sys, x)))
                                 for f in gauges] for zeta in symmetries])
        values[k] = derivatives - derivatives.T
    return values


@dataclasses.dataclass(frozen=True)
class IntegrabilityReport:
    m: int
    r: int
    n: int
    commutation: CommutationReport
    independence: IndependenceResult
    invariance: InvarianceResult
    fields: IndependenceResult
    points: tuple[PhasePoint, ...]

    @property
    def dimension_condition(self) -> bool:
        """``2n = m + r``: the count of symmetries matches the dimension."""
        return 2 * self.n == self.m + self.r

    def passed(
            self,
            bracket_tolerance: float = BRACKET_TOLERANCE,
            invariance_tolerance: float = INVARIANCE_TOLERANCE,
    ) -> bool:
        return (self.commutation.worst <= bracket_tolerance and
                self.independence.rank == self.m and
                self.invariance.passed(invariance_tolerance))


def integrability_report(
        sys: SystemSpec,
        symmetries: Sequence[SymmetryCandidate],
        r: int,
        points: Sequence[PhasePoint],
        integrals: Sequence[Integral] | None = None,
        sv_tol: float = SV_TOLERANCE,
) -> IntegrabilityReport:
    """
    Check the hypotheses at the points.

    By default, the integrals are the Noether integrals of the symmetries.
    """
    integrals = list(symmetries) if integrals is None else list(integrals)
    commutation = commutation_report(sys, symmetries, r, points)
    logger.debug(f"Commutation: worst bracket {commutation.worst!r}.")
    independence = independence_rank(sys, integrals, points, sv_tol)
    logger.debug(f"Independence: rank {independence.rank} of {len(integrals)}.")
    invariance = invariance_matrix(sys, symmetries, integrals, points)
    fields = field_rank(sys, symmetries, points, sv_tol)
    return IntegrabilityReport(
        m=len(symmetries),
        r=r,
        n=sys.n,
        commutation=commutation,
        independence=independence,
        invariance=invariance,
        fields=fields,
        points=tuple(points),
    )


@dataclasses.dataclass(frozen=True)
class LevelSetSample:
    points: tuple[PhasePoint, ...]
    failures: int


def sample_level_set(
        sys: SystemSpec,
        integrals: Sequence[Expression],
        levels: Sequence[float],
        seed_point: PhasePoint,
        count: int,
        seed: int,
        spread: float = 0.1,
        iterations: int = 20,
        damping: float = 1.0,
        tol: float = 1e-10,
) -> LevelSetSample:
    """
    Sample the level set ``{J = c}`` near the seed point.

    Every draw is projected onto the level set by damped Gauss–Newton
    corrections; draws that do not converge are counted, not raised.
    """
    if len(integrals) != len(levels):
        raise ConfigurationError(f"Got {len(levels)} levels for {len(integrals)} integrals.")
    rng = np.random.default_rng(seed)
    target = np.asarray(levels, dtype=float)
    points: list[PhasePoint] = []
    failures = 0
    for _ in range(count):
        x = seed_point.vector + rng.normal(0.0, spread, seed_point.vector.shape)
        try:
            for _ in range(iterations):
                point = PhasePoint.from_vector(x)
                jets = [sys.jet(expr, point, order=1) for expr in integrals]
                defect = target - np.array([jet.value for jet in jets])
                if np.max(np.abs(defect)) <= tol * (1 + np.max(np.abs(target))):
                    points.append(point)
                    break
                gradient = np.array([jet.gradient for jet in jets])
                x = x + damping * np.linalg.lstsq(gradient, defect, rcond=None)[0]
            else:
                failures += 1
        except (DomainError, ContactDegenerate, np.linalg.LinAlgError):
            failures += 1
    if failures:
        logger.warning(f"Level-set projection failed for {failures} of {count} draws.")
    return LevelSetSample(tuple(points), failures)
