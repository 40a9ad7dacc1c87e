"""
The built-in systems with their known integrals and the reference data.

The expressions are stored as texts and parsed on construction.
"""
from __future__ import annotations

import dataclasses
import functools
import math
from typing import Callable, Mapping, Sequence

from noetherlab import sampling
from noetherlab.errors import ConfigurationError, ContactDegenerate, DomainError, UnknownSystem
from noetherlab.exprcore import Expression
from noetherlab.geometry import EPS_RHO, FieldValue, PhasePoint, SystemSpec

Guard = Callable[[PhasePoint], bool]
Reference = Callable[[SystemSpec, PhasePoint], FieldValue]


@dataclasses.dataclass(frozen=True)
class CatalogEntry:
    """
    A system with its domain: the sampling box, the hard guard of the domain,
    and the (narrower) guard of the well-conditioned sampling region.
    """
    name: str
    spec: SystemSpec
    box: tuple[tuple[float, float], ...]
    guard: Guard | None = None
    sampling_guard: Guard | None = None
    reference_symmetries: Mapping[str, Reference] = dataclasses.field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def known_integrals(self) -> Mapping[str, Expression]:
        return self.spec.integrals

    def admissible(self, x: PhasePoint) -> bool:
        guards = [g for g in (self.guard, self.sampling_guard) if g is not None]
        return all(g(x) for g in guards)

    def sample(self, count: int, seed: int = sampling.DEFAULT_SEED, rho_min: float | None = None,
               spec: SystemSpec | None = None) -> tuple[PhasePoint, ...]:
        return sampling.sample_points(spec or self.spec, count, seed, box=self.box,
                                      rho_min=rho_min, guard=self.admissible)

    def with_params(self, **overrides: float) -> CatalogEntry:
        return dataclasses.replace(self, spec=self.spec.with_params(**overrides))


def _box(n: int, q: tuple[float, float] = sampling.BOX, p: tuple[float, float] = sampling.BOX) \
        -> tuple[tuple[float, float], ...]:
    return (sampling.BOX,) + (q,) * n + (p,) * n


def _radius(x: PhasePoint) -> float:
    return math.hypot(*x.q)


def kepler_reference_symmetry(k: int, x: PhasePoint, mu: float = 1.0, eps_rho: float = EPS_RHO) -> FieldValue:
    """
    The symmetries of the Runge–Lenz components ``A1``, ``A2`` by their closed formulas.

    An independent oracle for the inverse construction on the Kepler problem.
    """
    if k not in (1, 2):
        raise ConfigurationError(f"The Runge–Lenz component must be 1 or 2, got {k}.")
    (q1, q2), (p1, p2) = x.q, x.p
    r = math.hypot(q1, q2)
    if r == 0:
        raise DomainError("the radius vanishes", 'sqrt(q1^2+q2^2)')
    rho = (p1 * p1 + p2 * p2) / 2 + mu / r
    if not abs(rho) > eps_rho:
        raise ContactDegenerate(rho)
    r3 = r ** 3
    if k == 1:
        tau = -(q1 * p2 ** 2 - q2 * p1 * p2 + mu * q1 / r) / rho
        xi = (tau * p1 - q2 * p2,
              tau * p2 + 2 * q1 * p2 - q2 * p1)
        eta = (-tau * mu * q1 / r3 - p2 ** 2 - mu * q1 ** 2 / r3 + mu / r,
               -tau * mu * q2 / r3 + p1 * p2 - mu * q1 * q2 / r3)
    else:
        tau = -(q2 * p1 ** 2 - q1 * p1 * p2 + mu * q2 / r) / rho
        xi = (tau * p1 + 2 * q2 * p1 - q1 * p2,
              tau * p2 - q1 * p1)
        eta = (-tau * mu * q1 / r3 + p1 * p2 - mu * q1 * q2 / r3,
               -tau * mu * q2 / r3 - p1 ** 2 - mu * q2 ** 2 / r3 + mu / r)
    return FieldValue(tau, xi, eta)


def _kepler_reference(k: int) -> Reference:
    def reference(sys: SystemSpec, x: PhasePoint) -> FieldValue:
        return kepler_reference_symmetry(k, x, sys.params['mu'])
    return reference


#
# The builtins:
#

def _free1d() -> CatalogEntry:
    return CatalogEntry(
        name='free1d',
        spec=SystemSpec.from_texts(1, 'p1^2/2', {
            'P': 'p1',
            'G': 'q1 - t*p1',
            'H': 'p1^2/2',
        }),
        box=_box(1),
        notes=('Free particle on a line: momentum, Galilean boost, energy.',),
    )


def _free2d() -> CatalogEntry:
    return CatalogEntry(
        name='free2d',
        spec=SystemSpec.from_texts(2, '(p1^2+p2^2)/2', {
            'P1': 'p1',
            'P2': 'p2',
            'L': 'q1*p2 - q2*p1',
            'H': '(p1^2+p2^2)/2',
        }),
        box=_box(2),
        notes=('Free particle in a plane: translations, rotation, energy.',),
    )


_OSCILLATOR_INTEGRALS = {
    'Q0': 'q1*cos(t) - p1*sin(t)',
    'P0': 'q1*sin(t) + p1*cos(t)',
}


def _harmonic() -> CatalogEntry:
    return CatalogEntry(
        name='harmonic',
        spec=SystemSpec.from_texts(1, '(p1^2+q1^2)/2', {
            'H': '(p1^2+q1^2)/2',
            **_OSCILLATOR_INTEGRALS,
        }),
        box=_box(1),
        notes=('Harmonic oscillator: energy and the time-dependent initial values.',
               'The elementary action vanishes on p1^2 = q1^2.'),
    )


def _kepler() -> CatalogEntry:
    return CatalogEntry(
        name='kepler',
        spec=SystemSpec.from_texts(2, '(p1^2+p2^2)/2 - mu/sqrt(q1^2+q2^2)', {
            'H': '(p1^2+p2^2)/2 - mu/sqrt(q1^2+q2^2)',
            'L': 'q1*p2 - q2*p1',
            'A1': 'q1*p2^2 - q2*p1*p2 - mu*q1/sqrt(q1^2+q2^2)',
            'A2': 'q2*p1^2 - q1*p1*p2 - mu*q2/sqrt(q1^2+q2^2)',
        }, params={'mu': 1.0}),
        box=_box(2),
        guard=lambda x: _radius(x) > 1e-6,
        sampling_guard=lambda x: _radius(x) > 0.1,
        reference_symmetries={'A1': _kepler_reference(1), 'A2': _kepler_reference(2)},
        notes=('Planar Kepler problem with the Runge–Lenz vector (A1, A2).',
               'The elementary action T − V is positive everywhere.'),
    )


def _geodesic_flat_quadratic() -> CatalogEntry:
    return CatalogEntry(
        name='geodesic_flat_quadratic',
        spec=SystemSpec.from_texts(2, '(p1^2+p2^2)/2', {
            'F': 'p1^2/2',
            'H': '(p1^2+p2^2)/2',
            'L': 'q1*p2 - q2*p1',
        }),
        box=_box(2),
        notes=('Geodesic flow of the flat plane with a quadratic integral; ρ = H.',),
    )


def _natural_shifted() -> CatalogEntry:
    return CatalogEntry(
        name='natural_shifted',
        spec=SystemSpec.from_texts(1, 'p1^2/2 + q1^2/2 - c', {
            'H': 'p1^2/2 + q1^2/2 - c',
            **_OSCILLATOR_INTEGRALS,
        }, params={'c': 2.0}),
        box=_box(1, q=(-1.0, 1.0), p=(-2.0, 2.0)),
        guard=lambda x: abs(x.q[0]) < 1 and abs(x.p[0]) < 2,
        notes=('Harmonic oscillator with the potential shifted down by c:',
               'the elementary action T − V + c is positive for |q1| < 1 when c ≥ 1/2.'),
    )


_BUILDERS: dict[str, Callable[[], CatalogEntry]] = {
    'free1d': _free1d,
    'free2d': _free2d,
    'harmonic': _harmonic,
    'kepler': _kepler,
    'geodesic_flat_quadratic': _geodesic_flat_quadratic,
    'natural_shifted': _natural_shifted,
}


def names() -> Sequence[str]:
    return tuple(_BUILDERS)


@functools.lru_cache(maxsize=None)
def builtin(name: str) -> CatalogEntry:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownSystem(name) from None
    return builder()
