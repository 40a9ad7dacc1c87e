"""
Noether symmetries: the inverse construction from an integral, the symmetry
conditions, contact Hamiltonian fields, and the Lie brackets.

A symmetry candidate is a vector field on the extended phase space that can
be evaluated at a point (`SymmetryCandidate.value`) together with its
Jacobian matrix ``∂ζ_i/∂x_k`` over ``x = (t, q1..qn, p1..pn)``
(`SymmetryCandidate.jacobian`). Candidates with a closed form carry exact
Jacobians from the second-order jets; closed-over evaluators are differenced.
"""
from __future__ import annotations

import abc
import dataclasses
from typing import Callable, NamedTuple, Sequence

import numpy as np

from noetherlab import exprcore, math
from noetherlab.errors import ConfigurationError, ContactDegenerate
from noetherlab.exprcore import Expression
from noetherlab.geometry import EPS_RHO, FieldValue, OneFormValue, Perturbation, PhasePoint, \
                                SystemSpec, characteristic_field, dpc_contract

BRACKET_STEP = 1e-5


@dataclasses.dataclass(frozen=True)
class WeakData:
    """
    The data ``(β, f)`` of a weak symmetry: ``L_ζ(α + β) = df``.

    Both parts are optional; the empty data describes a strong symmetry.
    """
    beta: Perturbation | None = None
    gauge: Expression | None = None

    @property
    def trivial(self) -> bool:
        return self.beta is None and self.gauge is None

    def beta_jet(self, sys: SystemSpec, x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
        size = 2 * sys.n + 1
        if self.beta is None:
            return np.zeros(size), np.zeros((size, size))
        return self.beta.jet(x, sys.params, order=2)

    def gauge_jet(self, sys: SystemSpec, x: PhasePoint) -> tuple[float, np.ndarray]:
        if self.gauge is None:
            return 0.0, np.zeros(2 * sys.n + 1)
        jet = sys.jet(self.gauge, x, order=1)
        return jet.value, jet.gradient


STRONG = WeakData()


def system_weak(sys: SystemSpec) -> WeakData:
    """The weak data of symmetries built against the system's own ``α + β``."""
    return WeakData(beta=sys.beta)


#
# Jets of the ingredients, as arrays over the coordinates:
#

class _Ingredients(NamedTuple):
    h: float
    grad: np.ndarray     # ∇H
    hess: np.ndarray     # ∇²H
    w: np.ndarray        # the coefficients of β
    dw: np.ndarray       # their derivatives
    p: np.ndarray


def _ingredients(sys: SystemSpec, x: PhasePoint, beta: bool = True) -> _Ingredients:
    if x.n != sys.n:
        raise ConfigurationError(f"The point has n={x.n}, the system has n={sys.n}.")
    jet = sys.hamiltonian_jet(x, order=2)
    size = 2 * sys.n + 1
    if beta:
        w, dw = sys.beta_jet(x, order=2)
    else:
        w, dw = np.zeros(size), np.zeros((size, size))
    return _Ingredients(jet.value, jet.gradient, jet.hessian, w, dw, np.array(x.p))


def _blocks(n: int) -> tuple[slice, slice]:
    return slice(1, n + 1), slice(n + 1, 2 * n + 1)


def _field_vector(g: _Ingredients, n: int) -> np.ndarray:
    """Z as a vector: ``(1, H_p, −H_q)``."""
    Q, P = _blocks(n)
    return np.concatenate(([1.0], g.grad[P], -g.grad[Q]))


def _field_jacobian(g: _Ingredients, n: int) -> np.ndarray:
    Q, P = _blocks(n)
    size = 2 * n + 1
    return np.vstack((np.zeros((1, size)), g.hess[P, :], -g.hess[Q, :]))


def _normaliser(g: _Ingredients, n: int) -> tuple[float, np.ndarray]:
    """``ρ_β = (p + b)·H_p − H + a − c·H_q`` and its gradient."""
    Q, P = _blocks(n)
    u = g.p + g.w[Q]
    c = g.w[P]
    rho = float(np.dot(u, g.grad[P]) - g.h + g.w[0] - np.dot(c, g.grad[Q]))
    du = g.dw[Q, :].copy()
    du[:, P] += np.eye(n)
    drho = (du.T @ g.grad[P] + g.hess[P, :].T @ u - g.grad + g.dw[0, :]
            - g.dw[P, :].T @ g.grad[Q] - g.hess[Q, :].T @ c)
    return rho, drho


def _guard(rho: float, eps_rho: float) -> None:
    if not abs(rho) > eps_rho:
        raise ContactDegenerate(rho)


def _inverse(sys: SystemSpec, integral: Expression, x: PhasePoint, eps_rho: float,
             with_jacobian: bool) -> tuple[np.ndarray, np.ndarray | None, float]:
    """The derived field ``τZ + (0, F_p, −F_q)``; optionally its Jacobian; and ``Z(F)``."""
    n = sys.n
    Q, P = _blocks(n)
    g = _ingredients(sys, x)
    f = sys.jet(integral, x, order=2 if with_jacobian else 1)
    rho, drho = _normaliser(g, n)
    _guard(rho, eps_rho)
    u = g.p + g.w[Q]
    c = g.w[P]
    numerator = f.value - float(np.dot(u, f.dp)) + float(np.dot(c, f.dq))
    tau = numerator / rho
    field = np.concatenate(([tau], tau * g.grad[P] + f.dp, -tau * g.grad[Q] - f.dq))
    z_of_f = float(np.dot(_field_vector(g, n), f.gradient))
    if not with_jacobian:
        return field, None, z_of_f

    du = g.dw[Q, :].copy()
    du[:, P] += np.eye(n)
    dnumerator = (f.gradient - du.T @ f.dp - f.hessian[P, :].T @ u
                  + g.dw[P, :].T @ f.dq + f.hessian[Q, :].T @ c)
    dtau = (dnumerator - tau * drho) / rho
    dxi = np.outer(g.grad[P], dtau) + tau * g.hess[P, :] + f.hessian[P, :]
    deta = -np.outer(g.grad[Q], dtau) - tau * g.hess[Q, :] - f.hessian[Q, :]
    return field, np.vstack((dtau, dxi, deta)), z_of_f


#
# The candidates:
#

class SymmetryCandidate(metaclass=abc.ABCMeta):
    """
    A vector field that can be checked for being a (weak) Noether symmetry.

    Immutable after construction; evaluation is pure.
    """
    tag: str = 'explicit'

    @abc.abstractmethod
    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        """The matrix ``∂ζ_i/∂x_k``; by central differences unless overridden."""
        return _differenced_jacobian(lambda y: self.vector(sys, y), x, BRACKET_STEP)

    def value(self, sys: SystemSpec, x: PhasePoint) -> FieldValue:
        return FieldValue.from_vector(self.vector(sys, x))

    def default_weak(self, sys: SystemSpec) -> WeakData:
        """The weak data under which the candidate is expected to be a symmetry."""
        return STRONG


def _differenced_jacobian(fn: Callable[[PhasePoint], np.ndarray], x: PhasePoint, h: float) -> np.ndarray:
    base = x.vector
    columns = []
    for k in range(len(base)):
        shift = np.zeros(len(base))
        shift[k] = h
        plus = fn(PhasePoint.from_vector(base + shift))
        minus = fn(PhasePoint.from_vector(base - shift))
        columns.append((plus - minus) / (2 * h))
    return np.column_stack(columns)


@dataclasses.dataclass(frozen=True)
class ExplicitSymmetry(SymmetryCandidate):
    """A field with its components given as expressions; the Jacobian is exact."""
    tau: Expression
    xi: tuple[Expression, ...]
    eta: tuple[Expression, ...]
    weak: WeakData = STRONG
    tag: str = 'explicit'

    @classmethod
    def from_texts(
            cls,
            sys: SystemSpec,
            tau: str,
            xi: Sequence[str],
            eta: Sequence[str],
            weak: WeakData = STRONG,
    ) -> ExplicitSymmetry:
        if len(xi) != sys.n or len(eta) != sys.n:
            raise ConfigurationError(f"A field of n={sys.n} needs {sys.n} xi and eta components.")
        return cls(sys.parse(tau), tuple(map(sys.parse, xi)), tuple(map(sys.parse, eta)), weak)

    @property
    def components(self) -> tuple[Expression, ...]:
        return (self.tau,) + self.xi + self.eta

    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        return np.array([exprcore.evaluate(expr, x, sys.params) for expr in self.components])

    def jacobian(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        return np.vstack([sys.jet(expr, x, order=1).gradient for expr in self.components])

    def default_weak(self, sys: SystemSpec) -> WeakData:
        return self.weak


def time_translation(sys: SystemSpec, weak: WeakData = STRONG) -> ExplicitSymmetry:
    """``∂/∂t``."""
    return ExplicitSymmetry.from_texts(sys, '1', ['0'] * sys.n, ['0'] * sys.n, weak)


def translation(sys: SystemSpec, k: int) -> ExplicitSymmetry:
    """``∂/∂qk``."""
    if not 1 <= k <= sys.n:
        raise ConfigurationError(f"No coordinate q{k} for n={sys.n}.")
    xi = ['1' if i == k else '0' for i in range(1, sys.n + 1)]
    return ExplicitSymmetry.from_texts(sys, '0', xi, ['0'] * sys.n)


@dataclasses.dataclass(frozen=True)
class DerivedSymmetry(SymmetryCandidate):
    """
    The unique symmetry of an integral F: ``i_ζ(α + β) = F``, ``i_ζ dα = −dF``.

    Its Jacobian is assembled by the chain rule from the second derivatives
    of H, F, and the potential of β, so the symmetry conditions of a true
    integral hold to round-off.
    """
    integral: Expression
    name: str = ''
    eps_rho: float = EPS_RHO
    tag: str = 'derived'

    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        return _inverse(sys, self.integral, x, self.eps_rho, with_jacobian=False)[0]

    def jacobian(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        jacobian = _inverse(sys, self.integral, x, self.eps_rho, with_jacobian=True)[1]
        assert jacobian is not None
        return jacobian

    def default_weak(self, sys: SystemSpec) -> WeakData:
        return system_weak(sys)


@dataclasses.dataclass(frozen=True)
class CharacteristicSymmetry(SymmetryCandidate):
    """The characteristic field Z itself."""
    tag: str = 'characteristic'

    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        return characteristic_field(sys, x).vector

    def jacobian(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        return _field_jacobian(_ingredients(sys, x, beta=False), sys.n)


@dataclasses.dataclass(frozen=True)
class AdjustedSymmetry(SymmetryCandidate):
    """The commuting correction ``ζ − dt(ζ)·Z``: a field with no dt-component."""
    base: SymmetryCandidate
    tag: str = 'adjusted'

    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        v = self.base.vector(sys, x)
        result = v - v[0] * characteristic_field(sys, x).vector
        result[0] = 0.0
        return result

    def jacobian(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        g = _ingredients(sys, x, beta=False)
        v = self.base.vector(sys, x)
        jv = self.base.jacobian(sys, x)
        result = jv - np.outer(_field_vector(g, sys.n), jv[0, :]) - v[0] * _field_jacobian(g, sys.n)
        result[0, :] = 0.0
        return result

    def default_weak(self, sys: SystemSpec) -> WeakData:
        return self.base.default_weak(sys)


@dataclasses.dataclass(frozen=True)
class StrengthenedSymmetry(SymmetryCandidate):
    """
    The strong symmetry ``ζ + ρ⁻¹(β(ζ) − f)·Z`` of a weak one.

    It preserves the unperturbed form and has the same Noether integral.
    """
    base: SymmetryCandidate
    weak: WeakData
    eps_rho: float = EPS_RHO
    tag: str = 'strengthened'

    def _parts(self, sys: SystemSpec, x: PhasePoint) -> tuple[_Ingredients, np.ndarray, float, float]:
        g = _ingredients(sys, x, beta=False)
        rho, _ = _normaliser(g, sys.n)
        _guard(rho, self.eps_rho)
        v = self.base.vector(sys, x)
        w, _ = self.weak.beta_jet(sys, x)
        f, _ = self.weak.gauge_jet(sys, x)
        return g, v, rho, (float(np.dot(w, v)) - f) / rho

    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        g, v, _, k = self._parts(sys, x)
        return v + k * _field_vector(g, sys.n)

    def jacobian(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        g, v, rho, k = self._parts(sys, x)
        _, drho = _normaliser(g, sys.n)
        jv = self.base.jacobian(sys, x)
        w, dw = self.weak.beta_jet(sys, x)
        _, df = self.weak.gauge_jet(sys, x)
        dk = (dw.T @ v + jv.T @ w - df - k * drho) / rho
        return jv + np.outer(_field_vector(g, sys.n), dk) + k * _field_jacobian(g, sys.n)


@dataclasses.dataclass(frozen=True)
class ContactSymmetry(SymmetryCandidate):
    """The contact Hamiltonian field ``Y_f`` of an arbitrary function."""
    function: Expression
    eps_rho: float = EPS_RHO
    tag: str = 'contact'

    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        return contact_hamiltonian_field(sys, self.function, x, self.eps_rho).vector

    def default_weak(self, sys: SystemSpec) -> WeakData:
        return system_weak(sys)


@dataclasses.dataclass(frozen=True)
class FunctionalSymmetry(SymmetryCandidate):
    """A field given by any callable; its Jacobian is differenced."""
    function: Callable[[SystemSpec, PhasePoint], FieldValue]
    weak: WeakData = STRONG
    tag: str = 'functional'

    def vector(self, sys: SystemSpec, x: PhasePoint) -> np.ndarray:
        return self.function(sys, x).vector

    def default_weak(self, sys: SystemSpec) -> WeakData:
        return self.weak


#
# The operations:
#

def inverse_noether(sys: SystemSpec, integral: Expression, x: PhasePoint, eps_rho: float = EPS_RHO) -> FieldValue:
    """
    The Noether symmetry of an integral F at the point.

    ``τ = ρ⁻¹(F − Σ p_j ∂F/∂p_j)``, ``ξ = τ ∂H/∂p + ∂F/∂p``, ``η = −τ ∂H/∂q − ∂F/∂q``.
    With a perturbation β in the system, the normaliser is ``ρ + β(Z)`` and
    the β-coefficients join the numerator, so that ``i_ζ(α + β) = F`` exactly.

    F is not checked for being an integral; see `integral_defect`.
    """
    return FieldValue.from_vector(_inverse(sys, integral, x, eps_rho, with_jacobian=False)[0])


def integral_defect(sys: SystemSpec, integral: Expression, x: PhasePoint) -> math.Residual:
    """``Z(F)`` at the point, relative to ``|F|``: zero for a true integral."""
    g = _ingredients(sys, x, beta=False)
    f = sys.jet(integral, x, order=1)
    return math.relative(float(np.dot(_field_vector(g, sys.n), f.gradient)), f.value)


def contact_hamiltonian_field(sys: SystemSpec, f: Expression, x: PhasePoint, eps_rho: float = EPS_RHO) -> FieldValue:
    """
    The contact field ``Y_f = f·Z/ρ + Ŷ_f`` with ``i_{Y_f}α = f``.

    It differs from the inverse-Noether field of f by ``ρ⁻¹ Z(f)·(0, −c, p + b)``
    (b and c being the dq and dp coefficients of β), hence agrees with it
    wherever ``Z(f) = 0``.
    """
    n = sys.n
    Q, P = _blocks(n)
    field, _, z_of_f = _inverse(sys, f, x, eps_rho, with_jacobian=False)
    g = _ingredients(sys, x)
    rho, _ = _normaliser(g, n)
    correction = np.concatenate(([0.0], -g.w[P], g.p + g.w[Q])) * (z_of_f / rho)
    return FieldValue.from_vector(field + correction)


def weak_to_strong(sys: SystemSpec, zeta: SymmetryCandidate, weak: WeakData, x: PhasePoint,
                   eps_rho: float = EPS_RHO) -> FieldValue:
    """``ζ + ρ⁻¹(β(ζ) − f)·Z``: the strong symmetry with the same Noether integral."""
    return StrengthenedSymmetry(zeta, weak, eps_rho).value(sys, x)


@dataclasses.dataclass(frozen=True)
class ResidualReport:
    """The conditions of ``L_ζ(α + β) = df``, by the coordinate differentials."""
    r1: tuple[float, ...]  # dp-components
    r2: tuple[float, ...]  # dq-components
    r3: float              # dt-component
    residuals: tuple[math.Residual, ...]

    @property
    def max_rel(self) -> math.Residual:
        return math.worst(self.residuals)

    def within(self, tolerance: float) -> bool:
        return self.max_rel.within(tolerance)


def _integral_parts(sys: SystemSpec, zeta: SymmetryCandidate, x: PhasePoint, weak: WeakData) \
        -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The gradient of J, the magnitudes of its terms, and the field itself."""
    n = sys.n
    Q, P = _blocks(n)
    g = _ingredients(sys, x, beta=False)
    v = zeta.vector(sys, x)
    jv = zeta.jacobian(sys, x)
    w, dw = weak.beta_jet(sys, x)
    _, df = weak.gauge_jet(sys, x)
    tau, xi = v[0], v[Q]

    terms = [
        jv[Q, :].T @ g.p,                           # p·dξ
        np.concatenate((np.zeros(n + 1), xi)),      # ξ·dp
        -g.h * jv[0, :],                            # −H dτ
        -tau * g.grad,                              # −τ dH
        dw.T @ v,                                   # dβ(ζ), coefficients
        jv.T @ w,                                   # dβ(ζ), components
        -df,
    ]
    gradient = np.sum(terms, axis=0)
    scale = np.sum(np.abs(terms), axis=0)
    return gradient, scale, v


def integral_gradient(sys: SystemSpec, zeta: SymmetryCandidate, x: PhasePoint,
                      weak: WeakData | None = None) -> np.ndarray:
    """The gradient of the Noether integral J of the candidate (see `noether_integral`)."""
    weak = zeta.default_weak(sys) if weak is None else weak
    return _integral_parts(sys, zeta, x, weak)[0]


def directional_derivative(gradient: np.ndarray, v: FieldValue) -> float:
    return float(np.dot(gradient, v.vector))


def noether_integral(sys: SystemSpec, zeta: SymmetryCandidate, x: PhasePoint,
                     weak: WeakData | None = None) -> float:
    """
    ``J = Σ p ξ − H τ + β(ζ) − f``.

    If no weak data is given, the candidate's own (`default_weak`) is used;
    pass `STRONG` to drop the β and f terms explicitly.
    """
    n = sys.n
    Q, _ = _blocks(n)
    weak = zeta.default_weak(sys) if weak is None else weak
    v = zeta.vector(sys, x)
    h = exprcore.evaluate(sys.hamiltonian, x, sys.params)
    w, _ = weak.beta_jet(sys, x)
    f, _ = weak.gauge_jet(sys, x)
    return float(np.dot(x.p, v[Q])) - h * float(v[0]) + float(np.dot(w, v)) - f


def symmetry_residuals(sys: SystemSpec, zeta: SymmetryCandidate, x: PhasePoint,
                       weak: WeakData | None = None) -> ResidualReport:
    """
    The components of ``L_ζ(α + β) − df = d(i_ζ(α + β) − f) + i_ζ dα``.

    Without β and f these are: ``Σ p ∂ξ/∂p_j − H ∂τ/∂p_j`` (dp_j),
    ``η_j + Σ p ∂ξ/∂q_j − H ∂τ/∂q_j`` (dq_j), and
    ``Σ (p ∂ξ/∂t − η ∂H/∂p − ξ ∂H/∂q) − H ∂τ/∂t − τ ∂H/∂t`` (dt).
    """
    n = sys.n
    Q, P = _blocks(n)
    weak = zeta.default_weak(sys) if weak is None else weak
    gradient, scale, v = _integral_parts(sys, zeta, x, weak)
    contraction = dpc_contract(sys, FieldValue.from_vector(v), x).vector
    g = _ingredients(sys, x, beta=False)
    contraction_scale = np.concatenate((
        [float(np.dot(np.abs(v[Q]), np.abs(g.grad[Q])) + np.dot(np.abs(v[P]), np.abs(g.grad[P])))],
        np.abs(v[P]) + abs(v[0]) * np.abs(g.grad[Q]),
        np.abs(v[Q]) + abs(v[0]) * np.abs(g.grad[P]),
    ))
    total = gradient + contraction
    residuals = tuple(math.Residual(a, s) for a, s in zip(total, scale + contraction_scale))
    return ResidualReport(r1=tuple(total[P]), r2=tuple(total[Q]), r3=float(total[0]), residuals=residuals)


def lie_bracket(sys: SystemSpec, v: SymmetryCandidate, w: SymmetryCandidate, x: PhasePoint) -> FieldValue:
    """``[V, W] = (∂W)·V − (∂V)·W``."""
    result = w.jacobian(sys, x) @ v.vector(sys, x) - v.jacobian(sys, x) @ w.vector(sys, x)
    return FieldValue.from_vector(result)


def kernel_membership(sys: SystemSpec, v: FieldValue, x: PhasePoint) -> float:
    """The max-norm of ``i_v dα``: zero iff v is proportional to Z."""
    return dpc_contract(sys, v, x).max_norm()


def exterior_derivative(sys: SystemSpec, integral: Expression, x: PhasePoint) -> OneFormValue:
    """``dF`` at the point, as a one-form."""
    return OneFormValue.from_vector(sys.jet(integral, x, order=1).gradient)
