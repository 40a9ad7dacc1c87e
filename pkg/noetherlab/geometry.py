"""
The Poincaré–Cartan form ``α = p dq − H dt (+ β)`` on the extended phase space.

All operations are pure functions of immutable inputs and can be evaluated
at many points in parallel.
"""
from __future__ import annotations

import dataclasses
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from noetherlab import exprcore, math
from noetherlab.errors import ConfigurationError, ContactDegenerate, NoetherError
from noetherlab.exprcore import Expression, Jet2

EPS_RHO = 1e-9
TOLERANCE = 1e-9


def _floats(values: Sequence[float] | np.ndarray) -> tuple[float, ...]:
    return tuple(float(value) for value in values)


@dataclasses.dataclass(frozen=True)
class PhasePoint:
    """A point ``(t, q1..qn, p1..pn)`` of the extended phase space."""
    t: float
    q: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 't', float(self.t))
        object.__setattr__(self, 'q', _floats(self.q))
        object.__setattr__(self, 'p', _floats(self.p))
        if len(self.q) != len(self.p) or not self.q:
            raise ConfigurationError(f"Mismatching coordinates: q={self.q}, p={self.p}.")

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def vector(self) -> np.ndarray:
        return np.array((self.t,) + self.q + self.p)

    @classmethod
    def from_vector(cls, vector: Sequence[float] | np.ndarray) -> PhasePoint:
        if len(vector) < 3 or len(vector) % 2 == 0:
            raise ConfigurationError(f"A phase point needs 2n+1 coordinates, got {len(vector)}.")
        n = (len(vector) - 1) // 2
        return cls(vector[0], tuple(vector[1:n + 1]), tuple(vector[n + 1:]))


@dataclasses.dataclass(frozen=True)
class FieldValue:
    """A tangent vector ``τ ∂/∂t + Σ ξ ∂/∂q + Σ η ∂/∂p`` at some point."""
    tau: float
    xi: tuple[float, ...]
    eta: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'tau', float(self.tau))
        object.__setattr__(self, 'xi', _floats(self.xi))
        object.__setattr__(self, 'eta', _floats(self.eta))
        if len(self.xi) != len(self.eta) or not self.xi:
            raise ConfigurationError(f"Mismatching components: xi={self.xi}, eta={self.eta}.")

    @property
    def n(self) -> int:
        return len(self.xi)

    @property
    def vector(self) -> np.ndarray:
        return np.array((self.tau,) + self.xi + self.eta)

    @classmethod
    def from_vector(cls, vector: Sequence[float] | np.ndarray) -> FieldValue:
        n = (len(vector) - 1) // 2
        return cls(vector[0], tuple(vector[1:n + 1]), tuple(vector[n + 1:]))

    @classmethod
    def zero(cls, n: int) -> FieldValue:
        return cls(0.0, (0.0,) * n, (0.0,) * n)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.vector)))

    def __add__(self, other: object) -> FieldValue:
        if isinstance(other, FieldValue):
            return FieldValue.from_vector(self.vector + other.vector)
        else:
            return NotImplemented

    def __sub__(self, other: object) -> FieldValue:
        if isinstance(other, FieldValue):
            return FieldValue.from_vector(self.vector - other.vector)
        else:
            return NotImplemented

    def __mul__(self, other: object) -> FieldValue:
        if isinstance(other, (int, float)):
            return FieldValue.from_vector(self.vector * other)
        else:
            return NotImplemented

    __rmul__ = __mul__

    def __neg__(self) -> FieldValue:
        return FieldValue.from_vector(-self.vector)


@dataclasses.dataclass(frozen=True)
class OneFormValue:
    """The coefficients of ``a dt + Σ b dq + Σ c dp`` at some point."""
    a: float
    b: tuple[float, ...]
    c: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'a', float(self.a))
        object.__setattr__(self, 'b', _floats(self.b))
        object.__setattr__(self, 'c', _floats(self.c))
        if len(self.b) != len(self.c) or not self.b:
            raise ConfigurationError(f"Mismatching coefficients: b={self.b}, c={self.c}.")

    @property
    def n(self) -> int:
        return len(self.b)

    @property
    def vector(self) -> np.ndarray:
        return np.array((self.a,) + self.b + self.c)

    @classmethod
    def from_vector(cls, vector: Sequence[float] | np.ndarray) -> OneFormValue:
        n = (len(vector) - 1) // 2
        return cls(vector[0], tuple(vector[1:n + 1]), tuple(vector[n + 1:]))

    def pair(self, v: FieldValue) -> float:
        """The value of the form on the vector."""
        return float(np.dot(self.vector, v.vector))

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.vector)))


@dataclasses.dataclass(frozen=True)
class Perturbation:
    """
    A closed 1-form ``β = (a dt + Σ b dq + Σ c dp) + dg``.

    The constant coefficients and the exact part ``dg`` are both closed,
    so no numerical closedness test is ever needed.
    """
    constant: OneFormValue | None = None
    exact: Expression | None = None

    def coefficients(self, x: PhasePoint, params: Mapping[str, float]) -> np.ndarray:
        """The total coefficients of β at the point, ordered as ``(dt, dq.., dp..)``."""
        return self.jet(x, params, order=1)[0]

    def jet(self, x: PhasePoint, params: Mapping[str, float], order: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """The coefficients of β and their derivatives (the Hessian of g)."""
        size = 2 * x.n + 1
        coefficients = np.zeros(size) if self.constant is None else self.constant.vector
        derivatives = np.zeros((size, size))
        if self.exact is not None:
            jet = exprcore.eval_jet(self.exact, x, params, order=max(order, 1))
            coefficients = coefficients + jet.gradient
            derivatives = jet.hessian
        return coefficients, derivatives

    def on(self, v: FieldValue, x: PhasePoint, params: Mapping[str, float]) -> float:
        """The value ``β(v)`` at the point."""
        return float(np.dot(self.coefficients(x, params), v.vector))

    def potential(self, x: PhasePoint, params: Mapping[str, float]) -> float:
        """The value of g (zero when there is no exact part)."""
        return 0.0 if self.exact is None else exprcore.evaluate(self.exact, x, params)


@dataclasses.dataclass(frozen=True)
class SystemSpec:
    """
    A time-dependent Hamiltonian system with its integrals and parameters.

    All expressions are parsed against the dimension ``n`` and the declared
    parameter names; the parameters are bound at evaluation time.
    """
    n: int
    hamiltonian: Expression
    integrals: Mapping[str, Expression] = dataclasses.field(default_factory=dict)
    beta: Perturbation | None = None
    params: Mapping[str, float] = dataclasses.field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigurationError(f"The dimension must be positive, got n={self.n}.")
        expressions = [self.hamiltonian, *self.integrals.values()]
        if self.beta is not None and self.beta.exact is not None:
            expressions.append(self.beta.exact)
        for expression in expressions:
            if expression.n != self.n:
                raise ConfigurationError(f"Expression {expression} is for n={expression.n}, "
                                         f"not for n={self.n}.")
            missing = expression.parameters - set(self.params)
            if missing:
                raise ConfigurationError(f"Undeclared parameters in {expression}: "
                                         f"{', '.join(sorted(missing))}.")
        if self.beta is not None and self.beta.constant is not None and self.beta.constant.n != self.n:
            raise ConfigurationError(f"The perturbation is for n={self.beta.constant.n}, not for n={self.n}.")

    @classmethod
    def from_texts(
            cls,
            n: int,
            hamiltonian: str,
            integrals: Mapping[str, str] | None = None,
            params: Mapping[str, float] | None = None,
            beta: Mapping[str, Any] | None = None,
    ) -> SystemSpec:
        params = {name: float(value) for name, value in (params or {}).items()}
        names = frozenset(params)

        def parse(text: str) -> Expression:
            return exprcore.parse_expression(text, n, names)

        perturbation: Perturbation | None = None
        if beta is not None:
            constant = OneFormValue(
                float(beta.get('dt', 0.0)),
                tuple(float(v) for v in beta.get('dq', (0.0,) * n)),
                tuple(float(v) for v in beta.get('dp', (0.0,) * n)),
            )
            exact_text = str(beta.get('exact', '0')).strip()
            exact = None if exact_text in ('', '0') else parse(exact_text)
            perturbation = Perturbation(constant=constant, exact=exact)
        return cls(
            n=n,
            hamiltonian=parse(hamiltonian),
            integrals={name: parse(text) for name, text in (integrals or {}).items()},
            beta=perturbation,
            params=params,
        )

    @classmethod
    def from_document(cls, document: Mapping[str, Any]) -> SystemSpec:
        """Build the system from the JSON system-spec format."""
        try:
            return cls.from_texts(
                n=int(document['n']),
                hamiltonian=str(document['hamiltonian']),
                integrals={str(k): str(v) for k, v in document.get('integrals', {}).items()},
                params=document.get('params', {}),
                beta=document.get('beta'),
            )
        except NoetherError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"Malformed system document: {e!r}") from e

    def to_document(self) -> dict[str, Any]:
        """The JSON system-spec format (the original texts where available)."""
        document: dict[str, Any] = {
            'n': self.n,
            'hamiltonian': _source(self.hamiltonian),
            'integrals': {name: _source(expr) for name, expr in self.integrals.items()},
            'params': dict(self.params),
        }
        if self.beta is not None:
            constant = self.beta.constant or OneFormValue(0.0, (0.0,) * self.n, (0.0,) * self.n)
            document['beta'] = {
                'dt': constant.a,
                'dq': list(constant.b),
                'dp': list(constant.c),
                'exact': _source(self.beta.exact) if self.beta.exact is not None else '0',
            }
        return document

    def with_params(self, **overrides: float) -> SystemSpec:
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise ConfigurationError(f"Unknown parameters: {', '.join(sorted(unknown))}.")
        return dataclasses.replace(self, params={**self.params, **overrides})

    def parse(self, text: str) -> Expression:
        """Parse an extra expression against this system's dimension and parameters."""
        return exprcore.parse_expression(text, self.n, frozenset(self.params))

    def integral(self, name: str) -> Expression:
        try:
            return self.integrals[name]
        except KeyError:
            known = ', '.join(self.integrals) or 'none'
            raise ConfigurationError(f"Unknown integral {name!r}; known: {known}.") from None

    def jet(self, expr: Expression, x: PhasePoint, order: int = 1) -> Jet2:
        return exprcore.eval_jet(expr, x, self.params, order=order)

    def hamiltonian_jet(self, x: PhasePoint, order: int = 1) -> Jet2:
        return exprcore.eval_jet(self.hamiltonian, x, self.params, order=order)

    def beta_jet(self, x: PhasePoint, order: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """The total coefficients of β and their derivatives (zeros if there is no β)."""
        if self.beta is None:
            size = 2 * self.n + 1
            return np.zeros(size), np.zeros((size, size))
        return self.beta.jet(x, self.params, order=order)


def _source(expr: Expression) -> str:
    return expr.source or expr.text


def _check_point(sys: SystemSpec, x: PhasePoint) -> None:
    if x.n != sys.n:
        raise ConfigurationError(f"The point has n={x.n}, the system has n={sys.n}.")


def _check_field(sys: SystemSpec, v: FieldValue) -> None:
    if v.n != sys.n:
        raise ConfigurationError(f"The vector has n={v.n}, the system has n={sys.n}.")


#
# The characteristic field and the elementary action:
#

def characteristic_field(sys: SystemSpec, x: PhasePoint) -> FieldValue:
    """The section ``Z = ∂/∂t + Σ H_p ∂/∂q − H_q ∂/∂p`` of ker dα; ``dt(Z) = 1``."""
    _check_point(sys, x)
    jet = sys.hamiltonian_jet(x, order=1)
    return FieldValue(1.0, tuple(jet.dp), tuple(-jet.dq))


def elementary_action(sys: SystemSpec, x: PhasePoint) -> float:
    """``ρ = i_Z(p dq − H dt) = Σ p H_p − H``."""
    _check_point(sys, x)
    jet = sys.hamiltonian_jet(x, order=1)
    return float(np.dot(x.p, jet.dp)) - jet.value


def perturbed_elementary_action(sys: SystemSpec, x: PhasePoint) -> float:
    """``ρ + β(Z)``: the normaliser of the Reeb field of ``α + β``."""
    rho = elementary_action(sys, x)
    if sys.beta is None:
        return rho
    return rho + sys.beta.on(characteristic_field(sys, x), x, sys.params)


def contact_normaliser(sys: SystemSpec, x: PhasePoint, eps_rho: float = EPS_RHO) -> float:
    """The (perturbed) elementary action, guarded against the degeneracy."""
    rho = perturbed_elementary_action(sys, x)
    if not abs(rho) > eps_rho:
        raise ContactDegenerate(rho)
    return rho


def reeb_field(sys: SystemSpec, x: PhasePoint, eps_rho: float = EPS_RHO) -> FieldValue:
    """
    The Reeb field ``Z/ρ`` of the contact form: ``α(Z/ρ) = 1``, ``i_{Z/ρ} dα = 0``.

    With a perturbation β, the perturbed elementary action normalises it.
    Raises `ContactDegenerate` when ``|ρ| ≤ eps_rho``, i.e. outside of U_H.
    """
    rho = contact_normaliser(sys, x, eps_rho)
    return characteristic_field(sys, x) * (1.0 / rho)


#
# The contractions:
#

def contact_form(sys: SystemSpec, x: PhasePoint) -> OneFormValue:
    """The coefficients of ``p dq − H dt + β`` at the point."""
    _check_point(sys, x)
    h = exprcore.evaluate(sys.hamiltonian, x, sys.params)
    size = 2 * sys.n + 1
    coefficients = np.zeros(size)
    coefficients[0] = -h
    coefficients[1:sys.n + 1] = x.p
    if sys.beta is not None:
        coefficients = coefficients + sys.beta.coefficients(x, sys.params)
    return OneFormValue.from_vector(coefficients)


def pc_contract(sys: SystemSpec, v: FieldValue, x: PhasePoint) -> float:
    """``i_v(p dq − H dt + β) = Σ p ξ − H τ + β(v)``."""
    _check_point(sys, x)
    _check_field(sys, v)
    h = exprcore.evaluate(sys.hamiltonian, x, sys.params)
    result = float(np.dot(x.p, v.xi)) - h * v.tau
    if sys.beta is not None:
        result += sys.beta.on(v, x, sys.params)
    return result


def dpc_contract(sys: SystemSpec, v: FieldValue, x: PhasePoint) -> OneFormValue:
    """
    The 1-form ``i_v d(p dq − H dt)``, i.e. ``η dq − ξ dp + τ dH − dH(v) dt``.

    β is closed and does not contribute.
    """
    _check_point(sys, x)
    _check_field(sys, v)
    jet = sys.hamiltonian_jet(x, order=1)
    xi, eta = np.array(v.xi), np.array(v.eta)
    a = -(float(np.dot(xi, jet.dq)) + float(np.dot(eta, jet.dp)))
    b = eta + v.tau * jet.dq
    c = -xi + v.tau * jet.dp
    return OneFormValue(a, tuple(b), tuple(c))


def two_form(sys: SystemSpec, u: FieldValue, v: FieldValue, x: PhasePoint) -> float:
    """The value ``dα(u, v)``."""
    return dpc_contract(sys, u, x).pair(v)


class Horizontality(NamedTuple):
    horizontal: bool
    residual: math.Residual


def is_horizontal(sys: SystemSpec, v: FieldValue, x: PhasePoint, tol: float = TOLERANCE) -> Horizontality:
    """Check ``Σ p ξ = τ H`` (plus ``β(v)`` when perturbed): whether v is in ker α."""
    _check_point(sys, x)
    _check_field(sys, v)
    h = exprcore.evaluate(sys.hamiltonian, x, sys.params)
    p_xi = float(np.dot(x.p, v.xi))
    h_tau = h * v.tau
    absolute = p_xi - h_tau
    if sys.beta is not None:
        absolute += sys.beta.on(v, x, sys.params)
    residual = math.relative(absolute, p_xi, h_tau)
    return Horizontality(residual.within(tol), residual)
