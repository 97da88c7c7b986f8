"""Utility-function families, risk aversion, and qubit moment parameters.

All utilities are normalized so that ``u(0) = 0`` (the preference ordering is
invariant under affine maps, so nothing is lost). Two families cover every
closed form in the package: exponentials (constant absolute risk aversion)
and polynomials without constant term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .quantum import OutOfRange, ParseError, QuantumError, TOL

#: Exponential rates below this in magnitude collapse to the linear utility:
#: the exponential form is singular at rate zero but its limit is u(w) = w.
LINEAR_RATE_CUTOFF = 1e-9


class ZeroMarginalUtility(QuantumError):
    pass


@dataclass(frozen=True)
class UtilityFunction:
    """Evaluable scalar map ``w -> u(w)`` with a family tag.

    ``family`` is one of ``linear``, ``exponential``, ``cubic``, ``poly``.
    Exponentials store their rate; cubic/poly store coefficients of
    ``w, w^2, ...`` (no constant term, keeping ``u(0) = 0``).
    """

    family: str
    rate: float = 0.0
    coeffs: tuple[float, ...] = ()

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.family == "linear":
            out = w
        elif self.family == "exponential":
            out = (1.0 - np.exp(-self.rate * w)) / self.rate
        else:
            out = npoly.polyval(w, (0.0,) + self.coeffs)
        return out if out.ndim else float(out)

    def derivative(self, w) -> float:
        if self.family == "linear":
            return 1.0
        if self.family == "exponential":
            return float(np.exp(-self.rate * w))
        return float(npoly.polyval(w, npoly.polyder((0.0,) + self.coeffs)))

    def second_derivative(self, w) -> float:
        if self.family == "linear":
            return 0.0
        if self.family == "exponential":
            return float(-self.rate * np.exp(-self.rate * w))
        return float(npoly.polyval(w, npoly.polyder((0.0,) + self.coeffs, 2)))

    def odd_part(self, w):
        """u_o(w) = (u(w) - u(-w)) / 2."""
        return (self(w) - self(-np.asarray(w, dtype=float))) / 2

    def is_strictly_increasing_family(self) -> bool:
        """True for families increasing by construction (linear/exponential)."""
        return self.family in ("linear", "exponential")

    def label(self) -> str:
        if self.family == "linear":
            return "linear"
        if self.family == "exponential":
            return f"exp:r={self.rate:g}"
        return "poly:" + ",".join(f"{c:g}" for c in self.coeffs)


@dataclass(frozen=True)
class XYZMoments:
    """The three utility moments that control the qubit closed forms.

    ``X`` is the utility of the full gap, ``Y`` twice its odd part, and ``Z``
    the two-step odd-part sum ``u_o(q*gap) + u_o((1-q)*gap)``. For a strictly
    increasing utility, ``Y >= X > 0`` and ``Z > 0``.
    """

    X: float
    Y: float
    Z: float
    q: float
    gap: float


def linear_utility() -> UtilityFunction:
    return UtilityFunction("linear")


def exponential_utility(rate: float) -> UtilityFunction:
    """Constant-absolute-risk-aversion utility ``(1 - exp(-r w)) / r``.

    Rates smaller than :data:`LINEAR_RATE_CUTOFF` in magnitude return the
    linear utility, the exact limit of the exponential form.
    """
    if abs(rate) < LINEAR_RATE_CUTOFF:
        return linear_utility()
    return UtilityFunction("exponential", rate=float(rate))


def polynomial_utility(coeffs) -> UtilityFunction:
    """Polynomial utility ``c1 w + c2 w^2 + ...`` (no constant term)."""
    tup = tuple(float(c) for c in coeffs)
    if not tup:
        raise OutOfRange("polynomial utility needs at least one coefficient")
    return UtilityFunction("poly", coeffs=tup)


def cubic_from_xyz(X: float, Y: float, Z: float) -> UtilityFunction:
    """Cubic utility realizing prescribed (X, Y, Z) moments at unit gap.

    Round-trips: ``xyz_moments(cubic_from_xyz(X, Y, Z), 0, 1, 1/2)``
    recovers ``(X, Y, Z)`` exactly.
    """
    c1 = (8 * Z - Y) / 6
    c2 = (2 * X - Y) / 2
    c3 = 2 * (Y - 2 * Z) / 3
    return UtilityFunction("cubic", coeffs=(c1, c2, c3))


def risk_aversion(u: UtilityFunction, w: float) -> float:
    """Arrow-Pratt coefficient of absolute risk aversion ``-u''(w)/u'(w)``."""
    d1 = u.derivative(w)
    if abs(d1) < TOL:
        raise ZeroMarginalUtility(f"u'({w}) = {d1:.3e} is below tolerance")
    return -u.second_derivative(w) / d1


def xyz_moments(u: UtilityFunction, e1: float, e2: float, q: float = 0.5) -> XYZMoments:
    """Moments (X, Y, Z) of a utility over the two-level gap ``e2 - e1``.

    ``Z`` depends on the quasiprobability parameter: ``u_o(q*gap) +
    u_o((1-q)*gap)``, reducing to ``2 u_o(gap/2)`` at ``q = 1/2`` and to
    ``Y/2`` at the endpoints ``q = 0, 1``.
    """
    if not e2 > e1:
        raise OutOfRange(f"need e2 > e1, got gap {e2 - e1:g}")
    gap = e2 - e1
    x = float(u(gap))
    y = float(2 * u.odd_part(gap))
    z = float(u.odd_part(q * gap) + u.odd_part((1 - q) * gap))
    return XYZMoments(x, y, z, q, gap)


def is_incoherent_utility(
    u: UtilityFunction, e1: float, e2: float, q: float = 0.5, tol: float = TOL
) -> bool:
    """True iff initial coherence cannot contribute for a two-level system.

    For qubits this is exactly the vanishing of the Z moment at the given
    quasiprobability parameter.
    """
    return abs(xyz_moments(u, e1, e2, q).Z) < tol


def parse_utility(spec: str) -> UtilityFunction:
    """Parse a utility specification string.

    Accepted forms: ``linear``, ``exp:r=<float>``, ``cubic:X=<f>,Y=<f>,Z=<f>``,
    ``poly:c1,c2,c3``.
    """
    spec = spec.strip()
    if spec == "linear":
        return linear_utility()
    head, sep, body = spec.partition(":")
    if not sep:
        raise ParseError(f"unknown utility spec {spec!r}")
    if head == "exp":
        kv = _parse_kv(body, ("r",), spec)
        return exponential_utility(kv["r"])
    if head == "cubic":
        kv = _parse_kv(body, ("X", "Y", "Z"), spec)
        return cubic_from_xyz(kv["X"], kv["Y"], kv["Z"])
    if head == "poly":
        try:
            coeffs = [float(tok) for tok in body.split(",") if tok.strip()]
        except ValueError as exc:
            raise ParseError(f"bad polynomial coefficient in {spec!r}: {exc}") from None
        if not coeffs:
            raise ParseError(f"no coefficients in {spec!r}")
        return polynomial_utility(coeffs)
    raise ParseError(f"unknown utility family {head!r} in {spec!r}")


def _parse_kv(body: str, keys, spec: str) -> dict:
    out = {}
    for tok in body.split(","):
        tok = tok.strip()
        if not tok:
            continue
        name, sep, val = tok.partition("=")
        if not sep or name not in keys:
            raise ParseError(f"unexpected token {tok!r} in {spec!r}")
        try:
            out[name] = float(val)
        except ValueError:
            raise ParseError(f"bad number {val!r} in {spec!r}") from None
    missing = [k for k in keys if k not in out]
    if missing:
        raise ParseError(f"missing {','.join(missing)} in {spec!r}")
    return out
