"""Constructors for the named bipartite state families used by the harness.

Includes the zero-gain family (states whose daemonic utility gain vanishes
at a matched constant risk aversion), the worked two-qubit instance with a
Gibbs-weighted marginal, X-states with prescribed concurrence, and Werner
states, plus the closed-form Werner gain for incoherent utilities.
"""

from __future__ import annotations

import numpy as np

from .quantum import (
    BipartiteState,
    Hamiltonian,
    NotPositive,
    OutOfRange,
    ParseError,
    QuantumError,
    TOL,
    as_matrix,
    complex_gaussian,
    dagger,
    psd_order,
    random_unitary,
    validate_bipartite,
    _rng,
)
from .extraction import inverse_tilde


class OrderingViolated(QuantumError):
    pass


class InfeasibleCoherence(QuantumError):
    pass


class InfeasibleConcurrence(QuantumError):
    pass


def zero_gain_state(
    hamiltonian: Hamiltonian,
    r: float,
    q: float,
    vectors: np.ndarray,
    c_matrices,
) -> BipartiteState:
    """Bipartite state with zero daemonic gain at matched risk aversion.

    Built as ``sum_k T^{-1}(|u_k><u_k|) (x) C_k`` (trace-normalized), where
    ``T`` is the exponential reweighting map at ``(r, q)`` and the ancilla
    blocks must be positive semidefinite and ordered ``C_k >= C_{k+1}``. By
    construction every measurement basis leaves all reweighted conditional
    states passive, so the gain vanishes for the exponential utility with
    rate ``r`` at parameter ``q``; the state is separable (each term is a
    product of positives).

    ``vectors`` holds the orthonormal system vectors as columns, ordered to
    match the blocks.
    """
    v = np.asarray(vectors, dtype=complex)
    d_s = hamiltonian.dim
    if np.abs(dagger(v) @ v - np.eye(d_s)).max() > TOL:
        raise OrderingViolated("system vectors must be orthonormal")
    blocks = [np.asarray(as_matrix(c), dtype=complex) for c in c_matrices]
    if len(blocks) != d_s:
        raise OrderingViolated(f"need {d_s} ancilla blocks, got {len(blocks)}")
    for k, c in enumerate(blocks):
        if float(np.linalg.eigvalsh((c + dagger(c)) / 2).min()) < -TOL:
            raise NotPositive(f"ancilla block {k} is not positive semidefinite")
    for k in range(len(blocks) - 1):
        if not psd_order(blocks[k], blocks[k + 1]):
            raise OrderingViolated(f"ancilla blocks {k} and {k + 1} are not ordered")
    d_a = blocks[0].shape[0]
    joint = np.zeros((d_s * d_a, d_s * d_a), dtype=complex)
    for k in range(d_s):
        proj = np.outer(v[:, k], v[:, k].conj())
        joint += np.kron(inverse_tilde(proj, hamiltonian, r, q), blocks[k])
    joint /= joint.trace().real
    return validate_bipartite(joint, d_s, d_a)


def random_zero_gain_state(
    hamiltonian: Hamiltonian, r: float, q: float, d_a: int = 2, seed=None
) -> BipartiteState:
    """Random draw from the zero-gain family.

    The ordering constraint is enforced by construction: random positive
    blocks are partially summed so that ``C_k = sum_{j >= k} D_j``.
    """
    rng = _rng(seed)
    d_s = hamiltonian.dim
    v = random_unitary(d_s, rng).mat
    increments = []
    for _ in range(d_s):
        g = complex_gaussian((d_a, d_a), rng)
        increments.append(g @ dagger(g))
    blocks = [sum(increments[k:]) for k in range(d_s)]
    return zero_gain_state(hamiltonian, r, q, v, blocks)


def example_state(e1: float, e2: float, r: float, c: float) -> BipartiteState:
    """Two-qubit zero-gain instance with a Gibbs-weighted coherent marginal.

    The reduced system state is ``[[p, c], [c, 1-p]]`` with
    ``p = exp(r e1) / (exp(r e1) + exp(r e2))``. Measuring the ancilla in the
    computational basis collapses the system onto ``exp(r H)/Z_r`` (outcome
    0) or a reweighted pure superposition (outcome 1, probability
    ``2 c cosh(r (e2 - e1) / 2)``).
    """
    if not e2 > e1:
        raise OutOfRange(f"need e2 > e1, got gap {e2 - e1:g}")
    if not c > 0:
        raise OutOfRange(f"coherence must be positive, got {c:g}")
    z_r = np.exp(r * e1) + np.exp(r * e2)
    c11_plus = 2 * c * np.exp(-r * (e1 + e2) / 2)
    c00 = 1 / z_r - c11_plus / 2
    # both feasibility conditions coincide: c <= sqrt(p (1-p)) <=> c00 >= 0
    if c00 < -TOL:
        bound = np.exp(r * (e1 + e2) / 2) / z_r
        raise InfeasibleCoherence(
            f"c = {c:g} exceeds the joint-positivity bound {bound:g} "
            f"(equal to the marginal bound sqrt(p(1-p)))"
        )
    c00 = max(c00, 0.0)
    block_plus = np.diag([c00, c11_plus]).astype(complex)
    block_minus = np.diag([c00, 0.0]).astype(complex)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    lift = np.diag(np.exp(r * np.array([e1, e2]) / 2)).astype(complex)
    joint = np.kron(lift @ np.outer(plus, plus) @ lift, block_plus)
    joint += np.kron(lift @ np.outer(minus, minus) @ lift, block_minus)
    joint /= joint.trace().real
    return validate_bipartite(joint, 2, 2)


def x_state(p: float, concurrence: float) -> BipartiteState:
    """Two-qubit X-state with prescribed concurrence.

    ``p |00><00| + (1-p) |11><11|`` plus symmetric outer coherences of
    weight ``C/2``; positivity requires ``0 <= C <= 2 sqrt(p (1-p))``.
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"population p = {p:g} outside [0, 1]")
    bound = 2 * np.sqrt(p * (1 - p))
    if not 0.0 <= concurrence <= bound + 1e-12:
        raise InfeasibleConcurrence(
            f"concurrence {concurrence:g} outside [0, {bound:g}] for p = {p:g}"
        )
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = p
    m[3, 3] = 1 - p
    m[0, 3] = m[3, 0] = concurrence / 2
    return validate_bipartite(m, 2, 2)


def werner(z: float) -> BipartiteState:
    """Werner state: white noise mixed with a maximally entangled pair.

    Entangled (NPT) exactly for ``z > 1/3``.
    """
    if not 0.0 <= z <= 1.0:
        raise OutOfRange(f"mixing parameter z = {z:g} outside [0, 1]")
    psi = np.zeros(4)
    psi[0] = psi[3] = 1 / np.sqrt(2)
    m = (1 - z) / 4 * np.eye(4, dtype=complex) + z * np.outer(psi, psi)
    return validate_bipartite(m, 2, 2)


def werner_gain_incoherent(X: float, Y: float, z: float) -> float:
    """Closed-form Werner daemonic gain for an incoherent utility (Z = 0).

    With ``Xt = X - Y/2`` and the measurement-population sweep maximized at
    its endpoints (``|Yt| = z Y / 2``):

        gain = |Xt + Yt|/4 + |Xt - Yt|/4 - |Xt|/2

    Zero for ``z <= z0 = 2X/Y - 1`` and positive beyond, for ``2X > Y >= 0``.
    """
    xt = X - Y / 2
    yt = z * Y / 2
    return abs(xt + yt) / 4 + abs(xt - yt) / 4 - abs(xt) / 2


class ZeroY(QuantumError):
    pass


def werner_threshold(X: float, Y: float) -> float:
    """Mixing threshold below which the incoherent Werner gain vanishes."""
    if Y <= 0:
        raise ZeroY(f"threshold needs Y > 0, got {Y:g}")
    return 2 * X / Y - 1


def random_xyz_constrained(seed=None) -> tuple[float, float, float, float]:
    """Random utility moments with a nonpositive incoherent baseline.

    Draws ``(X, Y, Z)`` uniformly on [-1, 1]^3 paired with ``p`` uniform on
    [0, 1], rejecting until ``X - p Y <= 0``.
    """
    rng = _rng(seed)
    while True:
        x, y, z = rng.uniform(-1.0, 1.0, size=3)
        p = rng.uniform(0.0, 1.0)
        if x - p * y <= 0.0:
            return float(x), float(y), float(z), float(p)


def parse_state(spec: str) -> tuple[BipartiteState, Hamiltonian | None]:
    """Parse a state-family specification string.

    Accepted forms: ``werner:z=<f>``, ``xstate:p=<f>,C=<f>``,
    ``example:r=<f>,c=<f>,e1=<f>,e2=<f>``, ``zerogain:r=<f>,q=<f>,seed=<int>``.
    Families that fix their own energies (``example``, ``zerogain``) also
    return the matching Hamiltonian; the others return ``None``.
    """
    spec = spec.strip()
    head, sep, body = spec.partition(":")
    if not sep:
        raise ParseError(f"state spec {spec!r} has no parameters")
    kv = {}
    for tok in body.split(","):
        tok = tok.strip()
        if not tok:
            continue
        name, eq, val = tok.partition("=")
        if not eq:
            raise ParseError(f"unexpected token {tok!r} in {spec!r}")
        try:
            kv[name] = float(val)
        except ValueError:
            raise ParseError(f"bad number {val!r} in {spec!r}") from None

    def need(*names):
        missing = [n for n in names if n not in kv]
        if missing:
            raise ParseError(f"missing {','.join(missing)} in {spec!r}")
        return [kv[n] for n in names]

    if head == "werner":
        (z,) = need("z")
        return werner(z), None
    if head == "xstate":
        p, conc = need("p", "C")
        return x_state(p, conc), None
    if head == "example":
        r, c, e1, e2 = need("r", "c", "e1", "e2")
        return example_state(e1, e2, r, c), Hamiltonian(np.array([e1, e2]))
    if head == "zerogain":
        r, q, seed = need("r", "q", "seed")
        h = Hamiltonian(np.array([0.0, 1.0]))
        return random_zero_gain_state(h, r, q, d_a=2, seed=int(seed)), h
    raise ParseError(f"unknown state family {head!r} in {spec!r}")
