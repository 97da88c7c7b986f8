"""Optimal work extraction from a single system.

Covers the risk-neutral case (ergotropy and passive states), the closed form
for exponential utilities built on the tilde map, the exact qubit closed form
for arbitrary utilities, and a multistart derivative-free optimizer over the
unitary group that serves as the numerical cross-check for every closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .quantum import (
    DensityMatrix,
    Hamiltonian,
    NotHermitian,
    OutOfRange,
    QuantumError,
    TOL,
    as_matrix,
    dagger,
    eig_sorted,
    energy_dephase,
    hermitian_defect,
    random_unitary,
)
from .quasiprob import raw_work_atoms
from .utility import LINEAR_RATE_CUTOFF, UtilityFunction, xyz_moments


class NotQubit(QuantumError):
    pass


class DegenerateDenominator(QuantumError):
    pass


@dataclass(frozen=True)
class UtilityOptimum:
    """Optimal value together with a unitary cycle achieving it.

    Iterable as ``value, unitary = result`` for convenience. ``method``
    records which solver produced it; ``exhausted`` flags a numerical search
    that stopped on its iteration budget rather than its tolerance.
    """

    value: float
    unitary: np.ndarray
    method: str
    exhausted: bool = False

    def __iter__(self):
        yield self.value
        yield self.unitary


@dataclass(frozen=True)
class OptimizerOptions:
    """Knobs for the multistart derivative-free unitary search."""

    n_starts: int = 16
    seed: int = 0
    maxiter: int = 6000
    xatol: float = 1e-9
    fatol: float = 1e-12


@dataclass(frozen=True)
class TildeState:
    """Exponentially reweighted state driving the constant-risk closed form.

    ``mat`` is ``(e^{-rqH} rho e^{-r(1-q)H} + h.c.) / 2``; Hermitian always,
    positive semidefinite at ``q = 1/2``. Eigenvalues are stored descending
    with phase-fixed eigenvectors as columns.
    """

    mat: np.ndarray
    r: float
    q: float
    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class TildeHamiltonian:
    """Effective Hamiltonian for the reweighted picture.

    Energies ``exp(r e_k) / r`` are strictly increasing for every ``r != 0``;
    the basis columns are the eigenvectors of the reduced state's tilde map.
    """

    energies: np.ndarray
    basis: np.ndarray


def energy(rho, hamiltonian: Hamiltonian) -> float:
    """Average energy ``Tr[H rho]``."""
    return float(np.trace(hamiltonian.mat @ as_matrix(rho)).real)


def average_work(rho, unitary, hamiltonian: Hamiltonian) -> float:
    """Average work of a unitary cycle: minus the change of average energy."""
    m = as_matrix(rho)
    u = as_matrix(unitary)
    return energy(m, hamiltonian) - energy(u @ m @ dagger(u), hamiltonian)


def ergotropy(rho, hamiltonian: Hamiltonian) -> UtilityOptimum:
    """Maximum average work over unitary cycles, with an optimal unitary.

    The optimum maps the k-th largest population eigenvector onto the k-th
    lowest energy eigenvector (phases fixed to one); the value vanishes
    exactly on passive states.
    """
    vals, vecs = eig_sorted(as_matrix(rho), order="descending")
    passive_energy = float(np.dot(vals, hamiltonian.energies))
    value = energy(rho, hamiltonian) - passive_energy
    if value < 0.0:
        # mathematically >= 0; only floating-point noise can land below
        value = 0.0 if value > -1e-12 else value
    u_opt = hamiltonian.basis @ dagger(vecs)
    return UtilityOptimum(value, u_opt, "ergotropy")


def is_passive(rho, hamiltonian: Hamiltonian, tol: float = TOL) -> bool:
    """True iff no work is extractable: the state commutes with the
    Hamiltonian and its populations are non-increasing in energy."""
    rho_e = hamiltonian.to_energy_basis(rho)
    comm = rho_e @ np.diag(hamiltonian.energies) - np.diag(hamiltonian.energies) @ rho_e
    if np.abs(comm).max() > tol:
        return False
    pops = np.diag(rho_e).real
    return bool(np.all(np.diff(pops) <= tol))


def tilde_state(rho, hamiltonian: Hamiltonian, r: float, q: float = 0.5) -> TildeState:
    """Apply the exponential reweighting map to a state.

    At ``q = 1/2`` this is the symmetric congruence
    ``e^{-rH/2} rho e^{-rH/2}``; for other ``q`` the two one-sided
    reweightings are averaged, which keeps the output Hermitian.
    """
    rho_e = hamiltonian.to_energy_basis(rho)
    eps = hamiltonian.energies
    left = np.exp(-r * q * eps)
    right = np.exp(-r * (1 - q) * eps)
    til_e = (left[:, None] * rho_e * right[None, :] + right[:, None] * rho_e * left[None, :]) / 2
    mat = hamiltonian.from_energy_basis(til_e)
    vals, vecs = eig_sorted(mat, order="descending")
    return TildeState(mat, r, q, vals, vecs)


def inverse_tilde(tilde_mat, hamiltonian: Hamiltonian, r: float, q: float = 0.5) -> np.ndarray:
    """Invert the reweighting map by the elementwise Sylvester solution.

    In the energy eigenbasis the map reads ``rho_ij * (a_i + a_j) / 2`` after
    a diagonal congruence, with ``a_k = exp(-r (1-2q) e_k) > 0``, so the
    inverse divides entrywise by the always-positive denominators. Round
    trips with :func:`tilde_state` to machine precision.
    """
    til_e = hamiltonian.to_energy_basis(tilde_mat)
    eps = hamiltonian.energies
    a = np.exp(-r * (1 - 2 * q) * eps)
    lift = np.exp(r * q * eps)
    y = lift[:, None] * til_e * lift[None, :]
    rho_e = 2 * y / (a[:, None] + a[None, :])
    return hamiltonian.from_energy_basis(rho_e)


def tilde_hamiltonian(rho_s, hamiltonian: Hamiltonian, r: float, q: float = 0.5) -> TildeHamiltonian:
    """Effective Hamiltonian built from the reduced state's tilde eigenbasis."""
    if abs(r) < LINEAR_RATE_CUTOFF:
        raise OutOfRange("the reweighted picture needs a nonzero rate")
    til = tilde_state(rho_s, hamiltonian, r, q)
    y = np.exp(r * hamiltonian.energies) / r
    return TildeHamiltonian(y, til.vectors)


def tilde_ergotropy(mat, tilde_h: TildeHamiltonian) -> float:
    """Ergotropy of a (possibly non-normalized) Hermitian operator with
    respect to an effective Hamiltonian whose energies are ascending."""
    m = as_matrix(mat)
    if hermitian_defect(m) > 1e-7:
        raise NotHermitian(f"tilde ergotropy needs a Hermitian input; defect {hermitian_defect(m):.3e}")
    m = (m + dagger(m)) / 2
    basis = tilde_h.basis
    y = tilde_h.energies
    current = float(np.real(np.einsum("ki,ij,jk,k->", dagger(basis), m, basis, y)))
    vals = np.linalg.eigvalsh(m)[::-1]  # descending
    floor = float(np.dot(vals, y))
    return current - floor


def optimal_utility_exponential(rho, hamiltonian: Hamiltonian, r: float, q: float = 0.5) -> UtilityOptimum:
    """Exact optimal expected utility for constant absolute risk aversion.

    The optimum pairs the descending eigenvalues of the tilde state with the
    ascending factors ``exp(r e_k)``; the optimal cycle rotates the tilde
    eigenbasis onto the energy eigenbasis. ``r`` below the linear cutoff
    delegates to :func:`ergotropy`.
    """
    if abs(r) < LINEAR_RATE_CUTOFF:
        opt = ergotropy(rho, hamiltonian)
        return UtilityOptimum(opt.value, opt.unitary, "ergotropy")
    til = tilde_state(rho, hamiltonian, r, q)
    boltz = np.exp(r * hamiltonian.energies)
    value = (1.0 - float(np.dot(til.values, boltz))) / r
    u_opt = hamiltonian.basis @ dagger(til.vectors)
    return UtilityOptimum(value, u_opt, "exponential")


def _qubit_optimum(rho, hamiltonian: Hamiltonian, u: UtilityFunction, q: float = 0.5):
    """Closed-form qubit optimum: value and an optimal unitary."""
    if hamiltonian.dim != 2:
        raise NotQubit(f"closed qubit form needs dimension 2, got {hamiltonian.dim}")
    rho_e = hamiltonian.to_energy_basis(rho)
    p = float(rho_e[0, 0].real)
    c = complex(rho_e[0, 1])
    mom = xyz_moments(u, hamiltonian.energies[0], hamiltonian.energies[1], q)
    d_lin = mom.X - p * mom.Y
    kappa = abs(c) * abs(mom.Z)
    lam = d_lin / 2 + np.sqrt(d_lin**2 / 4 + kappa**2)
    lam = max(lam, 0.0)
    if lam <= 0.0:
        return 0.0, hamiltonian.from_energy_basis(np.eye(2, dtype=complex))
    norm = np.sqrt(lam**2 + kappa**2)
    b = lam / norm
    a = kappa / norm
    gamma = np.angle(c) if abs(c) > 0 else 0.0
    theta = (np.pi - gamma) if mom.Z > 0 else -gamma
    alpha = a * np.exp(1j * theta)
    u_e = np.array([[alpha, -b], [b, np.conj(alpha)]])
    return float(lam), hamiltonian.from_energy_basis(u_e)


def optimal_utility_qubit(rho, hamiltonian: Hamiltonian, u: UtilityFunction, q: float = 0.5) -> float:
    """Optimal expected utility of a qubit for an arbitrary utility.

    With populations ``p = <e1|rho|e1>``, coherence ``c = <e1|rho|e2>`` and
    moments (X, Y, Z), the optimum is the largest root of
    ``lam^2 - (X - pY) lam - |c|^2 Z^2 = 0``:

        lam = (X - pY)/2 + sqrt((X - pY)^2/4 + |c|^2 Z^2)

    which vanishes exactly when ``c Z = 0`` and ``X - pY <= 0``. Cross-checked
    against the numerical optimizer and, for exponential utilities, against
    the tilde-state closed form.
    """
    value, _ = _qubit_optimum(rho, hamiltonian, u, q)
    return value


def small_z_expansion(X: float, Y: float, p: float, c, Z: float) -> float:
    """Expansion of the qubit optimum for small coherence-coupling ``|c| Z``.

    With ``D = X - pY`` and ``kappa = |c| |Z|``:

        (D + |D|)/2 + kappa^2/|D| - kappa^4/|D|^3

    accurate to ``O(kappa^6 / |D|^5)``.
    """
    d_lin = X - p * Y
    if abs(d_lin) < TOL:
        raise DegenerateDenominator(f"|X - pY| = {abs(d_lin):.3e} is below tolerance")
    kappa2 = (abs(c) * abs(Z)) ** 2
    return (d_lin + abs(d_lin)) / 2 + kappa2 / abs(d_lin) - kappa2**2 / abs(d_lin) ** 3


def _hermitian_from_params(x: np.ndarray, d: int) -> np.ndarray:
    g = np.zeros((d, d), dtype=complex)
    diag = x[:d]
    g[np.diag_indices(d)] = diag
    idx = d
    for i in range(d):
        for j in range(i + 1, d):
            g[i, j] = x[idx] + 1j * x[idx + 1]
            g[j, i] = x[idx] - 1j * x[idx + 1]
            idx += 2
    return g


def _params_from_unitary(u_mat: np.ndarray) -> np.ndarray:
    """Hermitian-generator coordinates with ``expm(1j G) = U``."""
    import scipy.linalg

    t, z = scipy.linalg.schur(np.asarray(u_mat, dtype=complex), output="complex")
    phases = np.angle(np.diag(t))
    g = z @ np.diag(phases) @ dagger(z)
    g = (g + dagger(g)) / 2
    d = g.shape[0]
    x = np.empty(d * d)
    x[:d] = np.diag(g).real
    idx = d
    for i in range(d):
        for j in range(i + 1, d):
            x[idx] = g[i, j].real
            x[idx + 1] = g[i, j].imag
            idx += 2
    return x


def _expm_hermitian(g: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(g)
    return (vecs * np.exp(1j * vals)) @ dagger(vecs)


def optimal_utility_numeric(
    rho, hamiltonian: Hamiltonian, u: UtilityFunction, q: float = 0.5,
    opts: OptimizerOptions | None = None,
) -> UtilityOptimum:
    """Maximize the expected utility over unitary cycles numerically.

    Unitaries are parameterized as ``expm(1j G)`` with ``G`` Hermitian
    (``d^2`` real coordinates). Multistart Nelder-Mead from the identity, the
    ergotropy unitary, and Haar-random seeds; the best value found is
    returned (never below the identity or ergotropy starting points), with
    ``exhausted`` set when the winning search ran out of iterations.
    """
    opts = opts or OptimizerOptions()
    d = hamiltonian.dim
    rho_e = hamiltonian.to_energy_basis(rho)
    eps = hamiltonian.energies
    wvals = (
        q * eps[:, None, None]
        + (1 - q) * eps[None, :, None]
        - eps[None, None, :]
    )
    uw = np.asarray(u(wvals), dtype=float)

    def value_of(u_e: np.ndarray) -> float:
        weights = np.einsum("ij,jk,ki->ijk", rho_e, u_e.conj().T, u_e).real
        return float(np.sum(weights * uw))

    def objective(x: np.ndarray) -> float:
        return -value_of(_expm_hermitian(_hermitian_from_params(x, d)))

    erg = ergotropy(rho, hamiltonian)
    starts = [np.zeros(d * d), _params_from_unitary(hamiltonian.to_energy_basis(erg.unitary))]
    rng = np.random.default_rng(opts.seed)
    while len(starts) < max(opts.n_starts, 2):
        starts.append(_params_from_unitary(random_unitary(d, rng).mat))

    best_val = -np.inf
    best_x = starts[0]
    best_exhausted = False
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": opts.maxiter,
                "maxfev": opts.maxiter,
                "xatol": opts.xatol,
                "fatol": opts.fatol,
            },
        )
        if -res.fun > best_val:
            best_val = -res.fun
            best_x = res.x
            best_exhausted = not res.success
    u_e = _expm_hermitian(_hermitian_from_params(best_x, d))
    return UtilityOptimum(best_val, hamiltonian.from_energy_basis(u_e), "numeric", best_exhausted)


def optimal_utility(
    rho, hamiltonian: Hamiltonian, u: UtilityFunction, q: float = 0.5,
    opts: OptimizerOptions | None = None, method: str = "auto",
) -> UtilityOptimum:
    """Optimal expected utility, dispatched to the best available solver.

    Linear utilities reduce to the ergotropy, exponential utilities use the
    tilde-state closed form, arbitrary utilities on qubits use the exact
    stationary-point solution, and everything else falls back on the
    numerical optimizer.
    """
    if method == "numeric":
        return optimal_utility_numeric(rho, hamiltonian, u, q, opts)
    if method != "auto":
        raise OutOfRange(f"method must be 'auto' or 'numeric', got {method!r}")
    if u.family == "linear":
        return ergotropy(rho, hamiltonian)
    if u.family == "exponential":
        return optimal_utility_exponential(rho, hamiltonian, u.rate, q)
    if hamiltonian.dim == 2:
        value, u_opt = _qubit_optimum(rho, hamiltonian, u, q)
        return UtilityOptimum(value, u_opt, "qubit")
    return optimal_utility_numeric(rho, hamiltonian, u, q, opts)


def coherent_contribution(
    rho, hamiltonian: Hamiltonian, u: UtilityFunction, q: float = 0.5,
    opts: OptimizerOptions | None = None,
) -> float:
    """Part of the optimal expected utility lost under energy dephasing.

    Vanishes on incoherent states and, for qubits, for every state whenever
    the utility's Z moment is zero.
    """
    full = optimal_utility(rho, hamiltonian, u, q, opts).value
    dephased = optimal_utility(energy_dephase(rho, hamiltonian), hamiltonian, u, q, opts).value
    return full - dephased
