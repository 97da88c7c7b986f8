"""Work quasiprobability distributions and expected-utility orderings.

The distribution assigns the work value ``q e_i + (1-q) e_j - e_k`` the real
weight ``Re[rho_ij (U^dag)_jk U_ki]`` (matrix elements in the energy
eigenbasis), summed over coincident values. Weights may be negative but
always sum to one; the first moment equals the average extracted work for
every value of the parameter ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import (
    DimensionMismatch,
    Hamiltonian,
    OutOfRange,
    QuantumError,
    as_matrix,
)
from .utility import UtilityFunction


class NotNormalized(QuantumError):
    pass


class EmptySet(QuantumError):
    pass


@dataclass(frozen=True)
class WorkQuasiprobability:
    """Finite list of (work value, real weight) atoms, sorted by value."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, values, weights, merge_tol: float = 0.0, validate: bool = True):
        """Build a canonical distribution, merging coincident work values.

        Values within ``merge_tol`` of each other collapse into one atom
        carrying the summed weight; atoms whose merged weight vanishes (below
        1e-14, structural zeros of the triple sum) are dropped.
        """
        v = np.asarray(values, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if v.size != w.size:
            raise DimensionMismatch(f"{v.size} values but {w.size} weights")
        if v.size == 0:
            raise EmptySet("a quasiprobability needs at least one atom")
        order = np.argsort(v, kind="stable")
        v, w = v[order], w[order]
        groups = np.concatenate(([0], np.cumsum(np.diff(v) > merge_tol)))
        n = int(groups[-1]) + 1
        merged_w = np.bincount(groups, weights=w, minlength=n)
        first = np.searchsorted(groups, np.arange(n))
        merged_v = v[first]
        keep = np.abs(merged_w) > 1e-14
        if keep.any():
            merged_v, merged_w = merged_v[keep], merged_w[keep]
        else:
            merged_v, merged_w = merged_v[:1], merged_w[:1]
        total = merged_w.sum()
        if validate and abs(total - 1.0) > 1e-10:
            raise NotNormalized(f"weights sum to {total!r}, off by {total - 1.0:.3e}")
        return cls(merged_v, merged_w)

    @property
    def n_atoms(self) -> int:
        return self.values.size

    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.weights.tolist()))

    def to_csv(self) -> str:
        """Serialize as CSV rows ``w,weight`` (with header)."""
        lines = ["w,weight"]
        lines += [f"{v:.12g},{w:.12g}" for v, w in zip(self.values, self.weights)]
        return "\n".join(lines) + "\n"


def raw_work_atoms(rho, unitary, hamiltonian: Hamiltonian, q: float):
    """Unmerged (values, weights) arrays of the work distribution.

    Fast path used by optimizers; see :func:`work_quasiprob` for the
    canonical merged object.
    """
    eps = hamiltonian.energies
    rho_e = hamiltonian.to_energy_basis(rho)
    u_e = hamiltonian.to_energy_basis(unitary)
    d = eps.size
    if rho_e.shape != (d, d) or u_e.shape != (d, d):
        raise DimensionMismatch(
            f"state/unitary shape does not match Hamiltonian dimension {d}"
        )
    weights = np.einsum("ij,jk,ki->ijk", rho_e, u_e.conj().T, u_e).real
    wvals = (
        q * eps[:, None, None]
        + (1 - q) * eps[None, :, None]
        - eps[None, None, :]
    )
    return np.broadcast_to(wvals, weights.shape).ravel(), weights.ravel()


def work_quasiprob(rho, unitary, hamiltonian: Hamiltonian, q: float = 0.5) -> WorkQuasiprobability:
    """Work quasiprobability of a unitary cycle on a state.

    Coincident work values are merged within ``1e-9 * (spectral spread)``,
    which keeps the atom list canonical when the spectrum has rational gaps.
    """
    if not 0.0 <= q <= 1.0:
        raise OutOfRange(f"q must lie in [0, 1], got {q}")
    values, weights = raw_work_atoms(rho, unitary, hamiltonian, q)
    merge_tol = 1e-9 * max(hamiltonian.gap, 1.0)
    return WorkQuasiprobability.from_atoms(values, weights, merge_tol=merge_tol)


def mean_work(p: WorkQuasiprobability) -> float:
    """First moment; equals the average work independently of ``q``."""
    return float(np.dot(p.values, p.weights))


def expected_utility(p: WorkQuasiprobability, u: UtilityFunction) -> float:
    """Quasiprobability average of the utility, ``sum_w u(w) p(w)``."""
    return float(np.dot(np.asarray(u(p.values), dtype=float), p.weights))


def negativity(p: WorkQuasiprobability) -> float:
    """Total negative weight, ``sum_w max(0, -p(w))``; zero for classical."""
    return float(np.clip(-p.weights, 0.0, None).sum())


def prefer(p1: WorkQuasiprobability, p2: WorkQuasiprobability, u: UtilityFunction, tol: float = 1e-9) -> str:
    """Expected-utility preference between two distributions.

    Returns ``"first"``, ``"second"`` or ``"indifferent"`` (the latter when
    the expected utilities agree within ``tol``).
    """
    delta = expected_utility(p1, u) - expected_utility(p2, u)
    if abs(delta) < tol:
        return "indifferent"
    return "first" if delta > 0 else "second"


def prefer_sets(c1, c2, u: UtilityFunction) -> bool:
    """Set-level preference between families of quasiprobabilities.

    ``c1`` is preferred to ``c2`` iff the worst-case expected utility over
    ``c1`` exceeds the worst case over ``c2`` (equivalent to the for-all /
    exists ordering of the underlying distributions).
    """
    c1, c2 = list(c1), list(c2)
    if not c1 or not c2:
        raise EmptySet("preference between sets needs both sets nonempty")
    lo1 = min(expected_utility(p, u) for p in c1)
    lo2 = min(expected_utility(p, u) for p in c2)
    return lo1 > lo2
