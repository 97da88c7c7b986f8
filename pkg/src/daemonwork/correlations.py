"""Correlation classifiers and quantifiers for small bipartite states.

Entanglement is detected exactly by the positive-partial-transpose criterion
(valid up to dimension 2x3) and quantified for two qubits by the Wootters
concurrence; one-way quantum correlations use the entropic discord over
projective measurements, with the classical-quantum membership test built on
the same measured-side convention.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq, minimize

from .quantum import (
    BipartiteState,
    OutOfRange,
    QuantumError,
    ZERO_PROBABILITY,
    as_matrix,
    bloch_grid,
    bloch_vectors,
    partial_trace_ancilla,
)


class NotTwoQubit(QuantumError):
    pass


class DimensionTooLarge(QuantumError):
    pass


class NotImplementedDimension(QuantumError):
    pass


_SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])


def concurrence(rho_sa: BipartiteState) -> float:
    """Wootters concurrence of a two-qubit state, in [0, 1]."""
    if (rho_sa.d_s, rho_sa.d_a) != (2, 2):
        raise NotTwoQubit(f"concurrence needs 2x2, got {rho_sa.d_s}x{rho_sa.d_a}")
    m = rho_sa.mat
    yy = np.kron(_SIGMA_Y, _SIGMA_Y)
    spin_flipped = yy @ m.conj() @ yy
    evals = np.linalg.eigvals(m @ spin_flipped)
    # abs() guards the sqrt against tiny negative numerical leakage
    lam = np.sqrt(np.abs(np.sort(evals.real)[::-1]))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def partial_transpose_ancilla(rho_sa: BipartiteState) -> np.ndarray:
    """Transpose the ancilla indices of the joint state."""
    r = rho_sa.reshaped()
    return np.transpose(r, (0, 3, 2, 1)).reshape(rho_sa.dim, rho_sa.dim)


def is_separable_2x2(rho_sa: BipartiteState, tol: float = 1e-9) -> bool:
    """Exact separability test by positive partial transpose.

    Valid only while PPT is necessary and sufficient, i.e. joint dimension
    at most 6.
    """
    if rho_sa.dim > 6:
        raise DimensionTooLarge(
            f"PPT is only exact up to joint dimension 6, got {rho_sa.dim}"
        )
    pt = partial_transpose_ancilla(rho_sa)
    return float(np.linalg.eigvalsh(pt).min()) >= -tol


def _system_dephasing_residuals(rho4: np.ndarray, v_batch: np.ndarray) -> np.ndarray:
    """Frobenius distance between the state and its system-side dephasing,
    for a batch of system bases (columns of each ``v_batch[g]``)."""
    rot = np.einsum("gki,kalb,glj->giajb", v_batch.conj(), rho4, v_batch)
    off = rot.copy()
    d_s = rho4.shape[0]
    for i in range(d_s):
        off[:, i, :, i, :] = 0.0
    return np.sqrt(np.einsum("giajb,giajb->g", off, off.conj()).real)


def is_classical_quantum(rho_sa: BipartiteState, tol: float = 1e-7) -> bool:
    """True iff some system basis leaves the state invariant under
    system-side dephasing (the defining property of classical-quantum
    states). Implemented for two-level systems by a Bloch grid search with
    Nelder-Mead refinement.
    """
    if rho_sa.d_s != 2:
        raise NotImplementedDimension(
            f"classical-quantum detection implemented for d_s = 2, got {rho_sa.d_s}"
        )
    rho4 = rho_sa.reshaped()
    tt, pp, grid = bloch_grid(128, 64)
    residuals = _system_dephasing_residuals(rho4, grid)
    k = int(np.argmin(residuals))
    best = float(residuals[k])
    if best < tol:
        return True
    res = minimize(
        lambda x: float(_system_dephasing_residuals(rho4, bloch_vectors(x[0], x[1]))[0]),
        np.array([tt[k], pp[k]]),
        method="Nelder-Mead",
        options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-14},
    )
    return float(res.fun) < tol


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues below 1e-15 contribute zero."""
    evals = np.linalg.eigvalsh(as_matrix(rho))
    evals = evals[evals > 1e-15]
    return float(-np.dot(evals, np.log2(evals)))


def _batched_entropy2(blocks: np.ndarray) -> np.ndarray:
    """Entropies (bits) of a batch of unnormalized 2x2 blocks with traces.

    Returns ``(traces, p * S(block / p))`` so callers can accumulate the
    conditional-entropy average without dividing by vanishing probabilities.
    """
    p = np.einsum("...ii->...", blocks).real
    evals = np.linalg.eigvalsh(blocks)
    evals = np.clip(evals.real, 0.0, None)
    safe = np.where(evals > 1e-15, evals, 1.0)
    plogp = evals * np.log2(safe)
    psafe = np.where(p > ZERO_PROBABILITY, p, 1.0)
    # p * S(block/p) = -sum_k e_k log2(e_k) + p log2(p), e_k unnormalized
    contrib = -plogp.sum(axis=-1) + p * np.log2(psafe)
    return p, np.where(p > ZERO_PROBABILITY, contrib, 0.0)


def quantum_discord(
    rho_sa: BipartiteState,
    measured: str = "system",
    n_theta: int = 64,
    n_phi: int = 32,
    refine: bool = True,
) -> float:
    """Entropic quantum discord of a two-qubit state.

    Mutual information minus the classical correlation maximized over
    rank-one projective measurements on the measured side (``"system"`` by
    default, matching the classical-quantum convention; ``"ancilla"``
    measures the other side). Nonnegative, and zero exactly on states that
    are classical with respect to the measured side.
    """
    if (rho_sa.d_s, rho_sa.d_a) != (2, 2):
        raise NotTwoQubit(f"discord needs 2x2, got {rho_sa.d_s}x{rho_sa.d_a}")
    if measured == "ancilla":
        swapped = np.transpose(rho_sa.reshaped(), (1, 0, 3, 2)).reshape(4, 4)
        return quantum_discord(
            BipartiteState(swapped, 2, 2), "system", n_theta, n_phi, refine
        )
    if measured != "system":
        raise OutOfRange(f"measured must be 'system' or 'ancilla', got {measured!r}")

    rho4 = rho_sa.reshaped()
    s_meas = von_neumann_entropy(partial_trace_ancilla(rho_sa))
    s_joint = von_neumann_entropy(rho_sa)

    def avg_conditional_entropy(v_batch: np.ndarray) -> np.ndarray:
        # unnormalized ancilla blocks per system outcome
        blocks = np.einsum("iajb,gin,gjn->gnab", rho4, v_batch.conj(), v_batch)
        _, contrib = _batched_entropy2(blocks)
        return contrib.sum(axis=-1)

    tt, pp, grid = bloch_grid(n_theta, n_phi)
    cond = avg_conditional_entropy(grid)
    k = int(np.argmin(cond))
    best = float(cond[k])
    if refine:
        res = minimize(
            lambda x: float(avg_conditional_entropy(bloch_vectors(x[0], x[1]))[0]),
            np.array([tt[k], pp[k]]),
            method="Nelder-Mead",
            options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-14},
        )
        best = min(best, float(res.fun))
    return s_meas - s_joint + best


def binary_entropy(x: float) -> float:
    """Shannon entropy of a bit, ``-x log2 x - (1-x) log2 (1-x)``."""
    if not 0.0 <= x <= 1.0:
        raise OutOfRange(f"binary entropy argument {x} outside [0, 1]")
    total = 0.0
    for t in (x, 1.0 - x):
        if t > 0.0:
            total -= t * np.log2(t)
    return float(total)


def binary_entropy_inverse(y: float) -> float:
    """Inverse of the binary entropy on the branch [0, 1/2].

    Satisfies ``binary_entropy(binary_entropy_inverse(y)) = y`` to 1e-10.
    """
    if not 0.0 <= y <= 1.0:
        raise OutOfRange(f"binary entropy value {y} outside [0, 1]")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    return float(brentq(lambda x: binary_entropy(x) - y, 0.0, 0.5, xtol=1e-14))
