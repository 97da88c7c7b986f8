"""Independent oracles used by the test suite.

Everything here deliberately avoids the library's optimized code paths:
plain triple loops, dense parameter sweeps and finite differences, so the
tests compare two genuinely different routes to the same number.
"""

import numpy as np


def enumerate_work_atoms(rho_e, u_mat_e, energies, q):
    """Triple-loop enumeration of the work distribution in the energy basis.

    Returns an unmerged list of (work value, weight) pairs.
    """
    d = len(energies)
    ud = u_mat_e.conj().T
    atoms = []
    for i in range(d):
        for j in range(d):
            for k in range(d):
                weight = (rho_e[i, j] * ud[j, k] * u_mat_e[k, i]).real
                w = q * energies[i] + (1 - q) * energies[j] - energies[k]
                atoms.append((w, weight))
    return atoms


def merge_atoms(atoms, tol=1e-9, drop_tol=1e-14):
    """Sort atoms by work value, sum weights of coincident values, drop the
    structural zeros of the triple sum."""
    atoms = sorted(atoms)
    merged = []
    for w, weight in atoms:
        if merged and abs(w - merged[-1][0]) <= tol:
            merged[-1][1] += weight
        else:
            merged.append([w, weight])
    return [(w, wt) for w, wt in merged if abs(wt) > drop_tol]


def sweep_u2(n_amp=401, n_phase=65):
    """Dense sweep of 2x2 unitaries [[a e^{it}, -b], [b, a e^{-it}]].

    The global phase and the relative phase of the second column do not
    affect any expectation used in the tests, so two parameters suffice.
    """
    for a2 in np.linspace(0.0, 1.0, n_amp):
        a = np.sqrt(a2)
        b = np.sqrt(1.0 - a2)
        for t in np.linspace(0.0, 2 * np.pi, n_phase):
            yield np.array([[a * np.exp(1j * t), -b], [b, a * np.exp(-1j * t)]])


def brute_max_expected_utility(rho_e, energies, q, u, n_amp=401, n_phase=65):
    """Grid maximum of the expected utility over 2x2 unitaries."""
    best = -np.inf
    for u_mat in sweep_u2(n_amp, n_phase):
        total = sum(wt * u(w) for w, wt in enumerate_work_atoms(rho_e, u_mat, energies, q))
        best = max(best, total)
    return best


def brute_max_work(rho_e, energies, n_amp=401, n_phase=65):
    """Grid maximum of the average work over 2x2 unitaries."""
    h = np.diag(energies).astype(complex)
    e0 = np.trace(h @ rho_e).real
    best = -np.inf
    for u_mat in sweep_u2(n_amp, n_phase):
        final = u_mat @ rho_e @ u_mat.conj().T
        best = max(best, e0 - np.trace(h @ final).real)
    return best


def finite_difference_risk_aversion(u, w, step=1e-5):
    """Arrow-Pratt coefficient from central finite differences."""
    d1 = (u(w + step) - u(w - step)) / (2 * step)
    d2 = (u(w + step) - 2 * u(w) + u(w - step)) / step**2
    return -d2 / d1


def forall_exists_prefers(set1, set2, u, expected_utility_fn):
    """The quantifier form of the set preference: for every distribution in
    the first set there is a strictly worse one in the second."""
    vals1 = [expected_utility_fn(p, u) for p in set1]
    vals2 = [expected_utility_fn(p, u) for p in set2]
    return all(any(v1 > v2 for v2 in vals2) for v1 in vals1)
