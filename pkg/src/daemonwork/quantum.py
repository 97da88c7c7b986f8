"""Validated primitives for finite-dimensional quantum states.

Conventions used throughout the package:

* Operators are dense complex numpy matrices; density operators have unit
  trace and nonnegative spectrum within tolerance.
* Bipartite states live on ``system (x) ancilla`` with row-major composite
  indexing, i.e. joint index ``s * d_a + a`` (the ``numpy.kron`` order).
* Eigenvector matrices store basis vectors as columns.
* Hamiltonians carry strictly increasing energies; degenerate spectra are
  rejected at construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Tolerance for state/operator validity checks (closed forms are exact to
#: machine precision, so this only absorbs floating-point noise).
TOL = 1e-9

#: Tolerance when comparing numerical-optimizer output against closed forms.
OPT_TOL = 1e-6

#: Measurement outcomes below this probability are skipped: they contribute
#: zero to every outcome-weighted sum.
ZERO_PROBABILITY = 1e-12


class QuantumError(ValueError):
    """Base class for domain errors raised by this package."""


class NotHermitian(QuantumError):
    pass


class NotPositive(QuantumError):
    pass


class TraceNotOne(QuantumError):
    pass


class DimensionMismatch(QuantumError):
    pass


class ZeroProbabilityOutcome(QuantumError):
    pass


class IncompleteProjectorSet(QuantumError):
    pass


class DegenerateSpectrum(QuantumError):
    pass


class OutOfRange(QuantumError):
    pass


class ParseError(QuantumError):
    """Malformed specification string (CLI state/utility specs)."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


def as_matrix(obj) -> np.ndarray:
    """Unwrap a wrapper type (anything with a ``.mat``) to its numpy matrix."""
    return np.asarray(getattr(obj, "mat", obj), dtype=complex)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermitian_defect(m: np.ndarray) -> float:
    """Largest entrywise deviation of ``m`` from its Hermitian part."""
    return float(np.abs(m - dagger(m)).max())


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace operator.

    Use :func:`validate_density` to construct one from a raw matrix; the
    constructor itself does not re-check the invariants.
    """

    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", _freeze(self.mat))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on system (x) ancilla with known local dimensions."""

    mat: np.ndarray
    d_s: int
    d_a: int

    def __post_init__(self):
        object.__setattr__(self, "mat", _freeze(self.mat))
        if self.mat.shape != (self.d_s * self.d_a, self.d_s * self.d_a):
            raise DimensionMismatch(
                f"joint matrix is {self.mat.shape}, expected "
                f"({self.d_s * self.d_a}, {self.d_s * self.d_a})"
            )

    @property
    def dim(self) -> int:
        return self.d_s * self.d_a

    def reshaped(self) -> np.ndarray:
        """View as a rank-4 tensor indexed ``[s, a, s', a']``."""
        return self.mat.reshape(self.d_s, self.d_a, self.d_s, self.d_a)


@dataclass(frozen=True)
class Hamiltonian:
    """Energies in strictly increasing order with their eigenbasis.

    ``basis`` stores the eigenvectors as columns; identity by default
    (diagonal Hamiltonian).
    """

    energies: np.ndarray
    basis: np.ndarray | None = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        gaps = np.diff(e)
        if e.size > 1 and gaps.min() <= TOL:
            raise DegenerateSpectrum(
                f"energies must be strictly increasing; smallest gap {gaps.min():.3e}"
            )
        object.__setattr__(self, "energies", e)
        b = np.eye(e.size, dtype=complex) if self.basis is None else np.asarray(self.basis, dtype=complex)
        defect = float(np.abs(dagger(b) @ b - np.eye(e.size)).max())
        if defect > TOL:
            raise NotHermitian(f"eigenbasis is not orthonormal; defect {defect:.3e}")
        object.__setattr__(self, "basis", _freeze(b))
        e.setflags(write=False)

    @classmethod
    def from_matrix(cls, h) -> "Hamiltonian":
        vals, vecs = eig_sorted(h, order="ascending")
        return cls(vals, vecs)

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def gap(self) -> float:
        """Top-to-bottom spread of the spectrum."""
        return float(self.energies[-1] - self.energies[0])

    @property
    def mat(self) -> np.ndarray:
        return self.basis @ np.diag(self.energies).astype(complex) @ dagger(self.basis)

    def projectors(self) -> list[np.ndarray]:
        return [np.outer(self.basis[:, k], self.basis[:, k].conj()) for k in range(self.dim)]

    def to_energy_basis(self, op) -> np.ndarray:
        """Matrix elements of ``op`` in the energy eigenbasis."""
        m = as_matrix(op)
        return dagger(self.basis) @ m @ self.basis

    def from_energy_basis(self, op) -> np.ndarray:
        m = as_matrix(op)
        return self.basis @ m @ dagger(self.basis)


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal ancilla basis defining rank-one projectors.

    ``vectors`` holds the basis states as columns of a unitary matrix.
    """

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionMismatch(f"basis matrix must be square, got {v.shape}")
        defect = float(np.abs(dagger(v) @ v - np.eye(v.shape[0])).max())
        if defect > TOL:
            raise NotHermitian(f"basis vectors not orthonormal; defect {defect:.3e}")
        object.__setattr__(self, "vectors", _freeze(v))

    @classmethod
    def computational(cls, dim: int) -> "MeasurementBasis":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def from_bloch(cls, theta: float, phi: float) -> "MeasurementBasis":
        """Qubit basis {cos(t/2)|0> + e^{i p} sin(t/2)|1>, orthogonal partner}."""
        a0 = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        a1 = np.array([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)])
        return cls(np.column_stack([a0, a1]))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def vector(self, a: int) -> np.ndarray:
        return self.vectors[:, a]


@dataclass(frozen=True)
class Unitary:
    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        defect = float(np.abs(dagger(m) @ m - np.eye(m.shape[0])).max())
        if defect > TOL:
            raise NotHermitian(f"matrix is not unitary; defect {defect:.3e}")
        object.__setattr__(self, "mat", _freeze(m))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def validate_density(matrix, tol: float = TOL) -> DensityMatrix:
    """Check the density-operator invariants and return a validated state.

    A Hermiticity defect below ``tol`` is silently repaired by replacing the
    matrix with its Hermitian part; anything larger raises.

    Raises
    ------
    NotHermitian, NotPositive, TraceNotOne
        Named after the violated invariant; the message carries its size.
    """
    m = as_matrix(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got shape {m.shape}")
    defect = hermitian_defect(m)
    if defect > tol:
        raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds tol {tol:.1e}")
    m = (m + dagger(m)) / 2
    tr = float(m.trace().real)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(f"trace is {tr!r}, off by {tr - 1.0:.3e}")
    lo = float(np.linalg.eigvalsh(m).min())
    if lo < -tol:
        raise NotPositive(f"smallest eigenvalue {lo:.3e} below -tol")
    return DensityMatrix(m)


def validate_bipartite(matrix, d_s: int, d_a: int, tol: float = TOL) -> BipartiteState:
    """Validate a joint density operator with the given local dimensions."""
    state = validate_density(matrix, tol=tol)
    return BipartiteState(state.mat, d_s, d_a)


def partial_trace_ancilla(rho_sa: BipartiteState) -> DensityMatrix:
    """Reduced state of the system, tracing out the ancilla."""
    r = rho_sa.reshaped()
    return DensityMatrix(np.einsum("iaja->ij", r))


def partial_trace_system(rho_sa: BipartiteState) -> DensityMatrix:
    """Reduced state of the ancilla, tracing out the system."""
    r = rho_sa.reshaped()
    return DensityMatrix(np.einsum("iaib->ab", r))


def conditional_state(
    rho_sa: BipartiteState, basis: MeasurementBasis, a: int
) -> tuple[DensityMatrix, float]:
    """System state conditioned on ancilla outcome ``a``, with its probability.

    Returns the normalized post-measurement state of the system after the
    rank-one ancilla projector ``|a><a|`` fires. Conditioning satisfies
    ``sum_a p_a = 1`` and ``sum_a p_a rho_{S|a} = rho_S``.

    Raises
    ------
    ZeroProbabilityOutcome
        If ``p_a`` is below :data:`ZERO_PROBABILITY`; the conditional state
        is undefined and the branch contributes zero to daemonic sums.
    """
    vecs = basis.vectors if isinstance(basis, MeasurementBasis) else np.asarray(basis, dtype=complex)
    if vecs.shape[0] != rho_sa.d_a:
        raise DimensionMismatch(
            f"basis dimension {vecs.shape[0]} does not match ancilla dimension {rho_sa.d_a}"
        )
    v = vecs[:, a]
    block = np.einsum("iajb,a,b->ij", rho_sa.reshaped(), v.conj(), v)
    p = float(block.trace().real)
    if p < ZERO_PROBABILITY:
        raise ZeroProbabilityOutcome(f"outcome {a} has probability {p:.3e}")
    return validate_density(block / p), p


def projectors_from_basis(basis) -> list[np.ndarray]:
    """Rank-one projectors onto the columns of a basis matrix."""
    b = np.asarray(getattr(basis, "vectors", basis), dtype=complex)
    return [np.outer(b[:, k], b[:, k].conj()) for k in range(b.shape[1])]


def dephase(rho, projectors) -> DensityMatrix:
    """Remove coherences between the ranges of a complete projector set.

    ``projectors`` must be rank-one, mutually orthogonal and sum to the
    identity; the output is diagonal in that basis with the diagonal of
    ``rho`` preserved.
    """
    m = as_matrix(rho)
    projs = [as_matrix(p) for p in projectors]
    total = sum(projs)
    defect = float(np.abs(total - np.eye(m.shape[0])).max())
    if defect > TOL:
        raise IncompleteProjectorSet(f"projectors sum to identity with defect {defect:.3e}")
    for i, pi in enumerate(projs):
        if abs(pi.trace() - 1.0) > TOL or np.abs(pi @ pi - pi).max() > TOL:
            raise IncompleteProjectorSet(f"projector {i} is not rank-one idempotent")
    out = sum(p @ m @ p for p in projs)
    return validate_density(out)


def energy_dephase(rho, hamiltonian: Hamiltonian) -> DensityMatrix:
    """Dephasing in the energy eigenbasis."""
    return dephase(rho, hamiltonian.projectors())


def eig_sorted(h, order: str = "ascending") -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with deterministic ordering.

    Eigenvectors are returned as columns, each phase-fixed so its first
    nonvanishing component is real positive. Within a degenerate group the
    columns are sorted lexicographically by their (rounded) components, which
    makes the output reproducible across runs.
    """
    m = as_matrix(h)
    defect = hermitian_defect(m)
    if defect > TOL:
        raise NotHermitian(f"matrix is not Hermitian; defect {defect:.3e}")
    vals, vecs = np.linalg.eigh((m + dagger(m)) / 2)

    for k in range(vals.size):
        v = vecs[:, k]
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size:
            phase = v[nz[0]] / abs(v[nz[0]])
            vecs[:, k] = v / phase

    # deterministic tie-breaking inside degenerate groups
    start = 0
    while start < vals.size:
        stop = start + 1
        while stop < vals.size and abs(vals[stop] - vals[start]) <= 1e-10:
            stop += 1
        if stop - start > 1:
            cols = list(range(start, stop))
            keys = {
                k: tuple(
                    (round(float(x.real), 10), round(float(x.imag), 10)) for x in vecs[:, k]
                )
                for k in cols
            }
            ordered = sorted(cols, key=lambda k: keys[k], reverse=True)
            vecs[:, start:stop] = vecs[:, ordered]
        start = stop

    if order == "descending":
        vals = vals[::-1].copy()
        vecs = vecs[:, ::-1].copy()
    elif order != "ascending":
        raise OutOfRange(f"order must be 'ascending' or 'descending', got {order!r}")
    return vals, vecs


def psd_order(a, b, tol: float = TOL) -> bool:
    """True iff ``a - b`` is positive semidefinite within tolerance."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes {ma.shape} and {mb.shape} differ")
    for name, m in (("left", ma), ("right", mb)):
        defect = hermitian_defect(m)
        if defect > tol:
            raise NotHermitian(f"{name} operand not Hermitian; defect {defect:.3e}")
    diff = (ma + dagger(ma) - mb - dagger(mb)) / 2
    return float(np.linalg.eigvalsh(diff).min()) >= -tol


def bloch_vectors(thetas, phis) -> np.ndarray:
    """Batch of qubit basis matrices (columns = outcome vectors) per angle pair."""
    tt = np.atleast_1d(np.asarray(thetas, dtype=float))
    pp = np.atleast_1d(np.asarray(phis, dtype=float))
    c, s = np.cos(tt / 2), np.sin(tt / 2)
    ph = np.exp(1j * pp)
    v = np.empty((tt.size, 2, 2), dtype=complex)
    v[:, 0, 0] = c
    v[:, 1, 0] = ph * s
    v[:, 0, 1] = -s / ph
    v[:, 1, 1] = c
    return v


def bloch_grid(n_theta: int, n_phi: int):
    """Angle grid over the Bloch sphere with its basis-matrix batch.

    The polar grid starts at zero, so the computational basis is always an
    exact grid point.
    """
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    tt, pp = (m.ravel() for m in np.meshgrid(thetas, phis, indexing="ij"))
    return tt, pp, bloch_vectors(tt, pp)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def complex_gaussian(shape, rng) -> np.ndarray:
    """Matrix of independent standard complex Gaussians."""
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


def random_density(dim: int, rank: int | None = None, seed=None) -> DensityMatrix:
    """Random density matrix from the Hilbert-Schmidt-induced measure.

    Normalized ``G G^dag`` with ``G`` a ``dim x rank`` complex Gaussian
    matrix; ``rank=dim`` (the default) gives the Hilbert-Schmidt ensemble,
    ``rank=1`` gives Haar-random pure states.
    """
    rank = dim if rank is None else rank
    if rank > dim or rank < 1:
        raise OutOfRange(f"rank {rank} must lie in [1, {dim}]")
    g = complex_gaussian((dim, rank), _rng(seed))
    m = g @ dagger(g)
    return DensityMatrix(m / m.trace().real)


def random_unitary(dim: int, seed=None) -> Unitary:
    """Haar-random unitary via QR of a Gaussian matrix with phase-fixed R."""
    z = complex_gaussian((dim, dim), _rng(seed))
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return Unitary(q * ph)


def random_bipartite(d_s: int, d_a: int, seed=None, rank: int | None = None) -> BipartiteState:
    """Random joint state on system (x) ancilla (Hilbert-Schmidt measure)."""
    rho = random_density(d_s * d_a, rank=rank, seed=seed)
    return BipartiteState(rho.mat, d_s, d_a)
