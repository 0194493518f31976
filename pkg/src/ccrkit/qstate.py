"""Dense quantum-state containers, composition/reduction and random states.

Subsystem order follows the tensor-product order: index 0 is the leftmost
factor, so a state on ``A (x) B (x) E`` has ``dims == (dA, dB, dE)``.
All containers are immutable; their arrays are flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import BadIndex, InvalidState, NotHermitian, WeightMismatch

TOL = 1e-10
# eigenvalues below this are treated as zero when counting rank
RANK_TOL = 1e-12


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _as_dims(dims) -> tuple[int, ...]:
    if np.isscalar(dims):
        return (int(dims),)
    return tuple(int(d) for d in dims)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def clip_spectrum(evals: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Zero out eigenvalues in ``[-tol, 0)``; anything more negative is invalid."""
    evals = np.asarray(evals, dtype=float)
    if evals.size and evals.min() < -tol:
        raise InvalidState(f"negative eigenvalue {evals.min():.3e} below -{tol:g}")
    return np.clip(evals, 0.0, None)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix with a factor list.

    Parameters
    ----------
    mat : array_like
        Square complex matrix of side ``prod(dims)``.
    dims : sequence of int, optional
        Subsystem dimensions. Defaults to a single system.
    """

    mat: np.ndarray
    dims: tuple[int, ...] = None

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidState(f"density matrix must be square, got shape {mat.shape}")
        dims = (mat.shape[0],) if self.dims is None else _as_dims(self.dims)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != mat.shape[0]:
            raise InvalidState(f"dims {dims} do not match matrix side {mat.shape[0]}")
        if not np.all(np.isfinite(mat)):
            raise InvalidState("matrix has non-finite entries")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > TOL:
            raise NotHermitian("density matrix is not Hermitian within 1e-10")
        if abs(np.trace(mat) - 1.0) > TOL:
            raise InvalidState(f"trace {np.trace(mat).real:.12g} differs from 1")
        if np.linalg.eigvalsh(mat).min() < -TOL:
            raise InvalidState("density matrix is not positive semidefinite")
        object.__setattr__(self, "mat", _readonly(mat))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n_sub(self) -> int:
        return len(self.dims)

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in descending order with numerical noise clipped to zero."""
        return clip_spectrum(np.linalg.eigvalsh(self.mat)[::-1])

    def purity(self) -> float:
        return float(np.real(np.vdot(self.mat, self.mat)))

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector with a factor list."""

    vec: np.ndarray
    dims: tuple[int, ...] = None

    def __post_init__(self):
        vec = np.array(self.vec, dtype=complex).reshape(-1)
        dims = (vec.size,) if self.dims is None else _as_dims(self.dims)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != vec.size:
            raise InvalidState(f"dims {dims} do not match vector length {vec.size}")
        if not np.all(np.isfinite(vec)):
            raise InvalidState("state vector has non-finite entries")
        if abs(np.vdot(vec, vec).real - 1.0) > TOL:
            raise InvalidState("state vector is not normalized within 1e-10")
        object.__setattr__(self, "vec", _readonly(vec))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.vec.size

    @property
    def n_sub(self) -> int:
        return len(self.dims)

    def dm(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vec, self.vec.conj()), self.dims)

    def __repr__(self):
        return f"PureState(dims={self.dims})"


def as_density(state, dims=None) -> DensityMatrix:
    """Coerce a DensityMatrix, PureState, vector or matrix into a DensityMatrix."""
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.dm()
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return PureState(arr, dims).dm()
    return DensityMatrix(arr, dims)


def normalized(vec, dims=None) -> PureState:
    vec = np.asarray(vec, dtype=complex)
    return PureState(vec / np.linalg.norm(vec), dims)


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal rank-1 projective measurement.

    ``vectors[:, k]`` is the eigenvector ``|o_k>`` of the observable; the
    projectors are ``|o_k><o_k|``.
    """

    vectors: np.ndarray
    labels: tuple[float, ...] | None = None

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidState("basis vectors must form a square matrix")
        if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0]))) > TOL:
            raise InvalidState("basis vectors are not orthonormal within 1e-10")
        labels = None if self.labels is None else tuple(float(x) for x in self.labels)
        if labels is not None and len(labels) != v.shape[0]:
            raise InvalidState("one label per basis vector required")
        object.__setattr__(self, "vectors", _readonly(v))
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def projectors(self) -> np.ndarray:
        """Array of shape ``(dim, dim, dim)``; ``projectors[k]`` is ``Pi_k``."""
        v = self.vectors
        return np.einsum("ik,jk->kij", v, v.conj())

    @classmethod
    def computational(cls, dim: int) -> "MeasurementBasis":
        return cls(np.eye(dim))

    @classmethod
    def from_projectors(cls, projectors, labels=None) -> "MeasurementBasis":
        P = np.asarray(projectors, dtype=complex)
        d = P.shape[-1]
        if P.shape != (d, d, d):
            raise InvalidState("need exactly dim rank-1 projectors of side dim")
        for k, p in enumerate(P):
            if np.max(np.abs(p @ p - p)) > TOL or abs(np.trace(p) - 1) > TOL:
                raise InvalidState(f"projector {k} is not a rank-1 idempotent")
            for j in range(k):
                if np.max(np.abs(P[j] @ p)) > TOL:
                    raise InvalidState(f"projectors {j} and {k} are not orthogonal")
        if np.max(np.abs(P.sum(axis=0) - np.eye(d))) > TOL:
            raise InvalidState("projectors do not resolve the identity")
        vecs = np.stack([np.linalg.eigh(p)[1][:, -1] for p in P], axis=1)
        return cls(vecs, labels)

    @classmethod
    def from_observable(cls, observable) -> "MeasurementBasis":
        evals, evecs = herm_eig(observable)
        return cls(evecs, evals)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Probability-weighted collection of states sharing one factor list."""

    weights: np.ndarray
    members: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        members = tuple(self.members)
        if len(members) != w.size:
            raise WeightMismatch("one weight per ensemble member required")
        if np.any(w < -TOL) or abs(w.sum() - 1.0) > TOL:
            raise WeightMismatch("ensemble weights must be a probability vector")
        if len({m.dims for m in members}) > 1:
            raise InvalidState("ensemble members must share dims")
        object.__setattr__(self, "weights", _readonly(w))
        object.__setattr__(self, "members", members)

    @property
    def dims(self):
        return self.members[0].dims

    def density(self) -> DensityMatrix:
        mat = sum(p * as_density(m).mat for p, m in zip(self.weights, self.members))
        return DensityMatrix(0.5 * (mat + mat.conj().T), self.dims)


# -- linear algebra --------------------------------------------------------------


def kron(a, b, *more) -> np.ndarray:
    """Kronecker product of two or more matrices, left to right."""
    return reduce(np.kron, (a, b) + more)


def tensor(*states):
    """Tensor product of states; pure inputs stay pure."""
    if all(isinstance(s, PureState) for s in states):
        vec = reduce(np.kron, [s.vec for s in states])
        return PureState(vec, sum((s.dims for s in states), ()))
    rhos = [as_density(s) for s in states]
    return DensityMatrix(reduce(np.kron, [r.mat for r in rhos]), sum((r.dims for r in rhos), ()))


def herm_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns
    -------
    evals : ndarray
        Real eigenvalues sorted in descending order.
    evecs : ndarray
        Unitary matrix whose columns are the matching eigenvectors.

    Raises
    ------
    NotHermitian
        If ``max |m - m^dagger| > 1e-10``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > TOL:
        raise NotHermitian("matrix is not Hermitian within 1e-10")
    evals, evecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    return evals[::-1].copy(), evecs[:, ::-1].copy()


def _normalize_keep(keep, n: int) -> tuple[int, ...]:
    keep = (keep,) if np.isscalar(keep) else tuple(keep)
    if not keep:
        raise BadIndex("keep must name at least one subsystem")
    for k in keep:
        if not isinstance(k, (int, np.integer)) or not 0 <= k < n:
            raise BadIndex(f"subsystem index {k!r} out of range for {n} subsystems")
    if len(set(keep)) != len(keep):
        raise BadIndex(f"repeated subsystem index in {keep}")
    return tuple(sorted(int(k) for k in keep))


def _pure_reduce(vec: np.ndarray, dims, keep) -> np.ndarray:
    n = len(dims)
    rest = [i for i in range(n) if i not in keep]
    t = vec.reshape(dims).transpose(list(keep) + rest)
    dk = int(np.prod([dims[i] for i in keep]))
    m = t.reshape(dk, -1)
    return m @ m.conj().T


def partial_trace(state, keep) -> DensityMatrix:
    """Reduce ``state`` to the subsystems listed in ``keep``.

    ``state`` may be a DensityMatrix or a PureState; the result keeps the
    original factor order regardless of the order of ``keep``.
    """
    if isinstance(state, PureState):
        keep = _normalize_keep(keep, state.n_sub)
        red = _pure_reduce(state.vec, state.dims, keep)
        return DensityMatrix(0.5 * (red + red.conj().T), tuple(state.dims[i] for i in keep))
    rho = as_density(state)
    keep = _normalize_keep(keep, rho.n_sub)
    n = rho.n_sub
    if len(keep) == n:
        return rho
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise BadIndex("too many subsystems")
    rows = list(letters[:n])
    cols = [letters[n + i] if i in keep else rows[i] for i in range(n)]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    t = rho.mat.reshape(rho.dims + rho.dims)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    dk = int(np.prod([rho.dims[i] for i in keep]))
    red = red.reshape(dk, dk)
    return DensityMatrix(0.5 * (red + red.conj().T), tuple(rho.dims[i] for i in keep))


def purify(rho) -> PureState:
    """Canonical purification ``sum_i sqrt(l_i) |v_i> (x) |i>``.

    The ancilla is appended as the last factor and has dimension equal to
    the number of eigenvalues above 1e-12, so ``partial_trace(psi, range(n))``
    returns ``rho``.
    """
    rho = as_density(rho)
    evals, evecs = herm_eig(rho.mat)
    evals = clip_spectrum(evals)
    r = max(int(np.sum(evals > RANK_TOL)), 1)
    amp = evecs[:, :r] * np.sqrt(evals[:r])
    vec = amp.reshape(-1)  # row index of A, column index of ancilla
    return PureState(vec / np.linalg.norm(vec), rho.dims + (r,))


# -- random states ---------------------------------------------------------------


def random_pure(dims, seed=None) -> PureState:
    """Haar-random pure state from a normalized complex Gaussian vector."""
    dims = _as_dims(dims)
    if any(d < 2 for d in dims):
        raise ValueError(f"every subsystem dimension must be >= 2, got {dims}")
    rng = _rng(seed)
    d = int(np.prod(dims))
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(z / np.linalg.norm(z), dims)


def random_mixed(dims, rank=None, seed=None) -> DensityMatrix:
    """Random state of the induced measure: trace out a rank-sized ancilla.

    ``rank == dim`` gives the Hilbert-Schmidt measure; ``rank == 1`` a Haar
    pure state.
    """
    dims = _as_dims(dims)
    d = int(np.prod(dims))
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    rng = _rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix(0.5 * (m + m.conj().T), dims)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the phase correction."""
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_basis(d: int, seed=None) -> MeasurementBasis:
    return MeasurementBasis(random_unitary(d, seed))


def random_probabilities(n: int, seed=None) -> np.ndarray:
    """Uniform point on the probability simplex."""
    return _rng(seed).dirichlet(np.ones(n))


# -- quantum-classical states ----------------------------------------------------


def _check_qc(weights, conditionals):
    w = np.asarray(weights, dtype=float).reshape(-1)
    conds = [as_density(c) for c in conditionals]
    if len(conds) != w.size or w.size == 0:
        raise WeightMismatch(f"{w.size} weights for {len(conds)} conditional states")
    if np.any(w < -TOL) or abs(w.sum() - 1.0) > TOL:
        raise WeightMismatch("weights must form a probability vector")
    if len({c.dim for c in conds}) != 1:
        raise WeightMismatch("conditional states must share a dimension")
    return np.clip(w, 0.0, None), conds


def quantum_classical_state(weights, conditionals) -> DensityMatrix:
    """``sum_j p_j rho_{A|j} (x) |j><j|`` on ``(dA, dB)`` with ``dB = len(weights)``."""
    w, conds = _check_qc(weights, conditionals)
    dA, dB = conds[0].dim, w.size
    mat = np.zeros((dA * dB, dA * dB), dtype=complex)
    for j, (p, c) in enumerate(zip(w, conds)):
        proj = np.zeros((dB, dB))
        proj[j, j] = 1.0
        mat += p * np.kron(c.mat, proj)
    return DensityMatrix(mat, (dA, dB))


def purify_quantum_classical(weights, conditionals) -> PureState:
    """Purification ``sum_{j,k} sqrt(p_j a_jk) |a_jk>_A |j>_B |c_jk>_E``.

    ``a_jk, |a_jk>`` is the spectral decomposition of the j-th conditional
    state and ``|c_jk>`` is the computational basis vector ``j*dA + k`` of an
    environment of dimension ``dA*dB``.
    """
    w, conds = _check_qc(weights, conditionals)
    dA, dB = conds[0].dim, w.size
    dE = dA * dB
    psi = np.zeros((dA, dB, dE), dtype=complex)
    for j, (p, c) in enumerate(zip(w, conds)):
        a, vecs = herm_eig(c.mat)
        a = clip_spectrum(a)
        for k in range(dA):
            psi[:, j, j * dA + k] += np.sqrt(p * a[k]) * vecs[:, k]
    vec = psi.reshape(-1)
    return PureState(vec / np.linalg.norm(vec), (dA, dB, dE))


# -- named states ----------------------------------------------------------------


def basis_state(index: int | Sequence[int], dims) -> PureState:
    """Computational basis ket; ``index`` is a flat index or one digit per factor."""
    dims = _as_dims(dims)
    flat = int(np.ravel_multi_index(tuple(index), dims)) if not np.isscalar(index) else int(index)
    vec = np.zeros(int(np.prod(dims)), dtype=complex)
    vec[flat] = 1.0
    return PureState(vec, dims)


def plus_state() -> PureState:
    return PureState(np.array([1, 1]) / np.sqrt(2))


def bell_state(kind: str = "phi+") -> PureState:
    s = 1 / np.sqrt(2)
    vecs = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    return PureState(np.array(vecs[kind]), (2, 2))


def ghz_state(n: int = 3) -> PureState:
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = vec[-1] = 1 / np.sqrt(2)
    return PureState(vec, (2,) * n)


def w_state(n: int = 3) -> PureState:
    vec = np.zeros(2**n, dtype=complex)
    for i in range(n):
        vec[1 << i] = 1 / np.sqrt(n)
    return PureState(vec, (2,) * n)


def maximally_mixed(dims) -> DensityMatrix:
    dims = _as_dims(dims)
    d = int(np.prod(dims))
    return DensityMatrix(np.eye(d) / d, dims)


def werner_state(p: float) -> DensityMatrix:
    """``p |Phi+><Phi+| + (1 - p) I/4``."""
    phi = bell_state("phi+").dm().mat
    return DensityMatrix(p * phi + (1 - p) * np.eye(4) / 4, (2, 2))


def parse_dims(spec: str | Iterable[int]) -> tuple[int, ...]:
    """Parse ``"2x3"`` style dimension strings."""
    if isinstance(spec, str):
        try:
            dims = tuple(int(x) for x in spec.lower().split("x"))
        except ValueError:
            raise ValueError(f"cannot parse dims {spec!r}") from None
    else:
        dims = tuple(int(x) for x in spec)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"invalid dims {spec!r}")
    return dims
