"""Entropic quantifiers of single states and bipartitions, in bits.

Coherence and predictability are taken with respect to a
:class:`~ccrkit.qstate.MeasurementBasis`; when none is given the
computational basis of the whole system is used, which for a composite
system is the product of the local computational bases.

Bipartite quantities take a ``cut``: the subsystem indices forming part A.
Everything else is part B.
"""

from __future__ import annotations

import numpy as np

from .errors import BadCut, DimMismatch, NotQubit
from .qstate import (
    DensityMatrix,
    MeasurementBasis,
    as_density,
    clip_spectrum,
    partial_trace,
)


def entropy_from_eigenvalues(evals) -> np.ndarray:
    """``-sum l log2 l`` along the last axis, with ``0 log 0 = 0``.

    Works on batches: an array of shape ``(..., d)`` gives shape ``(...)``.
    Round-off can push the sum of a pure spectrum to ``-1e-16``; the result
    is floored at zero.
    """
    w = np.asarray(evals, dtype=float)
    pos = w > 0
    logs = np.log2(np.where(pos, w, 1.0))
    return np.maximum(-np.sum(np.where(pos, w * logs, 0.0), axis=-1), 0.0)


def shannon_entropy(p) -> float:
    """Shannon entropy ``H(p)`` in bits."""
    p = clip_spectrum(np.asarray(p, dtype=float).reshape(-1))
    return float(entropy_from_eigenvalues(p))


def von_neumann_entropy(rho) -> float:
    """``S_vn(rho) = -Tr rho log2 rho`` from the eigenvalues of ``rho``."""
    return float(entropy_from_eigenvalues(as_density(rho).eigenvalues()))


def linear_entropy(rho) -> float:
    """``S_l(rho) = 1 - Tr rho^2``."""
    return 1.0 - as_density(rho).purity()


def _basis_for(rho: DensityMatrix, basis) -> MeasurementBasis:
    if basis is None:
        return MeasurementBasis.computational(rho.dim)
    if not isinstance(basis, MeasurementBasis):
        basis = MeasurementBasis(basis)
    if basis.dim != rho.dim:
        raise DimMismatch(f"basis of dimension {basis.dim} for a state of dimension {rho.dim}")
    return basis


def populations(rho, basis=None) -> np.ndarray:
    """Outcome probabilities ``<o_k|rho|o_k>`` of measuring in ``basis``."""
    rho = as_density(rho)
    v = _basis_for(rho, basis).vectors
    p = np.einsum("ik,ij,jk->k", v.conj(), rho.mat, v).real
    return clip_spectrum(p)


def dephase(rho, basis=None) -> DensityMatrix:
    """Non-selective projective measurement ``sum_k Pi_k rho Pi_k``."""
    rho = as_density(rho)
    v = _basis_for(rho, basis).vectors
    p = populations(rho, basis)
    mat = (v * p) @ v.conj().T
    return DensityMatrix(0.5 * (mat + mat.conj().T), rho.dims)


def coherence(rho, basis=None) -> float:
    """Relative entropy of coherence ``S_vn(dephase(rho)) - S_vn(rho)``."""
    rho = as_density(rho)
    return shannon_entropy(populations(rho, basis)) - von_neumann_entropy(rho)


def predictability(rho, basis=None) -> float:
    """``log2 d - S_vn(dephase(rho))``: a priori knowledge of the outcome."""
    rho = as_density(rho)
    return float(np.log2(rho.dim)) - shannon_entropy(populations(rho, basis))


def irreality(rho, basis=None) -> float:
    """Local irreality of the observable diagonal in ``basis``.

    Defined through the post-measurement state, ``S_vn(Phi(rho)) - S_vn(rho)``;
    numerically identical to :func:`coherence`.
    """
    rho = as_density(rho)
    return von_neumann_entropy(dephase(rho, basis)) - von_neumann_entropy(rho)


def reality(rho, basis=None) -> float:
    """Local reality ``log2 d - irreality``."""
    rho = as_density(rho)
    return float(np.log2(rho.dim)) - irreality(rho, basis)


def _qubit(rho) -> np.ndarray:
    rho = as_density(rho)
    if rho.dim != 2:
        raise NotQubit(f"expected a single qubit, got dimension {rho.dim}")
    return rho.mat


def gy_visibility(rho) -> float:
    """Greenberger-Yasin fringe visibility ``2 |rho_01|`` of a qubit."""
    return float(2 * abs(_qubit(rho)[0, 1]))


def gy_predictability(rho) -> float:
    """Greenberger-Yasin path predictability ``|rho_00 - rho_11|`` of a qubit."""
    m = _qubit(rho)
    return float(abs(m[0, 0].real - m[1, 1].real))


def gy_mean_square(rho) -> float:
    """Average of the squared qubit properties, ``(V**2 + P**2) / 2``."""
    return 0.5 * (gy_visibility(rho) ** 2 + gy_predictability(rho) ** 2)


def split_cut(rho: DensityMatrix, cut) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Validate a bipartition and return ``(A indices, B indices)``."""
    n = rho.n_sub
    if n < 2:
        raise BadCut("bipartite quantity needs a state with at least two subsystems")
    cut = (cut,) if np.isscalar(cut) else tuple(cut)
    if not cut or len(set(cut)) != len(cut):
        raise BadCut(f"invalid cut {cut}")
    if any(not isinstance(i, (int, np.integer)) or not 0 <= i < n for i in cut):
        raise BadCut(f"cut {cut} references a missing subsystem")
    a = tuple(sorted(int(i) for i in cut))
    b = tuple(i for i in range(n) if i not in a)
    if not b:
        raise BadCut(f"cut {cut} leaves part B empty")
    return a, b


def _marginal_entropies(rho, cut):
    rho = as_density(rho)
    a, b = split_cut(rho, cut)
    s_a = von_neumann_entropy(partial_trace(rho, a))
    s_b = von_neumann_entropy(partial_trace(rho, b))
    d_a = int(np.prod([rho.dims[i] for i in a]))
    return s_a, s_b, von_neumann_entropy(rho), d_a


def mutual_information(rho, cut=(0,)) -> float:
    """``I_{A:B} = S(A) + S(B) - S(AB)``."""
    s_a, s_b, s_ab, _ = _marginal_entropies(rho, cut)
    return s_a + s_b - s_ab


def conditional_entropy(rho, cut=(0,)) -> float:
    """``S_{A|B} = S(AB) - S(B)``; negative for entangled pure states."""
    _, s_b, s_ab, _ = _marginal_entropies(rho, cut)
    return s_ab - s_b


def coherent_information(rho, cut=(0,)) -> float:
    """``S_{A>B} = -S_{A|B} = S(B) - S(AB)``."""
    return -conditional_entropy(rho, cut)


def conditional_information(rho, cut=(0,)) -> float:
    """``I_{A|B} = log2 dA - S_{A|B}``, never below the mutual information."""
    _, s_b, s_ab, d_a = _marginal_entropies(rho, cut)
    return float(np.log2(d_a)) - (s_ab - s_b)


def state_information(rho) -> float:
    """``I(rho) = log2 d - S_vn(rho)``."""
    rho = as_density(rho)
    return float(np.log2(rho.dim)) - von_neumann_entropy(rho)
