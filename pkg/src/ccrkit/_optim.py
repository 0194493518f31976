"""Parametrizations of unitaries/isometries and a seeded multistart driver."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import logm
from scipy.optimize import minimize

from .qstate import random_unitary


@lru_cache(maxsize=None)
def _herm_layout(d: int):
    iu = np.triu_indices(d, 1)
    return np.diag_indices(d), iu, (iu[1], iu[0]), len(iu[0])


def hermitian_from_params(x: np.ndarray, d: int) -> np.ndarray:
    """Map ``d*d`` reals to a Hermitian matrix (diagonal, then Re/Im of the upper triangle)."""
    diag, iu, il, m = _herm_layout(d)
    h = np.empty((d, d), dtype=complex)
    h[diag] = x[:d]
    off = x[d : d + m] + 1j * x[d + m : d + 2 * m]
    h[iu] = off
    h[il] = off.conj()
    return h


def params_from_hermitian(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    iu = np.triu_indices(d, 1)
    return np.concatenate([np.real(np.diag(h)), h[iu].real, h[iu].imag])


def unitary_from_params(x: np.ndarray, d: int) -> np.ndarray:
    """``exp(i H(x))``: unconstrained parametrization of U(d) by d^2 reals."""
    evals, evecs = np.linalg.eigh(hermitian_from_params(x, d))
    return (evecs * np.exp(1j * evals)) @ evecs.conj().T


def params_from_unitary(u: np.ndarray) -> np.ndarray:
    h = -1j * logm(u)
    return params_from_hermitian(0.5 * (h + h.conj().T))


def isometry_from_params(x: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Polar factor of a ``rows x cols`` complex matrix built from ``2*rows*cols`` reals."""
    n = rows * cols
    w = (x[:n] + 1j * x[n:]).reshape(rows, cols)
    u, _, vh = np.linalg.svd(w, full_matrices=False)
    return u @ vh


def params_from_isometry(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real.ravel(), v.imag.ravel()])


def haar_isometry(rows: int, cols: int, seed) -> np.ndarray:
    return random_unitary(rows, seed)[:, :cols]


def restart_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for restart ``index``; prefix-stable in the restart count."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass
class MultistartOutcome:
    best_x: np.ndarray
    best_value: float
    values: list[float] = field(default_factory=list)

    @property
    def spread(self) -> float:
        return float(max(self.values) - min(self.values)) if self.values else 0.0

    @property
    def gap(self) -> float:
        """Distance between the best and second-best restart."""
        if len(self.values) < 2:
            return 0.0
        v = sorted(self.values)
        return float(v[1] - v[0])


def multistart_minimize(
    fun: Callable,
    starts: Sequence[np.ndarray],
    *,
    method: str,
    jac: bool = False,
    max_iterations: int,
    tolerance: float,
) -> MultistartOutcome:
    """Run a local minimizer from every start; ties go to the lowest start index."""
    values, best_x, best = [], None, np.inf
    for x0 in starts:
        if method == "Nelder-Mead":
            opts = dict(
                maxiter=max_iterations,
                maxfev=4 * max_iterations,
                xatol=np.sqrt(tolerance),
                fatol=tolerance,
                adaptive=len(x0) > 6,
            )
        else:
            opts = dict(maxiter=max_iterations, ftol=tolerance * 1e-2, gtol=tolerance * 1e-1)
        res = minimize(fun, np.asarray(x0, dtype=float), jac=jac, method=method, options=opts)
        # re-evaluate: Nelder-Mead may report a stale simplex value
        val = float(fun(res.x)[0]) if jac else float(fun(res.x))
        values.append(val)
        if val < best:
            best, best_x = val, np.array(res.x)
    return MultistartOutcome(best_x, best, values)
