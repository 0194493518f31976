"""Bipartite correlation quantifiers: closed forms and variational bounds.

The two-qubit closed forms (spin flip, concurrence, Wootters entanglement
of formation) double as oracles for the variational routines, which work
for any desk-scale dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _optim
from .errors import BadCut, DimTooLarge, NotPure, NotTwoQubit
from .measures import entropy_from_eigenvalues, split_cut, von_neumann_entropy
from .qstate import (
    RANK_TOL,
    DensityMatrix,
    Ensemble,
    MeasurementBasis,
    PureState,
    as_density,
    clip_spectrum,
    herm_eig,
    partial_trace,
    random_unitary,
)

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)

MAX_EOF_DIM = 16
MAX_MEASURED_DIM = 4


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs shared by every variational quantity.

    ``tolerance`` sets the local-search stopping criteria and the
    convergence declaration: a result is *converged* when the best and
    second-best restarts agree within ``10 * tolerance``.
    ``ensemble_size`` overrides the ``rank**2`` members used for E_f.
    """

    restarts: int = 20
    max_iterations: int = 5000
    tolerance: float = 1e-9
    seed: int = 0
    ensemble_size: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.ensemble_size is not None and self.ensemble_size < 1:
            raise ValueError("ensemble_size must be >= 1")


@dataclass(frozen=True)
class OptResult:
    """Outcome of a multistart search.

    ``spread`` is the range of the restart values; ``gap`` the distance
    between the two best restarts. ``mode`` names the search space used
    (``"exact"``, ``"ensemble"``, ``"projective"`` or ``"povm"``).
    """

    value: float
    argument: np.ndarray
    converged: bool
    spread: float
    gap: float
    mode: str
    restart_values: tuple[float, ...] = ()
    ensemble: Ensemble | None = None
    measurement: np.ndarray | None = None

    def __float__(self):
        return float(self.value)


def _as_pure(psi) -> PureState:
    if isinstance(psi, PureState):
        return psi
    rho = as_density(psi)
    if rho.purity() < 1 - 1e-10:
        raise NotPure("state is not pure")
    evals, evecs = herm_eig(rho.mat)
    return PureState(evecs[:, 0], rho.dims)


def binary_entropy(x: float) -> float:
    return float(entropy_from_eigenvalues(np.clip([x, 1.0 - x], 0.0, 1.0)))


def entanglement_entropy(psi, cut=(0,)) -> float:
    """Entropy of the A marginal of a pure bipartite state."""
    psi = _as_pure(psi)
    a, _ = split_cut(psi, cut)
    return von_neumann_entropy(partial_trace(psi, a))


# -- two-qubit closed forms --------------------------------------------------------


SUPPORT_TOL = 1e-14


def _two_qubit(rho) -> DensityMatrix:
    rho = as_density(rho)
    if rho.dims != (2, 2):
        raise NotTwoQubit(f"expected dims (2, 2), got {rho.dims}")
    return rho


def spin_flip(rho) -> np.ndarray:
    """``(sy (x) sy) rho* (sy (x) sy)``."""
    m = _two_qubit(rho).mat
    return YY @ m.conj() @ YY


def jaeger_measure(rho) -> float:
    """``Tr rho rho~`` evaluated through subsystem purities.

    The direct trace with the spin-flipped matrix is computed as well and the
    two must agree to 1e-10.
    """
    rho = _two_qubit(rho)
    direct = float(np.real(np.trace(rho.mat @ spin_flip(rho))))
    pa = partial_trace(rho, 0).purity()
    pb = partial_trace(rho, 1).purity()
    value = 1.0 - pa - pb + rho.purity()
    if abs(direct - value) > 1e-10:
        raise ArithmeticError(f"Tr rho rho~ forms disagree: {direct!r} vs {value!r}")
    return value


def concurrence(rho) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are the square roots of the eigenvalues of ``rho rho~``. With
    ``rho = A A^dagger`` over the numerically nonzero spectrum, these are the
    eigenvalues of the small Hermitian matrix ``A^dagger rho~ A``; working
    on the support keeps round-off in the null space (amplified by the square
    root) out of the result.
    """
    rho = _two_qubit(rho)
    evals, evecs = np.linalg.eigh(rho.mat)
    keep = evals > SUPPORT_TOL
    a = evecs[:, keep] * np.sqrt(evals[keep])
    r = a.conj().T @ spin_flip(rho) @ a
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (r + r.conj().T)), 0.0, None))[::-1]
    lam = np.concatenate([lam, np.zeros(4 - lam.size)])
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof_from_concurrence(c: float) -> float:
    return binary_entropy(0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - c * c))))


def wootters_eof(rho) -> float:
    """Closed-form entanglement of formation of two qubits."""
    return eof_from_concurrence(concurrence(rho))


# -- variational entanglement of formation ----------------------------------------


def _bipartite_matrix(rho: DensityMatrix, cut):
    """Reorder factors as (A..., B...) and return the matrix with dA, dB."""
    a, b = split_cut(rho, cut)
    order = a + b
    n = rho.n_sub
    t = rho.mat.reshape(rho.dims + rho.dims)
    t = t.transpose(list(order) + [n + i for i in order])
    d_a = int(np.prod([rho.dims[i] for i in a]))
    d_b = int(np.prod([rho.dims[i] for i in b]))
    return t.reshape(d_a * d_b, d_a * d_b), d_a, d_b


def _eof_objective(amps: np.ndarray, k: int, d_a: int):
    """Average member entanglement and its gradient over isometry parameters.

    ``amps[i]`` is the i-th weighted eigenvector ``sqrt(l_i) |v_i>`` reshaped to
    ``(dA, dB)``. Member ``j`` of the ensemble is ``sum_i U_ji amps[i]`` with
    ``U`` the polar factor of the parameter matrix ``W``.
    """
    r = amps.shape[0]
    n = k * r
    eye = np.eye(d_a)

    def fg(x):
        w = (x[:n] + 1j * x[n:]).reshape(k, r)
        s, q = np.linalg.eigh(w.conj().T @ w)
        rs = np.sqrt(np.clip(s, 1e-300, None))
        pinv = (q / rs) @ q.conj().T
        u = w @ pinv
        m = np.einsum("ji,iab->jab", u, amps)
        sig = m @ m.conj().transpose(0, 2, 1)
        ev, evec = np.linalg.eigh(sig)
        ev = np.clip(ev, 0.0, None)
        p = ev.sum(axis=-1)
        logp = np.log2(np.clip(p, 1e-300, None))
        f = float(np.sum(entropy_from_eigenvalues(ev) + p * logp))
        # d/dsigma of -Tr s log s + Tr s log Tr s is -log s + log(Tr s) I (bits)
        lg = np.log2(np.clip(ev, 1e-300, None))
        grad_sig = -np.einsum("jab,jb,jcb->jac", evec, lg, evec.conj()) + logp[:, None, None] * eye
        gam = np.einsum("jba,jbc,ica->ji", m.conj(), grad_sig, amps)
        gu_h = 2 * gam.T  # (dF/dU)^dagger for df = Re Tr(G^dagger dU)
        b = pinv @ gu_h @ w @ pinv
        z = (q.conj().T @ b @ q) / (rs[:, None] + rs[None, :])
        c = q @ z @ q.conj().T
        h = pinv @ gu_h - (c + c.conj().T) @ w.conj().T
        g = np.concatenate([h.T.real.ravel(), -h.T.imag.ravel()])
        return f, g

    return fg


def _ensemble_from(x, amps, k, dims) -> Ensemble:
    r = amps.shape[0]
    u = _optim.isometry_from_params(x, k, r)
    vecs = np.einsum("ji,iab->jab", u, amps).reshape(k, -1)
    p = np.real(np.sum(vecs.conj() * vecs, axis=1))
    keep = p > RANK_TOL
    members = [PureState(v / np.sqrt(q), dims) for v, q in zip(vecs[keep], p[keep])]
    return Ensemble(p[keep] / p[keep].sum(), members)


def entanglement_of_formation(rho, cut=(0,), cfg: OptimizerConfig | None = None) -> OptResult:
    """Variational entanglement of formation (an upper bound on the true value).

    Ensembles are ``k``-member decompositions obtained by mixing the
    purification ancilla with a ``k x rank`` isometry, ``k = rank**2`` by
    default. Each restart starts from a Haar isometry and runs L-BFGS with an
    analytic gradient.

    Raises
    ------
    DimTooLarge
        If the total dimension exceeds 16.
    """
    cfg = cfg or OptimizerConfig()
    rho = as_density(rho)
    if rho.dim > MAX_EOF_DIM:
        raise DimTooLarge(f"total dimension {rho.dim} exceeds {MAX_EOF_DIM}")
    mat, d_a, d_b = _bipartite_matrix(rho, cut)
    evals, evecs = herm_eig(mat)
    evals = clip_spectrum(evals)
    r = max(int(np.sum(evals > RANK_TOL)), 1)
    dims = (d_a, d_b)
    if r == 1:
        psi = PureState(evecs[:, 0], dims)
        val = entanglement_entropy(psi)
        return OptResult(val, np.zeros(0), True, 0.0, 0.0, "exact", (val,), Ensemble([1.0], [psi]))
    amps = (evecs[:, :r] * np.sqrt(evals[:r])).T.reshape(r, d_a, d_b)
    k = cfg.ensemble_size or r * r
    k = max(k, r)
    fg = _eof_objective(amps, k, d_a)
    starts = [
        _optim.params_from_isometry(_optim.haar_isometry(k, r, _optim.restart_rng(cfg.seed, i)))
        for i in range(cfg.restarts)
    ]
    out = _optim.multistart_minimize(
        fg, starts, method="L-BFGS-B", jac=True,
        max_iterations=cfg.max_iterations, tolerance=cfg.tolerance,
    )
    value = max(out.best_value, 0.0)
    return OptResult(
        value=value,
        argument=out.best_x,
        converged=out.gap <= 10 * cfg.tolerance,
        spread=out.spread,
        gap=out.gap,
        mode="ensemble",
        restart_values=tuple(out.values),
        ensemble=_ensemble_from(out.best_x, amps, k, dims),
    )


# -- classical correlation ---------------------------------------------------------


def _measured_blocks(rho_um: np.ndarray, d_u: int, v: np.ndarray):
    """Unnormalized post-measurement states of the unmeasured side.

    ``rho_um`` is the state ordered (unmeasured, measured); row ``j`` of ``v``
    is ``<u_j|`` so the outcome operators are ``|u_j><u_j|``.
    """
    d_m = v.shape[1]
    t = rho_um.reshape(d_u, d_m, d_u, d_m)
    half = np.einsum("ambn,jn->jamb", t, v.conj())
    return np.einsum("jm,jamb->jab", v, half)


def _avg_conditional_entropy(rho_um, d_u, v) -> float:
    sig = _measured_blocks(rho_um, d_u, v)
    ev = np.clip(np.linalg.eigvalsh(sig), 0.0, None)
    p = ev.sum(axis=-1)
    keep = p >= 1e-12
    ev, p = ev[keep], p[keep]
    return float(np.sum(entropy_from_eigenvalues(ev) + p * np.log2(p)))


def classical_correlation(
    rho,
    measured: int = 1,
    cfg: OptimizerConfig | None = None,
    mode: str = "projective",
    initial: list[np.ndarray] | None = None,
) -> OptResult:
    """Classical correlation ``J`` of the unmeasured side given measurements on ``measured``.

    ``J = S(rho_U) - min sum_j p_j S(rho_U|j)``, the minimum running over
    rank-1 orthogonal projective measurements (``mode="projective"``, a
    unitary on the measured side) or rank-1 POVMs with ``d**2`` outcomes
    (``mode="povm"``, an isometry into a larger space). Restarts use
    Nelder-Mead; projective mode also tries the computational basis.

    ``initial`` holds extra starting measurements, each a ``(K, d)`` matrix
    whose rows are the bras ``<u_j|``.
    """
    cfg = cfg or OptimizerConfig()
    rho = as_density(rho)
    if rho.n_sub != 2:
        raise BadCut("classical correlation needs a bipartite state")
    if measured not in (0, 1):
        raise BadCut(f"measured side must be 0 or 1, got {measured}")
    d_m = rho.dims[measured]
    d_u = rho.dims[1 - measured]
    if d_m > MAX_MEASURED_DIM:
        raise DimTooLarge(f"measured dimension {d_m} exceeds {MAX_MEASURED_DIM}")
    t = rho.mat.reshape(rho.dims + rho.dims)
    if measured == 0:
        t = t.transpose(1, 0, 3, 2)
    rho_um = np.ascontiguousarray(t).reshape(rho.dim, rho.dim)
    s_u = von_neumann_entropy(partial_trace(rho, 1 - measured))

    if mode == "projective":
        k = d_m

        def to_v(x):
            return _optim.unitary_from_params(x, d_m)

        starts = [np.zeros(d_m * d_m)]
        starts += [
            _optim.params_from_unitary(random_unitary(d_m, _optim.restart_rng(cfg.seed, i)))
            for i in range(cfg.restarts)
        ]
        starts += [_optim.params_from_unitary(np.asarray(v)) for v in initial or ()]
    elif mode == "povm":
        k = d_m * d_m

        def to_v(x):
            return _optim.isometry_from_params(x, k, d_m)

        seed_meas = classical_correlation(rho, measured, cfg, "projective")
        embedded = np.zeros((k, d_m), dtype=complex)
        embedded[:d_m] = seed_meas.measurement
        starts = [_optim.params_from_isometry(embedded)]
        starts += [
            _optim.params_from_isometry(_optim.haar_isometry(k, d_m, _optim.restart_rng(cfg.seed, i)))
            for i in range(cfg.restarts)
        ]
        for v in initial or ():
            pad = np.zeros((k, d_m), dtype=complex)
            pad[: len(v)] = v
            starts.append(_optim.params_from_isometry(pad))
    else:
        raise ValueError(f"unknown measurement mode {mode!r}")

    def objective(x):
        return _avg_conditional_entropy(rho_um, d_u, to_v(x))

    out = _optim.multistart_minimize(
        objective, starts, method="Nelder-Mead",
        max_iterations=cfg.max_iterations, tolerance=cfg.tolerance,
    )
    value = min(max(s_u - out.best_value, 0.0), s_u)
    return OptResult(
        value=value,
        argument=out.best_x,
        converged=out.gap <= 10 * cfg.tolerance,
        spread=out.spread,
        gap=out.gap,
        mode=mode,
        restart_values=tuple(s_u - v for v in out.values),
        measurement=to_v(out.best_x),
    )


def measurement_basis(result: OptResult) -> MeasurementBasis:
    """The optimal projective measurement of a ``projective`` J result."""
    if result.mode != "projective":
        raise ValueError("only projective results define an orthonormal basis")
    return MeasurementBasis(result.measurement.conj().T)


def koashi_winter_terms(psi_abe, cfg: OptimizerConfig | None = None, mode="projective", swap=False):
    """``(S(A), E_f(AB), J_{A|E}, E_f result, J result)`` for a tripartite pure state.

    With ``swap`` the roles of B and E are exchanged. E_f uses the Wootters
    closed form when the pair is two qubits, otherwise the variational bound.
    """
    psi = _as_pure(psi_abe)
    if psi.n_sub != 3:
        raise BadCut(f"expected a tripartite state, got dims {psi.dims}")
    if max(psi.dims) > MAX_MEASURED_DIM:
        raise DimTooLarge(f"factor dimension above {MAX_MEASURED_DIM} in {psi.dims}")
    b, e = (2, 1) if swap else (1, 2)
    rho_ab = partial_trace(psi, (0, b))
    rho_ae = partial_trace(psi, (0, e))
    s_a = von_neumann_entropy(partial_trace(psi, 0))
    if rho_ab.dims == (2, 2):
        c = concurrence(rho_ab)
        ef = OptResult(eof_from_concurrence(c), np.array([c]), True, 0.0, 0.0, "wootters")
    else:
        ef = entanglement_of_formation(rho_ab, (0,), cfg)
    j = classical_correlation(rho_ae, 1, cfg, mode)
    return s_a, ef.value, j.value, ef, j


def koashi_winter_residual(psi_abe, cfg: OptimizerConfig | None = None, mode="projective") -> float:
    """``|S(A) - E_f(AB) - J_{A|E}(AE)|``."""
    s_a, ef, j, _, _ = koashi_winter_terms(psi_abe, cfg, mode)
    return abs(s_a - ef - j)
