"""Decoherence experiments with an explicit environment.

Snapshots are closed-form in ``t``: each one is a pure global state built
from a dilation, so every reduced state (and E_f of system-environment
pairs) is directly computable.

Dephasing dilation
    ``sum_k c_k |o_k> (x) |e_k(t)>`` with ``<e_j|e_k> = exp(-gamma t)`` for
    ``j != k``. The environment vectors are the columns of the square root of
    that Gram matrix, so a qubit system couples to one environment qubit
    through a controlled rotation.

Measurement model (system A, apparatus M, environment E, all qubits)
    ``sum_k c_k |k>_A (x) sum_m <m|a_k(t)> |m>_M (x) |e_m(t)>_E`` where
    ``|a_0> = |0>``, ``|a_1(t)> = cos th |0> + sin th |1>`` with
    ``th(t) = (pi/2)(1 - exp(-coupling t))`` (a controlled copy switched on
    gradually), and the environment dephases the apparatus in its
    computational basis at rate ``gamma_env``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlations import OptimizerConfig, classical_correlation, concurrence, eof_from_concurrence
from .errors import GridTooCoarse, MissingKey, NotPure, NotQubit
from .measures import (
    coherence,
    conditional_information,
    predictability,
    von_neumann_entropy,
)
from .qstate import (
    MeasurementBasis,
    PureState,
    as_density,
    herm_eig,
    partial_trace,
)
from .relations import ccr_pure

CSV_COLUMNS = ("C_re", "P_vn", "S_vn", "E_f_AE", "J_AA", "I_AA", "ccr_residual")


@dataclass(frozen=True)
class ChannelSpec:
    kind: str = "dephasing"
    rate: float = 1.0
    basis: MeasurementBasis | None = None

    def __post_init__(self):
        if self.kind not in ("dephasing", "measurementInteraction"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.rate < 0:
            raise ValueError("rate must be non-negative")


@dataclass(frozen=True)
class Trajectory:
    """Quantifier values on an increasing time grid, one column per name."""

    times: np.ndarray
    records: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        records = {k: np.asarray(v, dtype=float) for k, v in self.records.items()}
        for k, v in records.items():
            if v.shape != times.shape:
                raise ValueError(f"column {k!r} has {v.size} values for {times.size} times")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "records", records)

    def __getitem__(self, key) -> np.ndarray:
        try:
            return self.records[key]
        except KeyError:
            raise MissingKey(f"trajectory has no column {key!r}") from None

    def __len__(self):
        return self.times.size

    def rows(self, columns=None):
        columns = list(self.records) if columns is None else list(columns)
        for i, t in enumerate(self.times):
            yield {"time": float(t), **{c: float(self[c][i]) for c in columns}}


def _pure_vector(state) -> tuple[np.ndarray, int]:
    if isinstance(state, PureState):
        return state.vec, state.dim
    rho = as_density(state)
    if rho.purity() < 1 - 1e-10:
        raise NotPure("dilation needs a pure system state")
    evals, evecs = herm_eig(rho.mat)
    return evecs[:, 0], rho.dim


def environment_states(d: int, overlap: float) -> np.ndarray:
    """Columns ``e_k`` with unit norm and pairwise overlap ``overlap``."""
    gram = (1 - overlap) * np.eye(d) + overlap * np.ones((d, d))
    w, v = np.linalg.eigh(gram)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def dilate_dephasing(rho_a, gamma: float, t: float, basis=None) -> PureState:
    """System-environment pure state whose A marginal is dephased by ``exp(-gamma t)``.

    Raises
    ------
    NotPure
        If the system state is mixed.
    """
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")
    vec, d = _pure_vector(rho_a)
    v = np.eye(d) if basis is None else MeasurementBasis(getattr(basis, "vectors", basis)).vectors
    c = v.conj().T @ vec
    env = environment_states(d, float(np.exp(-gamma * t)))
    psi = np.einsum("ik,k,ek->ie", v, c, env).reshape(-1)
    return PureState(psi / np.linalg.norm(psi), (d, d))


def _uniform_step(t_grid) -> tuple[np.ndarray, float]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise GridTooCoarse(f"need at least 3 time points, got {t.size}")
    h = np.diff(t)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * max(1.0, abs(h[0])):
        raise ValueError("time grid must be uniform and increasing")
    return t, float(h.mean())


def _entropy_rate(rho: np.ndarray, drho: np.ndarray) -> float:
    """``d/dt S`` given ``rho`` and ``d rho/dt`` (traceless), in bits per unit time."""
    evals, evecs = np.linalg.eigh(rho)
    keep = evals > 1e-15
    diag = np.einsum("ik,ij,jk->k", evecs.conj(), drho, evecs).real
    return float(-np.sum(diag[keep] * np.log2(evals[keep])))


@dataclass(frozen=True)
class RateCheck:
    """Finite-difference test of coherence loss against entanglement creation.

    ``coherence_rate`` is ``-dC_re/dt`` and ``entanglement_rate`` is
    ``dE_f/dt``, both by central differences at the interior grid points.
    ``max_rate_mismatch`` is the largest gap between the two.
    ``entanglement_rate_exact`` is the analytic derivative of
    ``E_f(AE) = S(rho_A)``; ``truncation_error`` is the largest deviation of
    the numerical coherence rate from it and shrinks as ``h**2``.
    """

    trajectory: Trajectory
    interior_times: np.ndarray
    coherence_rate: np.ndarray
    entanglement_rate: np.ndarray
    entanglement_rate_exact: np.ndarray
    max_rate_mismatch: float
    truncation_error: float
    step: float


def rate_check(psi_a, gamma: float, t_grid, basis=None) -> RateCheck:
    """Check that dephasing converts coherence into system-environment entanglement."""
    t, h = _uniform_step(t_grid)
    vec, d = _pure_vector(psi_a)
    basis = None if basis is None else MeasurementBasis(getattr(basis, "vectors", basis))
    cols = {k: [] for k in ("C_re", "P_vn", "S_vn", "E_f_AE", "ccr_residual")}
    exact = []
    for ti in t:
        psi = dilate_dephasing(PureState(vec), gamma, ti, basis)
        rho_a = partial_trace(psi, 0)
        cols["C_re"].append(coherence(rho_a, basis))
        cols["P_vn"].append(predictability(rho_a, basis))
        cols["S_vn"].append(von_neumann_entropy(rho_a))
        cols["E_f_AE"].append(von_neumann_entropy(partial_trace(psi, 1)))
        cols["ccr_residual"].append(ccr_pure(psi, basis).residual)
        deph = _dephased_matrix(rho_a.mat, basis)
        exact.append(_entropy_rate(rho_a.mat, -gamma * (rho_a.mat - deph)))
    traj = Trajectory(t, cols)
    c, e = traj["C_re"], traj["E_f_AE"]
    coh_rate = -(c[2:] - c[:-2]) / (2 * h)
    ent_rate = (e[2:] - e[:-2]) / (2 * h)
    exact = np.array(exact)[1:-1]
    return RateCheck(
        trajectory=traj,
        interior_times=t[1:-1],
        coherence_rate=coh_rate,
        entanglement_rate=ent_rate,
        entanglement_rate_exact=exact,
        max_rate_mismatch=float(np.max(np.abs(coh_rate - ent_rate))),
        truncation_error=float(np.max(np.abs(coh_rate - exact))),
        step=h,
    )


def _dephased_matrix(mat: np.ndarray, basis) -> np.ndarray:
    v = np.eye(mat.shape[0]) if basis is None else basis.vectors
    p = np.einsum("ik,ij,jk->k", v.conj(), mat, v)
    return (v * p) @ v.conj().T


def measurement_state(system, gamma_env: float, t: float, coupling: float | None = None) -> PureState:
    """Global A (x) M (x) E pure state of the measurement model at time ``t``."""
    vec, d = _pure_vector(system)
    if d != 2:
        raise NotQubit("measurement model needs a qubit system")
    coupling = 2.0 * gamma_env if coupling is None else coupling
    theta = 0.5 * np.pi * (1.0 - np.exp(-coupling * t))
    pointer = np.array([[1.0, np.cos(theta)], [0.0, np.sin(theta)]])  # column k = |a_k>
    env = environment_states(2, float(np.exp(-gamma_env * t)))  # column m = |e_m>
    psi = np.einsum("k,mk,em->kme", vec, pointer, env).reshape(-1)
    return PureState(psi / np.linalg.norm(psi), (2, 2, 2))


def measurement_model(
    system,
    gamma_env: float,
    t_grid,
    cfg: OptimizerConfig | None = None,
    coupling: float | None = None,
) -> Trajectory:
    """Pointer-basis experiment on a system qubit, an apparatus qubit and an environment qubit.

    Records, at every time: ``C_re``, ``P_vn``, ``S_vn`` of the system,
    ``E_f_AE`` (Wootters), ``J_AA`` (system given projective measurements on
    the apparatus), ``I_AA`` (conditional information), ``ccr_residual``
    (pure-state CCR of A against the rest), ``kw_residual`` (the four-term
    CCR with the apparatus as auxiliary system) and ``global_purity``.

    ``coupling`` is the rate of the premeasurement rotation; by default
    twice ``gamma_env``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size < 3:
        raise GridTooCoarse(f"need at least 3 time points, got {t.size}")
    cfg = cfg or OptimizerConfig(restarts=1)
    names = CSV_COLUMNS + ("kw_residual", "global_purity")
    cols = {k: [] for k in names}
    previous = None
    for ti in t:
        psi = measurement_state(system, gamma_env, ti, coupling)
        rho_a = partial_trace(psi, 0)
        rho_am = partial_trace(psi, (0, 1))
        rho_ae = partial_trace(psi, (0, 2))
        c, p = coherence(rho_a), predictability(rho_a)
        ef = eof_from_concurrence(concurrence(rho_ae))
        j = classical_correlation(rho_am, 1, cfg, initial=None if previous is None else [previous])
        previous = j.measurement
        bip = PureState(psi.vec, (2, 4))
        cols["C_re"].append(c)
        cols["P_vn"].append(p)
        cols["S_vn"].append(von_neumann_entropy(rho_a))
        cols["E_f_AE"].append(ef)
        cols["J_AA"].append(j.value)
        cols["I_AA"].append(conditional_information(rho_am, (0,)))
        cols["ccr_residual"].append(ccr_pure(bip).residual)
        cols["kw_residual"].append(abs(ef + j.value + p + c - 1.0))
        cols["global_purity"].append(float(abs(np.vdot(psi.vec, psi.vec)) ** 2))
    return Trajectory(t, cols)


def pointer_basis_detect(traj: Trajectory, window: int = 10, epsilon: float = 1e-3, key: str = "J_AA"):
    """Earliest time from which ``key`` stays flat over every trailing window.

    A trailing window ending at sample ``k`` covers the ``window`` samples up
    to ``k`` (fewer at the start of the series) and is flat when its range is
    below ``epsilon``. Returns ``None`` if the last window is not flat.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    values = traj[key]
    flat = np.array(
        [np.ptp(values[max(0, k - window + 1) : k + 1]) < epsilon for k in range(values.size)]
    )
    if not flat.size or not flat[-1]:
        return None
    unstable = np.flatnonzero(~flat)
    first = 0 if unstable.size == 0 else int(unstable[-1]) + 1
    return float(traj.times[first])
