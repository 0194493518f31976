"""Complete complementarity relations as evaluable, named reports.

Every relation evaluates its terms on a state and compares ``lhs`` (the sum
of terms) with ``rhs`` (the saturating constant, usually ``log2 d``).
Auxiliary identities that a relation is built from are recorded under
``checks`` as absolute residuals.

Relations registered for batch verification:

=======================  ==========================================  ==========
id                       relation                                    input
=======================  ==========================================  ==========
``ccr-pure``             C_re + P_vn + S_vn = log2 dA                pure AB
``ccr-reality``          R(O|rho) + C_re = log2 d                    mixed + basis
``ccr-koashi``           E_f(AB) + J_{A|E} + P_vn + C_re = log2 dA   pure ABE
``ccr-tessier``          Tr rho rho~ + S_l + S2_A + S2_B = 1         two qubits
``ccr-quantum-classical``  global and per-member CCRs                quantum-classical
``ccr-mutual-info``      I_{A:B} + S_vn + sum_k (P_k + C_k) = log2 dAdB  mixed AB
``ccr-conditional``      I_{A:B} + S_{A|B} + P_A + C_A = log2 dA     mixed AB
=======================  ==========================================  ==========
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .correlations import (
    OptimizerConfig,
    jaeger_measure,
    koashi_winter_terms,
)
from .errors import DimMismatch, NotTwoQubit, UnknownRelation
from .measures import (
    coherence,
    dephase,
    gy_mean_square,
    conditional_entropy,
    conditional_information,
    irreality,
    linear_entropy,
    mutual_information,
    predictability,
    reality,
    shannon_entropy,
    split_cut,
    state_information,
    von_neumann_entropy,
)
from .qstate import (
    DensityMatrix,
    MeasurementBasis,
    PureState,
    as_density,
    partial_trace,
    purify_quantum_classical,
    quantum_classical_state,
    random_basis,
    random_mixed,
    random_probabilities,
    random_pure,
)


@dataclass(frozen=True)
class CcrReport:
    relation_id: str
    terms: dict[str, float]
    lhs: float
    rhs: float
    residual: float
    input_digest: str
    checks: dict[str, float] = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        """Largest of the main residual and every auxiliary check."""
        return max([self.residual, *self.checks.values()])

    def to_dict(self) -> dict:
        return {
            "relation": self.relation_id,
            "terms": dict(self.terms),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "checks": dict(self.checks),
            "info": dict(self.info),
            "input_digest": self.input_digest,
        }


def digest(*arrays, seed=None) -> str:
    h = hashlib.sha256()
    if seed is not None:
        h.update(repr(seed).encode())
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


def _state_digest(state, seed=None) -> str:
    arr = state.vec if isinstance(state, PureState) else as_density(state).mat
    return digest(arr, np.asarray(state.dims), seed=seed)


def _report(rid, terms, rhs, state_digest, checks=None, info=None) -> CcrReport:
    lhs = float(sum(terms.values()))
    return CcrReport(
        relation_id=rid,
        terms={k: float(v) for k, v in terms.items()},
        lhs=lhs,
        rhs=float(rhs),
        residual=abs(lhs - float(rhs)),
        input_digest=state_digest,
        checks={k: float(v) for k, v in (checks or {}).items()},
        info=dict(info or {}),
    )


def _local(rho: DensityMatrix, part) -> DensityMatrix:
    red = partial_trace(rho, part)
    return DensityMatrix(red.mat, (red.dim,))


def ccr_pure(psi_ab, basis_a=None, cut=(0,)) -> CcrReport:
    """Pure-state CCR for the A marginal of a bipartite pure state."""
    if not isinstance(psi_ab, PureState):
        raise TypeError("ccr_pure expects a PureState")
    a, _ = split_cut(psi_ab, cut)
    rho_a = _local(psi_ab, a)
    terms = {
        "C_re": coherence(rho_a, basis_a),
        "P_vn": predictability(rho_a, basis_a),
        "S_vn": von_neumann_entropy(rho_a),
    }
    return _report("ccr-pure", terms, np.log2(rho_a.dim), _state_digest(psi_ab))


def ccr_reality(rho, basis=None) -> CcrReport:
    """Reality-coherence identity plus its split into predictability and entropy."""
    rho = as_density(rho)
    r = reality(rho, basis)
    c = coherence(rho, basis)
    p = predictability(rho, basis)
    s = von_neumann_entropy(rho)
    checks = {
        "reality_split": abs(r - (p + s)),
        "irreality_equals_coherence": abs(irreality(rho, basis) - c),
    }
    basis_digest = "" if basis is None else digest(as_basis(basis).vectors)
    return _report(
        "ccr-reality",
        {"R": r, "C_re": c},
        np.log2(rho.dim),
        _state_digest(rho) + basis_digest,
        checks,
    )


def as_basis(basis) -> MeasurementBasis:
    return basis if isinstance(basis, MeasurementBasis) else MeasurementBasis(basis)


def ccr_koashi(
    psi_abe, cfg: OptimizerConfig | None = None, *, swap: bool = False, mode: str = "projective"
) -> CcrReport:
    """Four-term CCR built on the Koashi-Winter identity.

    With ``swap`` the entanglement of formation is taken with E and the
    classical correlation with B. ``info`` records the E_f method, the
    measurement class used for J and the optimizer diagnostics.
    """
    cfg = cfg or OptimizerConfig()
    s_a, ef, j, ef_res, j_res = koashi_winter_terms(psi_abe, cfg, mode=mode, swap=swap)
    rho_a = _local(psi_abe, (0,))
    tag = ("AE", "A|B") if swap else ("AB", "A|E")
    terms = {
        f"E_f({tag[0]})": ef,
        f"J_{tag[1]}": j,
        "P_vn": predictability(rho_a),
        "C_re": coherence(rho_a),
    }
    info = {
        "ef_method": ef_res.mode,
        "j_mode": j_res.mode,
        "converged": bool(ef_res.converged and j_res.converged),
        "spread": float(max(ef_res.spread, j_res.spread)),
        "restarts": cfg.restarts,
        "swap": swap,
    }
    checks = {"koashi_winter": abs(s_a - ef - j)}
    return _report("ccr-koashi", terms, np.log2(rho_a.dim), _state_digest(psi_abe), checks, info)


def ccr_tessier(rho) -> CcrReport:
    """Two-qubit purity relation; an exact algebraic identity."""
    rho = as_density(rho)
    if rho.dims != (2, 2):
        raise NotTwoQubit(f"ccr-tessier needs dims (2, 2), got {rho.dims}")
    terms = {
        "Tr(rho rho~)": jaeger_measure(rho),
        "S_l": linear_entropy(rho),
        "S2_A": gy_mean_square(partial_trace(rho, 0)),
        "S2_B": gy_mean_square(partial_trace(rho, 1)),
    }
    return _report("ccr-tessier", terms, 1.0, _state_digest(rho))


def ccr_quantum_classical(weights, conditionals) -> list[CcrReport]:
    """Global CCR of a quantum-classical state and one CCR per conditional state.

    The global report checks the entropy split ``S(AB) = H(p) + sum p_j S_j``,
    its diagonal analogue, the predictability decomposition
    ``P(AB) = log2 dB - H(p) + sum p_j P_j`` and ``C(AB) = sum p_j C_j``, and
    that the explicit purification on A (x) B (x) E reproduces the state after tracing out E.
    """
    w = np.asarray(weights, dtype=float)
    rho = quantum_classical_state(w, conditionals)
    conds = [as_density(c) for c in conditionals]
    d_a, d_b = rho.dims
    h = shannon_entropy(w)
    s = von_neumann_entropy(rho)
    p = predictability(rho)
    c = coherence(rho)
    s_j = np.array([von_neumann_entropy(x) for x in conds])
    p_j = np.array([predictability(x) for x in conds])
    c_j = np.array([coherence(x) for x in conds])
    s_diag_j = np.array([von_neumann_entropy(dephase(x)) for x in conds])
    psi = purify_quantum_classical(w, conds)
    round_trip = np.max(np.abs(partial_trace(psi, (0, 1)).mat - rho.mat))
    checks = {
        "entropy_split": abs(s - (h + w @ s_j)),
        "diag_entropy_split": abs(von_neumann_entropy(dephase(rho)) - (h + w @ s_diag_j)),
        "predictability_split": abs(p - (np.log2(d_b) - h + w @ p_j)),
        "coherence_split": abs(c - w @ c_j),
        "purification_round_trip": round_trip,
    }
    dig = digest(rho.mat)
    reports = [
        _report("ccr-quantum-classical", {"P_vn": p, "C_re": c, "S_vn": s}, np.log2(d_a * d_b), dig, checks)
    ]
    for j, x in enumerate(conds):
        reports.append(
            _report(
                "ccr-quantum-classical-member",
                {"P_vn": p_j[j], "S_vn": s_j[j], "C_re": c_j[j]},
                np.log2(d_a),
                dig,
                info={"member": j, "weight": float(w[j])},
            )
        )
    return reports


def ccr_mutual_info(rho, cut=(0,)) -> CcrReport:
    """Informational CCR of a bipartite state with local coherence/predictability."""
    rho = as_density(rho)
    a, b = split_cut(rho, cut)
    rho_a, rho_b = _local(rho, a), _local(rho, b)
    mi = mutual_information(rho, cut)
    terms = {
        "I_{A:B}": mi,
        "S_vn": von_neumann_entropy(rho),
        "P_vn(A)": predictability(rho_a),
        "C_re(A)": coherence(rho_a),
        "P_vn(B)": predictability(rho_b),
        "C_re(B)": coherence(rho_b),
    }
    i_a, i_b = state_information(rho_a), state_information(rho_b)
    checks = {
        "state_information_split": abs(state_information(rho) - (i_a + i_b + mi)),
        "local_information_A": abs(i_a - terms["P_vn(A)"] - terms["C_re(A)"]),
        "local_information_B": abs(i_b - terms["P_vn(B)"] - terms["C_re(B)"]),
    }
    return _report("ccr-mutual-info", terms, np.log2(rho.dim), _state_digest(rho), checks)


def ccr_conditional(rho, cut=(0,)) -> CcrReport:
    """Conditional-entropy CCR, its conditional-information form and the reality split."""
    rho = as_density(rho)
    a, _ = split_cut(rho, cut)
    rho_a = _local(rho, a)
    mi = mutual_information(rho, cut)
    s_cond = conditional_entropy(rho, cut)
    p = predictability(rho_a)
    c = coherence(rho_a)
    checks = {
        "conditional_information_form": abs(conditional_information(rho, cut) - (mi + p + c)),
        "reality_decomposition": abs(reality(rho_a) - (mi + s_cond + p)),
    }
    terms = {"I_{A:B}": mi, "S_{A|B}": s_cond, "P_vn": p, "C_re": c}
    return _report("ccr-conditional", terms, np.log2(rho_a.dim), _state_digest(rho), checks)


# -- batch verification ------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """Random-input recipe: subsystem dims and, for mixed states, the rank."""

    dims: tuple[int, ...]
    rank: int | None = None


@dataclass(frozen=True)
class BatchSummary:
    relation_id: str
    trials: int
    max_residual: float
    mean_residual: float
    failures: int
    tolerance: float
    seed: int
    records: tuple[dict, ...] = ()

    def to_dict(self, with_records=True) -> dict:
        out = {
            "relation": self.relation_id,
            "trials": self.trials,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "failures": self.failures,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }
        if with_records:
            out["records"] = [dict(r) for r in self.records]
        return out


@dataclass(frozen=True)
class Relation:
    relation_id: str
    default_dims: tuple[int, ...]
    trial: Callable  # (GeneratorSpec, rng, cfg) -> list[CcrReport]
    validate: Callable  # (GeneratorSpec) -> None, raises on bad dims


def _need_parts(n):
    def check(spec: GeneratorSpec):
        if len(spec.dims) != n or any(d < 2 for d in spec.dims):
            raise DimMismatch(f"relation needs {n} subsystems of dimension >= 2, got {spec.dims}")
    return check


def _rank(spec: GeneratorSpec, rng, d):
    return spec.rank if spec.rank is not None else int(rng.integers(1, d + 1))


def _trial_pure(spec, rng, cfg):
    return [ccr_pure(random_pure(spec.dims, rng))]


def _trial_reality(spec, rng, cfg):
    d = int(np.prod(spec.dims))
    rho = random_mixed(d, _rank(spec, rng, d), rng)
    return [ccr_reality(rho, random_basis(d, rng))]


def _trial_koashi(spec, rng, cfg):
    return [ccr_koashi(random_pure(spec.dims, rng), cfg)]


def _check_tessier(spec):
    if tuple(spec.dims) != (2, 2):
        raise NotTwoQubit(f"ccr-tessier requires dims 2x2, got {spec.dims}")


def _trial_tessier(spec, rng, cfg):
    return [ccr_tessier(random_mixed((2, 2), _rank(spec, rng, 4), rng))]


def _trial_qc(spec, rng, cfg):
    d_a, d_b = spec.dims
    w = random_probabilities(d_b, rng)
    conds = [random_mixed(d_a, _rank(spec, rng, d_a), rng) for _ in range(d_b)]
    return ccr_quantum_classical(w, conds)


def _trial_mixed(fn):
    def trial(spec, rng, cfg):
        d = int(np.prod(spec.dims))
        return [fn(random_mixed(spec.dims, _rank(spec, rng, d), rng))]
    return trial


def _check_single(spec):
    if len(spec.dims) != 1 or spec.dims[0] < 2:
        raise DimMismatch(f"relation needs a single system of dimension >= 2, got {spec.dims}")


RELATIONS: dict[str, Relation] = {
    r.relation_id: r
    for r in [
        Relation("ccr-pure", (2, 2), _trial_pure, _need_parts(2)),
        Relation("ccr-reality", (3,), _trial_reality, _check_single),
        Relation("ccr-koashi", (2, 2, 2), _trial_koashi, _need_parts(3)),
        Relation("ccr-tessier", (2, 2), _trial_tessier, _check_tessier),
        Relation("ccr-quantum-classical", (2, 2), _trial_qc, _need_parts(2)),
        Relation("ccr-mutual-info", (3, 3), _trial_mixed(ccr_mutual_info), _need_parts(2)),
        Relation("ccr-conditional", (3, 3), _trial_mixed(ccr_conditional), _need_parts(2)),
    ]
}


def get_relation(relation_id: str) -> Relation:
    try:
        return RELATIONS[relation_id]
    except KeyError:
        raise UnknownRelation(f"unknown relation {relation_id!r}; known: {sorted(RELATIONS)}") from None


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Counter-based per-trial stream, independent of scheduling."""
    return np.random.SeedSequence(seed, spawn_key=(index,))


def run_trial(relation_id: str, spec: GeneratorSpec, seed: int, index: int, cfg=None) -> list[CcrReport]:
    rel = get_relation(relation_id)
    rng = np.random.default_rng(trial_seed(seed, index))
    return rel.trial(spec, rng, cfg or OptimizerConfig())


def _trial_record(args) -> dict:
    relation_id, spec, seed, index, cfg = args
    reports = run_trial(relation_id, spec, seed, index, cfg)
    worst = max(reports, key=lambda r: r.max_residual)
    rec = {"trial": index, "residual": worst.max_residual, "input_digest": reports[0].input_digest}
    for name, value in reports[0].terms.items():
        rec[name] = value
    for key in ("spread", "j_mode", "ef_method", "converged"):
        if key in reports[0].info:
            rec[key] = reports[0].info[key]
    return rec


def verify_batch(
    relation_id: str,
    spec: GeneratorSpec | None = None,
    trials: int = 100,
    tolerance: float = 1e-10,
    seed: int = 0,
    cfg: OptimizerConfig | None = None,
    workers: int = 1,
) -> BatchSummary:
    """Evaluate a relation on ``trials`` random inputs and aggregate residuals.

    A trial fails when its worst residual (main or auxiliary) exceeds
    ``tolerance``. Results depend only on ``(seed, trial index)``, so
    ``workers > 1`` gives identical output.
    """
    rel = get_relation(relation_id)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spec = spec or GeneratorSpec(rel.default_dims)
    rel.validate(spec)
    cfg = cfg or OptimizerConfig()
    jobs = [(relation_id, spec, seed, i, cfg) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_record, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        records = [_trial_record(j) for j in jobs]
    res = np.array([r["residual"] for r in records])
    return BatchSummary(
        relation_id=relation_id,
        trials=trials,
        max_residual=float(res.max()),
        mean_residual=float(res.mean()),
        failures=int(np.sum(res > tolerance)),
        tolerance=tolerance,
        seed=seed,
        records=tuple(records),
    )
