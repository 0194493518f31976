import numpy as np
import pytest

from ccrkit.correlations import OptimizerConfig
from ccrkit.errors import DimMismatch, NotTwoQubit, UnknownRelation
from ccrkit.qstate import (
    basis_state,
    bell_state,
    ghz_state,
    maximally_mixed,
    plus_state,
    random_basis,
    random_mixed,
    random_pure,
    tensor,
    w_state,
)
from ccrkit.relations import (
    RELATIONS,
    GeneratorSpec,
    ccr_conditional,
    ccr_koashi,
    ccr_mutual_info,
    ccr_pure,
    ccr_quantum_classical,
    ccr_reality,
    ccr_tessier,
    get_relation,
    verify_batch,
)

FAST = OptimizerConfig(restarts=4)


def terms(report):
    return tuple(report.terms.values())


def test_report_is_recomputable():
    rep = ccr_mutual_info(random_mixed((2, 3), seed=0))
    assert rep.lhs == pytest.approx(sum(rep.terms.values()), abs=1e-15)
    assert rep.residual == pytest.approx(abs(rep.lhs - rep.rhs), abs=1e-15)
    assert rep.residual >= 0
    d = rep.to_dict()
    assert d["relation"] == "ccr-mutual-info" and d["rhs"] == pytest.approx(np.log2(6))


def test_ccr_pure_examples():
    rep = ccr_pure(basis_state(0, (2, 2)))
    assert terms(rep) == pytest.approx((0, 1, 0), abs=1e-12)
    assert rep.residual == 0
    assert terms(ccr_pure(bell_state())) == pytest.approx((0, 0, 1), abs=1e-12)
    rep = ccr_pure(random_pure((3, 3), seed=2))
    assert rep.rhs == pytest.approx(np.log2(3))
    assert rep.residual <= 1e-10


def test_ccr_pure_rejects_mixed():
    with pytest.raises(TypeError):
        ccr_pure(maximally_mixed((2, 2)))


def test_ccr_reality_examples():
    assert terms(ccr_reality(plus_state())) == pytest.approx((0, 1), abs=1e-12)
    assert terms(ccr_reality(maximally_mixed(2))) == pytest.approx((1, 0), abs=1e-12)
    rep = ccr_reality(random_mixed(4, seed=3), random_basis(4, seed=4))
    assert rep.max_residual <= 1e-10


def test_ccr_koashi_examples():
    rep = ccr_koashi(basis_state(0, (2, 2, 2)), FAST)
    assert terms(rep) == pytest.approx((0, 0, 1, 0), abs=1e-12)
    rep = ccr_koashi(ghz_state(3), FAST)
    assert terms(rep) == pytest.approx((0, 1, 0, 0), abs=1e-8)
    assert rep.residual <= 1e-4
    rep = ccr_koashi(w_state(3), FAST)
    assert rep.residual <= 1e-3
    assert rep.info["j_mode"] == "projective"
    assert rep.info["ef_method"] == "wootters"
    assert set(rep.terms) == {"E_f(AB)", "J_A|E", "P_vn", "C_re"}


def test_ccr_koashi_swap_and_povm():
    psi = random_pure((2, 2, 2), seed=5)
    rep = ccr_koashi(psi, FAST, swap=True, mode="povm")
    assert "E_f(AE)" in rep.terms and "J_A|B" in rep.terms
    assert rep.info["j_mode"] == "povm"
    assert rep.residual <= 1e-3


def test_ccr_tessier_examples():
    assert terms(ccr_tessier(bell_state())) == pytest.approx((1, 0, 0, 0), abs=1e-12)
    assert terms(ccr_tessier(maximally_mixed((2, 2)))) == pytest.approx((0.25, 0.75, 0, 0), abs=1e-12)
    assert ccr_tessier(random_mixed((2, 2), seed=1)).residual <= 1e-12
    with pytest.raises(NotTwoQubit):
        ccr_tessier(maximally_mixed((3, 3)))


def test_ccr_tessier_product_pure():
    prod = tensor(random_pure((2,), seed=3), random_pure((2,), seed=4))
    rep = ccr_tessier(prod)
    # pure product: no entanglement, no mixedness, each qubit saturates V^2 + P^2 = 1
    assert terms(rep) == pytest.approx((0, 0, 0.5, 0.5), abs=1e-12)


def test_ccr_quantum_classical_examples():
    zero = basis_state(0, (2,))
    reports = ccr_quantum_classical([1.0], [zero])
    member = reports[1]
    assert member.terms["P_vn"] == pytest.approx(1)
    assert member.rhs == pytest.approx(1)

    reports = ccr_quantum_classical([0.5, 0.5], [zero, plus_state()])
    assert all(r.max_residual <= 1e-10 for r in reports)
    assert reports[0].terms["C_re"] == pytest.approx(0.5, abs=1e-12)
    assert len(reports) == 3


def test_ccr_quantum_classical_random():
    rng = np.random.default_rng(2)
    for _ in range(10):
        w = rng.dirichlet(np.ones(3))
        conds = [random_mixed(2, seed=rng) for _ in range(3)]
        reports = ccr_quantum_classical(w, conds)
        assert max(r.max_residual for r in reports) <= 1e-10


def test_ccr_mutual_info_examples():
    assert terms(ccr_mutual_info(maximally_mixed((2, 2)))) == pytest.approx((0, 2, 0, 0, 0, 0), abs=1e-12)
    assert terms(ccr_mutual_info(bell_state()))[:2] == pytest.approx((2, 0), abs=1e-12)
    rep = ccr_mutual_info(random_mixed((3, 3), seed=4))
    assert rep.rhs == pytest.approx(np.log2(9))
    assert rep.max_residual <= 1e-10


def test_ccr_conditional_examples():
    assert terms(ccr_conditional(bell_state())) == pytest.approx((2, -1, 0, 0), abs=1e-12)
    rho_a = random_mixed(2, seed=7)
    prod = tensor(rho_a, random_mixed(3, seed=8))
    rep = ccr_conditional(prod)
    assert rep.terms["I_{A:B}"] == pytest.approx(0, abs=1e-12)
    assert rep.residual <= 1e-12
    assert ccr_conditional(random_mixed((3, 2), seed=9)).max_residual <= 1e-10


def test_registry_and_lookup():
    assert set(RELATIONS) == {
        "ccr-pure",
        "ccr-reality",
        "ccr-koashi",
        "ccr-tessier",
        "ccr-quantum-classical",
        "ccr-mutual-info",
        "ccr-conditional",
    }
    with pytest.raises(UnknownRelation):
        get_relation("ccr-bogus")


def test_batch_validation_errors():
    with pytest.raises(NotTwoQubit):
        verify_batch("ccr-tessier", GeneratorSpec((3, 3)), trials=2)
    with pytest.raises(DimMismatch):
        verify_batch("ccr-pure", GeneratorSpec((2,)), trials=2)
    with pytest.raises(ValueError):
        verify_batch("ccr-pure", trials=0)


def test_batch_summary_invariants():
    s = verify_batch("ccr-mutual-info", GeneratorSpec((2, 3)), trials=50, seed=1)
    assert 0 <= s.failures <= s.trials
    assert s.max_residual >= s.mean_residual >= 0
    assert len(s.records) == 50


def test_batch_examples():
    assert verify_batch("ccr-pure", GeneratorSpec((2, 2)), 1000, 1e-10, seed=3).failures == 0
    assert verify_batch("ccr-tessier", GeneratorSpec((2, 2), rank=4), 1000, 1e-12, seed=3).failures == 0


def test_batch_koashi_default_config():
    s = verify_batch("ccr-koashi", trials=10, tolerance=1e-3, seed=0)
    assert s.failures == 0
    assert all("spread" in r and r["j_mode"] == "projective" for r in s.records)


def test_batch_independent_of_workers():
    a = verify_batch("ccr-conditional", GeneratorSpec((2, 2)), trials=20, seed=4)
    b = verify_batch("ccr-conditional", GeneratorSpec((2, 2)), trials=20, seed=4, workers=2)
    assert a.records == b.records
    c = verify_batch("ccr-conditional", GeneratorSpec((2, 2)), trials=10, seed=4)
    assert c.records == a.records[:10]
