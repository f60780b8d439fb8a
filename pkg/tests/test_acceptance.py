"""Acceptance criteria, one test per criterion.

Each test runs the registered checks at the documented default bounds,
requires exact passes, and prints one pass line.  Run with -v (and -s to see
the lines while passing).
"""

from fractions import Fraction

from opcalc.checks import Bounds, run_check
from opcalc.rboperad import census


def _run(criterion: str, check_ids: list[str], budget_ms: int, bounds: Bounds | None = None):
    reports = [run_check(cid, bounds or Bounds()) for cid in check_ids]
    total = sum(r.millis for r in reports)
    for r in reports:
        assert r.status == "pass", f"{criterion}: {r.id} failed: {r.detail}"
    assert total < budget_ms, f"{criterion}: took {total} ms, budget {budget_ms} ms"
    print(f"PASS {criterion}: {', '.join(check_ids)} ({total} ms)")
    return reports


def test_criterion_01_zinbiel_nu():
    _run("criterion 1", ["zinbiel-nu"], 1000)


def test_criterion_02_rb_identity_rf():
    reports = _run("criterion 2", ["rb-identity-rf"], 1000)
    assert "four displayed compositions" in reports[0].detail
    assert "symbolic" in reports[0].detail


def test_criterion_03_operad_axioms():
    _run("criterion 3", ["operad-axioms"], 10_000)


def test_criterion_04_solomon_exp_log():
    reports = _run("criterion 4", ["solomon", "exp-f-e", "log-general"], 60_000)
    for r in reports:
        assert "exact n<=4" in r.detail
        assert "8-point evaluation at n=[5]" in r.detail


def test_criterion_05_idempotent_and_convention():
    reports = _run("criterion 5", ["euler-idempotent", "e-dot-vi"], 20_000)
    assert "n<=6" in reports[0].detail
    assert "pinned order idempotent_times_vsum" in reports[1].detail


def test_criterion_06_solomon_dynkin():
    reports = _run("criterion 6", ["solomon-dynkin"], 20_000)
    assert "n<=5" in reports[0].detail


def test_criterion_07_preparation_lemma():
    reports = _run("criterion 7", ["preparation-lemma"], 10_000)
    assert "n<=4" in reports[0].detail


def test_criterion_08_formula_lie():
    reports = _run("criterion 8", ["formula-lie"], 30_000)
    assert "W=5" in reports[0].detail


def test_criterion_09_formula_gp_grouplike_coproduct():
    reports = _run("criterion 9", ["formula-gp", "grouplike", "coproduct-bsm"], 30_000)
    assert "W=5" in reports[0].detail and "W=5" in reports[1].detail


def test_criterion_10_comparison_log():
    reports = _run("criterion 10", ["comparison-log"], 20_000)
    assert "W=5" in reports[0].detail


def test_criterion_11_telescope():
    reports = _run("criterion 11", ["telescope"], 20_000)
    assert "k<=3" in reports[0].detail and "n<=5" in reports[0].detail


def test_criterion_12_foissy_axioms_and_poly_model():
    _run("criterion 12", ["foissy-axioms", "rb-poly-model"], 20_000)


def test_criterion_13_confluence_and_soundness():
    reports = _run("criterion 13", ["rb-confluence", "rb-normal-soundness"], 60_000)
    for r in reports:
        assert "200 expressions" in r.detail
    assert "theta=symbolic" in reports[1].detail


def test_criterion_14_census_hilbert():
    _run("criterion 14", ["census-hilbert"], 10_000)
    assert census(2, 2)[2] == 5


def test_criterion_15_poincare_inverse():
    reports = _run("criterion 15", ["poincare-inverse"], 10_000)
    assert "t^6" in reports[0].detail


def test_criterion_16_injectivity():
    reports = _run("criterion 16", ["injectivity"], 30_000)
    detail = reports[0].detail
    for tag in ("theta=0", "theta=1", "theta=2", "n=3"):
        assert tag in detail


def test_criterion_17_wordmodels():
    _run("criterion 17", ["wordmodel-dictionary", "wordmodel-log"], 20_000)
