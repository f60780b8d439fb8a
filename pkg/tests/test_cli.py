import json
from fractions import Fraction

import pytest

from opcalc.checks import Bounds, Report, emit_report, exit_code, run_all, run_check
from opcalc.cli import main, parse_fraction, parse_polynomial
from opcalc.exact import THETA, THETA0, FactoredRatFn, MPoly, ratfn_eq


class TestFractionGrammar:
    def test_polynomial(self):
        p = parse_polynomial("2 x1^2 x3 - x2 + 7", 3)
        want = MPoly(3, {(2, 0, 1): 2, (0, 1, 0): -1, (0, 0, 0): 7})
        assert p == want
        with pytest.raises(Exception):
            parse_polynomial("2 y1", 2)

    def test_fraction(self):
        f = parse_fraction("1 / x1 (x1+x2)^2", 2)
        assert f.den == {frozenset({1}): 1, frozenset({1, 2}): 2}
        g = parse_fraction("1 / {1,2} x2", 2)
        assert g.den == {frozenset({1, 2}): 1, frozenset({2}): 1}
        h = parse_fraction("x1 + x2", 2)
        assert h.den == {}

    def test_bad_factor(self):
        with pytest.raises(Exception):
            parse_fraction("1 / x9", 2)


class TestVerifyCommand:
    def test_single_pass(self, capsys):
        code = main(["verify", "zinbiel-nu"])
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS" in out and "zinbiel-nu" in out

    def test_unknown_id(self, capsys):
        code = main(["verify", "nonsense"])
        err = capsys.readouterr().err
        assert code == 2
        assert "unknown check id" in err

    def test_bounds_exceeded(self, capsys):
        code = main(["verify", "euler-idempotent", "--max-arity", "9"])
        assert code == 2

    def test_json_schema(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code = main(["verify", "rb-poly-model", "--json", str(path), "--format", "json"])
        assert code == 0
        doc = json.loads(path.read_text())
        assert doc["version"] == 1
        assert set(doc) == {"version", "params", "checks"}
        (check,) = doc["checks"]
        assert set(check) == {"id", "params", "status", "detail", "millis"}
        assert check["status"] == "pass"
        printed = json.loads(capsys.readouterr().out)
        check["millis"] = printed["checks"][0]["millis"] = 0
        doc["checks"][0] = check
        assert printed == doc

    def test_json_determinism(self, capsys):
        def snap():
            main(["verify", "census-hilbert", "--format", "json"])
            doc = json.loads(capsys.readouterr().out)
            for c in doc["checks"]:
                c["millis"] = 0
            return json.dumps(doc, sort_keys=True)

        assert snap() == snap()

    def test_reduced_bounds(self, capsys):
        code = main(["verify", "solomon", "--max-arity", "2"])
        assert code == 0

    def test_theta_list(self, capsys):
        code = main(["verify", "rb-identity-rf", "--theta", "0,1,2"])
        out = capsys.readouterr().out
        assert code == 0 and "theta=0,1,2" in out

    def test_bad_theta(self, capsys):
        assert main(["verify", "zinbiel-nu", "--theta", "x"]) == 2


class TestRBCommands:
    def test_normalize(self, capsys):
        code = main(["rb", "normalize", "(* (R a1) (R a2))"])
        out = capsys.readouterr().out
        assert code == 0
        assert "R(R(a1) a2)" in out and "theta" in out

    def test_normalize_theta(self, capsys):
        code = main(["rb", "normalize", "(* (R a1) (R a2))", "--theta", "0"])
        out = capsys.readouterr().out
        assert code == 0 and "theta" not in out

    def test_normalize_from_file(self, capsys, tmp_path):
        path = tmp_path / "expr.txt"
        path.write_text("(R (* a1 a2))\n")
        code = main(["rb", "normalize", f"@{path}"])
        out = capsys.readouterr().out
        assert code == 0 and out.strip() == "R(a1 a2)"

    def test_normalize_parse_error(self, capsys):
        code = main(["rb", "normalize", "(* a1 a1)"])
        assert code == 2
        assert "repeated" in capsys.readouterr().err

    def test_census(self, capsys):
        code = main(["rb", "census", "--arity", "2", "--max-weight", "2"])
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert out == ["weight 0: 1", "weight 1: 3", "weight 2: 5"]


class TestRFCommands:
    def test_compose_half_product(self, capsys):
        code = main(["rf", "compose", "1 / x1", "1 / x1", "--slot", "1",
                     "--arity-f", "2", "--arity-g", "2", "--theta", "0"])
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert out == "1 / x1 (x1 + x2)"

    def test_compose_symbolic_block(self, capsys):
        code = main(["rf", "compose", "1 / x1", "1", "--slot", "1",
                     "--arity-f", "1", "--arity-g", "2"])
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert out == "1 / (theta x1 x2 + x1 + x2)"

    def test_bad_slot(self, capsys):
        code = main(["rf", "compose", "1", "1", "--slot", "5",
                     "--arity-f", "2", "--arity-g", "1"])
        assert code != 0


class TestRunners:
    def test_exit_code_logic(self):
        good = Report("x", {}, "pass", "", 1)
        bad = Report("y", {}, "fail", "", 1)
        assert exit_code([good]) == 0
        assert exit_code([good, bad]) == 1

    def test_emit_unknown_format(self):
        with pytest.raises(ValueError):
            emit_report([], "yaml")

    def test_run_all_order_and_workers(self):
        fast = Bounds(max_arity=2, max_weight=2)
        serial = run_all(fast, workers=1)
        pooled = run_all(fast, workers=2)
        assert [r.id for r in serial] == [r.id for r in pooled]
        assert [r.status for r in serial] == [r.status for r in pooled]

    def test_run_all_at_reduced_bounds(self):
        reports = run_all(Bounds(max_arity=2, max_weight=1))
        assert all(r.status == "pass" for r in reports)
        assert len(reports) == 25

    def test_run_check_at_low_weight(self):
        rep = run_check("formula-lie", Bounds(max_weight=2))
        assert rep.status == "pass" and rep.params == {"max_weight": 2}

    def test_failing_check_reported_not_raised(self, monkeypatch):
        import opcalc.checks as checks

        monkeypatch.setitem(checks._BY_ID, "zinbiel-nu", lambda b: (False, "forced", {}))
        rep = run_check("zinbiel-nu")
        assert rep.status == "fail" and rep.detail == "forced"
        assert exit_code([rep]) == 1

    def test_crash_becomes_failed_report(self, monkeypatch):
        import opcalc.checks as checks

        def boom(b):
            raise RuntimeError("kaboom")

        monkeypatch.setitem(checks._BY_ID, "zinbiel-nu", boom)
        rep = run_check("zinbiel-nu")
        assert rep.status == "fail" and "kaboom" in rep.detail
