import json

import pandas as pd
import pytest

import revlab.main as cli
from revlab.main import build_parser, main


def run(fixtures_dir, tmp_path, *args) -> int:
    argv = [args[0], *(str(fixtures_dir / a) if a.endswith(".json") else a for a in args[1:])]
    return main([*argv, "--out", str(tmp_path)])


def test_price(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "price", "uniform.json") == 0
    out = json.loads((tmp_path / "price.json").read_text())
    assert out["price"] == pytest.approx(0.5)
    assert out["revenue"] == pytest.approx(0.25)
    assert out["schema_version"] == 1


def test_price_exponential_with_and_without_cap(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "price", "exponential.json") == 0
    assert json.loads((tmp_path / "price.json").read_text())["price"] == pytest.approx(1.0)
    assert run(fixtures_dir, tmp_path, "price", "exponential.json", "--cap", "0.5") == 0
    assert json.loads((tmp_path / "price.json").read_text())["price"] == pytest.approx(0.5)


def test_price_fixture_family(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "price", "equal_revenue.json") == 0
    out = json.loads((tmp_path / "price.json").read_text())
    assert out["price"] == pytest.approx(1.0)
    assert out["revenue"] == pytest.approx(1.0)

    assert run(fixtures_dir, tmp_path, "price", "point_mass.json") == 0
    out = json.loads((tmp_path / "price.json").read_text())
    assert (out["price"], out["revenue"]) == (pytest.approx(1.0), pytest.approx(1.0))


def test_price_writes_posted_price_menu(fixtures_dir, tmp_path):
    menu_file = tmp_path / "menus" / "uniform.json"
    assert run(fixtures_dir, tmp_path, "price", "uniform.json", "--menu-out", str(menu_file)) == 0
    entries = json.loads(menu_file.read_text())["entries"]
    assert entries == [[0.0, 0.0, 0.0], [1.0, 0.0, pytest.approx(0.5)]]


def test_input_errors_exit_2(fixtures_dir, tmp_path, capsys):
    assert run(fixtures_dir, tmp_path, "price", "malformed.json") == 2
    assert "invalid JSON" in capsys.readouterr().err
    assert run(fixtures_dir, tmp_path, "ratio", "bad_probs.json") == 2
    assert run(fixtures_dir, tmp_path, "bounds", "uniform_pair.json",
               "--lambda1", "1", "--lambda2", "0.5") == 2
    assert run(fixtures_dir, tmp_path, "bounds", "far_atom.json") == 2
    assert main(["price"]) == 2
    assert main(["nonsense"]) == 2


def test_ratio(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "ratio", "iid_two_point.json") == 0
    out = json.loads((tmp_path / "ratio.json").read_text())
    assert out["report"]["ratio"] <= 2 / 2.25 + 1e-9
    assert out["report"]["independent"]
    table = pd.read_csv(tmp_path / "ratio_solution.csv")
    assert list(table.columns) == ["x1", "x2", "prob", "q1", "q2", "s", "b"]
    assert len(table) == 4


def test_ratio_point_instance_with_excel(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "ratio", "point_instance.json", "--excel") == 0
    out = json.loads((tmp_path / "ratio.json").read_text())
    assert out["report"]["ratio"] == pytest.approx(1.0)
    assert (tmp_path / "ratio_solution.xlsx").exists()


def test_bounds(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "bounds", "uniform_pair.json", "--regular") == 0
    out = json.loads((tmp_path / "bounds.json").read_text())
    assert [c["which"] for c in out["certificates"]][:2] == ["general", "regular"]
    trace = pd.read_csv(tmp_path / "bounds_trace.csv")
    assert list(trace.columns) == ["t", "K1", "K2", "L1", "L2", "phi1", "phi2"]


def test_bounds_drops_regular_flag_for_irregular_pairs(fixtures_dir, tmp_path, capsys):
    assert run(fixtures_dir, tmp_path, "bounds", "irregular_pair.json", "--regular") == 0
    out = json.loads((tmp_path / "bounds.json").read_text())
    assert "regular" not in [c["which"] for c in out["certificates"]]
    assert "not regular" in capsys.readouterr().out


def test_scan(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "scan", "--budget", "0") == 0
    out = json.loads((tmp_path / "scan.json").read_text())
    assert out["evaluated"] == 0 and out["best_ratio"] is None
    assert len(pd.read_csv(tmp_path / "scan_trace.csv")) == 0

    assert run(fixtures_dir, tmp_path, "scan", "scan_family.json", "--budget", "18") == 0
    assert json.loads((tmp_path / "scan.json").read_text())["best_ratio"] <= 0.889


def test_prohorov(fixtures_dir, tmp_path):
    assert run(fixtures_dir, tmp_path, "prohorov", "dirac_zero.json", "far_atom_measure.json") == 0
    out = json.loads((tmp_path / "prohorov.json").read_text())
    assert out["distance"] == pytest.approx(0.1, abs=1e-6)
    assert run(fixtures_dir, tmp_path, "prohorov", "dirac_zero.json", "point_instance.json") == 2


def test_verify_single_suite(tmp_path):
    assert main(["verify", "--suite", "myerson", "--out", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "verify.json").read_text())
    assert out["suites"] == [{"name": "myerson", "passed": True, "failures": [], "error": None}]
    assert main(["verify", "--suite", "no_such_suite", "--out", str(tmp_path)]) == 1


def test_outputs_are_deterministic(fixtures_dir, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert run(fixtures_dir, out, "ratio", "iid_two_point.json", "--seed", "7") == 0
    assert (first / "ratio.json").read_bytes() == (second / "ratio.json").read_bytes()
    assert (first / "ratio_solution.csv").read_bytes() == (second / "ratio_solution.csv").read_bytes()


def test_parser_defaults():
    ns = build_parser().parse_args(["scan"])
    assert ns.inputs is None
    assert ns.budget >= 0


def test_ratio_menu_round_trip(fixtures_dir, tmp_path):
    menu_file = tmp_path / "optimal_menu.json"
    assert run(fixtures_dir, tmp_path, "ratio", "iid_two_point.json", "--menu-out", str(menu_file)) == 0
    assert menu_file.exists()

    assert run(fixtures_dir, tmp_path, "ratio", "iid_two_point.json", "--menu", str(menu_file)) == 0
    out = json.loads((tmp_path / "ratio.json").read_text())
    assert out["menu"]["ok"]
    assert out["menu"]["revenue"] == pytest.approx(out["report"]["rev"], abs=1e-7)
    assert out["menu"]["share_of_rev"] == pytest.approx(1.0, abs=1e-7)


def test_ratio_rejects_a_menu_with_negative_payments(fixtures_dir, tmp_path):
    menu_file = tmp_path / "subsidy.json"
    menu_file.write_text(json.dumps({"entries": [[1.0, 1.0, -1.0]]}))
    assert run(fixtures_dir, tmp_path, "ratio", "iid_two_point.json", "--menu", str(menu_file)) == 1
    out = json.loads((tmp_path / "ratio.json").read_text())
    assert not out["menu"]["ok"]
    assert out["menu"]["kind"] == "npt"
    assert out["menu"]["worst_violation"] == pytest.approx(1.0)


def test_ratio_solves_rev_once(fixtures_dir, tmp_path, monkeypatch):
    import revlab.optrev as optrev

    calls = []
    real = optrev.rev_lp

    def counting(j, **kwargs):
        calls.append(kwargs.get("monotone", False))
        return real(j, **kwargs)

    monkeypatch.setattr(optrev, "rev_lp", counting)
    assert run(fixtures_dir, tmp_path, "ratio", "iid_two_point.json") == 0
    assert calls.count(False) == 1


def test_unexpected_numerical_errors_exit_3(fixtures_dir, tmp_path, monkeypatch, capsys):
    def broken(cfg):
        raise ValueError("array must not contain infs or NaNs")

    monkeypatch.setitem(cli.COMMANDS, "price", broken)
    assert run(fixtures_dir, tmp_path, "price", "uniform.json") == 3
    assert "ValueError" in capsys.readouterr().err

    def overflow(cfg):
        raise FloatingPointError("overflow")

    monkeypatch.setitem(cli.COMMANDS, "price", overflow)
    assert run(fixtures_dir, tmp_path, "price", "uniform.json") == 3
