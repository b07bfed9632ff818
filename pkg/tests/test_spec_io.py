import json

import numpy as np
import pytest

from revlab.distributions import (
    EqualRevenue,
    Exponential,
    FiniteAtoms,
    PiecewiseUniform,
    Truncated,
    Uniform,
)
from revlab.errors import BadParamsError, SpecParseError
from revlab.optrev import ScanFamily
from revlab.spec_io import (
    apply_cap,
    dist_from_dict,
    family_from_dict,
    family_to_dict,
    instance_from_dict,
    instance_to_dict,
    load_json,
    measure_from_dict,
    menu_from_dict,
    menu_to_dict,
    pair_from_dict,
    pair_to_dict,
)


@pytest.mark.parametrize("d", [
    Uniform(0, 1),
    FiniteAtoms([0.0, 10.0], [0.9, 0.1]),
    PiecewiseUniform([0, 0.5, 1.5], [1.8, 0.1]),
    Exponential(2.0, cap=4.0),
    Exponential(1.0),
    EqualRevenue(1, 10),
    Truncated(EqualRevenue(1, 10), 5),
])
def test_distribution_round_trip(d):
    assert dist_from_dict(json.loads(json.dumps(d.to_dict()))) == d


def test_fixture_files_parse(fixtures_dir):
    assert dist_from_dict(load_json(fixtures_dir / "uniform.json")) == Uniform(0, 1)
    j = instance_from_dict(load_json(fixtures_dir / "iid_two_point.json"))
    assert len(j) == 4 and j.independent
    pair = pair_from_dict(load_json(fixtures_dir / "regular_pair.json"))
    assert pair.cap == 8.0
    assert family_from_dict(load_json(fixtures_dir / "scan_family.json")) == ScanFamily()
    assert measure_from_dict(load_json(fixtures_dir / "far_atom_measure.json")).dim == 1


def test_load_errors(fixtures_dir, tmp_path):
    with pytest.raises(SpecParseError, match="invalid JSON"):
        load_json(fixtures_dir / "malformed.json")
    with pytest.raises(SpecParseError, match="not found"):
        load_json(tmp_path / "missing.json")
    (tmp_path / "list.json").write_text("[1, 2]")
    with pytest.raises(SpecParseError, match="JSON object"):
        load_json(tmp_path / "list.json")


def test_parse_errors():
    with pytest.raises(SpecParseError, match="unknown distribution kind"):
        dist_from_dict({"kind": "gamma"})
    with pytest.raises(SpecParseError, match="missing field 'high'"):
        dist_from_dict({"kind": "uniform", "low": 0})
    with pytest.raises(SpecParseError):
        dist_from_dict({"kind": "uniform", "low": "zero", "high": 1})
    # domain errors keep their own type
    with pytest.raises(BadParamsError):
        instance_from_dict({"points": [[1, 1], [2, 2]], "probs": [0.5, 0.6]})


def test_cap_handling():
    capped = apply_cap(Exponential(1.0), 8.0)
    assert capped == Exponential(1.0, cap=8.0)
    assert apply_cap(Uniform(0, 1), 8.0) == Uniform(0, 1)
    j = instance_from_dict({"good1": {"kind": "exponential", "rate": 1.0},
                            "good2": {"kind": "uniform", "low": 0, "high": 1}}, grid=6, cap=4.0)
    assert j.points[:, 0].max() <= 4.0
    assert len(j) == 36


def test_instance_and_menu_round_trip(iid_two_point):
    again = instance_from_dict(instance_to_dict(iid_two_point))
    np.testing.assert_allclose(again.points, iid_two_point.points)
    np.testing.assert_allclose(again.probs, iid_two_point.probs)

    m = menu_from_dict({"entries": [[1, 1, 3]]})
    assert menu_to_dict(m) == {"entries": [[0.0, 0.0, 0.0], [1.0, 1.0, 3.0]]}


def test_pair_and_family_dicts(uniform_pair):
    assert pair_from_dict(pair_to_dict(uniform_pair)) == uniform_pair
    fam = ScanFamily(n_values=3, values=(1.0, 2.0, 5.0), prob_denominator=6, iid=False)
    assert family_from_dict(family_to_dict(fam)) == fam
