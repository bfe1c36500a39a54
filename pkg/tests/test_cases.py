import json
from pathlib import Path

import pytest

from pabo.baselines import run_grid
from pabo.cases import CASES, EXPECTED_CARDINALITY, generate_case_bundle
from pabo.energy import network_from_hp, total_energy
from pabo.objectives import load_table
from pabo.pareto import hypervolume_2d, reference_point
from pabo.space import enumerate_space, load_space

SHIPPED = Path(__file__).resolve().parents[1] / "cases" / "v1"


@pytest.mark.parametrize("name", CASES)
def test_cardinality(name):
    assert generate_case_bundle(name).space.cardinality == EXPECTED_CARDINALITY[name]


@pytest.mark.parametrize("name", CASES)
def test_deterministic_per_seed(name):
    a, b = generate_case_bundle(name, 3), generate_case_bundle(name, 3)
    pts = list(enumerate_space(a.space))[::97]
    assert [a.objective(hp) for hp in pts] == [b.objective(hp) for hp in pts]
    c = generate_case_bundle(name, 4)
    assert [a.objective(hp).err for hp in pts] != [c.objective(hp).err for hp in pts]


@pytest.mark.parametrize("name", CASES)
def test_energy_is_exact(name):
    b = generate_case_bundle(name)
    for hp in list(enumerate_space(b.space))[::53]:
        assert b.objective(hp).eng == total_energy(network_from_hp(b.space.values_of(hp), b.template))


@pytest.mark.parametrize("name", CASES)
def test_shipped_bundle_matches_expected_metrics(name):
    root = SHIPPED / name
    expected = json.loads((root / "expected_metrics.json").read_text())
    space = load_space(root / "space.yaml")
    obj = load_table(root / "table.csv", space)
    truth = run_grid(space, obj)
    ref = reference_point([o.objectives for o in truth.history])
    assert list(ref) == pytest.approx(expected["reference_point"], rel=1e-12)
    hv = hypervolume_2d(truth.front_pairs(), ref)
    assert hv == pytest.approx(expected["grid_hypervolume"], rel=expected["tolerances"]["grid_hypervolume_rel"])
    assert len(truth.front) == expected["grid_front_size"]
    # the shipped table equals a fresh regeneration
    fresh = generate_case_bundle(name, expected["surrogate_seed"]).objective
    for hp in list(enumerate_space(space))[::61]:
        assert tuple(obj(hp)) == tuple(fresh(hp))
