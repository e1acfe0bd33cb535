import json

import pytest

from ppszkit.cnf import is_satisfied_by, parse_dimacs
from ppszkit.generator import (Family, GenSpec, gen_planted, gen_uniform, gen_unique_sat, generate,
                               sidecar, write_instance)
from ppszkit.oracle import enumerate_sat


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(5, 3, k=1)
    with pytest.raises(ValueError):
        GenSpec(2, 3, k=3)
    with pytest.raises(ValueError):
        GenSpec(5, -1)


def test_uniform_shape_and_determinism():
    spec = GenSpec(10, 30, 3, Family.UNIFORM, 7)
    f = gen_uniform(spec)
    assert f.m == 30 and f.variables == set(range(1, 11))
    assert all(len(c) == 3 for c in f.clauses)
    assert gen_uniform(spec) == f
    assert gen_uniform(GenSpec(10, 30, 3, Family.UNIFORM, 8)) != f


def test_planted_model_satisfies():
    for seed in range(20):
        f, alpha = gen_planted(GenSpec(8, 30, 3, Family.PLANTED, seed))
        assert is_satisfied_by(f, alpha)


def test_unique_sat_has_one_model():
    f, alpha = gen_unique_sat(GenSpec(6, 28, 3, Family.UNIQUE, 3))
    assert enumerate_sat(f) == {alpha}


def test_too_many_clauses():
    with pytest.raises(ValueError):
        gen_planted(GenSpec(3, 8, 3, Family.PLANTED, 0))


def test_generate_and_sidecar(tmp_path):
    spec = GenSpec(6, 12, 3, Family.PLANTED, 99)
    f, model = generate(spec)
    stem = str(tmp_path / "inst")
    write_instance(stem, spec, f, model)
    assert parse_dimacs(open(stem + ".cnf").read()) == f
    meta = json.load(open(stem + ".json"))
    assert meta == sidecar(spec, model)
    assert meta["family"] == "planted" and meta["seed"] == 99
    assert len(meta["planted_model"]) == 6
    f2, none = generate(GenSpec(6, 12, 3, Family.UNIFORM, 1))
    assert none is None and "planted_model" not in sidecar(GenSpec(6, 12), None)
