import json
import math

import numpy as np
import pytest

from contraction_curvature import (build_operator, curvature_exact, curvature_limit, default_corpus, emit_spec,
                                   kappa_example, kappa_sum, operator_to_spec, parse_spec, random_contraction)
from contraction_curvature.corpus import kappa_decomposition, named, random_weight_overrides
from contraction_curvature.errors import DomainError
from contraction_curvature.operators import WeightedShift
from contraction_curvature.specfile import canonical_spec, normalize_dense


@pytest.mark.parametrize("name", list(default_corpus()))
def test_corpus_round_trip(name):
    spec = default_corpus()[name]
    text = emit_spec(spec)
    assert parse_spec(text) == canonical_spec(spec)
    assert emit_spec(parse_spec(text)) == text
    T = build_operator(spec)
    again = build_operator(operator_to_spec(T))
    assert repr(again) == repr(T)


def test_corpus_is_sorted_and_contractive():
    corpus = default_corpus()
    assert list(corpus) == sorted(corpus)
    for spec in corpus.values():
        assert build_operator(spec).norm() <= 1 + 1e-12


def test_scalars_on_disk_are_re_im_objects():
    payload = json.loads(emit_spec({"kind": "dense", "matrix": [[0.5j]]}))
    assert payload["matrix"] == [[{"re": 0.0, "im": 0.5}]]
    payload = json.loads(emit_spec({"kind": "shift", "variant": "unilateral", "overrides": {3: 0.5}}))
    assert payload["overrides"] == {"3": {"re": 0.5, "im": 0.0}}


@pytest.mark.parametrize("bad", [
    {"kind": "dense", "matrix": [[0.5]], "extra": 1},
    {"kind": "dense", "matrix": [[0.5, 0]]},
    {"kind": "dense", "matrix": [[{"re": 0.5, "imag": 0}]]},
    {"kind": "dense", "matrix": [[float("nan")]]},
    {"kind": "shift", "variant": "sideways"},
    {"kind": "shift", "variant": "unilateral", "overrides": {"x": 1}},
    {"kind": "direct_sum", "parts": []},
    {"kind": "named", "name": "kappa_example", "params": {}},
    {"kind": "named", "name": "kappa_example", "params": {"kappa": 0.5, "z": 1}},
    {"kind": "named", "name": "shift_power", "params": {"m": 1.5}},
    {"kind": "nope"},
    [1, 2],
])
def test_invalid_specs_rejected(bad):
    with pytest.raises(DomainError):
        canonical_spec(bad)


def test_parse_spec_rejects_bad_json():
    with pytest.raises(DomainError):
        parse_spec("{not json")


def test_kappa_example_edges():
    assert kappa_example(1).weight(0) == 0
    assert kappa_example(0).weight(0) == 1
    for bad in (-0.1, 1.5):
        with pytest.raises(DomainError):
            kappa_example(bad)
    with pytest.raises(DomainError):
        build_operator(named("kappa_example", kappa=2.0))


def test_named_defaults():
    assert named("backward_shift")["params"] == {"m": 1}
    assert named("random_contraction", dim=3, seed=1)["params"]["sigma_max"] == 0.95


@pytest.mark.parametrize("target", [0.0, 0.3, 1.5, 2.4, math.pi])
def test_kappa_decomposition_hits_target(target):
    parts = kappa_decomposition(target)
    assert all(0 <= k <= 1 for k in parts)
    assert curvature_exact(kappa_sum(parts)) == pytest.approx(target, abs=1e-12)


def test_direct_sum_of_kappas():
    T = kappa_sum([1.0, 1.0, 0.4])
    assert curvature_exact(T) == pytest.approx(2.4, abs=1e-12)
    assert curvature_limit(T) == pytest.approx(2.4, abs=1e-12)


def test_normalize_dense():
    spec = {"kind": "direct_sum", "parts": [{"kind": "dense", "matrix": [[2.0, 0], [0, 1.0]]},
                                           {"kind": "dense", "matrix": [[0.5]]}]}
    out, scales = normalize_dense(spec)
    assert scales == [pytest.approx(2.0)]
    assert build_operator(out).norm() == pytest.approx(1.0)
    assert out["parts"][1] == canonical_spec(spec["parts"][1])


def test_random_contraction_is_deterministic():
    A, B = random_contraction(4, 11), random_contraction(4, 11)
    np.testing.assert_array_equal(A.matrix, B.matrix)
    assert not np.array_equal(A.matrix, random_contraction(4, 12).matrix)
    assert A.norm() == pytest.approx(0.95)


def test_random_weight_overrides():
    for seed in range(30):
        ov = random_weight_overrides(seed)
        assert len(ov) <= 4
        assert all(1 <= k <= 12 and abs(v) <= 1 for k, v in ov.items())
        assert ov == random_weight_overrides(seed)


def test_operator_to_spec_rejects_unknown():
    assert operator_to_spec(WeightedShift("bilateral"))["variant"] == "bilateral"
    with pytest.raises(DomainError):
        operator_to_spec(object())
