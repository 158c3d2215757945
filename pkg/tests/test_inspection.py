import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from discrel.ensemble import FeatureCache, Member, RelationEnsemble, one_vs_all_labels
from discrel.errors import BindingError, ConfigError
from discrel.features import FeatureType, Vocabulary
from discrel.inspection import explain, top_weights
from discrel.linmodel import LinearModel, TrainConfig, fit_arrays, model_from_fit
from discrel.synth import pattern_holds

from helpers import instance, segment

WEIGHTS = {"1:Request": 1.13061, "1:Addressee": 0.90852, "1:Agent": 0.39992,
         "2:Agent": -0.68378, "2:Time": -0.1}


def model_with(weights, key="framenet", bias=0.0, relation="Contingency"):
    feats = tuple(sorted(weights))
    vocab = Vocabulary(key, feats, (1,) * len(feats))
    model = LinearModel(np.array([weights[f] for f in feats]), bias, key, vocab.fingerprint, relation)
    return model, vocab


def test_request_ranks_above_addressee():
    model, vocab = model_with(WEIGHTS)
    rows = top_weights(model, vocab, 2, "positive").rows
    assert [(r.label, r.segment, r.weight) for r in rows] == [
        ("Request", 1, 1.13061), ("Addressee", 1, 0.90852)]


def test_negative_side():
    model, vocab = model_with(WEIGHTS)
    rows = top_weights(model, vocab, 1, "negative").rows
    assert [(r.feature, r.weight) for r in rows] == [("2:Agent", -0.68378)]


def test_k_zero_is_empty():
    model, vocab = model_with(WEIGHTS)
    assert top_weights(model, vocab, 0).rows == ()


def test_zero_weights_tie_break_lexicographic():
    model, vocab = model_with({"2:b": 0.0, "1:c": 0.0, "1:a": 0.0, "2:a": 0.0})
    rows = top_weights(model, vocab, 3, "positive").rows
    assert [r.feature for r in rows] == ["1:a", "1:c", "2:a"]
    assert all(r.weight == 0.0 for r in rows)


def test_k_beyond_vocab_returns_all_flagged():
    model, vocab = model_with(WEIGHTS)
    report = top_weights(model, vocab, 50, "positive")
    assert len(report.rows) == len(WEIGHTS) and report.k_exceeds_vocab
    assert not top_weights(model, vocab, 2).k_exceeds_vocab


weight_maps = st.dictionaries(st.sampled_from([f"{s}:R{i}" for s in (1, 2) for i in range(8)]),
                              st.floats(-5, 5, allow_nan=False), min_size=1)


@given(weight_maps, st.integers(0, 20))
def test_both_is_union_of_sides(weights, k):
    model, vocab = model_with(weights)
    pos = {r.feature for r in top_weights(model, vocab, k, "positive").rows}
    neg = {r.feature for r in top_weights(model, vocab, k, "negative").rows}
    both = top_weights(model, vocab, k, "both").rows
    assert {r.feature for r in both} == pos | neg
    keys = [(-r.weight, r.feature) for r in both]
    assert keys == sorted(keys)


@given(weight_maps, st.integers(1, 20))
def test_positive_side_is_top_k(weights, k):
    model, vocab = model_with(weights)
    rows = top_weights(model, vocab, k, "positive").rows
    assert len(rows) == min(k, len(weights))
    cutoff = rows[-1].weight
    picked = {r.feature for r in rows}
    assert all(w <= cutoff for f, w in weights.items() if f not in picked)


def test_bad_arguments():
    model, vocab = model_with(WEIGHTS)
    with pytest.raises(ConfigError):
        top_weights(model, vocab, 3, "sideways")
    with pytest.raises(ConfigError):
        top_weights(model, vocab, -1)
    other = Vocabulary("framenet", ("x",), (1,))
    with pytest.raises(BindingError):
        top_weights(model, other, 3)


def test_report_renderings():
    model, vocab = model_with(WEIGHTS)
    report = top_weights(model, vocab, 2)
    text = report.to_text().splitlines()
    assert text[0] == "# Contingency / framenet"
    assert text[1].split() == ["Label", "Position", "Weight"]
    assert text[2].split() == ["Request", "segment", "1", "+1.13061"]
    assert text[-1].split() == ["Agent", "segment", "2", "-0.68378"]
    data = json.loads(report.to_json())
    assert data["rows"][0]["parts"]["label"] == "Request"


def test_propbank_rows_decoded():
    model, vocab = model_with({"2:work-73.2_A0": 0.5}, key="propbank[verbnet]")
    row = top_weights(model, vocab, 1).rows[0]
    assert (row.label, row.parts["predicate"], row.parts["verbnet_class"]) == ("A0", "work", "73.2")


# -- explanations --------------------------------------------------------------------

def single_member(weights, bias=0.0):
    model, vocab = model_with(weights, "framenet[nocluster]", bias)
    return RelationEnsemble("Contingency", (Member(FeatureType("framenet", with_cluster=False), vocab, model),))


def agent_instance(seg=1):
    s = segment(["he", "x"], roles=[("Agent", (0, 1))])
    return instance("i", s, ["y"]) if seg == 1 else instance("i", ["y"], s)


def test_explain_one_active_feature():
    exp = explain(single_member({"1:Agent": 2.0, "2:Agent": -1.0}), agent_instance())
    m = exp.members[0]
    assert m.active == (("1:Agent", 2.0),)
    assert exp.score == pytest.approx(0.880797, abs=1e-6)
    assert exp.decision is True


def test_explain_no_active_features():
    exp = explain(single_member({"1:Agent": 2.0}, bias=-0.5), instance("i", ["y"], ["z"]))
    m = exp.members[0]
    assert m.active == () and m.margin == m.bias == -0.5
    assert exp.decision is False
    assert exp.to_dict()["members"][0]["active"] == []


@given(st.dictionaries(st.sampled_from(["1:Agent", "1:Theme", "1:Time", "2:Agent"]),
                       st.floats(-4, 4, allow_nan=False), min_size=4), st.floats(-2, 2))
def test_margin_is_bias_plus_active_weights(weights, bias):
    s1 = segment(["a", "b", "c"], roles=[("Agent", (0, 1)), ("Theme", (1, 2)), ("Time", (2, 3))])
    exp = explain(single_member(weights, bias), instance("i", s1, ["z"]))
    m = exp.members[0]
    assert abs(m.margin - (m.bias + sum(w for _, w in m.active))) <= 1e-12
    mags = [abs(w) for _, w in m.active]
    assert mags == sorted(mags, reverse=True)


def test_planted_agent_sign_pattern(default_synth):
    train, _, test, lex = default_synth
    ft = FeatureType("framenet")
    cache = FeatureCache(train, lex)
    vocab, X = cache.vocab_and_matrix(ft, 1)
    cfg = TrainConfig()
    res = fit_arrays(X, one_vs_all_labels(train, "Contingency"), cfg)
    model = model_from_fit(res, vocab, cfg, "Contingency")
    ens = RelationEnsemble("Contingency", (Member(ft, vocab, model, lex),))
    inst = next(i for i in test if "Contingency" in i.gold_relations and pattern_holds("agent_asymmetry", i))
    exp = explain(ens, inst)
    active = dict(exp.members[0].active)
    assert active["1:Agent"] > 0
    w = dict(zip(vocab.features, model.weights))
    assert w["1:Agent"] > 0 > w["2:Agent"]
