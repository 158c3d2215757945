import filecmp

import numpy as np
import pytest

from discrel.corpus import RELATIONS, load_brown_lexicon, load_instances
from discrel.ensemble import FeatureCache, one_vs_all_labels
from discrel.errors import SynthesisError
from discrel.eval import f1_from_arrays
from discrel.features import FeatureType, vectorize
from discrel.linmodel import TrainConfig, design_matrix, fit_arrays
from discrel.synth import (
    NOISE_ROLES, PATTERNS, SignalSpec, SynthConfig, default_signals, generate_corpus,
    pattern_holds, synth_lexicon, write_synthetic,
)


def test_byte_identical_files(tmp_path):
    cfg = SynthConfig(n_train=200, n_dev=50, n_test=50, seed=5)
    a, b = write_synthetic(cfg, tmp_path / "a"), write_synthetic(cfg, tmp_path / "b")
    for name in a:
        assert filecmp.cmp(a[name], b[name], shallow=False), name


def test_seed_changes_corpus():
    a = generate_corpus(SynthConfig(n_train=30, n_dev=0, n_test=0, seed=1))[0]
    b = generate_corpus(SynthConfig(n_train=30, n_dev=0, n_test=0, seed=2))[0]
    assert [i.seg1 for i in a] != [i.seg1 for i in b]


def test_written_files_load(tmp_path):
    cfg = SynthConfig(n_train=40, n_dev=10, n_test=10, seed=3)
    paths = write_synthetic(cfg, tmp_path)
    train, dev, test = generate_corpus(cfg)
    assert load_instances(paths["train"]) == train
    assert load_instances(paths["test"]) == test
    assert load_brown_lexicon(paths["lexicon"]).paths == synth_lexicon(cfg).paths


def test_full_strength_pattern_always_holds():
    cfg = SynthConfig(n_train=400, n_dev=0, n_test=0, seed=9, signals=default_signals(1.0))
    train = generate_corpus(cfg)[0]
    pos = [i for i in train if "Contingency" in i.gold_relations]
    assert pos
    for inst in pos:
        assert "Agent" in {r.role_name for r in inst.seg1.framenet_roles}
        assert "Agent" not in {r.role_name for r in inst.seg2.framenet_roles}
    neg = [i for i in train if "Contingency" not in i.gold_relations]
    assert not any(pattern_holds("agent_asymmetry", i) for i in neg)


@pytest.mark.parametrize("spec", default_signals(0.9), ids=lambda s: s.relation)
def test_pattern_frequency_converges(default_synth, spec):
    train = default_synth[0]
    pos = [pattern_holds(spec.pattern, i) for i in train if spec.relation in i.gold_relations]
    neg = [pattern_holds(spec.pattern, i) for i in train if spec.relation not in i.gold_relations]
    assert abs(np.mean(pos) - 0.9) <= 0.03
    assert abs(np.mean(neg) - 0.1) <= 0.03


def test_half_strength_carries_no_signal():
    cfg = SynthConfig(seed=21, signals=default_signals(0.5))
    train, _, test, lex = (*generate_corpus(cfg), synth_lexicon(cfg))
    ft = FeatureType("framenet")
    vocab, X = FeatureCache(train, lex).vocab_and_matrix(ft, 1)
    res = fit_arrays(X, one_vs_all_labels(train, "Contingency"), TrainConfig())
    Xt = design_matrix([vectorize(f, vocab) for f in FeatureCache(test, lex).features(ft)], len(vocab))
    pred = (Xt @ res.weights + res.bias) > 0
    gold = one_vs_all_labels(test, "Contingency")
    all_positive = f1_from_arrays(np.ones_like(gold), gold)
    assert f1_from_arrays(pred, gold) <= all_positive + 0.05


def test_splits_disjoint_and_sized():
    cfg = SynthConfig(n_train=70, n_dev=20, n_test=10, seed=4)
    train, dev, test = generate_corpus(cfg)
    assert (len(train), len(dev), len(test)) == (70, 20, 10)
    ids = [i.id for i in train + dev + test]
    assert len(set(ids)) == len(ids)


def test_every_relation_present(default_synth):
    for split in default_synth[:3]:
        for rel in RELATIONS:
            assert any(rel in i.gold_relations for i in split)


def test_signal_roles_never_noise():
    used = {r for roles in PATTERNS.values() if roles for r in roles}
    assert not used & set(NOISE_ROLES)


def test_propbank_mirrors_agent():
    train = generate_corpus(SynthConfig(n_train=100, n_dev=0, n_test=0, seed=8))[0]
    for inst in train:
        for _, seg in inst.segments():
            agents = [r.filler_span for r in seg.framenet_roles if r.role_name == "Agent"]
            a0 = [a.filler_span for a in seg.propbank_frames[0].arguments if a.label == "A0"]
            assert agents == a0


@pytest.mark.parametrize("kwargs", [
    {"n_noise_roles": len(NOISE_ROLES) + 1},
    {"n_train": -1},
    {"n_train": 0, "n_dev": 0, "n_test": 0},
    {"segment_length": (2, 5)},
    {"signals": (SignalSpec("Contingency", "agent_asymmetry", 0.3),)},
    {"signals": (SignalSpec("Contingency", "no_such_pattern"),)},
    {"signals": (SignalSpec("Contingency", "purpose_both"), SignalSpec("Temporal", "purpose_both"))},
    {"n_clusters": 1},
    {"label_priors": (("Comparison", 1.0),)},
])
def test_infeasible_configs(kwargs):
    with pytest.raises(SynthesisError):
        generate_corpus(SynthConfig(**kwargs))


def test_pattern_holds_unknown():
    inst = generate_corpus(SynthConfig(n_train=1, n_dev=0, n_test=0))[0][0]
    with pytest.raises(SynthesisError):
        pattern_holds("bogus", inst)
