"""
Reading a role classifier's weights
===================================

Trains the FrameNet-role classifier for Contingency on the synthetic
corpus, where Contingency instances tend to have an Agent in segment 1
but none in segment 2, then lists its strongest weights and explains
one test prediction.
"""

from discrel.ensemble import FeatureCache, Member, RelationEnsemble, one_vs_all_labels
from discrel.features import FeatureType
from discrel.inspection import explain, top_weights
from discrel.linmodel import TrainConfig, fit_arrays, model_from_fit
from discrel.synth import SynthConfig, generate_corpus, pattern_holds, synth_lexicon

config = SynthConfig()
train, _, test = generate_corpus(config)
lexicon = synth_lexicon(config)

ftype = FeatureType("framenet", with_cluster=False)
vocab, X = FeatureCache(train, lexicon).vocab_and_matrix(ftype, 1)
cfg = TrainConfig(C=1.0)
fit = fit_arrays(X, one_vs_all_labels(train, "Contingency"), cfg)
model = model_from_fit(fit, vocab, cfg, "Contingency")
print(f"{len(vocab)} features, {fit.n_iter} Newton iterations, |grad| = {fit.grad_norm:.1e}\n")

# %%
# The planted Agent asymmetry shows up with opposite signs per segment.
print(top_weights(model, vocab, k=4).to_text())

# %%
# Which features fire for one Contingency test instance, and how much each contributes.
inst = next(i for i in test if "Contingency" in i.gold_relations and pattern_holds("agent_asymmetry", i))
ens = RelationEnsemble("Contingency", (Member(ftype, vocab, model, lexicon),))
exp = explain(ens, inst)
member = exp.members[0]
print(f"instance {exp.instance_id}: bias {member.bias:+.3f}")
for feat, w in member.active:
    print(f"  {feat:24s} {w:+.3f}")
print(f"score {exp.score:.3f} -> {'Contingency' if exp.decision else 'not Contingency'}")
