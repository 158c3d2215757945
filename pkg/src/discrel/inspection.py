"""Ranked feature-weight reports and per-instance explanations."""

import json
from dataclasses import dataclass, field

from .ensemble import decide, mean_score
from .errors import BindingError, ConfigError
from .features import decode_feature


@dataclass(frozen=True)
class WeightRow:
    feature: str
    weight: float
    segment: int | None = None
    label: str | None = None
    parts: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class WeightReport:
    relation: str | None
    feature_type: str
    rows: tuple
    k_exceeds_vocab: bool = False

    def to_dict(self):
        return {
            "relation": self.relation,
            "feature_type": self.feature_type,
            "k_exceeds_vocab": self.k_exceeds_vocab,
            "rows": [{"feature": r.feature, "segment": r.segment, "label": r.label, "weight": r.weight,
                      "parts": r.parts} for r in self.rows],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self):
        """Aligned columns: label, position, weight."""
        header = ("Label", "Position", "Weight")
        body = []
        for r in self.rows:
            pos = f"segment {r.segment}" if r.segment else "-"
            body.append((r.label or r.feature, pos, f"{r.weight:+.5f}"))
        w0 = max(len(x[0]) for x in [header] + body)
        w1 = max(len(x[1]) for x in [header] + body)
        title = f"# {self.relation or '?'} / {self.feature_type}"
        lines = [title, f"{header[0]:<{w0}}  {header[1]:<{w1}}  {header[2]:>10}"]
        lines += [f"{a:<{w0}}  {b:<{w1}}  {c:>10}" for a, b, c in body]
        return "\n".join(lines) + "\n"


def _row(ftype_key, feature, weight):
    parts = decode_feature(ftype_key, feature)
    label = parts.get("label")
    if label is None and "cluster" in parts:
        label = parts["cluster"]
    if label is not None and parts.get("cluster") and parts.get("label"):
        label = f"{parts['label']}:{parts['cluster']}"
    parts = {k: v for k, v in parts.items() if k not in ("feature",) and v is not None}
    if "pair" in parts:
        parts["pair"] = list(parts["pair"])
    return WeightRow(feature, float(weight), parts.get("segment"), label, parts)


def top_weights(model, vocab, k, sign="both"):
    """The ``k`` highest (``positive``), lowest (``negative``) or both.

    Rows come back sorted by weight descending, ties by feature string.
    With ``both`` the result is the union of the two one-sided reports.
    """
    if model.vocab_fingerprint != vocab.fingerprint:
        raise BindingError("model does not match vocabulary")
    if sign not in ("positive", "negative", "both"):
        raise ConfigError(f"sign must be positive, negative or both, got {sign!r}")
    if k < 0:
        raise ConfigError("k must be non-negative")
    pairs = list(zip(vocab.features, (float(w) for w in model.weights)))
    picked = {}
    if sign in ("positive", "both"):
        for f, w in sorted(pairs, key=lambda p: (-p[1], p[0]))[:k]:
            picked[f] = w
    if sign in ("negative", "both"):
        for f, w in sorted(pairs, key=lambda p: (p[1], p[0]))[:k]:
            picked[f] = w
    rows = tuple(_row(vocab.ftype_key, f, w)
                 for f, w in sorted(picked.items(), key=lambda p: (-p[1], p[0])))
    return WeightReport(model.relation, vocab.ftype_key, rows, k > len(vocab))


@dataclass(frozen=True)
class MemberExplanation:
    feature_type: str
    score: float
    bias: float
    margin: float
    active: tuple  # (feature, weight), sorted by |weight| desc


@dataclass(frozen=True)
class Explanation:
    instance_id: str
    relation: str
    members: tuple
    score: float
    decision: bool

    def to_dict(self):
        return {
            "id": self.instance_id, "relation": self.relation, "score": self.score,
            "decision": self.decision,
            "members": [{"feature_type": m.feature_type, "score": m.score, "bias": m.bias,
                         "margin": m.margin, "active": [list(a) for a in m.active]}
                        for m in self.members],
        }


def explain(ens, instance):
    """Per-member active feature weights, scores, ensemble mean and decision."""
    members = []
    for m in ens.members:
        fv = m.vector(instance)
        margin = m.model.margin(fv)
        active = [(m.vocab.features[i], float(m.model.weights[i])) for i in fv.ids]
        active.sort(key=lambda a: (-abs(a[1]), a[0]))
        members.append(MemberExplanation(m.key, m.model.score(fv), float(m.model.bias), margin, tuple(active)))
    score = mean_score(x.score for x in members)
    return Explanation(instance.id, ens.relation, tuple(members), score, decide(score))
