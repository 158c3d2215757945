"""One-vs-all precision, recall and F1 over the four top-level relations."""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .corpus import RELATIONS
from .errors import CoverageError

SHORT_NAMES = {"Comparison": "comp", "Contingency": "cont", "Expansion": "exp", "Temporal": "temp"}


def f1_from_counts(tp, fp, fn):
    """F1 = 2PR/(P+R), computed as 2tp / (2tp + fp + fn); 0 when undefined."""
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if tp > 0 else 0.0


def f1_from_arrays(predicted, gold):
    predicted = np.asarray(predicted, dtype=bool)
    gold = np.asarray(gold, dtype=bool)
    tp = int(np.count_nonzero(predicted & gold))
    fp = int(np.count_nonzero(predicted & ~gold))
    fn = int(np.count_nonzero(~predicted & gold))
    return f1_from_counts(tp, fp, fn)


@dataclass(frozen=True)
class RelationScores:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    degenerate: bool  # precision or recall had a zero denominator

    @classmethod
    def from_counts(cls, tp, fp, fn, tn):
        degenerate = (tp + fp == 0) or (tp + fn == 0)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        return cls(tp, fp, fn, tn, precision, recall, f1_from_counts(tp, fp, fn), degenerate)


@dataclass(frozen=True)
class EvalReport:
    scores: dict
    n_instances: int

    def __getitem__(self, relation):
        return self.scores[relation]

    def f1(self, relation):
        return self.scores[relation].f1

    def to_dict(self):
        return {"n_instances": self.n_instances,
                "relations": {r: asdict(s) for r, s in self.scores.items()}}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def evaluate(predictions, gold):
    """Score predicted relation sets against gold instances.

    ``predictions`` maps instance id to a set of relation labels.  Ids not
    present in ``gold`` are ignored; gold ids without a prediction raise
    :class:`CoverageError`.
    """
    missing = [inst.id for inst in gold if inst.id not in predictions]
    if missing:
        raise CoverageError(missing)
    scores = {}
    for rel in RELATIONS:
        tp = fp = fn = tn = 0
        for inst in gold:
            p = rel in predictions[inst.id]
            g = rel in inst.gold_relations
            if p and g:
                tp += 1
            elif p:
                fp += 1
            elif g:
                fn += 1
            else:
                tn += 1
        scores[rel] = RelationScores.from_counts(tp, fp, fn, tn)
    return EvalReport(scores, len(gold))


def format_table(reports):
    """Human-readable F1 table (percent, one decimal) in comp/cont/exp/temp order.

    ``reports`` maps a row name (e.g. a model variant) to an EvalReport.
    """
    width = max([len(name) for name in reports] + [5])
    header = " " * width + "".join(f"{SHORT_NAMES[r]:>7}" for r in RELATIONS)
    rows = [header]
    for name, report in reports.items():
        rows.append(f"{name:<{width}}" + "".join(f"{100 * report.f1(r):7.1f}" for r in RELATIONS))
    return "\n".join(rows) + "\n"
