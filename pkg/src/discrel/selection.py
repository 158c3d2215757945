"""Development-set feature-type selection.

Greedy forward selection: starting from an empty ensemble, each step adds
the candidate (with its best hyperparameter grid point) that gives the
highest dev F1 for the grown ensemble.  Search stops when no candidate
strictly improves dev F1 or the budget is reached.  Candidates within one
exclusivity group (by default: all FrameNet variants, all PropBank
variants) are mutually exclusive.  Ties are broken by higher F1, then
fewer total features, then candidate key.

Each (candidate, grid point, relation) classifier is trained once; the dev
scores are cached so that ensemble F1 for any subset is a mean over cached
arrays.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .corpus import RELATIONS
from .ensemble import FeatureCache, MemberSpec, one_vs_all_labels
from .errors import ConfigError, DiscrelError, SelectionError, TrainingError
from .eval import f1_from_arrays
from .features import FeatureType, parse_feature_type, vectorize
from .linmodel import TrainConfig, design_matrix, fit_arrays, model_from_fit

log = logging.getLogger(__name__)

DEFAULT_CS = (0.01, 0.1, 1.0, 10.0)
DEFAULT_MIN_COUNTS = (1, 2, 5)

SURFACE_POOL = (
    FeatureType("first_last"),
    FeatureType("dates_numbers"),
    FeatureType("production_rules"),
    FeatureType("verb"),
    FeatureType("coref"),
    FeatureType("brown"),
    FeatureType("brown", prefix_len=6),
    FeatureType("pairwise_brown", prefix_len=4),
)
ROLE_POOL = (
    FeatureType("framenet"),
    FeatureType("framenet", with_cluster=False),
    FeatureType("propbank", variant="verbnet"),
    FeatureType("propbank", variant="verbnet", include_modifiers=True),
    FeatureType("propbank", variant="lemma"),
    FeatureType("propbank", variant="lemma", include_modifiers=True),
)


def default_groups(candidates):
    """Exclusivity groups: one per role kind present in the pool."""
    groups = []
    for kind in ("framenet", "propbank"):
        keys = frozenset(c.key for c in candidates if getattr(c, "kind", None) == kind)
        if keys:
            groups.append(keys)
    return tuple(groups)


@dataclass(frozen=True)
class SelectionConfig:
    candidates: tuple = SURFACE_POOL + ROLE_POOL
    Cs: tuple = DEFAULT_CS
    min_counts: tuple = DEFAULT_MIN_COUNTS
    groups: tuple | None = None  # None -> default_groups(candidates)
    budget: int | None = None
    base: TrainConfig = field(default_factory=TrainConfig)
    exhaustive: bool = False

    def __post_init__(self):
        if not self.candidates:
            raise ConfigError("empty candidate pool")
        keys = [c.key for c in self.candidates]
        if len(set(keys)) != len(keys):
            raise ConfigError("candidate pool contains duplicates")
        if self.groups is None:
            object.__setattr__(self, "groups", default_groups(self.candidates))
        seen = set()
        for g in self.groups:
            g = frozenset(g)
            if not g <= set(keys):
                raise ConfigError(f"exclusivity group {sorted(g)} is not a subset of the pool")
            if g & seen:
                raise ConfigError("exclusivity groups overlap")
            seen |= g
        if not self.Cs or not self.min_counts:
            raise ConfigError("hyperparameter grid is empty")
        if self.exhaustive and len(self.candidates) > 8:
            raise ConfigError("exhaustive search is limited to pools of at most 8 candidates")
        if self.budget is not None and self.budget < 1:
            raise ConfigError("budget must be >= 1")

    def group_of(self, key):
        for i, g in enumerate(self.groups):
            if key in g:
                return i
        return None


@dataclass(frozen=True)
class Step:
    step: int
    candidate: str
    C: float
    min_count: int
    dev_f1: float
    n_features: int


@dataclass
class RelationSelection:
    relation: str
    chosen: list  # MemberSpec
    trace: list  # Step
    method: str = "greedy"

    @property
    def keys(self):
        return [s.key for s in self.chosen]

    @property
    def dev_f1(self):
        return self.trace[-1].dev_f1 if self.trace else 0.0


@dataclass
class SelectionResult:
    relations: dict = field(default_factory=dict)

    def __getitem__(self, relation):
        return self.relations[relation]

    def selections(self):
        return {rel: list(sel.chosen) for rel, sel in self.relations.items()}

    def to_dict(self):
        out = {}
        for rel, sel in self.relations.items():
            out[rel] = {
                "method": sel.method,
                "chosen": [{"feature_type": s.key, "C": s.config.C, "min_count": s.min_count}
                           for s in sel.chosen],
                "trace": [vars(t).copy() for t in sel.trace],
            }
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def load_selection(path, base=None):
    base = base or TrainConfig()
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    result = SelectionResult()
    for rel, entry in data.items():
        chosen = [MemberSpec(parse_feature_type(c["feature_type"]),
                             TrainConfig(C=c["C"], tolerance=base.tolerance, max_iter=base.max_iter,
                                         positive_class_weight=base.positive_class_weight,
                                         seed=base.seed),
                             c["min_count"])
                  for c in entry["chosen"]]
        trace = [Step(**t) for t in entry["trace"]]
        result.relations[rel] = RelationSelection(rel, chosen, trace, entry.get("method", "greedy"))
    return result


class CandidateEvaluator:
    """Trains and caches dev scores for every (candidate, grid point, relation)."""

    def __init__(self, train, dev, lexicon, config, train_cache=None):
        self.config = config
        self.train_cache = train_cache or FeatureCache(train, lexicon)
        self.dev_cache = FeatureCache(dev, lexicon)
        self.train = train
        self.dev = dev
        self._dev_X = {}
        self._scores = {}
        self._labels = {}

    def labels(self, relation, split="train"):
        k = (relation, split)
        if k not in self._labels:
            self._labels[k] = one_vs_all_labels(self.train if split == "train" else self.dev, relation)
        return self._labels[k]

    def vocab_size(self, ftype, min_count):
        return len(self.train_cache.vocab_and_matrix(ftype, min_count)[0])

    def dev_matrix(self, ftype, min_count):
        k = (ftype.key, min_count)
        if k not in self._dev_X:
            vocab, _ = self.train_cache.vocab_and_matrix(ftype, min_count)
            feats = self.dev_cache.features(ftype)
            self._dev_X[k] = design_matrix([vectorize(f, vocab) for f in feats], len(vocab))
        return self._dev_X[k]

    def train_config(self, C):
        b = self.config.base
        return TrainConfig(C=C, tolerance=b.tolerance, max_iter=b.max_iter,
                           positive_class_weight=b.positive_class_weight, seed=b.seed, shuffle=b.shuffle)

    def dev_scores(self, ftype, C, min_count, relation):
        k = (ftype.key, C, min_count, relation)
        if k not in self._scores:
            vocab, X = self.train_cache.vocab_and_matrix(ftype, min_count)
            try:
                res = fit_arrays(X, self.labels(relation), self.train_config(C))
            except DiscrelError as exc:
                raise TrainingError(relation, ftype.key, exc) from exc
            model = model_from_fit(res, vocab, self.train_config(C), relation)
            Xd = self.dev_matrix(ftype, min_count)
            self._scores[k] = expit(Xd @ model.weights + model.bias)
        return self._scores[k]

    def grid(self):
        return [(C, m) for m in self.config.min_counts for C in self.config.Cs]


def _ensemble_f1(score_arrays, gold):
    mean = np.mean(np.vstack(score_arrays), axis=0)
    return f1_from_arrays(mean > 0.5, gold)


def _members(config):
    return {c.key: c for c in config.candidates}


def greedy_select(train, dev, relation, config=None, lexicon=None, evaluator=None):
    """Greedy forward selection for one relation; returns a RelationSelection."""
    config = config or SelectionConfig()
    ev = evaluator or CandidateEvaluator(train, dev, lexicon, config)
    gold = ev.labels(relation, "dev")
    if not gold.any():
        raise SelectionError(f"dev corpus has no positive instance of {relation}")

    if config.exhaustive:
        return _exhaustive(ev, relation, config, gold)

    chosen, chosen_scores, trace = [], [], []
    occupied = set()
    current_f1, current_size = 0.0, 0
    budget = config.budget or len(config.candidates)
    while len(chosen) < budget:
        best = None
        for cand in config.candidates:
            if cand.key in {c.key for c in chosen}:
                continue
            group = config.group_of(cand.key)
            if group is not None and group in occupied:
                continue
            for C, mc in ev.grid():
                scores = ev.dev_scores(cand, C, mc, relation)
                f1 = _ensemble_f1(chosen_scores + [scores], gold)
                size = current_size + ev.vocab_size(cand, mc)
                rank = (-f1, size, cand.key, C, mc)
                if best is None or rank < best[0]:
                    best = (rank, cand, C, mc, scores, f1, size)
        if best is None:
            break
        _, cand, C, mc, scores, f1, size = best
        if not f1 > current_f1:
            break
        chosen.append(MemberSpec(cand, ev.train_config(C), mc))
        chosen_scores.append(scores)
        group = config.group_of(cand.key)
        if group is not None:
            occupied.add(group)
        current_f1, current_size = f1, size
        trace.append(Step(len(trace) + 1, cand.key, C, mc, f1, size))
        log.info("%s step %d: +%s (C=%g, min_count=%d) dev F1 %.4f",
                 relation, len(trace), cand.key, C, mc, f1)
    if not chosen:
        log.warning("%s: no candidate reached a positive dev F1", relation)
    return RelationSelection(relation, chosen, trace, "greedy")


def _exhaustive(ev, relation, config, gold):
    # each candidate fixed at its best standalone grid point
    best_point = {}
    for cand in config.candidates:
        ranked = sorted(
            ((-_ensemble_f1([ev.dev_scores(cand, C, mc, relation)], gold), ev.vocab_size(cand, mc), C, mc)
             for C, mc in ev.grid()))
        best_point[cand.key] = ranked[0][2:]
    cands = list(config.candidates)
    best = None
    for r in range(1, len(cands) + 1):
        for subset in itertools.combinations(cands, r):
            groups = [config.group_of(c.key) for c in subset]
            groups = [g for g in groups if g is not None]
            if len(groups) != len(set(groups)):
                continue
            if config.budget and len(subset) > config.budget:
                continue
            arrays = [ev.dev_scores(c, *best_point[c.key], relation) for c in subset]
            f1 = _ensemble_f1(arrays, gold)
            size = sum(ev.vocab_size(c, best_point[c.key][1]) for c in subset)
            rank = (-f1, size, tuple(sorted(c.key for c in subset)))
            if best is None or rank < best[0]:
                best = (rank, subset)
    subset = sorted(best[1], key=lambda c: c.key) if best and best[0][0] < 0 else []
    chosen, trace, arrays, size = [], [], [], 0
    for c in subset:
        C, mc = best_point[c.key]
        chosen.append(MemberSpec(c, ev.train_config(C), mc))
        arrays.append(ev.dev_scores(c, C, mc, relation))
        size += ev.vocab_size(c, mc)
        trace.append(Step(len(trace) + 1, c.key, C, mc, _ensemble_f1(arrays, gold), size))
    return RelationSelection(relation, chosen, trace, "exhaustive")


def select_all(train, dev, config=None, lexicon=None, relations=RELATIONS, train_cache=None):
    """Run selection for every relation with shared feature caches."""
    config = config or SelectionConfig()
    ev = CandidateEvaluator(train, dev, lexicon, config, train_cache)
    result = SelectionResult()
    for rel in relations:
        result.relations[rel] = greedy_select(train, dev, rel, config, lexicon, evaluator=ev)
    return result


def check_exclusivity(result, config):
    """Return (relation, group) pairs that hold more than one member of a group."""
    bad = []
    for rel, sel in result.relations.items():
        counts = {}
        for key in sel.keys:
            g = config.group_of(key)
            if g is not None:
                counts[g] = counts.get(g, 0) + 1
        bad.extend((rel, g) for g, n in counts.items() if n > 1)
    return bad
