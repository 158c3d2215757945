"""Deterministic synthetic corpora with planted relation signals.

Signals live at the annotation level (role spans, first words), so they
reach the classifiers only through the normal extraction pipeline.  For a
signal with strength ``p`` the planted pattern holds in a fraction ``p`` of
the relation's positive instances and ``1 - p`` of its negatives; roles
used by patterns never appear as noise.

The default scenario plants:

* Contingency: Agent in segment 1 but not in segment 2
* Comparison:  Purpose in both segments
* Temporal:    Activity_start in segment 1 and Process_end in segment 2
* Expansion:   segment 2 starts with "also"
"""

import json
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .corpus import (RELATIONS, BrownLexicon, CorefLink, InstancePair, PropBankArg, PropBankFrame,
                     RoleSpan, SegmentAnnotation, VerbInfo, dumps_instances, make_tokens,
                     save_brown_lexicon, validate_corpus)
from .errors import SynthesisError

SIGNAL_WORD = "also"

NOISE_ROLES = (
    "Theme", "Time", "Place", "Manner", "Goal", "Source", "Duration", "Degree", "Means",
    "Instrument", "Topic", "Message", "Speaker", "Addressee", "Request", "Relative_time",
    "Stuff", "Success_or_failure", "Unattr_information", "Businesses", "Cause", "Entity",
    "Experiencer", "Patient", "Recipient", "Result", "Path", "Depictive", "Frequency", "Content",
)

# name -> (roles it uses, or None for surface patterns)
PATTERNS = {
    "agent_asymmetry": ("Agent",),
    "purpose_both": ("Purpose",),
    "start_end_order": ("Activity_start", "Process_end"),
    "first_word_also": None,
}


@dataclass(frozen=True)
class SignalSpec:
    relation: str
    pattern: str
    strength: float = 0.9


def default_signals(strength=0.9):
    return (
        SignalSpec("Contingency", "agent_asymmetry", strength),
        SignalSpec("Comparison", "purpose_both", strength),
        SignalSpec("Temporal", "start_end_order", strength),
        SignalSpec("Expansion", "first_word_also", strength),
    )


@dataclass(frozen=True)
class SynthConfig:
    n_train: int = 2000
    n_dev: int = 500
    n_test: int = 500
    seed: int = 2017
    signals: tuple = field(default_factory=default_signals)
    label_priors: tuple = (("Comparison", 0.16), ("Contingency", 0.28),
                           ("Expansion", 0.40), ("Temporal", 0.16))
    second_label_rate: float = 0.05
    n_words: int = 400
    n_clusters: int = 48
    n_predicates: int = 30
    n_noise_roles: int = 20
    noise_roles_per_segment: float = 1.5
    oov_rate: float = 0.05
    missing_verbnet_rate: float = 0.2
    segment_length: tuple = (5, 14)

    @property
    def n_instances(self):
        return self.n_train + self.n_dev + self.n_test

    def validate(self):
        if min(self.n_train, self.n_dev, self.n_test) < 0 or self.n_instances < 1:
            raise SynthesisError("split sizes must be >= 0 and sum to at least 1")
        patterns = [s.pattern for s in self.signals]
        if len(set(patterns)) != len(patterns):
            raise SynthesisError("each pattern may be planted for at most one relation")
        for s in self.signals:
            if s.relation not in RELATIONS:
                raise SynthesisError(f"unknown relation {s.relation!r}")
            if s.pattern not in PATTERNS:
                raise SynthesisError(f"unknown pattern {s.pattern!r}; known: {sorted(PATTERNS)}")
            if not 0.5 <= s.strength <= 1.0:
                raise SynthesisError(f"signal strength must lie in [0.5, 1], got {s.strength}")
        if self.n_noise_roles > len(NOISE_ROLES) or self.n_noise_roles < 1:
            raise SynthesisError(f"n_noise_roles must be in 1..{len(NOISE_ROLES)}")
        lo, hi = self.segment_length
        if lo < 3 or hi < lo:
            raise SynthesisError("segment_length must satisfy 3 <= min <= max")
        if self.n_words < 10 or self.n_predicates < 2:
            raise SynthesisError("word and predicate vocabularies are too small")
        if self.n_clusters < 2 or self.n_clusters > self.n_words:
            raise SynthesisError("n_clusters must lie in 2..n_words")
        if set(r for r, _ in self.label_priors) != set(RELATIONS):
            raise SynthesisError("label_priors must cover all four relations")
        if not 0 <= self.oov_rate < 1 or not 0 <= self.second_label_rate <= 1:
            raise SynthesisError("rates must lie in [0, 1)")

    def to_dict(self):
        d = asdict(self)
        d["signals"] = [asdict(s) for s in self.signals]
        return d


def _words(config):
    return [f"w{i:04d}" for i in range(config.n_words)]


def _predicates(config):
    rng = random.Random(f"{config.seed}:predicates")
    preds = []
    for i in range(config.n_predicates):
        cls = None
        if rng.random() >= config.missing_verbnet_rate:
            cls = f"{rng.randint(9, 109)}.{rng.randint(1, 9)}"
        preds.append((f"verb{i:02d}", cls))
    return preds


def synth_lexicon(config):
    """Brown lexicon over the synthetic vocabulary (some words left OOV)."""
    rng = random.Random(f"{config.seed}:lexicon")
    paths = set()
    while len(paths) < config.n_clusters + 1:
        paths.add("".join(rng.choice("01") for _ in range(rng.randint(6, 12))))
    paths = sorted(paths)
    rng.shuffle(paths)
    table = {SIGNAL_WORD: paths[0]}
    for w in _words(config):
        if rng.random() < config.oov_rate:
            continue
        table[w] = paths[1 + rng.randrange(config.n_clusters)]
    return BrownLexicon(table)


class _Segment:
    def __init__(self, words):
        self.words = words
        self.roles = []  # (role, span)

    def random_span(self, rng):
        n = len(self.words)
        start = rng.randrange(n)
        end = min(n, start + rng.choice((1, 1, 2)))
        return (start, end)

    def add_role(self, rng, role):
        span = self.random_span(rng)
        self.roles.append((role, span))
        return span


def _plant(rng, pattern, holds, s1, s2):
    if pattern == "first_word_also":
        if holds:
            s2.words[0] = SIGNAL_WORD
        return
    if pattern == "agent_asymmetry":
        state = (True, False) if holds else rng.choice([(False, False), (False, True), (True, True)])
        if state[0]:
            s1.add_role(rng, "Agent")
        if state[1]:
            s2.add_role(rng, "Agent")
    elif pattern == "purpose_both":
        state = (True, True) if holds else rng.choice([(False, False), (True, False), (False, True)])
        if state[0]:
            s1.add_role(rng, "Purpose")
        if state[1]:
            s2.add_role(rng, "Purpose")
    elif pattern == "start_end_order":
        if holds:
            s1.add_role(rng, "Activity_start")
            s2.add_role(rng, "Process_end")
        else:
            state = rng.choice(["none", "start_only", "end_only", "swapped"])
            if state in ("start_only", "swapped"):
                (s2 if state == "swapped" else s1).add_role(rng, "Activity_start")
            if state in ("end_only", "swapped"):
                (s1 if state == "swapped" else s2).add_role(rng, "Process_end")


def pattern_holds(pattern, instance):
    """Whether ``instance`` exhibits ``pattern`` (for checking generated data)."""
    if pattern == "first_word_also":
        return bool(instance.seg2.tokens) and instance.seg2.tokens[0].surface == SIGNAL_WORD
    r1 = {r.role_name for r in instance.seg1.framenet_roles}
    r2 = {r.role_name for r in instance.seg2.framenet_roles}
    if pattern == "agent_asymmetry":
        return "Agent" in r1 and "Agent" not in r2
    if pattern == "purpose_both":
        return "Purpose" in r1 and "Purpose" in r2
    if pattern == "start_end_order":
        return "Activity_start" in r1 and "Process_end" in r2
    raise SynthesisError(f"unknown pattern {pattern!r}")


def _tree(words, rng):
    n = len(words)
    k = rng.randint(1, n - 2)
    np_part = " ".join(f"({'DT' if i == 0 and k > 1 else 'NN'} {w})" for i, w in enumerate(words[:k]))
    verb = f"({rng.choice(('VBD', 'VBZ', 'VBP'))} {words[k]})"
    rest = words[k + 1:]
    obj = " ".join(f"({rng.choice(('NN', 'JJ', 'NNS'))} {w})" for w in rest)
    vp = f"(VP {verb} (NP {obj}))" if rest else f"(VP {verb})"
    return f"(S (NP {np_part}) {vp})"


def _finish_segment(rng, seg, config, predicates, noise_roles):
    for _ in range(_poisson(rng, config.noise_roles_per_segment)):
        seg.add_role(rng, rng.choice(noise_roles))
    frames = []
    main_pred = predicates[rng.randrange(len(predicates))]
    args = []
    for role, span in seg.roles:
        if role == "Agent":
            args.append(PropBankArg("A0", span))
        elif role == "Purpose":
            args.append(PropBankArg("AM-PNC", span))
    if rng.random() < 0.7:
        args.append(PropBankArg("A1", seg.random_span(rng)))
    if rng.random() < 0.3:
        args.append(PropBankArg("AM-TMP", seg.random_span(rng)))
    if rng.random() < 0.2:
        args.append(PropBankArg("AM-LOC", seg.random_span(rng)))
    frames.append(PropBankFrame(main_pred[0], main_pred[1], tuple(args)))
    for role, span in seg.roles:
        if role == "Activity_start":
            frames.append(PropBankFrame("begin", "55.1", (PropBankArg("A1", span),)))
        elif role == "Process_end":
            frames.append(PropBankFrame("finish", "55.1", (PropBankArg("A1", span),)))
    tense = rng.choice(("past", "past", "present", "future", "none"))
    modal = "will" if tense == "future" else (rng.choice(("can", "might")) if rng.random() < 0.1 else None)
    return SegmentAnnotation(
        tokens=make_tokens(seg.words),
        parse_tree=_tree(seg.words, rng),
        main_verbs=(VerbInfo(main_pred[0], tense, modal),),
        vp_lengths=tuple(rng.randint(1, 8) for _ in range(rng.randint(1, 2))),
        date_count=rng.choice((0, 0, 0, 1, 2)),
        number_count=rng.choice((0, 0, 1, 1, 2)),
        framenet_roles=tuple(RoleSpan(r, s) for r, s in seg.roles),
        propbank_frames=tuple(frames),
    )


def _poisson(rng, lam):
    # Knuth; small lambda only
    limit, k, p = math.exp(-lam), 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def _labels(rng, config):
    names = [r for r, _ in config.label_priors]
    weights = [w for _, w in config.label_priors]
    first = rng.choices(names, weights)[0]
    labels = {first}
    if rng.random() < config.second_label_rate:
        others = [r for r in names if r != first]
        labels.add(rng.choices(others, [w for r, w in config.label_priors if r != first])[0])
    return frozenset(labels)


def generate_corpus(config=None):
    """Return ``(train, dev, test)`` lists of InstancePair."""
    config = config or SynthConfig()
    config.validate()
    rng = random.Random(config.seed)
    words = _words(config)
    predicates = _predicates(config)
    noise_roles = list(NOISE_ROLES[:config.n_noise_roles])
    lo, hi = config.segment_length
    instances = []
    for i in range(config.n_instances):
        gold = _labels(rng, config)
        s1 = _Segment([rng.choice(words) for _ in range(rng.randint(lo, hi))])
        s2 = _Segment([rng.choice(words) for _ in range(rng.randint(lo, hi))])
        for spec in config.signals:
            p = spec.strength if spec.relation in gold else 1.0 - spec.strength
            _plant(rng, spec.pattern, rng.random() < p, s1, s2)
        seg1 = _finish_segment(rng, s1, config, predicates, noise_roles)
        seg2 = _finish_segment(rng, s2, config, predicates, noise_roles)
        links = tuple(CorefLink(s1.random_span(rng), s2.random_span(rng))
                      for _ in range(rng.choice((0, 0, 1, 1, 2, 3))))
        instances.append(InstancePair(f"syn{config.seed}-{i:05d}", seg1, seg2, links, gold))
    validate_corpus(instances)
    a, b = config.n_train, config.n_train + config.n_dev
    return instances[:a], instances[a:b], instances[b:]


def write_synthetic(config, directory):
    """Write train/dev/test instance files, the lexicon and the config.

    Returns a dict of written file paths.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, dev, test = generate_corpus(config)
    paths = {}
    for name, split in (("train", train), ("dev", dev), ("test", test)):
        paths[name] = directory / f"{name}.jsonl"
        paths[name].write_text(dumps_instances(split), encoding="utf-8")
    paths["lexicon"] = directory / "lexicon.tsv"
    save_brown_lexicon(synth_lexicon(config), paths["lexicon"])
    paths["config"] = directory / "synth_config.json"
    paths["config"].write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths
