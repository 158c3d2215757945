"""Feature extraction and sparse binary vectorization.

Every extractor maps an :class:`InstancePair` to a list of feature strings
(a multiset; duplicates are kept and collapse later in :func:`vectorize`).
Per-segment features are prefixed with ``1:`` or ``2:``.

Feature types have a canonical key such as ``brown[6]`` or
``propbank[lemma,mod]``; keys are what reports, manifests and model files
store.
"""

import hashlib
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import UNK, BrownLexicon, cluster_of
from .errors import ConfigError, TreeParseError
from .trees import parse_tree

log = logging.getLogger(__name__)

KINDS = (
    "first_last", "dates_numbers", "production_rules", "verb", "coref",
    "brown", "pairwise_brown", "framenet", "propbank",
)
ROLE_KINDS = ("framenet", "propbank")
COREF_CAP = 5
_NO_LEXICON = BrownLexicon()
DECODE_GRAMMAR_VERSION = 1


@dataclass(frozen=True)
class FeatureType:
    """One configured feature type.

    Only the parameters relevant to ``kind`` may differ from their defaults:

    * ``prefix_len`` -- brown / pairwise_brown; None keeps full paths
    * ``with_cluster``, ``head`` -- framenet (``head`` also used by propbank)
    * ``variant`` ("verbnet" or "lemma"), ``include_modifiers`` -- propbank
    * ``conjunctions`` -- first_last; adds cross-segment first/last word pairs
    """

    kind: str
    prefix_len: int | None = None
    with_cluster: bool = True
    variant: str = "verbnet"
    include_modifiers: bool = False
    head: str = "last"
    conjunctions: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown feature kind {self.kind!r}")
        if self.prefix_len is not None:
            if self.kind not in ("brown", "pairwise_brown"):
                raise ConfigError(f"prefix_len is not a parameter of {self.kind}")
            if self.prefix_len < 1:
                raise ConfigError("prefix_len must be >= 1")
        if not self.with_cluster and self.kind != "framenet":
            raise ConfigError("with_cluster is only a framenet parameter")
        if self.variant not in ("verbnet", "lemma"):
            raise ConfigError(f"unknown propbank variant {self.variant!r}")
        if (self.variant != "verbnet" or self.include_modifiers) and self.kind != "propbank":
            raise ConfigError("variant/include_modifiers are propbank parameters")
        if self.head not in ("last", "first"):
            raise ConfigError(f"head must be 'first' or 'last', got {self.head!r}")
        if self.head != "last" and self.kind not in ROLE_KINDS:
            raise ConfigError("head is a role-feature parameter")
        if self.conjunctions and self.kind != "first_last":
            raise ConfigError("conjunctions is a first_last parameter")

    @property
    def is_role(self):
        return self.kind in ROLE_KINDS

    @property
    def key(self):
        opts = []
        if self.prefix_len is not None:
            opts.append(str(self.prefix_len))
        if self.kind == "framenet" and not self.with_cluster:
            opts.append("nocluster")
        if self.kind == "propbank":
            opts.append(self.variant)
            if self.include_modifiers:
                opts.append("mod")
        if self.head != "last":
            opts.append("head=first")
        if self.conjunctions:
            opts.append("conj")
        return f"{self.kind}[{','.join(opts)}]" if opts else self.kind

    def __str__(self):
        return self.key


_KEY_RE = re.compile(r"^([a-z_]+)(?:\[([^\]]*)\])?$")


def parse_feature_type(key):
    """Inverse of ``FeatureType.key``."""
    if key.startswith("all(") and key.endswith(")"):
        return FeatureUnion(tuple(parse_feature_type(k) for k in key[4:-1].split("+")))
    m = _KEY_RE.match(key.strip())
    if not m:
        raise ConfigError(f"cannot parse feature type {key!r}")
    kind, opts = m.group(1), m.group(2)
    kwargs = {}
    for opt in filter(None, (opts or "").split(",")):
        opt = opt.strip()
        if opt.isdigit():
            kwargs["prefix_len"] = int(opt)
        elif opt == "nocluster":
            kwargs["with_cluster"] = False
        elif opt in ("verbnet", "lemma"):
            kwargs["variant"] = opt
        elif opt == "mod":
            kwargs["include_modifiers"] = True
        elif opt == "head=first":
            kwargs["head"] = "first"
        elif opt == "conj":
            kwargs["conjunctions"] = True
        else:
            raise ConfigError(f"unknown option {opt!r} in feature type {key!r}")
    return FeatureType(kind, **kwargs)


@dataclass(frozen=True)
class FeatureUnion:
    """Several feature types pooled into one namespaced feature space."""

    types: tuple

    @property
    def key(self):
        return "all(" + "+".join(t.key for t in self.types) + ")"

    @property
    def is_role(self):
        return any(t.is_role for t in self.types)

    def __str__(self):
        return self.key


# -- extractors -----------------------------------------------------------------

def _round_half_up(x):
    return int(math.floor(x + 0.5))


def extract_surface(instance, conjunctions=False):
    """First/last words, date/number counts and verb features.

    Returns a dict with keys ``first_last``, ``dates_numbers`` and ``verb``.
    """
    first_last, dates, verbs = [], [], []
    for k, seg in instance.segments():
        words = seg.words
        if words:
            first_last.append(f"{k}:FIRST:{words[0]}")
            first_last.append(f"{k}:LAST:{words[-1]}")
        dates.append(f"{k}:DATE:{seg.date_count}")
        dates.append(f"{k}:NUM:{seg.number_count}")
        for v in seg.main_verbs:
            verbs.append(f"{k}:VERB:{v.lemma}")
            verbs.append(f"{k}:TENSE:{v.tense}")
            if v.modal:
                verbs.append(f"{k}:MODAL:{v.modal}")
        if seg.vp_lengths:
            mean = sum(seg.vp_lengths) / len(seg.vp_lengths)
            verbs.append(f"{k}:AVP:{_round_half_up(mean)}")
    if conjunctions and instance.seg1.tokens and instance.seg2.tokens:
        w1, w2 = instance.seg1.words, instance.seg2.words
        first_last.append(f"FIRSTS:{w1[0]}|{w2[0]}")
        first_last.append(f"LASTS:{w1[-1]}|{w2[-1]}")
        first_last.append(f"FIRST1LAST2:{w1[0]}|{w2[-1]}")
    return {"first_last": first_last, "dates_numbers": dates, "verb": verbs}


def _rules(tree):
    out = []
    for node in tree.internal_nodes():
        if node.label == "":
            continue  # unlabeled treebank wrapper
        parts = [node.label]
        parts += [c if isinstance(c, str) else c.label for c in node.children]
        out.append("_".join(parts))
    return out


def extract_production_rules(instance):
    feats = []
    for k, seg in instance.segments():
        if seg.parse_tree is None:
            continue
        try:
            tree = parse_tree(seg.parse_tree, instance.id)
        except TreeParseError as exc:
            if exc.instance_id is None:
                raise TreeParseError(str(exc), instance.id) from exc
            raise
        feats.extend(f"{k}:{rule}" for rule in _rules(tree))
    return feats


def extract_coref(instance, cap=COREF_CAP):
    c = min(len(instance.coref_links), cap)
    feats = [f"COREF:{c}"]
    if c > 0:
        feats.append("COREF:HAS")
    return feats


def _paths(seg, lexicon, prefix_len):
    out = []
    for w in seg.words:
        p = cluster_of(lexicon, w, prefix_len)
        if p != UNK:
            out.append(p)
    return out


def extract_brown(instance, lexicon, prefix_len=None, pairwise=False):
    if not pairwise:
        feats = []
        for k, seg in instance.segments():
            feats.extend(f"{k}:{p}" for p in _paths(seg, lexicon, prefix_len))
        return feats
    p1 = _paths(instance.seg1, lexicon, prefix_len)
    p2 = _paths(instance.seg2, lexicon, prefix_len)
    return [f"{a}x{b}" for a in p1 for b in p2]


def _head_word(seg, span, head):
    start, end = span
    return seg.tokens[end - 1 if head == "last" else start].surface


def extract_framenet(instance, lexicon, with_cluster=True, head="last"):
    feats = []
    for k, seg in instance.segments():
        for role in seg.framenet_roles:
            feats.append(f"{k}:{role.role_name}")
            if with_cluster:
                path = cluster_of(lexicon, _head_word(seg, role.filler_span, head))
                if path != UNK:
                    feats.append(f"{k}:{role.role_name}:{path}")
    return feats


def extract_propbank(instance, lexicon, variant="verbnet", include_modifiers=False, head="last"):
    feats = []
    for k, seg in instance.segments():
        for frame in seg.propbank_frames:
            if variant == "verbnet" and not frame.verbnet_class:
                continue
            for arg in frame.arguments:
                if arg.is_modifier and not include_modifiers:
                    continue
                if variant == "verbnet":
                    feats.append(f"{k}:{frame.predicate_lemma}-{frame.verbnet_class}_{arg.label}")
                else:
                    path = cluster_of(lexicon, _head_word(seg, arg.filler_span, head))
                    if path != UNK:
                        feats.append(f"{k}:{frame.predicate_lemma}_{arg.label}:{path}")
    return feats


def needs_lexicon(ftype):
    """Whether extracting ``ftype`` looks up Brown clusters."""
    if isinstance(ftype, FeatureUnion):
        return any(needs_lexicon(t) for t in ftype.types)
    if ftype.kind in ("brown", "pairwise_brown"):
        return True
    if ftype.kind == "framenet":
        return ftype.with_cluster
    return ftype.kind == "propbank" and ftype.variant == "lemma"


def extract(instance, ftype, lexicon=None):
    """Feature strings of one feature type (or a namespaced union of types)."""
    if isinstance(ftype, FeatureUnion):
        out = []
        for t in ftype.types:
            out.extend(f"{t.key}|{s}" for s in extract(instance, t, lexicon))
        return out
    kind = ftype.kind
    if kind in ("first_last", "dates_numbers", "verb"):
        return extract_surface(instance, ftype.conjunctions)[kind]
    if kind == "production_rules":
        return extract_production_rules(instance)
    if kind == "coref":
        return extract_coref(instance)
    if lexicon is None:
        if needs_lexicon(ftype):
            raise ConfigError(f"feature type {ftype.key} needs a Brown lexicon")
        lexicon = _NO_LEXICON
    if kind in ("brown", "pairwise_brown"):
        return extract_brown(instance, lexicon, ftype.prefix_len, pairwise=kind == "pairwise_brown")
    if kind == "framenet":
        return extract_framenet(instance, lexicon, ftype.with_cluster, ftype.head)
    return extract_propbank(instance, lexicon, ftype.variant, ftype.include_modifiers, ftype.head)


def debug_dump_line(instance, ftypes, lexicon=None):
    """One JSON line listing each type's features in lexicographic order."""
    feats = {t.key: sorted(extract(instance, t, lexicon)) for t in ftypes}
    return json.dumps({"id": instance.id, "features": feats}, ensure_ascii=False, sort_keys=True)


# -- decoding (for weight reports) -------------------------------------------

_SEG_RE = re.compile(r"^([12]):(.*)$")


def decode_feature(ftype_key, feature):
    """Split a feature string into named parts according to its type.

    Returns a dict that always has ``feature`` and ``segment`` (1, 2 or
    None) and, where the grammar allows, ``label``, ``predicate``,
    ``verbnet_class``, ``cluster``, ``value`` or ``pair``.
    """
    out = {"feature": feature, "segment": None}
    if "|" in feature and ftype_key.startswith("all("):
        sub_key, feature = feature.split("|", 1)
        out.update(decode_feature(sub_key, feature))
        out["feature"] = f"{sub_key}|{feature}"
        out["feature_type"] = sub_key
        return out
    kind = ftype_key.split("[", 1)[0]
    if kind == "pairwise_brown":
        left, _, right = feature.partition("x")
        out["pair"] = (left, right)
        return out
    if kind == "coref":
        out["value"] = feature.split(":", 1)[1]
        return out
    m = _SEG_RE.match(feature)
    if not m:
        out["label"] = feature
        return out
    out["segment"] = int(m.group(1))
    rest = m.group(2)
    if kind == "brown":
        out["cluster"] = rest
    elif kind in ("first_last", "dates_numbers", "verb"):
        label, _, value = rest.partition(":")
        out["label"], out["value"] = label, value
    elif kind == "production_rules":
        out["label"] = rest
    elif kind == "framenet":
        label, _, cluster = rest.partition(":")
        out["label"] = label
        if cluster:
            out["cluster"] = cluster
    elif kind == "propbank":
        if "[lemma" in ftype_key:
            body, _, cluster = rest.rpartition(":")
            pred, _, label = body.rpartition("_")
            out.update(predicate=pred, label=label, cluster=cluster)
        else:
            body, _, label = rest.rpartition("_")
            pred, _, cls = body.partition("-")
            out.update(predicate=pred, verbnet_class=cls, label=label)
    return out


# -- vocabularies and vectors ------------------------------------------------

@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Feature string <-> dense id map for one feature type.

    ``counts`` holds the number of training instances in which each feature
    occurs; ids follow lexicographic order of the feature strings.
    """

    ftype_key: str
    features: tuple
    counts: tuple
    min_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "index", {f: i for i, f in enumerate(self.features)})
        h = hashlib.sha256()
        h.update(self.ftype_key.encode("utf-8"))
        for f in self.features:
            h.update(b"\n")
            h.update(f.encode("utf-8"))
        object.__setattr__(self, "fingerprint", h.hexdigest()[:32])

    def __len__(self):
        return len(self.features)

    def __contains__(self, feature):
        return feature in self.index

    def id_of(self, feature):
        return self.index.get(feature)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Sorted, de-duplicated feature ids bound to one vocabulary."""

    ids: np.ndarray
    fingerprint: str

    def __len__(self):
        return len(self.ids)


def vocabulary_from_counts(ftype_key, counts, min_count=1):
    if min_count < 1:
        raise ConfigError("min_count must be >= 1")
    kept = sorted(f for f, c in counts.items() if c >= min_count)
    if not kept:
        log.warning("vocabulary for %s is empty (min_count=%d); classifier will be bias-only",
                    ftype_key, min_count)
    return Vocabulary(ftype_key, tuple(kept), tuple(counts[f] for f in kept), min_count)


def count_features(feature_lists):
    """Instance frequency of every feature over a list of multisets."""
    counts = Counter()
    for feats in feature_lists:
        counts.update(set(feats))
    return counts


def build_vocabulary(instances, ftype, lexicon=None, min_count=1):
    return vocabulary_from_counts(
        ftype.key, count_features(extract(inst, ftype, lexicon) for inst in instances), min_count)


def vectorize(features, vocab):
    index = vocab.index
    ids = {index[f] for f in features if f in index}
    return FeatureVector(np.array(sorted(ids), dtype=np.int64), vocab.fingerprint)
