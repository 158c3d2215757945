"""Annotated instance pairs, their on-disk format, and Brown cluster lexicons.

Instance files are UTF-8 JSON lines.  The first line is a header record
``{"format": "discrel-instances", "version": 1}``; every following line is
one instance.  Spans are ``[start, end)`` token offsets within a segment.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusFormatError, InstanceValidationError, TreeParseError
from .trees import parse_tree

log = logging.getLogger(__name__)

RELATIONS = ("Comparison", "Contingency", "Expansion", "Temporal")
TENSES = ("past", "present", "future", "none")
FORMAT_NAME = "discrel-instances"
FORMAT_VERSION = 1
UNK = "<UNK>"

_MONTHS = {
    "january", "february", "march", "april", "may", "june", "july", "august",
    "september", "october", "november", "december",
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.",
}
_YEAR_RE = re.compile(r"^(1[5-9]|20)\d\d$")
_NUMBER_RE = re.compile(r"^\d+([.,]\d+)*$")
_BITS_RE = re.compile(r"^[01]+$")


@dataclass(frozen=True)
class Token:
    surface: str
    index: int


@dataclass(frozen=True)
class VerbInfo:
    lemma: str
    tense: str = "none"
    modal: str | None = None


@dataclass(frozen=True)
class RoleSpan:
    role_name: str
    filler_span: tuple[int, int]


@dataclass(frozen=True)
class PropBankArg:
    label: str
    filler_span: tuple[int, int]

    @property
    def is_modifier(self):
        return self.label.startswith("AM-")


@dataclass(frozen=True)
class PropBankFrame:
    predicate_lemma: str
    verbnet_class: str | None
    arguments: tuple[PropBankArg, ...] = ()


@dataclass(frozen=True)
class SegmentAnnotation:
    tokens: tuple[Token, ...]
    parse_tree: str | None = None
    main_verbs: tuple[VerbInfo, ...] = ()
    vp_lengths: tuple[int, ...] = ()
    date_count: int = 0
    number_count: int = 0
    framenet_roles: tuple[RoleSpan, ...] = ()
    propbank_frames: tuple[PropBankFrame, ...] = ()

    @property
    def words(self):
        return [t.surface for t in self.tokens]

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class CorefLink:
    mention1_span: tuple[int, int]
    mention2_span: tuple[int, int]


@dataclass(frozen=True)
class InstancePair:
    id: str
    seg1: SegmentAnnotation
    seg2: SegmentAnnotation
    coref_links: tuple[CorefLink, ...] = ()
    gold_relations: frozenset = frozenset()

    def segments(self):
        return ((1, self.seg1), (2, self.seg2))


def make_tokens(words):
    return tuple(Token(w, i) for i, w in enumerate(words))


# -- validation ---------------------------------------------------------------

def _check_span(iid, span, n, what):
    start, end = span
    if not (0 <= start < end <= n):
        raise InstanceValidationError(
            iid, f"{what} span [{start}, {end}) out of range for {n} tokens")


def _validate_segment(iid, k, seg):
    n = len(seg.tokens)
    for i, tok in enumerate(seg.tokens):
        if not tok.surface:
            raise InstanceValidationError(iid, f"seg{k} token {i} is empty")
        if tok.index != i:
            raise InstanceValidationError(iid, f"seg{k} token indices not consecutive at {i}")
    if seg.parse_tree is not None:
        try:
            leaves = parse_tree(seg.parse_tree, iid).leaves()
        except TreeParseError as exc:
            raise InstanceValidationError(iid, f"seg{k} parse_tree: {exc}") from exc
        if len(leaves) != n:
            raise InstanceValidationError(
                iid, f"seg{k} parse_tree has {len(leaves)} leaves but segment has {n} tokens")
    for v in seg.main_verbs:
        if v.tense not in TENSES:
            raise InstanceValidationError(iid, f"seg{k} unknown tense {v.tense!r}")
        if not v.lemma:
            raise InstanceValidationError(iid, f"seg{k} main verb with empty lemma")
    for length in seg.vp_lengths:
        if length < 1:
            raise InstanceValidationError(iid, f"seg{k} vp_length {length} is not positive")
    if seg.date_count < 0 or seg.number_count < 0:
        raise InstanceValidationError(iid, f"seg{k} negative date/number count")
    for role in seg.framenet_roles:
        _check_span(iid, role.filler_span, n, f"seg{k} framenet role {role.role_name!r}")
    for frame in seg.propbank_frames:
        for arg in frame.arguments:
            _check_span(iid, arg.filler_span, n,
                        f"seg{k} propbank {frame.predicate_lemma}/{arg.label}")


def validate_instance(inst):
    """Raise InstanceValidationError if any type invariant is violated."""
    iid = inst.id
    if not isinstance(iid, str) or not iid:
        raise InstanceValidationError(iid, "id must be a non-empty string")
    _validate_segment(iid, 1, inst.seg1)
    _validate_segment(iid, 2, inst.seg2)
    for link in inst.coref_links:
        _check_span(iid, link.mention1_span, len(inst.seg1), "coref mention1")
        _check_span(iid, link.mention2_span, len(inst.seg2), "coref mention2")
    unknown = set(inst.gold_relations) - set(RELATIONS)
    if unknown:
        raise InstanceValidationError(iid, f"unknown relation label(s) {sorted(unknown)}")


def validate_corpus(instances):
    seen = set()
    for inst in instances:
        validate_instance(inst)
        if inst.id in seen:
            raise InstanceValidationError(inst.id, "duplicate instance id")
        seen.add(inst.id)


# -- date / number fallback ---------------------------------------------------

def detect_counts(words):
    """Heuristic (date_count, number_count) for segments lacking annotation.

    Month names and 4-digit years count as dates; other digit-only tokens
    count as numbers.
    """
    dates = numbers = 0
    for w in words:
        if w.lower() in _MONTHS or _YEAR_RE.match(w):
            dates += 1
        elif _NUMBER_RE.match(w):
            numbers += 1
    return dates, numbers


# -- (de)serialization --------------------------------------------------------

def _span(value, line, fieldname):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in value)):
        raise CorpusFormatError(f"span must be [start, end], got {value!r}", line, fieldname)
    return (value[0], value[1])


def _segment_from_record(rec, line, name, fallback_counts):
    if not isinstance(rec, dict):
        raise CorpusFormatError("segment must be an object", line, name)

    def get(key, default=...):
        if key in rec:
            return rec[key]
        if default is ...:
            raise CorpusFormatError("missing field", line, f"{name}.{key}")
        return default

    words = get("tokens")
    if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
        raise CorpusFormatError("tokens must be a list of strings", line, f"{name}.tokens")
    try:
        verbs = tuple(VerbInfo(v["lemma"], v.get("tense", "none"), v.get("modal"))
                      for v in get("main_verbs", []))
        roles = tuple(RoleSpan(r["role_name"],
                               _span(r["filler_span"], line, f"{name}.framenet_roles[{i}].filler_span"))
                      for i, r in enumerate(get("framenet_roles", [])))
        frames = tuple(
            PropBankFrame(
                f["predicate_lemma"],
                f.get("verbnet_class"),
                tuple(PropBankArg(a["label"], _span(a["filler_span"], line,
                                                    f"{name}.propbank_frames[{i}].arguments[{j}]"))
                      for j, a in enumerate(f.get("arguments", []))),
            )
            for i, f in enumerate(get("propbank_frames", [])))
    except (KeyError, TypeError, AttributeError) as exc:
        raise CorpusFormatError(f"malformed nested record ({exc})", line, name) from exc

    date_count = get("date_count", None)
    number_count = get("number_count", None)
    if date_count is None or number_count is None:
        if not fallback_counts:
            missing = "date_count" if date_count is None else "number_count"
            raise CorpusFormatError("missing field (enable count detection for unannotated input)",
                                    line, f"{name}.{missing}")
        d, n = detect_counts(words)
        date_count = d if date_count is None else date_count
        number_count = n if number_count is None else number_count
    for key, val in (("date_count", date_count), ("number_count", number_count)):
        if not isinstance(val, int) or isinstance(val, bool):
            raise CorpusFormatError("must be an integer", line, f"{name}.{key}")
    vp_lengths = get("vp_lengths", [])
    if not isinstance(vp_lengths, list) or not all(isinstance(x, int) for x in vp_lengths):
        raise CorpusFormatError("must be a list of integers", line, f"{name}.vp_lengths")

    return SegmentAnnotation(
        tokens=make_tokens(words),
        parse_tree=get("parse_tree", None),
        main_verbs=verbs,
        vp_lengths=tuple(vp_lengths),
        date_count=date_count,
        number_count=number_count,
        framenet_roles=roles,
        propbank_frames=frames,
    )


def instance_from_record(rec, line=None, fallback_counts=False):
    if not isinstance(rec, dict):
        raise CorpusFormatError("instance record must be an object", line)
    for key in ("id", "seg1", "seg2"):
        if key not in rec:
            raise CorpusFormatError("missing field", line, key)
    try:
        links = tuple(CorefLink(_span(c["mention1_span"], line, "coref_links"),
                                _span(c["mention2_span"], line, "coref_links"))
                      for c in rec.get("coref_links", []))
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"malformed coref link ({exc})", line, "coref_links") from exc
    gold = rec.get("gold_relations", [])
    if not isinstance(gold, list):
        raise CorpusFormatError("must be a list", line, "gold_relations")
    return InstancePair(
        id=rec["id"],
        seg1=_segment_from_record(rec["seg1"], line, "seg1", fallback_counts),
        seg2=_segment_from_record(rec["seg2"], line, "seg2", fallback_counts),
        coref_links=links,
        gold_relations=frozenset(gold),
    )


def _segment_to_record(seg):
    return {
        "tokens": seg.words,
        "parse_tree": seg.parse_tree,
        "main_verbs": [{"lemma": v.lemma, "tense": v.tense, "modal": v.modal} for v in seg.main_verbs],
        "vp_lengths": list(seg.vp_lengths),
        "date_count": seg.date_count,
        "number_count": seg.number_count,
        "framenet_roles": [{"role_name": r.role_name, "filler_span": list(r.filler_span)}
                           for r in seg.framenet_roles],
        "propbank_frames": [
            {"predicate_lemma": f.predicate_lemma, "verbnet_class": f.verbnet_class,
             "arguments": [{"label": a.label, "filler_span": list(a.filler_span)} for a in f.arguments]}
            for f in seg.propbank_frames
        ],
    }


def instance_to_record(inst):
    return {
        "id": inst.id,
        "seg1": _segment_to_record(inst.seg1),
        "seg2": _segment_to_record(inst.seg2),
        "coref_links": [{"mention1_span": list(c.mention1_span), "mention2_span": list(c.mention2_span)}
                        for c in inst.coref_links],
        "gold_relations": sorted(inst.gold_relations),
    }


def load_instances(path, fallback_counts=False):
    """Read and validate an instance file; returns instances in file order.

    With ``fallback_counts`` a segment lacking ``date_count`` or
    ``number_count`` gets them from :func:`detect_counts`.
    """
    instances = []
    header_seen = False
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", lineno) from exc
            if not header_seen:
                if not isinstance(rec, dict) or rec.get("format") != FORMAT_NAME:
                    raise CorpusFormatError(f"first record must be a {FORMAT_NAME} header", lineno, "format")
                if rec.get("version") != FORMAT_VERSION:
                    raise CorpusFormatError(f"unsupported version {rec.get('version')!r}", lineno, "version")
                header_seen = True
                continue
            inst = instance_from_record(rec, lineno, fallback_counts)
            validate_instance(inst)
            if inst.id in seen:
                raise InstanceValidationError(inst.id, f"duplicate instance id (line {lineno})")
            seen.add(inst.id)
            instances.append(inst)
    return instances


def dumps_instances(instances):
    lines = [json.dumps({"format": FORMAT_NAME, "version": FORMAT_VERSION})]
    lines += [json.dumps(instance_to_record(inst), ensure_ascii=False) for inst in instances]
    return "\n".join(lines) + "\n"


def save_instances(instances, path):
    Path(path).write_text(dumps_instances(instances), encoding="utf-8")


# -- Brown clusters -----------------------------------------------------------

@dataclass(frozen=True)
class BrownLexicon:
    """Word -> bit-string cluster path.

    Lookup is exact first; with ``lowercase_fallback`` a miss is retried on
    the lowercased word.
    """

    paths: dict = field(default_factory=dict)
    lowercase_fallback: bool = True
    duplicates: int = 0

    def lookup(self, word):
        path = self.paths.get(word)
        if path is None and self.lowercase_fallback:
            path = self.paths.get(word.lower())
        return path

    def __len__(self):
        return len(self.paths)

    def __contains__(self, word):
        return self.lookup(word) is not None


def cluster_of(lexicon, word, prefix_len=None):
    """Cluster path of ``word`` truncated to ``prefix_len`` bits, or UNK."""
    path = lexicon.lookup(word)
    if path is None:
        return UNK
    if prefix_len is not None:
        return path[:prefix_len]
    return path


def load_brown_lexicon(paths, lowercase_fallback=True):
    """Load one or more ``path<TAB>word[<TAB>count]`` files.

    On duplicate words the first entry wins (across files too) and the
    duplicate counter is incremented.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    table = {}
    duplicates = 0
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n").rstrip("\r")
                if not line.strip():
                    continue
                cols = line.split("\t")
                if len(cols) < 2 or len(cols) > 3:
                    raise CorpusFormatError(f"{p}: expected 2 or 3 tab-separated columns", lineno)
                bits, word = cols[0], cols[1]
                if not _BITS_RE.match(bits):
                    raise CorpusFormatError(f"{p}: cluster path {bits!r} is not a bit string", lineno, "path")
                if not word:
                    raise CorpusFormatError(f"{p}: empty word", lineno, "word")
                if word in table:
                    duplicates += 1
                    continue
                table[word] = bits
    if duplicates:
        log.warning("brown lexicon: %d duplicate word(s) ignored (first entry kept)", duplicates)
    return BrownLexicon(table, lowercase_fallback, duplicates)


def save_brown_lexicon(lexicon, path, counts=None):
    counts = counts or {}
    with open(path, "w", encoding="utf-8") as fh:
        for word, bits in lexicon.paths.items():
            fh.write(f"{bits}\t{word}\t{counts.get(word, 1)}\n")
