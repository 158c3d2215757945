"""Per-relation ensembles of single-feature-type classifiers.

An ensemble scores an instance with the arithmetic mean of its members'
probabilities and predicts the relation iff that mean is strictly greater
than 0.5.  A mean of exactly 0.5 (e.g. from bias-only members) is a
negative decision.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import RELATIONS
from .errors import BindingError, ConfigError, DiscrelError, ModelFormatError, TrainingError
from .features import (FeatureType, FeatureUnion, count_features, extract, parse_feature_type,
                       vectorize, vocabulary_from_counts)
from .linmodel import TrainConfig, design_matrix, fit_arrays, model_from_fit, read_model_file, save_model

log = logging.getLogger(__name__)

VARIANTS = ("AverageFeats", "AverageFeats+SRL", "AllFeats")
SUITE_FORMAT = "discrel-suite"
SUITE_VERSION = 1


@dataclass(frozen=True)
class MemberSpec:
    """A feature type plus the hyperparameters its classifier is trained with."""

    ftype: object  # FeatureType or FeatureUnion
    config: TrainConfig = field(default_factory=TrainConfig)
    min_count: int = 1

    @property
    def key(self):
        return self.ftype.key


@dataclass(frozen=True, eq=False)
class Member:
    ftype: object
    vocab: object
    model: object
    lexicon: object = None

    def __post_init__(self):
        if self.model.vocab_fingerprint != self.vocab.fingerprint:
            raise BindingError(f"member {self.ftype.key}: model does not match vocabulary")

    @property
    def key(self):
        return self.ftype.key

    def vector(self, instance):
        return vectorize(extract(instance, self.ftype, self.lexicon), self.vocab)

    def score(self, instance):
        try:
            return self.model.score(self.vector(instance))
        except BindingError as exc:
            raise BindingError(f"member {self.key}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class RelationEnsemble:
    relation: str
    members: tuple

    def __post_init__(self):
        if not self.members:
            raise ConfigError(f"ensemble for {self.relation} has no members")
        keys = [m.key for m in self.members]
        if len(set(keys)) != len(keys):
            raise ConfigError(f"ensemble for {self.relation} repeats a feature type: {keys}")
        for m in self.members:
            if m.model.vocab_fingerprint != m.vocab.fingerprint:
                raise BindingError(f"member {m.key}: model does not match vocabulary")


@dataclass(frozen=True, eq=False)
class ClassifierSuite:
    ensembles: dict
    variant: str

    def __post_init__(self):
        if set(self.ensembles) != set(RELATIONS):
            raise ConfigError(f"suite must cover exactly {RELATIONS}, got {sorted(self.ensembles)}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")

    def __getitem__(self, relation):
        return self.ensembles[relation]


def mean_score(scores):
    scores = list(scores)
    return sum(scores) / len(scores)


def decide(score):
    return score > 0.5


def member_scores(ens, instance):
    return [m.score(instance) for m in ens.members]


def ensemble_score(ens, instance):
    return mean_score(member_scores(ens, instance))


def predict(ens, instance):
    return decide(ensemble_score(ens, instance))


def relation_scores(suite, instance):
    return {rel: ensemble_score(suite[rel], instance) for rel in RELATIONS}


def predict_all(suite, instance):
    return {rel for rel, s in relation_scores(suite, instance).items() if decide(s)}


# -- training -------------------------------------------------------------------

def one_vs_all_labels(instances, relation):
    return np.array([relation in inst.gold_relations for inst in instances], dtype=bool)


class FeatureCache:
    """Extracted features and design matrices, shared across relations."""

    def __init__(self, instances, lexicon):
        self.instances = instances
        self.lexicon = lexicon
        self._feats = {}
        self._data = {}

    def features(self, ftype):
        if ftype.key not in self._feats:
            self._feats[ftype.key] = [extract(i, ftype, self.lexicon) for i in self.instances]
        return self._feats[ftype.key]

    def vocab_and_matrix(self, ftype, min_count):
        k = (ftype.key, min_count)
        if k not in self._data:
            feats = self.features(ftype)
            vocab = vocabulary_from_counts(ftype.key, count_features(feats), min_count)
            X = design_matrix([vectorize(f, vocab) for f in feats], len(vocab))
            self._data[k] = (vocab, X)
        return self._data[k]


def _as_spec(item, default_config):
    if isinstance(item, MemberSpec):
        return item
    if isinstance(item, (FeatureType, FeatureUnion)):
        return MemberSpec(item, default_config)
    if isinstance(item, str):
        return MemberSpec(parse_feature_type(item), default_config)
    raise ConfigError(f"cannot interpret {item!r} as a feature selection")


def _train_member(cache, spec, relation, y):
    vocab, X = cache.vocab_and_matrix(spec.ftype, spec.min_count)
    try:
        res = fit_arrays(X, y, spec.config)
    except DiscrelError as exc:
        raise TrainingError(relation, spec.key, exc) from exc
    return Member(spec.ftype, vocab, model_from_fit(res, vocab, spec.config, relation), cache.lexicon)


def train_suite(train, selections, lexicon=None, config=None, variant="AverageFeats+SRL", cache=None):
    """Train one classifier per selected feature type per relation.

    ``selections`` maps every relation to a non-empty list of MemberSpec,
    FeatureType or feature-type key; bare types use ``config``.
    """
    config = config or TrainConfig()
    cache = cache or FeatureCache(train, lexicon)
    ensembles = {}
    for rel in RELATIONS:
        chosen = selections.get(rel)
        if not chosen:
            raise ConfigError(f"empty feature selection for {rel}")
        y = one_vs_all_labels(train, rel)
        members = tuple(_train_member(cache, _as_spec(c, config), rel, y) for c in chosen)
        ensembles[rel] = RelationEnsemble(rel, members)
    return ClassifierSuite(ensembles, variant)


def train_allfeats(train, selections, lexicon=None, config=None, min_count=1, cache=None):
    """AllFeats baseline: per relation, one classifier over the union of the
    selected feature types, trained with a single shared configuration."""
    config = config or TrainConfig()
    cache = cache or FeatureCache(train, lexicon)
    ensembles = {}
    for rel in RELATIONS:
        chosen = selections.get(rel)
        if not chosen:
            raise ConfigError(f"empty feature selection for {rel}")
        types = []
        for c in chosen:
            t = _as_spec(c, config).ftype
            types.extend(t.types if isinstance(t, FeatureUnion) else [t])
        union = FeatureUnion(tuple(types))
        spec = MemberSpec(union, config, min_count)
        member = _train_member(cache, spec, rel, one_vs_all_labels(train, rel))
        ensembles[rel] = RelationEnsemble(rel, (member,))
    return ClassifierSuite(ensembles, "AllFeats")


# -- persistence -----------------------------------------------------------------

def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _safe(key):
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in key)


def save_suite(suite, directory, lexicon_checksum=None):
    """Write member model files plus ``suite.json`` listing them with checksums."""
    directory = Path(directory)
    (directory / "models").mkdir(parents=True, exist_ok=True)
    manifest = {"format": SUITE_FORMAT, "version": SUITE_VERSION, "variant": suite.variant,
                "lexicon_sha256": lexicon_checksum, "relations": {}}
    for rel in RELATIONS:
        entries = []
        for i, m in enumerate(suite[rel].members):
            rel_path = f"models/{rel}.{i:02d}.{_safe(m.key)}.model"
            save_model(m.model, m.vocab, directory / rel_path)
            entries.append({"feature_type": m.key, "file": rel_path,
                            "sha256": _sha256(directory / rel_path)})
        manifest["relations"][rel] = entries
    path = directory / "suite.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_suite(directory, lexicon=None):
    directory = Path(directory)
    try:
        manifest = json.loads((directory / "suite.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read suite manifest in {directory}: {exc}") from exc
    if manifest.get("format") != SUITE_FORMAT or manifest.get("version") != SUITE_VERSION:
        raise ModelFormatError(f"{directory}/suite.json: unsupported format/version")
    ensembles = {}
    for rel, entries in manifest["relations"].items():
        members = []
        for e in entries:
            path = directory / e["file"]
            if _sha256(path) != e["sha256"]:
                raise ModelFormatError(f"{path}: checksum does not match suite manifest")
            model, vocab = read_model_file(path)
            members.append(Member(parse_feature_type(e["feature_type"]), vocab, model, lexicon))
        ensembles[rel] = RelationEnsemble(rel, tuple(members))
    return ClassifierSuite(ensembles, manifest["variant"])


def prediction_record(suite, instance):
    scores = relation_scores(suite, instance)
    return {"id": instance.id, "scores": scores,
            "predicted": sorted(r for r, s in scores.items() if decide(s))}


def write_predictions(suite, instances, path):
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(prediction_record(suite, inst), sort_keys=True) + "\n")


def read_predictions(path):
    """Map instance id -> predicted relation set from a predictions file."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out[rec["id"]] = set(rec["predicted"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ModelFormatError(f"{path}:{lineno}: malformed prediction record ({exc})") from exc
    return out
