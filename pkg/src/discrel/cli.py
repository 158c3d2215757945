"""Command-line frontend.

    discrel synth     --out DIR [--seed N]
    discrel extract   --train FILE [--lexicon FILE] --out FILE
    discrel select    --train FILE --dev FILE --lexicon FILE --variant V --out DIR
    discrel train     --train FILE [--dev FILE | --selection FILE] --lexicon FILE --variant V --out DIR
    discrel predict   --test FILE --model DIR --lexicon FILE --out DIR
    discrel evaluate  --test FILE --predictions FILE --out DIR
    discrel inspect   --model DIR --lexicon FILE --out DIR [--relation R] [--feature-type T] [--k K]
    discrel pipeline  --train FILE --dev FILE --test FILE --lexicon FILE --variant V --out DIR

Settings may also come from ``--config FILE`` (``key = value`` lines, or a
run manifest written by ``pipeline``); command-line flags take precedence.

Exit codes: 0 success, 1 usage, 2 data validation, 3 solver, 4 coverage.
"""

import argparse
import hashlib
import json
import logging
import platform
import sys
import traceback
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .corpus import RELATIONS, load_brown_lexicon, load_instances
from .ensemble import (load_suite, read_predictions, save_suite, train_allfeats, train_suite,
                       write_predictions, FeatureCache)
from .errors import ConfigError, DiscrelError, SelectionError
from .eval import evaluate, format_table
from .features import debug_dump_line, needs_lexicon, parse_feature_type
from .inspection import top_weights
from .linmodel import TrainConfig
from .selection import ROLE_POOL, SURFACE_POOL, SelectionConfig, load_selection, select_all
from .synth import SynthConfig, default_signals, write_synthetic

log = logging.getLogger("discrel")

VARIANT_NAMES = {
    "average": "AverageFeats",
    "average+srl": "AverageFeats+SRL",
    "allfeats": "AllFeats",
    "averagefeats": "AverageFeats",
    "averagefeats+srl": "AverageFeats+SRL",
}


def canonical_variant(name):
    try:
        return VARIANT_NAMES[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown variant {name!r}; use average, average+srl or allfeats") from None


@dataclass
class RunConfig:
    train: str | None = None
    dev: str | None = None
    test: str | None = None
    lexicon: str | None = None
    variant: str = "average+srl"
    seed: int = 0
    C: float = 1.0
    tolerance: float = 1e-6
    max_iter: int = 200
    positive_class_weight: float = 0.0
    Cs: str = "0.01,0.1,1,10"
    min_counts: str = "1,2,5"
    budget: int = 0
    exhaustive: bool = False
    pool: str = ""  # comma-separated feature-type keys; empty = variant default
    lowercase_fallback: bool = True
    fallback_counts: bool = False

    def train_config(self):
        return TrainConfig(C=self.C, tolerance=self.tolerance, max_iter=self.max_iter,
                           positive_class_weight=self.positive_class_weight, seed=self.seed)

    def candidate_pool(self):
        variant = canonical_variant(self.variant)
        if self.pool:
            pool = tuple(parse_feature_type(k) for k in self.pool.split(",") if k.strip())
            if variant == "AverageFeats" and any(t.is_role for t in pool):
                raise ConfigError("variant average excludes role feature types")
        elif variant == "AverageFeats":
            pool = SURFACE_POOL
        else:
            pool = SURFACE_POOL + ROLE_POOL
        if self.lexicon is None:
            dropped = [t.key for t in pool if needs_lexicon(t)]
            if dropped:
                log.warning("no lexicon given; dropping %s", ", ".join(dropped))
            pool = tuple(t for t in pool if not needs_lexicon(t))
        return pool

    def selection_config(self):
        return SelectionConfig(
            candidates=self.candidate_pool(),
            Cs=tuple(float(x) for x in self.Cs.split(",")),
            min_counts=tuple(int(x) for x in self.min_counts.split(",")),
            budget=self.budget or None,
            base=self.train_config(),
            exhaustive=self.exhaustive,
        )

    def to_dict(self):
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, value):
    kind = _FIELD_TYPES[key]
    if kind in (bool, "bool"):
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    if kind in (int, "int"):
        return int(value)
    if kind in (float, "float"):
        return float(value)
    return None if value is None else str(value)


def read_config_file(path):
    """Parse ``key = value`` lines, or the ``config`` block of a run manifest."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        data = data.get("config", data)
    else:
        data = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            k, v = line.split("=", 1)
            data[k.strip()] = v.strip()
    unknown = set(data) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"{path}: unknown config key(s) {sorted(unknown)}")
    return {k: _coerce(k, v) for k, v in data.items()}


def build_run_config(args):
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in _FIELD_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _coerce(key, v)
    return RunConfig(**values)


# -- helpers ----------------------------------------------------------------------

def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _require(cfg, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + m for m in missing))


def _lexicon(cfg):
    return load_brown_lexicon(cfg.lexicon, cfg.lowercase_fallback) if cfg.lexicon else None


def _corpus(cfg, name):
    return load_instances(getattr(cfg, name), fallback_counts=cfg.fallback_counts)


def _out(args):
    if not args.out:
        raise ConfigError("missing required option --out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")
    return path


def _run_selection(cfg, train, dev, lexicon, cache=None):
    result = select_all(train, dev, cfg.selection_config(), lexicon, train_cache=cache)
    empty = [rel for rel in RELATIONS if not result[rel].chosen]
    if empty:
        raise SelectionError(f"no feature type reached a positive dev F1 for {', '.join(empty)}")
    return result


def _train_variant(cfg, train, selection, lexicon, cache=None):
    variant = canonical_variant(cfg.variant)
    if variant == "AllFeats":
        return train_allfeats(train, selection.selections(), lexicon, cfg.train_config(), cache=cache)
    return train_suite(train, selection.selections(), lexicon, cfg.train_config(), variant, cache=cache)


# -- commands ---------------------------------------------------------------------

def cmd_synth(args, cfg):
    out = _out(args)
    sc = SynthConfig(n_train=args.n_train, n_dev=args.n_dev, n_test=args.n_test, seed=cfg.seed,
                     signals=default_signals(args.strength))
    paths = write_synthetic(sc, out)
    manifest = {"command": "synth", "seed": cfg.seed, "versions": _versions(),
                "outputs": {p.name: _sha256(p) for p in paths.values()}}
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote synthetic corpus to {out}")


def cmd_extract(args, cfg):
    _require(cfg, "train")
    lexicon = _lexicon(cfg)
    types = ([parse_feature_type(k) for k in args.types.split(",")] if args.types
             else list(cfg.candidate_pool()))
    out = Path(args.out)
    if out.suffix != ".jsonl":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "features.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        for inst in _corpus(cfg, "train"):
            fh.write(debug_dump_line(inst, types, lexicon) + "\n")
    print(f"wrote {out}")


def cmd_select(args, cfg):
    _require(cfg, "train", "dev")
    out = _out(args)
    result = _run_selection(cfg, _corpus(cfg, "train"), _corpus(cfg, "dev"), _lexicon(cfg))
    _write(out / "selection.json", result.to_json())
    print(f"wrote {out / 'selection.json'}")


def cmd_train(args, cfg):
    _require(cfg, "train")
    out = _out(args)
    train, lexicon = _corpus(cfg, "train"), _lexicon(cfg)
    cache = FeatureCache(train, lexicon)
    if args.selection:
        selection = load_selection(args.selection, cfg.train_config())
    else:
        _require(cfg, "dev")
        selection = _run_selection(cfg, train, _corpus(cfg, "dev"), lexicon, cache)
        _write(out / "selection.json", selection.to_json())
    suite = _train_variant(cfg, train, selection, lexicon, cache)
    save_suite(suite, out / "model", _sha256(cfg.lexicon) if cfg.lexicon else None)
    print(f"wrote {out / 'model'}")


def cmd_predict(args, cfg):
    _require(cfg, "test")
    if not args.model:
        raise ConfigError("missing required option --model")
    out = _out(args)
    suite = load_suite(args.model, _lexicon(cfg))
    write_predictions(suite, _corpus(cfg, "test"), out / "predictions.jsonl")
    print(f"wrote {out / 'predictions.jsonl'}")


def cmd_evaluate(args, cfg):
    _require(cfg, "test")
    if not args.predictions:
        raise ConfigError("missing required option --predictions")
    out = _out(args)
    report = evaluate(read_predictions(args.predictions), _corpus(cfg, "test"))
    name = canonical_variant(cfg.variant)
    _write(out / "report.txt", format_table({name: report}))
    _write(out / "report.json", report.to_json())
    print(format_table({name: report}), end="")


def cmd_inspect(args, cfg):
    if not args.model:
        raise ConfigError("missing required option --model")
    out = _out(args)
    suite = load_suite(args.model, _lexicon(cfg))
    relations = [args.relation] if args.relation else list(RELATIONS)
    for rel in relations:
        for m in suite[rel].members:
            if args.feature_type and m.key != args.feature_type:
                continue
            report = top_weights(m.model, m.vocab, args.k, args.sign)
            stem = f"weights.{rel}.{''.join(c if c.isalnum() else '_' for c in m.key)}"
            _write(out / f"{stem}.txt", report.to_text())
            _write(out / f"{stem}.json", report.to_json())
            print(report.to_text())


def _versions():
    return {"discrel": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def cmd_pipeline(args, cfg):
    _require(cfg, "train", "dev", "test")
    out = _out(args)
    lexicon = _lexicon(cfg)
    train, dev, test = _corpus(cfg, "train"), _corpus(cfg, "dev"), _corpus(cfg, "test")
    cache = FeatureCache(train, lexicon)
    selection = _run_selection(cfg, train, dev, lexicon, cache)
    _write(out / "selection.json", selection.to_json())
    suite = _train_variant(cfg, train, selection, lexicon, cache)
    save_suite(suite, out / "model", _sha256(cfg.lexicon) if cfg.lexicon else None)
    write_predictions(suite, test, out / "predictions.jsonl")
    report = evaluate(read_predictions(out / "predictions.jsonl"), test)
    table = format_table({suite.variant: report})
    _write(out / "report.txt", table)
    _write(out / "report.json", report.to_json())

    config = cfg.to_dict()
    config_blob = json.dumps(config, sort_keys=True).encode("utf-8")
    outputs = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    manifest = {
        "command": "pipeline",
        "config": config,
        "config_sha256": hashlib.sha256(config_blob).hexdigest(),
        "seed": cfg.seed,
        "versions": _versions(),
        "inputs": {k: _sha256(getattr(cfg, k)) for k in ("train", "dev", "test", "lexicon")
                   if getattr(cfg, k)},
        "outputs": {p.relative_to(out).as_posix(): _sha256(p) for p in outputs},
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(table, end="")


COMMANDS = {
    "synth": cmd_synth, "extract": cmd_extract, "select": cmd_select, "train": cmd_train,
    "predict": cmd_predict, "evaluate": cmd_evaluate, "inspect": cmd_inspect, "pipeline": cmd_pipeline,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="discrel", description="Implicit discourse relation classification.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--train")
        p.add_argument("--dev")
        p.add_argument("--test")
        p.add_argument("--lexicon")
        p.add_argument("--variant")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--config")
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        if name in ("train", "pipeline", "select"):
            p.add_argument("--C", type=float)
            p.add_argument("--Cs")
            p.add_argument("--min-counts", dest="min_counts")
            p.add_argument("--budget", type=int)
            p.add_argument("--pool")
            p.add_argument("--exhaustive", action="store_const", const=True)
        if name == "train":
            p.add_argument("--selection")
        if name in ("predict", "inspect"):
            p.add_argument("--model")
        if name == "evaluate":
            p.add_argument("--predictions")
        if name == "inspect":
            p.add_argument("--relation", choices=RELATIONS)
            p.add_argument("--feature-type", dest="feature_type")
            p.add_argument("--k", type=int, default=10)
            p.add_argument("--sign", choices=("positive", "negative", "both"), default="both")
        if name == "extract":
            p.add_argument("--types", help="comma-separated feature-type keys")
        if name == "synth":
            p.add_argument("--n-train", dest="n_train", type=int, default=2000)
            p.add_argument("--n-dev", dest="n_dev", type=int, default=500)
            p.add_argument("--n-test", dest="n_test", type=int, default=500)
            p.add_argument("--strength", type=float, default=0.9)
    return parser


def _origin(exc):
    tb = exc.__traceback__
    name = "discrel"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("discrel.") and mod != "discrel.cli":
            name = mod
        tb = tb.tb_next
    return name


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_run_config(args)
        COMMANDS[args.command](args, cfg)
    except DiscrelError as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        log.debug("%s", traceback.format_exc())
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, OSError) else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
