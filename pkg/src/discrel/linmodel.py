"""Binary L2-regularized logistic regression over sparse binary vectors.

The objective minimised for weights ``w`` and bias ``b`` is::

    sum_i s_i * log(1 + exp(-y_i * (w . x_i + b))) + ||w||^2 / (2 C)

with labels ``y_i`` in {-1, +1} and per-instance weights ``s_i``.  The
bias is not regularised.  Optimisation is truncated Newton (conjugate
gradient on exact Hessian-vector products) with a backtracking line
search, started from zero.
"""

import hashlib
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg
from scipy.special import expit

from .errors import BindingError, ConfigError, ModelFormatError, SolverError
from .features import Vocabulary

log = logging.getLogger(__name__)

MODEL_FORMAT = "discrel-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    tolerance: float = 1e-6
    max_iter: int = 200
    positive_class_weight: float = 0.0  # 0 = auto-balance
    seed: int = 0
    shuffle: bool = False

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigError(f"C must be > 0, got {self.C}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.positive_class_weight < 0:
            raise ConfigError("positive_class_weight must be >= 0")


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float
    feature_type: str
    vocab_fingerprint: str
    relation: str | None = None
    config: TrainConfig = field(default_factory=TrainConfig)
    n_iter: int = 0
    grad_norm: float = 0.0
    converged: bool = True

    @property
    def n_features(self):
        return len(self.weights)

    def margin(self, fv):
        if fv.fingerprint != self.vocab_fingerprint:
            raise BindingError(
                f"vector built with vocabulary {fv.fingerprint} but model {self.feature_type} "
                f"expects {self.vocab_fingerprint}")
        return float(self.weights[fv.ids].sum()) + self.bias

    def score(self, fv):
        return float(expit(self.margin(fv)))


def score(model, fv):
    """Probability of the positive class, ``sigmoid(w . x + b)``."""
    return model.score(fv)


# -- design matrices -----------------------------------------------------------

def design_matrix(vectors, n_features):
    """Stack FeatureVectors into a CSR matrix of ones."""
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, fv in enumerate(vectors):
        indptr[i + 1] = indptr[i] + len(fv.ids)
    indices = (np.concatenate([fv.ids for fv in vectors]) if vectors
               else np.zeros(0, dtype=np.int64))
    data = np.ones(len(indices), dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), n_features))


def class_weights(y, positive_class_weight=0.0):
    """Per-instance weights; auto-balance gives each class equal total weight."""
    y = np.asarray(y, dtype=bool)
    n, n_pos = len(y), int(y.sum())
    n_neg = n - n_pos
    if positive_class_weight > 0:
        return np.where(y, positive_class_weight, 1.0)
    if n_pos == 0 or n_neg == 0:
        return np.ones(n)
    return np.where(y, n / (2.0 * n_pos), n / (2.0 * n_neg))


# -- objective -------------------------------------------------------------------

class _Objective:
    def __init__(self, X, y, s, C):
        self.X = X
        self.XT = X.T.tocsr()
        self.y = np.where(np.asarray(y, dtype=bool), 1.0, -1.0)
        self.s = np.asarray(s, dtype=np.float64)
        self.reg = 0.0 if math.isinf(C) else 1.0 / C
        self._d = None

    def __call__(self, theta):
        w, b = theta[:-1], theta[-1]
        z = self.X @ w + b
        yz = self.y * z
        loss = float(self.s @ np.logaddexp(0.0, -yz)) + 0.5 * self.reg * float(w @ w)
        p = expit(-yz)  # sigma(-y z)
        r = -self.s * self.y * p
        grad = np.empty_like(theta)
        grad[:-1] = self.XT @ r + self.reg * w
        grad[-1] = r.sum()
        sig = expit(z)
        self._d = self.s * sig * (1.0 - sig)
        self._theta = theta
        return loss, grad

    def hessp(self, theta, v):
        if self._d is None or not np.array_equal(theta, self._theta):
            self(theta)
        vw, vb = v[:-1], v[-1]
        t = self._d * (self.X @ vw + vb)
        out = np.empty_like(v)
        out[:-1] = self.XT @ t + self.reg * vw
        out[-1] = t.sum()
        return out


def loss_and_gradient(weights, bias, dataset, C):
    """Objective value and exact gradient at ``(weights, bias)``.

    ``dataset`` is a non-empty list of ``(FeatureVector, label, weight)``.
    The returned gradient has ``len(weights) + 1`` entries, bias last.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    weights = np.asarray(weights, dtype=np.float64)
    X = design_matrix([d[0] for d in dataset], len(weights))
    y = [bool(d[1]) for d in dataset]
    s = [float(d[2]) for d in dataset]
    theta = np.append(weights, float(bias))
    return _Objective(X, y, s, C)(theta)


# -- training --------------------------------------------------------------------

@dataclass
class FitResult:
    weights: np.ndarray
    bias: float
    loss: float
    grad_norm: float
    n_iter: int
    converged: bool


def fit_arrays(X, y, config, sample_weight=None):
    """Minimise the objective for a CSR design matrix and boolean labels."""
    y = np.asarray(y, dtype=bool)
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    s = class_weights(y, config.positive_class_weight) if sample_weight is None else sample_weight
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == n:
        warnings.warn("training data contains a single class; model degenerates to bias-only",
                      RuntimeWarning, stacklevel=2)
        rate = (n_pos + 0.5) / (n + 1.0)
        return FitResult(np.zeros(d), math.log(rate / (1 - rate)), float("nan"), 0.0, 0, True)

    if config.shuffle:
        order = np.random.default_rng(config.seed).permutation(n)
        X, y, s = X[order], y[order], np.asarray(s)[order]

    obj = _Objective(X, y, s, config.C)
    theta, loss, grad, n_iter = _newton_cg(obj, np.zeros(d + 1), config.tolerance, config.max_iter)
    gnorm = float(np.linalg.norm(grad))
    converged = gnorm <= config.tolerance
    if not converged:
        log.warning("solver stopped after %d iterations with gradient norm %.3g > %.3g",
                    n_iter, gnorm, config.tolerance)
    return FitResult(theta[:-1].copy(), float(theta[-1]), loss, gnorm, n_iter, converged)


def _newton_cg(obj, theta, tol, max_iter):
    """Truncated Newton with backtracking line search.

    Near the optimum the loss decrease falls below floating-point resolution,
    so a step is also accepted when it does not raise the loss beyond rounding
    noise and strictly shrinks the gradient norm.
    """
    loss, grad = obj(theta)
    _check_finite(loss, grad, 0)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        gnorm = np.linalg.norm(grad)
        if gnorm <= tol:
            return theta, loss, grad, n_iter - 1
        H = LinearOperator((len(theta), len(theta)), matvec=lambda v: obj.hessp(theta, v), dtype=np.float64)
        step, _ = cg(H, -grad, rtol=min(0.1, np.sqrt(gnorm)), maxiter=max(50, 2 * len(theta)))
        slope = float(grad @ step)
        if slope >= 0:  # not a descent direction (CG breakdown)
            step, slope = -grad, -float(gnorm ** 2)
        t, noise = 1.0, 64 * np.finfo(float).eps * max(1.0, abs(loss))
        while True:
            cand = theta + t * step
            new_loss, new_grad = obj(cand)
            _check_finite(new_loss, new_grad, n_iter)
            if new_loss <= loss + 1e-4 * t * slope:
                break
            if new_loss <= loss + noise and np.linalg.norm(new_grad) < gnorm:
                break
            t *= 0.5
            if t < 1e-12:
                return theta, loss, grad, n_iter
        theta, loss, grad = cand, new_loss, new_grad
    return theta, loss, grad, n_iter


def _check_finite(loss, grad, iteration):
    if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
        raise SolverError("non-finite loss encountered", iteration)


def train(dataset, vocab, config=None, relation=None):
    """Fit a model on ``(FeatureVector, label)`` pairs built with ``vocab``.

    Class weights come from ``config`` (auto-balanced by default).
    """
    config = config or TrainConfig()
    for fv, _ in dataset:
        if fv.fingerprint != vocab.fingerprint:
            raise BindingError("training vector does not belong to the given vocabulary")
    X = design_matrix([fv for fv, _ in dataset], len(vocab))
    y = [bool(label) for _, label in dataset]
    res = fit_arrays(X, y, config)
    return model_from_fit(res, vocab, config, relation)


def model_from_fit(res, vocab, config, relation=None):
    return LinearModel(
        weights=res.weights, bias=res.bias, feature_type=vocab.ftype_key,
        vocab_fingerprint=vocab.fingerprint, relation=relation, config=config,
        n_iter=res.n_iter, grad_norm=res.grad_norm, converged=res.converged)


# -- model files -----------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def dumps_model(model, vocab):
    if model.vocab_fingerprint != vocab.fingerprint:
        raise BindingError("model and vocabulary do not match")
    cfg = model.config
    lines = [
        f"{MODEL_FORMAT}\t{MODEL_VERSION}",
        f"relation\t{model.relation or ''}",
        f"feature_type\t{model.feature_type}",
        f"C\t{_fmt(cfg.C)}",
        f"tolerance\t{_fmt(cfg.tolerance)}",
        f"max_iter\t{cfg.max_iter}",
        f"positive_class_weight\t{_fmt(cfg.positive_class_weight)}",
        f"seed\t{cfg.seed}",
        f"n_iter\t{model.n_iter}",
        f"grad_norm\t{_fmt(model.grad_norm)}",
        f"converged\t{int(model.converged)}",
        f"min_count\t{vocab.min_count}",
        f"vocab_fingerprint\t{vocab.fingerprint}",
        f"bias\t{_fmt(model.bias)}",
        f"n_features\t{len(vocab)}",
    ]
    for feat, count, w in zip(vocab.features, vocab.counts, model.weights):
        if "\t" in feat or "\n" in feat:
            raise ModelFormatError(f"feature {feat!r} contains a tab or newline")
        lines.append(f"w\t{feat}\t{count}\t{_fmt(w)}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + f"checksum\t{digest}\n"


def save_model(model, vocab, path):
    Path(path).write_text(dumps_model(model, vocab), encoding="utf-8")


def loads_model(text, source="<string>"):
    """Parse a model file body; returns ``(LinearModel, Vocabulary)``."""
    lines = text.split("\n")
    if not lines or not lines[0].startswith(MODEL_FORMAT + "\t"):
        raise ModelFormatError(f"{source}: not a {MODEL_FORMAT} file")
    version = lines[0].split("\t", 1)[1]
    if version != str(MODEL_VERSION):
        raise ModelFormatError(f"{source}: unsupported model version {version}")
    try:
        idx = max(i for i, line in enumerate(lines) if line.startswith("checksum\t"))
    except ValueError:
        raise ModelFormatError(f"{source}: truncated (no checksum line)") from None
    body = "\n".join(lines[:idx]) + "\n"
    digest = lines[idx].split("\t", 1)[1]
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != digest:
        raise ModelFormatError(f"{source}: checksum mismatch (file corrupted or truncated)")

    header = {}
    feats, counts, weights = [], [], []
    for line in lines[1:idx]:
        parts = line.split("\t")
        if parts[0] == "w":
            if len(parts) != 4:
                raise ModelFormatError(f"{source}: malformed weight row {line!r}")
            feats.append(parts[1])
            counts.append(int(parts[2]))
            weights.append(float(parts[3]))
        else:
            header[parts[0]] = parts[1] if len(parts) > 1 else ""
    try:
        cfg = TrainConfig(C=float(header["C"]), tolerance=float(header["tolerance"]),
                          max_iter=int(header["max_iter"]),
                          positive_class_weight=float(header["positive_class_weight"]),
                          seed=int(header["seed"]))
        if int(header["n_features"]) != len(feats):
            raise ModelFormatError(f"{source}: expected {header['n_features']} weights, found {len(feats)}")
        vocab = Vocabulary(header["feature_type"], tuple(feats), tuple(counts), int(header["min_count"]))
    except KeyError as exc:
        raise ModelFormatError(f"{source}: missing header field {exc}") from None
    if vocab.fingerprint != header["vocab_fingerprint"]:
        raise ModelFormatError(f"{source}: vocabulary fingerprint mismatch")
    model = LinearModel(
        weights=np.array(weights, dtype=np.float64), bias=float(header["bias"]),
        feature_type=header["feature_type"], vocab_fingerprint=vocab.fingerprint,
        relation=header["relation"] or None, config=cfg, n_iter=int(header["n_iter"]),
        grad_norm=float(header["grad_norm"]), converged=bool(int(header["converged"])))
    return model, vocab


def read_model_file(path):
    return loads_model(Path(path).read_text(encoding="utf-8"), str(path))


def load_model(path):
    return read_model_file(path)[0]

