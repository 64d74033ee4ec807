"""Three from-scratch classifiers over binary features: Bernoulli Naive
Bayes, L2-regularized logistic regression, and a linear soft-margin SVM.

All training is full-batch and deterministic. Rows are put into a
canonical order before any floating-point accumulation so that permuting
the training set yields a bit-identical model. Ties at every decision
threshold resolve to Haram (the conservative verdict for a compliance
screen).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import FEATURE_ORDER, Dataset, Ruling, dataset_hash
from .featurex import FeatureVector

MODEL_MAGIC = "CHMODEL1"

KINDS = ("nb", "lr", "svm")


class TrainingError(ValueError):
    """Raised when a dataset cannot be trained on (e.g. single class)."""


class PredictionError(ValueError):
    """Raised for malformed prediction inputs (dimension mismatch)."""


class ModelFormatError(ValueError):
    """Base class for model-file problems."""


class ModelVersionError(ModelFormatError):
    pass


class ModelChecksumError(ModelFormatError):
    pass


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    feature_names: tuple[str, ...]
    params: dict
    hyperparams: dict
    dataset_hash: str
    converged: bool = True

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


@dataclass(frozen=True)
class Prediction:
    label: Ruling
    score: float


@dataclass(frozen=True)
class FitResult:
    params: dict
    converged: bool
    # objective of the model that would be returned after each step;
    # non-increasing by construction (best-iterate tracking for the SVM)
    history: tuple[float, ...]


def _as_matrix(X) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise TrainingError("feature matrix must be two-dimensional")
    return arr


def _canonical_rows(X: np.ndarray, y: np.ndarray):
    """Sort rows lexicographically so summation order is permutation-proof."""
    order = sorted(range(len(y)), key=lambda i: (tuple(X[i]), y[i]))
    idx = np.array(order, dtype=int)
    return X[idx], y[idx]


def _check_two_classes(y: np.ndarray) -> None:
    present = set(int(v) for v in y)
    if present != {0, 1}:
        raise TrainingError("training data must contain both classes")


# ---------------------------------------------------------------- NB ---

def fit_nb(X, y, alpha: float = 1.0) -> FitResult:
    """Bernoulli Naive Bayes with Laplace smoothing.

    P(c) = n_c / N (unsmoothed); P(f=1|c) = (count + alpha) / (n_c + 2 alpha).
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=int)
    _check_two_classes(y)
    if alpha <= 0:
        raise TrainingError("alpha must be positive")
    n = len(y)
    params: dict = {"log_prior": [], "log_p1": [], "log_p0": []}
    for cls in (0, 1):  # 0 = Halal, 1 = Haram
        rows = X[y == cls]
        n_c = len(rows)
        params["log_prior"].append(math.log(n_c / n))
        ones = rows.sum(axis=0)
        p1 = [(float(c) + alpha) / (n_c + 2 * alpha) for c in ones]
        params["log_p1"].append([math.log(p) for p in p1])
        params["log_p0"].append([math.log(1.0 - p) for p in p1])
    return FitResult(params=params, converged=True, history=())


def _nb_class_score(params: dict, x, cls: int) -> float:
    s = params["log_prior"][cls]
    for j, v in enumerate(x):
        s += params["log_p1"][cls][j] if v else params["log_p0"][cls][j]
    return s


def _nb_score(params: dict, x) -> float:
    """Log-posterior margin: positive favors Haram."""
    return _nb_class_score(params, x, 1) - _nb_class_score(params, x, 0)


# ---------------------------------------------------------------- LR ---

def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lr_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float) -> float:
    """Mean negative log-likelihood plus (lam/2)·||w||²; intercept unpenalized."""
    z = X @ w + b
    softplus = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    return float(np.mean(softplus - y * z) + 0.5 * lam * (w @ w))


def lr_gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float):
    r = (_sigmoid(X @ w + b) - y) / len(y)
    return X.T @ r + lam * w, float(r.sum())


def fit_lr(
    X,
    y,
    lam: float = 1e-8,
    max_iter: int = 10000,
    tol: float = 1e-6,
) -> FitResult:
    """Full-batch gradient descent with Armijo backtracking from zero init."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    _check_two_classes(y.astype(int))
    X, y = _canonical_rows(X, y)
    w = np.zeros(X.shape[1])
    b = 0.0
    history = [lr_loss(w, b, X, y, lam)]
    converged = False
    step = 1.0
    for _ in range(max_iter):
        gw, gb = lr_gradient(w, b, X, y, lam)
        grad_max = max(float(np.max(np.abs(gw))) if gw.size else 0.0, abs(gb))
        if grad_max < tol:
            converged = True
            break
        f0 = history[-1]
        gsq = float(gw @ gw) + gb * gb
        # optimistic restart from the last accepted step keeps the eval
        # count low while the backtracking halvings guarantee descent
        t = min(step * 4.0, 1e12)
        accepted = False
        for _ in range(200):
            f1 = lr_loss(w - t * gw, b - t * gb, X, y, lam)
            if f1 <= f0 - 1e-4 * t * gsq:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break  # step size underflow: no further float progress possible
        w -= t * gw
        b -= t * gb
        step = t
        history.append(f1)
    params = {"weights": [float(v) for v in w], "intercept": float(b)}
    return FitResult(params=params, converged=converged, history=tuple(history))


def _lr_score(params: dict, x) -> float:
    z = params["intercept"] + sum(wj * vj for wj, vj in zip(params["weights"], x))
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


# --------------------------------------------------------------- SVM ---

def svm_objective(w: np.ndarray, b: float, X: np.ndarray, yy: np.ndarray, C: float) -> float:
    margins = yy * (X @ w + b)
    return float(0.5 * (w @ w) + C * np.maximum(0.0, 1.0 - margins).sum())


def _kkt_polish(X: np.ndarray, yy: np.ndarray, C: float, w: np.ndarray, b: float, f0: float):
    """Refine a near-optimal primal iterate by solving the KKT equalities.

    Guesses the active set from the current margins at several widths,
    solves the resulting equality system by least squares, and keeps any
    candidate that lowers the objective. Pure candidate generation: a
    wrong guess is simply discarded.
    """
    best = (f0, w, b)
    for _ in range(3):
        w0, b0 = best[1], best[2]
        improved = False
        for tol in (1e-6, 1e-4, 1e-2, 1e-1, 0.25):
            margins = yy * (X @ w0 + b0)
            active = np.where(np.abs(margins - 1.0) <= tol)[0]
            bound = np.where(margins < 1.0 - tol)[0]
            if len(active) == 0:
                continue
            v = C * (X[bound].T @ yy[bound]) if len(bound) else np.zeros(X.shape[1])
            Xa, ya = X[active], yy[active]
            a = len(active)
            K = Xa @ Xa.T
            M = np.zeros((a + 1, a + 1))
            M[:a, :a] = (ya[:, None] * ya[None, :]) * K
            M[:a, a] = ya
            M[a, :a] = ya
            rhs = np.empty(a + 1)
            rhs[:a] = 1.0 - ya * (Xa @ v)
            rhs[a] = -float(yy[bound].sum()) * C if len(bound) else 0.0
            sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            alphas, b_cand = sol[:a], float(sol[a])
            for cand in (alphas, np.clip(alphas, 0.0, C)):
                w_cand = Xa.T @ (cand * ya) + v
                f_cand = svm_objective(w_cand, b_cand, X, yy, C)
                if math.isfinite(f_cand) and f_cand < best[0]:
                    best = (f_cand, w_cand, b_cand)
                    improved = True
        if not improved:
            break
    return best


def fit_svm(X, y, C: float = 1.0, epochs: int = 2000, seed: int = 0) -> FitResult:
    """Projected subgradient descent on the primal, best iterate kept.

    Objective (1/2)||w||² + C·Σ hinge with labels ±1 (Haram = +1).
    Full-batch steps with rate 1/t and projection onto the norm ball the
    optimum provably lies in; a deterministic KKT polish then removes the
    residual subgradient error. The seed is recorded but unused: training
    is deterministic.
    """
    X = _as_matrix(X)
    y01 = np.asarray(y, dtype=int)
    _check_two_classes(y01)
    if C <= 0:
        raise TrainingError("C must be positive")
    X, y01 = _canonical_rows(X, y01.astype(float))
    yy = np.where(y01 == 1, 1.0, -1.0)
    n, d = X.shape

    w = np.zeros(d)
    b = 0.0
    # F(0,0) = C·n bounds the optimum, so ||w*|| <= sqrt(2·C·n)
    radius = math.sqrt(2.0 * C * n)
    best_f = svm_objective(w, b, X, yy, C)
    best_w, best_b = w.copy(), b
    history = [best_f]
    for t in range(1, epochs + 1):
        margins = yy * (X @ w + b)
        mask = margins < 1.0
        if mask.any():
            gw = w - C * (X[mask].T @ yy[mask])
            gb = -C * float(yy[mask].sum())
        else:
            gw = w.copy()
            gb = 0.0
        eta = 1.0 / t
        w = w - eta * gw
        b = b - eta * gb
        norm = float(np.linalg.norm(w))
        if norm > radius:
            w *= radius / norm
        f = svm_objective(w, b, X, yy, C)
        if f < best_f:
            best_f, best_w, best_b = f, w.copy(), b
        history.append(best_f)

    best_f, best_w, best_b = _kkt_polish(X, yy, C, best_w, best_b, best_f)
    history.append(best_f)
    params = {"weights": [float(v) for v in best_w], "bias": float(best_b)}
    return FitResult(params=params, converged=True, history=tuple(history))


def _svm_score(params: dict, x) -> float:
    return params["bias"] + sum(wj * vj for wj, vj in zip(params["weights"], x))


# --------------------------------------------------- shared interface ---

_FITTERS = {"nb": fit_nb, "lr": fit_lr, "svm": fit_svm}
_SCORERS = {"nb": _nb_score, "lr": _lr_score, "svm": _svm_score}
_THRESHOLDS = {"nb": 0.0, "lr": 0.5, "svm": 0.0}


def _dataset_for_training(d: Dataset):
    X, y = d.to_arrays()
    if not any(y) or all(y):
        raise TrainingError("dataset contains a single class")
    return X, y


def train_nb(d: Dataset, alpha: float = 1.0) -> TrainedModel:
    X, y = _dataset_for_training(d)
    fit = fit_nb(X, y, alpha=alpha)
    return TrainedModel(
        kind="nb",
        feature_names=tuple(f.value for f in FEATURE_ORDER),
        params=fit.params,
        hyperparams={"alpha": alpha},
        dataset_hash=dataset_hash(d),
        converged=fit.converged,
    )


def train_lr(
    d: Dataset,
    lam: float = 1e-8,
    max_iter: int = 10000,
    tol: float = 1e-6,
) -> TrainedModel:
    X, y = _dataset_for_training(d)
    fit = fit_lr(X, y, lam=lam, max_iter=max_iter, tol=tol)
    return TrainedModel(
        kind="lr",
        feature_names=tuple(f.value for f in FEATURE_ORDER),
        params=fit.params,
        hyperparams={"lambda": lam, "max_iter": max_iter, "tol": tol},
        dataset_hash=dataset_hash(d),
        converged=fit.converged,
    )


def train_svm(d: Dataset, C: float = 1.0, epochs: int = 2000, seed: int = 0) -> TrainedModel:
    X, y = _dataset_for_training(d)
    fit = fit_svm(X, y, C=C, epochs=epochs, seed=seed)
    return TrainedModel(
        kind="svm",
        feature_names=tuple(f.value for f in FEATURE_ORDER),
        params=fit.params,
        hyperparams={"C": C, "epochs": epochs, "seed": seed},
        dataset_hash=dataset_hash(d),
        converged=fit.converged,
    )


def train(d: Dataset, kind: str, **hyperparams) -> TrainedModel:
    if kind == "nb":
        return train_nb(d, **hyperparams)
    if kind == "lr":
        return train_lr(d, **hyperparams)
    if kind == "svm":
        return train_svm(d, **hyperparams)
    raise TrainingError(f"unknown model kind {kind!r}")


def predict(m: TrainedModel, fv) -> Prediction:
    """Score an input vector and threshold it; ties go to Haram."""
    values = fv.values if isinstance(fv, FeatureVector) else tuple(fv)
    if len(values) != m.n_features:
        raise PredictionError(
            f"expected {m.n_features} feature values, got {len(values)}"
        )
    if any(v not in (0, 1) for v in values):
        raise PredictionError("feature values must be 0 or 1")
    score = _SCORERS[m.kind](m.params, values)
    label = Ruling.HARAM if score >= _THRESHOLDS[m.kind] else Ruling.HALAL
    return Prediction(label=label, score=score)


# ------------------------------------------------------- persistence ---

def _canonical_payload(m: TrainedModel) -> str:
    payload = {
        "kind": m.kind,
        "feature_names": list(m.feature_names),
        "params": m.params,
        "hyperparams": m.hyperparams,
        "dataset_hash": m.dataset_hash,
        "converged": m.converged,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_model(m: TrainedModel, path: str | Path) -> None:
    """Write the versioned model container: magic, checksum, JSON payload."""
    payload = _canonical_payload(m)
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    Path(path).write_text(f"{MODEL_MAGIC}\n{digest}\n{payload}\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or lines[0] != MODEL_MAGIC:
        raise ModelVersionError(
            f"unsupported model file: expected magic {MODEL_MAGIC!r}"
        )
    if len(lines) < 3:
        raise ModelChecksumError("model file truncated")
    digest, payload = lines[1], lines[2]
    actual = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    if actual != digest:
        raise ModelChecksumError("model checksum mismatch (file corrupt or truncated)")
    try:
        data = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ModelChecksumError(f"model payload is not valid JSON: {exc}") from None
    if data.get("kind") not in KINDS:
        raise ModelFormatError(f"unknown model kind {data.get('kind')!r}")
    return TrainedModel(
        kind=data["kind"],
        feature_names=tuple(data["feature_names"]),
        params=data["params"],
        hyperparams=data["hyperparams"],
        dataset_hash=data["dataset_hash"],
        converged=bool(data["converged"]),
    )
