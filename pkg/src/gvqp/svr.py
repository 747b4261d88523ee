"""Epsilon-insensitive support vector regression, trained natively by
sequential minimal optimization.

The dual is solved in LIBSVM's 2n-variable form: theta = (alpha; alpha*),
signs z = (+1...; -1...), box [0, C], equality sum(alpha) = sum(alpha*).
Working pairs are chosen by maximal KKT violation and the run stops when the
largest violation falls below tol. Features are min-max scaled to [-1, 1]
with the scaler fit on training data only; test vectors are not clamped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

MODEL_FORMAT = "gvqp-svr-1"


class SmoConvergenceError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass
class FeatureScaler:
    lo: np.ndarray
    hi: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        span = self.hi - self.lo
        out = np.zeros_like(X)
        live = span > 0
        out[:, live] = -1.0 + 2.0 * (X[:, live] - self.lo[live]) / span[live]
        return out


def fit_scaler(X) -> FeatureScaler:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        raise ValueError("cannot fit a scaler on an empty matrix")
    return FeatureScaler(lo=X.min(axis=0), hi=X.max(axis=0))


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-gamma * np.maximum(d2, 0.0))


@dataclass
class SvrModel:
    support_vectors: np.ndarray  # in scaled space
    dual_coef: np.ndarray  # alpha_i - alpha_i* for each support vector
    bias: float
    gamma: float
    C: float
    epsilon: float
    scaler: FeatureScaler
    stats: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.scaler.lo.shape[0]


def _smo_solve(K: np.ndarray, y: np.ndarray, C: float, epsilon: float,
               tol: float, max_iter: int):
    """Solve the epsilon-SVR dual for a precomputed kernel matrix.

    Returns (beta, bias, iterations, final_violation, dual_objective).
    """
    n = K.shape[0]
    z = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([epsilon - y, epsilon + y])
    theta = np.zeros(2 * n)
    G = p.copy()  # gradient of the dual objective at theta = 0
    sample = np.concatenate([np.arange(n), np.arange(n)])

    it = 0
    while True:
        vals = -z * G
        up = np.where(z > 0, theta < C, theta > 0)
        low = np.where(z > 0, theta > 0, theta < C)
        if not up.any() or not low.any():
            violation = 0.0
            break
        up_vals = np.where(up, vals, -np.inf)
        low_vals = np.where(low, vals, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        violation = float(up_vals[i] - low_vals[j])
        if violation <= tol:
            break
        if it >= max_iter:
            raise SmoConvergenceError(
                f"SMO did not converge in {max_iter} iterations"
                f" (residual KKT violation {violation:.3e}, tol {tol:.1e})"
            )
        si, sj = sample[i], sample[j]
        a = K[si, si] + K[sj, sj] - 2.0 * K[si, sj]
        a = max(a, 1e-12)
        t = violation / a
        # box limits along the feasible direction
        t = min(t, C - theta[i] if z[i] > 0 else theta[i])
        t = min(t, theta[j] if z[j] > 0 else C - theta[j])
        theta[i] += z[i] * t
        theta[j] -= z[j] * t
        G += z * t * (K[sample, si] - K[sample, sj])
        it += 1

    # bias from the movable-set bounds at convergence
    vals = -z * G
    up = np.where(z > 0, theta < C, theta > 0)
    low = np.where(z > 0, theta > 0, theta < C)
    if up.any() and low.any():
        bias = 0.5 * (float(np.max(vals[up])) + float(np.min(vals[low])))
    else:
        bias = float(np.mean(y))
    beta = theta[:n] - theta[n:]
    objective = 0.5 * float(theta @ (G + p))
    return beta, bias, it, violation, objective


def train_svr(X, y, C: float, gamma: float, epsilon: float,
              tol: float = 1e-3, max_iter: int = 100_000,
              scaler: FeatureScaler | None = None) -> SvrModel:
    """Fit an epsilon-SVR with RBF kernel k(u,v) = exp(-gamma |u-v|^2)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite training data")
    if C <= 0 or gamma <= 0 or epsilon < 0:
        raise ValueError(f"bad hyperparameters C={C} gamma={gamma} epsilon={epsilon}")
    if scaler is None:
        scaler = fit_scaler(X)
    Xs = scaler.transform(X)
    K = rbf_kernel(Xs, Xs, gamma)
    beta, bias, iters, violation, objective = _smo_solve(K, y, C, epsilon, tol, max_iter)
    sv = np.abs(beta) > 1e-12
    return SvrModel(
        support_vectors=Xs[sv],
        dual_coef=beta[sv],
        bias=bias,
        gamma=gamma,
        C=C,
        epsilon=epsilon,
        scaler=scaler,
        stats={
            "iterations": iters,
            "kkt_violation": violation,
            "dual_objective": objective,
            "n_support": int(sv.sum()),
            "n_train": int(X.shape[0]),
            "_train_beta": beta,  # full dual vector, not persisted
        },
    )


def predict(model: SvrModel, x) -> np.ndarray | float:
    """Predicted score(s) for one vector or a matrix of rows."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    X = np.atleast_2d(arr)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    Xs = model.scaler.transform(X)
    if model.support_vectors.shape[0] == 0:
        out = np.full(X.shape[0], model.bias)
    else:
        out = rbf_kernel(Xs, model.support_vectors, model.gamma) @ model.dual_coef + model.bias
    return float(out[0]) if single else out


def check_training_kkt(model: SvrModel, X, y, slack: float = 1e-6) -> bool:
    """Every training residual is inside the epsilon tube (plus tolerance),
    or the point is a bound support vector.

    Requires the model to still carry its training-time dual vector.
    """
    pred = np.atleast_1d(predict(model, X))
    y = np.asarray(y, dtype=np.float64).ravel()
    beta = model.stats.get("_train_beta")
    if beta is None:
        raise ValueError("model was loaded from disk; training duals unavailable")
    tol = model.stats.get("kkt_violation", 0.0) + slack
    resid = np.abs(pred - y)
    at_bound = np.abs(np.abs(beta) - model.C) <= 1e-9 * model.C
    return bool(np.all((resid <= model.epsilon + tol) | at_bound))


# ---------------------------------------------------------------------------
# Hyperparameter selection

C_GRID_DEFAULT = tuple(2.0**k for k in range(-1, 10, 2))  # 2^-1 .. 2^9, x4 steps
GAMMA_GRID_DEFAULT = tuple(2.0**k for k in range(-9, 2, 2))  # 2^-9 .. 2^1


@dataclass(frozen=True)
class SvrConfig:
    C_grid: tuple = C_GRID_DEFAULT
    gamma_grid: tuple = GAMMA_GRID_DEFAULT
    epsilon: float | None = None  # None -> 0.1 * std(y)
    tol: float = 1e-3
    folds: int = 5
    max_iter: int = 100_000

    def resolve_epsilon(self, y) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 0.1 * float(np.std(np.asarray(y, dtype=np.float64)))


def _fold_slices(n: int, folds: int, seed) -> list[np.ndarray]:
    order = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed))).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(order, folds)]


def grid_search(X, y, folds: int, C_grid, gamma_grid, epsilon: float,
                seed=0, tol: float = 1e-3, max_iter: int = 100_000):
    """Pick (C, gamma) by mean held-out rank correlation over seeded folds.

    Ties break toward smaller C, then smaller gamma. A fold whose metric is
    degenerate (constant targets or predictions) contributes 0.
    """
    from .evaluation import srocc  # deferred: evaluation imports this module

    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if len(C_grid) == 0 or len(gamma_grid) == 0:
        raise ValueError("empty hyperparameter grid")
    scaler = fit_scaler(X)
    Xs = scaler.transform(X)
    fold_idx = _fold_slices(X.shape[0], folds, seed)
    table = {}
    best = None
    for C in sorted(C_grid):
        for gamma in sorted(gamma_grid):
            scores = []
            for test_ids in fold_idx:
                train_mask = np.ones(X.shape[0], dtype=bool)
                train_mask[test_ids] = False
                if train_mask.sum() < 2 or test_ids.size < 3:
                    scores.append(0.0)
                    continue
                model = train_svr(
                    Xs[train_mask], y[train_mask], C=C, gamma=gamma,
                    epsilon=epsilon, tol=tol, max_iter=max_iter,
                    scaler=FeatureScaler(lo=-np.ones(X.shape[1]), hi=np.ones(X.shape[1])),
                )
                pred = np.atleast_1d(predict(model, Xs[test_ids]))
                scores.append(srocc(pred, y[test_ids]))
            mean_score = float(np.mean(scores))
            table[(C, gamma)] = mean_score
            if best is None or mean_score > best[0]:
                best = (mean_score, C, gamma)
    return best[1], best[2], table


def fit_svr_pipeline(X, y, config: SvrConfig = SvrConfig(), seed=0):
    """Scaler fit, grid search, and final training on one feature matrix."""
    epsilon = config.resolve_epsilon(y)
    C, gamma, table = grid_search(
        X, y, config.folds, config.C_grid, config.gamma_grid, epsilon,
        seed=seed, tol=config.tol, max_iter=config.max_iter,
    )
    model = train_svr(X, y, C=C, gamma=gamma, epsilon=epsilon,
                      tol=config.tol, max_iter=config.max_iter)
    model.stats["grid_scores"] = {f"C={c!r},gamma={g!r}": s for (c, g), s in table.items()}
    return model, (C, gamma)


# ---------------------------------------------------------------------------
# Persistence

def save_model(path, model: SvrModel) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "kernel": "rbf",
        "gamma": model.gamma,
        "C": model.C,
        "epsilon": model.epsilon,
        "bias": model.bias,
        "support_vectors": model.support_vectors.tolist(),
        "dual_coef": model.dual_coef.tolist(),
        "scaler": {"lo": model.scaler.lo.tolist(), "hi": model.scaler.hi.tolist()},
        "stats": {
            k: v for k, v in model.stats.items() if isinstance(v, (int, float, str, bool))
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> SvrModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"unparseable model file: {exc}") from exc
    fmt = doc.get("format")
    if fmt != MODEL_FORMAT:
        raise ModelFormatError(f"model format {fmt!r} not supported (expected {MODEL_FORMAT!r})")
    try:
        n_feat = len(doc["scaler"]["lo"])
        sv = np.asarray(doc["support_vectors"], dtype=np.float64).reshape(-1, n_feat)
        return SvrModel(
            support_vectors=sv,
            dual_coef=np.asarray(doc["dual_coef"], dtype=np.float64),
            bias=float(doc["bias"]),
            gamma=float(doc["gamma"]),
            C=float(doc["C"]),
            epsilon=float(doc["epsilon"]),
            scaler=FeatureScaler(
                lo=np.asarray(doc["scaler"]["lo"], dtype=np.float64),
                hi=np.asarray(doc["scaler"]["hi"], dtype=np.float64),
            ),
            stats=dict(doc.get("stats", {})),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"model file missing field: {exc}") from exc
