"""Gradient descent and mini-batch SGD on square-loss fitting problems.

The training loss is L(w) = (1/2) sum_i (F(w)_i - y_i)^2, summed rather
than averaged, so for linear models the gradient is X^T r, the descent
certificate uses the Gram matrix X X^T directly, and a unit step solves
the 1-d quadratic in one move. Mini-batch gradients are rescaled by n/m
to stay unbiased for the full gradient, which makes the full-batch
special case coincide with plain gradient descent bit for bit.

Alongside the optimizers: the instantaneous gradient-domination ratio
(a running lower bound for the exponential-rate constant), tangent
kernel smallest eigenvalues, log-linear rate fits, and a batch-size
scan that locates where SGD stops scaling linearly.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import netmodels, numlin
from .errors import (
    Diverged,
    DimensionMismatch,
    InvalidSpec,
    NonPositiveLoss,
    TargetUnreachable,
)
from .rng import substream

SQUARE = "square"
CROSS_ENTROPY = "cross_entropy"
DIVERGE_CAP = 1e12
DEFAULT_ITER_CAP = 1_000_000
DEFAULT_TARGET_FACTOR = 1e-8


@dataclass(frozen=True)
class Objective:
    """Square or logistic loss over a fixed dataset.

    mlp=None means the linear model F(w) = X w, where the rows of X are
    whatever features the caller built (raw inputs, kernel features,
    embedded trig features). Otherwise X holds network inputs and the
    parameters follow the model's flat layout.
    """

    X: np.ndarray
    y: np.ndarray
    mlp: object = None
    loss: str = SQUARE


def linear_objective(X, y, loss: str = SQUARE) -> Objective:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DimensionMismatch(f"features {X.shape} incompatible with targets {y.shape}")
    if loss not in (SQUARE, CROSS_ENTROPY):
        raise InvalidSpec(f"unknown loss {loss!r}")
    return Objective(X=X, y=y, mlp=None, loss=loss)


def mlp_objective(model, X, y, loss: str = SQUARE) -> Objective:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DimensionMismatch(f"inputs {X.shape} incompatible with targets {y.shape}")
    if loss not in (SQUARE, CROSS_ENTROPY):
        raise InvalidSpec(f"unknown loss {loss!r}")
    return Objective(X=X, y=y, mlp=model, loss=loss)


def param_dim(obj: Objective) -> int:
    if obj.mlp is None:
        return obj.X.shape[1]
    return netmodels.param_count(obj.mlp)


def predictions(obj: Objective, w) -> np.ndarray:
    if obj.mlp is None:
        return obj.X @ np.asarray(w, dtype=float)
    return netmodels.forward_batch(obj.mlp, w, obj.X)


def loss_value(obj: Objective, w) -> float:
    return _loss_residual(obj, predictions(obj, w))[0]


def _loss_residual(obj: Objective, f) -> tuple:
    """(loss, dL/df) at given predictions."""
    if obj.loss == SQUARE:
        r = f - obj.y
        return 0.5 * float(r @ r), r
    margins = -obj.y * f
    return float(np.sum(np.logaddexp(0.0, margins))), -obj.y * expit(margins)


def loss_grad(obj: Objective, w) -> np.ndarray:
    f = predictions(obj, w)
    _, dldf = _loss_residual(obj, f)
    if obj.mlp is None:
        return obj.X.T @ dldf
    return netmodels.jacobian(obj.mlp, w, obj.X).T @ dldf


def _batch_grad(obj: Objective, w, idx) -> np.ndarray:
    Xb, yb = obj.X[idx], obj.y[idx]
    if obj.mlp is None:
        fb = Xb @ w
        J = Xb
    else:
        fb = netmodels.forward_batch(obj.mlp, w, Xb)
        J = netmodels.jacobian(obj.mlp, w, Xb)
    if obj.loss == SQUARE:
        dldf = fb - yb
    else:
        dldf = -yb * expit(-yb * fb)
    return J.T @ dldf


@dataclass(frozen=True)
class OptimTrace:
    iters: np.ndarray       # strictly increasing record indices
    loss: np.ndarray
    grad_norm: np.ndarray
    param_norm: np.ndarray
    plstar: np.ndarray      # 0.5 * grad_norm^2 / loss, +inf at zero loss
    dist_ref: np.ndarray    # nan when no reference point was given
    final_w: np.ndarray


class _Recorder:
    def __init__(self, ref):
        self.ref = None if ref is None else np.asarray(ref, dtype=float)
        self.rows = []

    def add(self, t, w, lv, g):
        gn = float(np.linalg.norm(g))
        ratio = 0.5 * gn * gn / lv if lv > 0.0 else math.inf
        dref = float(np.linalg.norm(w - self.ref)) if self.ref is not None else math.nan
        self.rows.append((t, lv, gn, float(np.linalg.norm(w)), ratio, dref))

    def done(self, w):
        a = np.array(self.rows)
        return OptimTrace(
            iters=a[:, 0].astype(int), loss=a[:, 1], grad_norm=a[:, 2],
            param_norm=a[:, 3], plstar=a[:, 4], dist_ref=a[:, 5],
            final_w=np.array(w))


def _check_run_args(obj, w0, step, iters, record_every):
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != (param_dim(obj),):
        raise DimensionMismatch(
            f"w0 has shape {w0.shape}, expected ({param_dim(obj)},)")
    if step <= 0.0:
        raise InvalidSpec("step must be positive")
    if iters < 0 or record_every < 1:
        raise InvalidSpec("iters must be nonnegative and record_every positive")
    return w0


def gd(obj: Objective, w0, step: float, iters: int,
       record_every: int = 1, ref=None) -> OptimTrace:
    """Full-gradient descent; records every record_every steps plus the ends."""
    w = _check_run_args(obj, w0, step, iters, record_every).copy()
    rec = _Recorder(ref)
    for t in range(iters + 1):
        if obj.mlp is None:
            f, J = obj.X @ w, obj.X
        else:
            f = netmodels.forward_batch(obj.mlp, w, obj.X)
            J = netmodels.jacobian(obj.mlp, w, obj.X)
        lv, dldf = _loss_residual(obj, f)
        if lv > DIVERGE_CAP:
            raise Diverged(f"loss {lv:.3e} exceeded {DIVERGE_CAP:.0e} at step {t}")
        g = J.T @ dldf
        if t % record_every == 0 or t == iters:
            rec.add(t, w, lv, g)
        if t < iters:
            w -= step * g
    return rec.done(w)


def sgd(obj: Objective, w0, step: float, batch: int, iters: int, seed: int,
        record_every: int = 1, ref=None) -> OptimTrace:
    """Mini-batch descent, batches uniform without replacement each step.

    The batch gradient is scaled by n/batch so it estimates the full
    gradient; with batch=n the update reproduces gd exactly. Loss and
    gradient norms are evaluated at the recording cadence (divergence is
    checked there too, so a blow-up between sparse records surfaces at
    the next record).
    """
    w = _check_run_args(obj, w0, step, iters, record_every).copy()
    n = obj.X.shape[0]
    if not 1 <= batch <= n:
        raise InvalidSpec(f"batch must lie in [1, {n}], got {batch}")
    rng = substream(seed, "sgd-batches")
    scale = n / batch
    rec = _Recorder(ref)
    for t in range(iters + 1):
        if t % record_every == 0 or t == iters:
            lv = loss_value(obj, w)
            if lv > DIVERGE_CAP:
                raise Diverged(f"loss {lv:.3e} exceeded {DIVERGE_CAP:.0e} at step {t}")
            rec.add(t, w, lv, loss_grad(obj, w))
        if t < iters:
            idx = np.sort(rng.choice(n, size=batch, replace=False))
            w -= step * scale * _batch_grad(obj, w, idx)
    return rec.done(w)


def plstar_ratio(obj: Objective, w) -> float:
    """Instantaneous gradient-domination certificate 0.5*||grad||^2 / L."""
    lv = loss_value(obj, w)
    if lv <= 0.0:
        return math.inf
    g = loss_grad(obj, w)
    return 0.5 * float(g @ g) / lv


def tangent_kernel_min_eig(obj: Objective, w) -> float:
    """Smallest eigenvalue of the n-by-n gradient Gram matrix at w."""
    if obj.mlp is None:
        K = obj.X @ obj.X.T
        K = 0.5 * (K + K.T)
    else:
        K = netmodels.tangent_kernel(obj.mlp, w, obj.X)
    vals, _ = numlin.sym_eig(K)
    return float(vals[-1])


def rate_fit(trace: OptimTrace, window: tuple) -> tuple:
    """Least-squares slope of log loss over the iteration window.

    Returns (rate, r_squared); rate is the per-iteration log decrement.
    A perfectly flat window fits exactly, so its r_squared is 1.
    """
    lo, hi = window
    mask = (trace.iters >= lo) & (trace.iters <= hi)
    if mask.sum() < 2:
        raise InvalidSpec(f"window {window} selects fewer than two records")
    losses = trace.loss[mask]
    if np.any(losses <= 0.0):
        raise NonPositiveLoss("log fit needs strictly positive losses")
    t = trace.iters[mask].astype(float)
    logl = np.log(losses)
    slope, intercept = np.polyfit(t, logl, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logl - pred) ** 2))
    ss_tot = float(np.sum((logl - logl.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r2


# --- batch-size scaling ---

@dataclass(frozen=True)
class BatchScalingReport:
    batch_grid: np.ndarray
    median_iters: np.ndarray
    regimes: tuple           # "linear" or "saturation" per batch size
    mstar: float             # trace-over-top-eigenvalue estimate
    tr_h: float
    lambda_max_h: float
    max_row_norm_sq: float
    target_loss: float


def scan_step_rule(m: int, n: int, max_row_norm_sq: float, lambda_max_h: float) -> float:
    """Step size used by the batch scan at batch size m.

    Interpolates between the safe single-sample step and the full-batch
    step as the batch grows; with the n/m gradient scaling used here the
    denominators carry a factor n on the single-sample term.
    """
    return m / (n * max_row_norm_sq + (m - 1) * lambda_max_h)


def critical_batch_scan(obj: Objective, batch_grid, target_loss: float,
                        seeds: int, iter_cap: int = DEFAULT_ITER_CAP,
                        threads: int = 1) -> BatchScalingReport:
    """Median steps-to-target per batch size on an interpolated linear fit.

    Starts every run at zero and tracks the residual directly through
    the n-by-n Gram matrix (cheap per step). Batch size 1 is always
    scanned, even if absent from the grid: it anchors the
    classification, which calls a batch size linear while its total
    sample budget stays within twice the single-sample budget and
    saturated after. The predicted crossover is tr(H)/lambda_max(H) for
    H = X^T X.
    """
    if obj.mlp is not None or obj.loss != SQUARE:
        raise InvalidSpec("batch scan is defined for linear square-loss fits")
    n = obj.X.shape[0]
    grid = sorted({1} | {int(m) for m in np.asarray(batch_grid).ravel()})
    if grid[0] < 1 or grid[-1] > n:
        raise InvalidSpec(f"batch sizes must lie in [1, {n}]")
    if seeds < 1 or target_loss <= 0.0:
        raise InvalidSpec("need at least one seed and a positive target")

    row_sq = np.einsum("ij,ij->i", obj.X, obj.X)
    tr_h = float(row_sq.sum())
    lam = numlin.spectral_norm(obj.X) ** 2
    mstar = max(1.0, tr_h / lam)
    G = obj.X @ obj.X.T
    if 0.5 * float(obj.y @ obj.y) <= target_loss:
        raise InvalidSpec("target not below the starting loss")
    max_row = float(row_sq.max())

    def run_cell(cell):
        m, s = cell
        c = scan_step_rule(m, n, max_row, lam) * (n / m)
        rng = substream(s, "batch-scan", m)
        r = -obj.y.copy()               # residual X w - y at w = 0
        for t in range(1, iter_cap + 1):
            idx = np.sort(rng.choice(n, size=m, replace=False))
            r -= c * (G[:, idx] @ r[idx])
            if 0.5 * float(r @ r) <= target_loss:
                return t
        raise TargetUnreachable(
            f"batch {m}, seed {s}: loss {0.5 * float(r @ r):.3e} above "
            f"target {target_loss:.3e} after {iter_cap} steps")

    # cells are independent (per-cell rng substream), so any execution
    # order reproduces the same counts
    cells = [(m, s) for m in grid for s in range(seeds)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(run_cell, cells))
    else:
        counts = [run_cell(cell) for cell in cells]
    by_m = np.array(counts, dtype=float).reshape(len(grid), seeds)
    med = [float(np.median(row)) for row in by_m]
    ref = med[0]
    regimes = tuple(
        "linear" if m * it <= 2.0 * ref else "saturation"
        for m, it in zip(grid, med))
    return BatchScalingReport(
        batch_grid=np.array(grid), median_iters=np.array(med), regimes=regimes,
        mstar=float(mstar), tr_h=tr_h, lambda_max_h=float(lam),
        max_row_norm_sq=float(row_sq.max()), target_loss=float(target_loss))


# --- serialization ---

def trace_csv(trace: OptimTrace) -> str:
    lines = ["iter,loss,grad_norm,param_norm,plstar_ratio,dist_ref"]
    for i in range(trace.iters.size):
        lines.append(
            f"{int(trace.iters[i])},{float(trace.loss[i])!r},"
            f"{float(trace.grad_norm[i])!r},{float(trace.param_norm[i])!r},"
            f"{float(trace.plstar[i])!r},{float(trace.dist_ref[i])!r}")
    return "\n".join(lines) + "\n"


def batch_report_csv(report: BatchScalingReport) -> str:
    lines = ["m,median_iters,regime,mstar_theory"]
    for i in range(report.batch_grid.size):
        lines.append(f"{int(report.batch_grid[i])},{float(report.median_iters[i])!r},"
                     f"{report.regimes[i]},{float(report.mstar)!r}")
    return "\n".join(lines) + "\n"
