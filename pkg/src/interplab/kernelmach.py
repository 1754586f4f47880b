"""Interpolating kernel machines and random Fourier feature models.

A kernel machine here is the exact interpolant f(x) = sum_i alpha_i
K(x_i, x) with alpha solving K alpha = y; no regularization is applied on
purpose. Solves go through a Cholesky factorization with an escalating
diagonal jitter ladder, and the fit is accepted only if the achieved
training residual certifies interpolation.

Random Fourier feature models tell the same story at finite width:
f(w, x) = sum_k w_k exp(i <v_k, x>) with iid standard normal frequency
rows v_k, fitted by the minimum-norm least-squares rule through the real
embedding of the complex feature matrix. One code path covers both
regimes, because the pseudo-inverse solution is the least-squares fit
below the interpolation threshold and the minimum-norm interpolant above
it. Predictions use the real part of f; the recorded training residual is
the complex one, which bounds the real-part residual from above.

The width sweep reuses one frequency draw per replicate and takes nested
prefixes of its rows, so the spanned feature spaces grow with m. That
makes the per-replicate training residual non-increasing in m and the
coefficient norm non-increasing beyond the interpolation threshold, not
just on average but path by path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numlin
from .datagen import CLASSIFICATION, Dataset
from .errors import DimensionMismatch, IllConditioned, InvalidSpec, NotPositiveDefinite
from .rng import substream

GAUSSIAN = "gaussian"
LAPLACE = "laplace"
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)
INTERPOLATION_TOL = 1e-6
TRAIN_MSE_THRESHOLD = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    family: str = LAPLACE
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.family not in (GAUSSIAN, LAPLACE):
            raise InvalidSpec(f"unknown kernel family {self.family!r}")
        if not self.bandwidth > 0:
            raise InvalidSpec("bandwidth must be positive")


def kernel_matrix(spec: KernelSpec, X, Z=None) -> np.ndarray:
    """Cross-kernel matrix K[i, j] = K(X[i], Z[j]); Z defaults to X."""
    X = np.asarray(X, dtype=float)
    Z = X if Z is None else np.asarray(Z, dtype=float)
    if X.ndim != 2 or Z.ndim != 2 or X.shape[1] != Z.shape[1]:
        raise DimensionMismatch(f"incompatible point sets {X.shape} and {Z.shape}")
    d2 = np.maximum(
        (X * X).sum(axis=1)[:, None] + (Z * Z).sum(axis=1)[None, :] - 2.0 * X @ Z.T,
        0.0,
    )
    if spec.family == GAUSSIAN:
        return np.exp(-d2 / (2.0 * spec.bandwidth**2))
    return np.exp(-np.sqrt(d2) / spec.bandwidth)


def kernel_eval(spec: KernelSpec, x, z) -> float:
    """Kernel value for a single pair of points."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise DimensionMismatch(f"points must be 1-D of equal length, got {x.shape}, {z.shape}")
    return float(kernel_matrix(spec, x[None, :], z[None, :])[0, 0])


@dataclass(frozen=True)
class KernelMachine:
    spec: KernelSpec
    centers: np.ndarray
    alpha: np.ndarray
    fit_jitter: float
    fit_residual: float


def fit_interpolating(spec: KernelSpec, train: Dataset,
                      jitter_ladder=JITTER_LADDER,
                      tol: float = INTERPOLATION_TOL) -> KernelMachine:
    """Solve K alpha = y and certify that the machine interpolates.

    The kernel matrix gets each jitter from the ladder in turn until the
    Cholesky factorization succeeds and the worst-case training residual
    max_i |f(x_i) - y_i| stays within tol * (1 + max |y|). If no rung
    manages that, IllConditioned is raised; a fit with a worse residual is
    never silently accepted.
    """
    K = kernel_matrix(spec, train.X)
    bound = tol * (1.0 + float(np.abs(train.y).max()))
    best = np.inf
    for jitter in jitter_ladder:
        try:
            alpha = numlin.solve_spd(K, train.y, jitter=jitter)
        except NotPositiveDefinite:
            continue
        residual = float(np.abs(K @ alpha - train.y).max())
        if residual <= bound:
            return KernelMachine(spec=spec, centers=train.X, alpha=alpha,
                                 fit_jitter=jitter, fit_residual=residual)
        best = min(best, residual)
    raise IllConditioned(
        f"training residual {best:.3e} exceeds {bound:.3e} at every jitter in "
        f"{tuple(jitter_ladder)}")


def kernel_predict(machine: KernelMachine, X) -> np.ndarray:
    """Evaluate f(x) = sum_i alpha_i K(x_i, x) at the rows of X."""
    K = kernel_matrix(machine.spec, np.asarray(X, dtype=float), machine.centers)
    return K @ machine.alpha


def rkhs_norm_sq(machine: KernelMachine) -> float:
    """Squared native-space norm alpha^T K alpha of the fitted machine."""
    K = kernel_matrix(machine.spec, machine.centers)
    return float(machine.alpha @ (K @ machine.alpha))


# --- random Fourier feature models ---

@dataclass(frozen=True)
class RFFModel:
    freqs: np.ndarray    # (m, d) frequency rows
    weights: np.ndarray  # (m,) complex coefficients


def draw_rff_freqs(m: int, dim: int, seed: int, replicate: int = 0) -> np.ndarray:
    """Draw m iid standard normal frequency rows in dimension dim."""
    if m < 1 or dim < 1:
        raise InvalidSpec("m and dim must be at least 1")
    rng = substream(seed, "rff-freqs", replicate, dim)
    return rng.standard_normal((m, dim))


def rff_features(freqs: np.ndarray, X) -> np.ndarray:
    """Complex feature matrix exp(i X freqs^T), one row per input point."""
    X = np.asarray(X, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    if X.ndim != 2 or freqs.ndim != 2 or X.shape[1] != freqs.shape[1]:
        raise DimensionMismatch(f"points {X.shape} do not match frequencies {freqs.shape}")
    return np.exp(1j * (X @ freqs.T))


def rff_fit_minnorm(X, y, freqs, rank_tol: float = numlin.DEFAULT_RANK_TOL) -> RFFModel:
    """Fit minimum-norm least-squares weights for fixed frequencies.

    Solves the complex system Phi w = y in the real embedding; with more
    features than points this is the minimum-norm interpolant, otherwise
    the least-squares fit.
    """
    y = np.asarray(y, dtype=float)
    phi = rff_features(freqs, X)
    if y.shape != (phi.shape[0],):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({phi.shape[0]},)")
    emb = numlin.complex_embed_matrix(phi)
    rhs = numlin.complex_embed_vector(y.astype(complex))
    w = numlin.complex_unembed_vector(numlin.pinv_apply(emb, rhs, rank_tol=rank_tol))
    return RFFModel(freqs=np.array(freqs, dtype=float, copy=True), weights=w)


def rff_predict(model: RFFModel, X) -> np.ndarray:
    """Real part of f(w, x) at the rows of X."""
    return np.real(rff_features(model.freqs, X) @ model.weights)


def rff_train_mse(model: RFFModel, X, y) -> float:
    """Mean squared complex residual of the fit on (X, y)."""
    resid = rff_features(model.freqs, X) @ model.weights - np.asarray(y, dtype=float)
    return float(np.mean(np.abs(resid) ** 2))


# --- double descent sweep ---

@dataclass(frozen=True)
class SweepResult:
    m_grid: np.ndarray
    replicates: int
    rows: tuple              # (m, rep, train_mse, test_mse, test_01, coeff_norm, threshold)
    thresholds: np.ndarray   # per replicate; -1 when never below threshold
    train_mean: np.ndarray
    test_mse_mean: np.ndarray
    test_mse_se: np.ndarray
    test_01_mean: np.ndarray
    test_01_se: np.ndarray
    norm_mean: np.ndarray
    norm_se: np.ndarray


def double_descent_sweep(train: Dataset, test: Dataset, m_grid, replicates: int,
                         seed: int) -> SweepResult:
    """Sweep feature-model width across the interpolation threshold.

    For each replicate a single stack of frequency rows is drawn and each
    width m uses its first m rows. Records per (m, replicate): complex
    training MSE, real-part test square loss, test 0-1 loss, coefficient
    norm, and the replicate's empirical interpolation threshold (the
    smallest m in the grid whose training MSE is at most 1e-6; -1 if none).
    """
    m_grid = np.asarray(sorted(set(int(m) for m in np.asarray(m_grid).ravel())))
    if m_grid.size == 0 or m_grid[0] < 1:
        raise InvalidSpec("m_grid must hold positive widths")
    if replicates < 1:
        raise InvalidSpec("replicates must be at least 1")
    if train.task != CLASSIFICATION or test.task != CLASSIFICATION:
        raise InvalidSpec("sweep expects two-class datasets")
    m_max = int(m_grid[-1])
    rows = []
    thresholds = np.full(replicates, -1, dtype=int)
    per_m = {m: {"train": [], "test": [], "zo": [], "norm": []} for m in m_grid}
    for rep in range(replicates):
        stack = draw_rff_freqs(m_max, train.dim, seed, replicate=rep)
        rep_rows = []
        for m in m_grid:
            model = rff_fit_minnorm(train.X, train.y, stack[:m])
            tr = rff_train_mse(model, train.X, train.y)
            pred = rff_predict(model, test.X)
            te = float(np.mean((pred - test.y) ** 2))
            zo = float(np.mean(np.where(pred > 0, 1.0, -1.0) != test.y))
            nrm = float(np.linalg.norm(model.weights))
            rep_rows.append([int(m), rep, tr, te, zo, nrm])
            if thresholds[rep] < 0 and tr <= TRAIN_MSE_THRESHOLD:
                thresholds[rep] = int(m)
            per_m[m]["train"].append(tr)
            per_m[m]["test"].append(te)
            per_m[m]["zo"].append(zo)
            per_m[m]["norm"].append(nrm)
        for row in rep_rows:
            rows.append(tuple(row + [int(thresholds[rep])]))

    def _mean(key):
        return np.array([float(np.mean(per_m[m][key])) for m in m_grid])

    def _se(key):
        out = []
        for m in m_grid:
            vals = np.asarray(per_m[m][key])
            out.append(float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0)
        return np.array(out)

    return SweepResult(
        m_grid=m_grid,
        replicates=replicates,
        rows=tuple(rows),
        thresholds=thresholds,
        train_mean=_mean("train"),
        test_mse_mean=_mean("test"),
        test_mse_se=_se("test"),
        test_01_mean=_mean("zo"),
        test_01_se=_se("zo"),
        norm_mean=_mean("norm"),
        norm_se=_se("norm"),
    )
