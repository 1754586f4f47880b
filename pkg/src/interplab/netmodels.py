"""Small dense feedforward networks with exact derivatives.

Models are plain dataclasses holding an architecture together with a
parameter point. Every operation that differentiates takes the flat
parameter vector explicitly, so optimizers can move through parameter
space without rebuilding models. Gradients and Hessian-vector products
are exact (reverse mode, and forward-over-reverse for curvature), which
is what makes the flatness measurements downstream trustworthy: wide
networks are expected to look nearly linear around a random init, and
that effect is quantified here by spectral curvature norms, gradient
norms, and tangent-kernel drift over a parameter ball.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse.linalg
from scipy.special import expit

from . import numlin
from .errors import (
    InvalidSpec,
    NoConvergence,
    ShapeMismatch,
    TooLarge,
)
from .rng import substream

ACTIVATIONS = ("identity", "tanh", "softplus")
OUTPUT_WRAPS = ("none", "softplus")
DENSE_HESSIAN_CAP = 3000


def _identity(z):
    return np.asarray(z, dtype=float)


def _identity_d(z):
    return np.ones_like(np.asarray(z, dtype=float))


def _identity_dd(z):
    return np.zeros_like(np.asarray(z, dtype=float))


def _tanh_d(z):
    t = np.tanh(z)
    return 1.0 - t * t


def _tanh_dd(z):
    t = np.tanh(z)
    return -2.0 * t * (1.0 - t * t)


def _softplus(z):
    return np.logaddexp(0.0, z)


def _softplus_d(z):
    return expit(z)


def _softplus_dd(z):
    s = expit(z)
    return s * (1.0 - s)


_ACT = {
    "identity": (_identity, _identity_d, _identity_dd),
    "tanh": (np.tanh, _tanh_d, _tanh_dd),
    "softplus": (_softplus, _softplus_d, _softplus_dd),
}

_WRAP = {
    "none": (_identity, _identity_d, _identity_dd),
    "softplus": (_softplus, _softplus_d, _softplus_dd),
}


@dataclass(frozen=True)
class MLPModel:
    """Feedforward net: hidden stack, then a scalar linear read-out.

    widths lists the input dimension followed by every hidden width; the
    scalar output is implicit. weights[l] maps layer l to layer l+1 and
    out_weights is the read-out vector. With output_scale set the
    read-out is divided by sqrt(last hidden width). out_weights only
    count as trainable parameters when second_layer_trainable is set;
    output_wrap optionally passes the scalar output through a smooth
    nonlinearity, which is the standard way to destroy the
    width-induced flatness without touching anything else.
    """

    widths: tuple
    activation: str
    weights: tuple
    out_weights: np.ndarray
    output_scale: bool = True
    second_layer_trainable: bool = False
    output_wrap: str = "none"

    @property
    def input_dim(self) -> int:
        return int(self.widths[0])

    @property
    def scale(self) -> float:
        return 1.0 / np.sqrt(float(self.widths[-1])) if self.output_scale else 1.0


def init_mlp(widths, activation: str, seed: int,
             second_layer_trainable: bool = False,
             output_wrap: str = "none") -> MLPModel:
    """Standard-normal hidden weights; read-out is random signs when it
    stays fixed and standard normal when it trains."""
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise InvalidSpec(f"need input plus at least one hidden width, got {widths}")
    if activation not in _ACT:
        raise InvalidSpec(f"unknown activation {activation!r}")
    if output_wrap not in _WRAP:
        raise InvalidSpec(f"unknown output wrap {output_wrap!r}")
    weights = []
    for layer in range(1, len(widths)):
        rng = substream(seed, "mlp-init", layer)
        weights.append(rng.standard_normal((widths[layer], widths[layer - 1])))
    rng = substream(seed, "mlp-out")
    if second_layer_trainable:
        v = rng.standard_normal(widths[-1])
    else:
        v = rng.choice(np.array([-1.0, 1.0]), size=widths[-1])
    return MLPModel(widths=widths, activation=activation, weights=tuple(weights),
                    out_weights=v, second_layer_trainable=second_layer_trainable,
                    output_wrap=output_wrap)


def param_count(model: MLPModel) -> int:
    n = sum(w.size for w in model.weights)
    if model.second_layer_trainable:
        n += model.out_weights.size
    return n


def flatten_params(model: MLPModel) -> np.ndarray:
    """Layer blocks in order, row-major, read-out block last when trainable."""
    parts = [w.ravel() for w in model.weights]
    if model.second_layer_trainable:
        parts.append(model.out_weights)
    return np.concatenate(parts)


def _unflatten(model: MLPModel, w) -> tuple:
    w = np.asarray(w, dtype=float)
    if w.shape != (param_count(model),):
        raise ShapeMismatch(
            f"parameter vector has shape {w.shape}, expected ({param_count(model)},)")
    mats = []
    pos = 0
    for mat in model.weights:
        mats.append(w[pos:pos + mat.size].reshape(mat.shape))
        pos += mat.size
    v = w[pos:] if model.second_layer_trainable else model.out_weights
    return mats, v


def with_params(model: MLPModel, w) -> MLPModel:
    """Rebuild the model at a new flat parameter point."""
    mats, v = _unflatten(model, w)
    if model.second_layer_trainable:
        return replace(model, weights=tuple(mats), out_weights=np.array(v))
    return replace(model, weights=tuple(mats))


def _resolve(model: MLPModel, w):
    if w is None:
        return list(model.weights), model.out_weights
    return _unflatten(model, w)


def _as_batch(model: MLPModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ShapeMismatch(f"inputs {X.shape} do not match input dim {model.input_dim}")
    if not np.all(np.isfinite(X)):
        raise InvalidSpec("inputs must be finite")
    return X


def _as_point(model: MLPModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.input_dim,):
        raise ShapeMismatch(f"input {x.shape} does not match input dim {model.input_dim}")
    return x


def _forward_stack(model: MLPModel, mats, v, X):
    act = _ACT[model.activation][0]
    A = [X]
    Z = []
    for W in mats:
        Z.append(A[-1] @ W.T)
        A.append(act(Z[-1]))
    s = model.scale * (A[-1] @ v)
    return A, Z, s


def forward_batch(model: MLPModel, w, X) -> np.ndarray:
    """Scalar outputs at every row of X; w=None evaluates the stored point."""
    mats, v = _resolve(model, w)
    X = _as_batch(model, X)
    _, _, s = _forward_stack(model, mats, v, X)
    return _WRAP[model.output_wrap][0](s)


def forward(model: MLPModel, w, x) -> float:
    return float(forward_batch(model, w, _as_point(model, x)[None, :])[0])


def jacobian(model: MLPModel, w, X) -> np.ndarray:
    """Per-row gradient of the scalar output, one flat row per input."""
    mats, v = _resolve(model, w)
    X = _as_batch(model, X)
    actd = _ACT[model.activation][1]
    A, Z, s = _forward_stack(model, mats, v, X)
    wrapd = _WRAP[model.output_wrap][1](s)
    E = wrapd[:, None] * (model.scale * v)[None, :]
    blocks = [None] * len(mats)
    for layer in range(len(mats) - 1, -1, -1):
        D = E * actd(Z[layer])
        blocks[layer] = np.einsum("ni,nj->nij", D, A[layer]).reshape(X.shape[0], -1)
        if layer > 0:
            E = D @ mats[layer]
    if model.second_layer_trainable:
        blocks.append(wrapd[:, None] * model.scale * A[-1])
    return np.hstack(blocks)


def grad(model: MLPModel, w, x) -> np.ndarray:
    """Exact gradient of the scalar output in the trainable parameters."""
    return jacobian(model, w, _as_point(model, x)[None, :])[0]


def hvp(model: MLPModel, w, x, vec) -> np.ndarray:
    """Exact Hessian-vector product at one input.

    Forward tangents ride along the evaluation, then the backward pass
    is differentiated in the tangent direction; cost is a small constant
    times one gradient.
    """
    mats, v = _resolve(model, w)
    x = _as_point(model, x)
    dmats, dv = _unflatten(model, np.asarray(vec, dtype=float))
    if not model.second_layer_trainable:
        dv = np.zeros_like(model.out_weights)
    act, actd, actdd = _ACT[model.activation]
    wrap_d, wrap_dd = _WRAP[model.output_wrap][1], _WRAP[model.output_wrap][2]
    c = model.scale

    a, adot = x, np.zeros_like(x)
    A, Adot, Zs, Zdots = [x], [adot], [], []
    for W, U in zip(mats, dmats):
        z = W @ a
        zdot = W @ adot + U @ a
        a, adot = act(z), actd(z) * zdot
        Zs.append(z)
        Zdots.append(zdot)
        A.append(a)
        Adot.append(adot)
    s = c * float(v @ A[-1])
    sdot = c * (float(dv @ A[-1]) + float(v @ Adot[-1]))
    gp, gpp = float(wrap_d(s)), float(wrap_dd(s))

    e = gp * c * v
    edot = gpp * sdot * c * v + gp * c * dv
    out_blocks = [None] * len(mats)
    for layer in range(len(mats) - 1, -1, -1):
        d = e * actd(Zs[layer])
        ddot = edot * actd(Zs[layer]) + e * actdd(Zs[layer]) * Zdots[layer]
        out_blocks[layer] = (np.outer(ddot, A[layer]) + np.outer(d, Adot[layer])).ravel()
        if layer > 0:
            e = mats[layer].T @ d
            edot = mats[layer].T @ ddot + dmats[layer].T @ d
    parts = out_blocks
    if model.second_layer_trainable:
        parts = out_blocks + [gpp * sdot * c * A[-1] + gp * c * Adot[-1]]
    return np.concatenate(parts)


def hessian(model: MLPModel, w, x) -> np.ndarray:
    """Exact dense Hessian of the scalar output, column by column."""
    n = param_count(model)
    if n > DENSE_HESSIAN_CAP:
        raise TooLarge(f"{n} parameters exceed the dense cap {DENSE_HESSIAN_CAP}")
    x = _as_point(model, x)
    H = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        H[:, j] = hvp(model, w, x, e)
        e[j] = 0.0
    return H


def _extreme_curvature(model: MLPModel, w, x, tol, starts):
    """Largest-magnitude Hessian eigenvalue via both algebraic ends.

    Lanczos reaches algebraic extremes far more reliably than magnitude
    sorting when the spectrum is nearly sign-symmetric; the norm is
    max(|smallest|, |largest|). starts carries converged eigenvectors
    between nearby parameter points so ball scans warm-start.
    """
    n = param_count(model)
    op = scipy.sparse.linalg.LinearOperator(
        (n, n), matvec=lambda vec: hvp(model, w, x, vec))
    default = substream(0x5EC7, "hessian-norm-start", n).standard_normal(n)
    if starts is None:
        starts = {}
    # identically zero curvature (e.g. identity activations) would hand
    # the eigensolver a zero starting residual
    if not np.any(op.matvec(default)):
        return 0.0, starts
    best = 0.0
    for which in ("LA", "SA"):
        last = None
        for ncv in (min(n, 64), min(n, 256)):
            try:
                val, vec = scipy.sparse.linalg.eigsh(
                    op, k=1, which=which, ncv=ncv, tol=tol,
                    v0=starts.get(which, default), return_eigenvectors=True)
            except scipy.sparse.linalg.ArpackNoConvergence as exc:
                last = exc
                continue
            starts[which] = vec[:, 0]
            best = max(best, abs(float(val[0])))
            break
        else:
            raise NoConvergence(
                f"curvature estimate did not converge: {last}") from last
    return best, starts


def hessian_norm(model: MLPModel, w, x, tol: float = 1e-9) -> float:
    """Spectral norm of the output Hessian through matrix-free products.

    Works at widths far past the dense cap since only Hessian-vector
    products are formed. Tiny parameter counts fall back to the dense
    matrix.
    """
    x = _as_point(model, x)
    if param_count(model) <= 8:
        return numlin.spectral_norm(hessian(model, w, x))
    norm, _ = _extreme_curvature(model, w, x, tol, None)
    return norm


def tangent_kernel(model: MLPModel, w, X) -> np.ndarray:
    """Gram matrix of parameter gradients across the rows of X."""
    G = jacobian(model, w, X)
    K = G @ G.T
    return 0.5 * (K + K.T)


# --- transition-to-linearity scan ---

@dataclass(frozen=True)
class ArchTemplate:
    """One-hidden-layer family scanned over its width."""
    input_dim: int = 1
    activation: str = "tanh"
    output_wrap: str = "none"
    second_layer_trainable: bool = False


@dataclass(frozen=True)
class LinearityReport:
    widths: np.ndarray
    grad_norms: np.ndarray   # at the init point
    hess_norms: np.ndarray   # max over ball probes
    ntk_drifts: np.ndarray   # max over ball probes, relative spectral change
    hess_slope: float        # log-log fit against width
    grad_slope: float
    drift_slope: float


def _loglog_slope(widths, values) -> float:
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0.0):
        return float("nan")
    x = np.log(np.asarray(widths, dtype=float))
    return float(np.polyfit(x, np.log(values), 1)[0])


def linearity_scan(template: ArchTemplate, width_grid, ball_radius: float = 1.0,
                   probes: int = 32, seed: int = 0,
                   kernel_points: int = 8) -> LinearityReport:
    """Measure how flat the model family gets as the width grows.

    Per width: a standard-normal init w0, then `probes` points drawn
    uniformly on the sphere of radius ball_radius around w0. Records the
    largest curvature norm seen over those points, the gradient norm at
    w0, and the worst relative tangent-kernel drift between w0 and a
    probe; fits log-log slopes of each against the width. Curvature and
    gradient are probed at the first scan input.
    """
    widths = np.asarray(sorted(set(int(m) for m in np.asarray(width_grid).ravel())))
    if widths.size < 2 or widths[0] < 1:
        raise InvalidSpec("need at least two positive widths")
    if ball_radius <= 0 or probes < 1:
        raise InvalidSpec("ball_radius must be positive and probes at least 1")
    X = substream(seed, "scan-inputs", template.input_dim).standard_normal(
        (kernel_points, template.input_dim))
    x = X[0]
    gnorms, hnorms, drifts = [], [], []
    for m in widths:
        model = init_mlp((template.input_dim, m), template.activation, seed,
                         second_layer_trainable=template.second_layer_trainable,
                         output_wrap=template.output_wrap)
        w0 = flatten_params(model)
        gnorms.append(float(np.linalg.norm(grad(model, w0, x))))
        K0 = tangent_kernel(model, w0, X)
        K0_norm = numlin.spectral_norm(K0)
        ball = substream(seed, "scan-ball", int(m))
        worst_h, worst_drift = 0.0, 0.0
        starts = None
        for _ in range(probes):
            u = ball.standard_normal(w0.size)
            wp = w0 + ball_radius * (u / np.linalg.norm(u))
            if w0.size <= 8:
                h = hessian_norm(model, wp, x)
            else:
                h, starts = _extreme_curvature(model, wp, x, 1e-6, starts)
            worst_h = max(worst_h, h)
            drift = numlin.spectral_norm(tangent_kernel(model, wp, X) - K0) / K0_norm
            worst_drift = max(worst_drift, drift)
        hnorms.append(worst_h)
        drifts.append(worst_drift)
    return LinearityReport(
        widths=widths,
        grad_norms=np.array(gnorms),
        hess_norms=np.array(hnorms),
        ntk_drifts=np.array(drifts),
        hess_slope=_loglog_slope(widths, hnorms),
        grad_slope=_loglog_slope(widths, gnorms),
        drift_slope=_loglog_slope(widths, drifts),
    )


def linearity_report_csv(report: LinearityReport) -> str:
    """Rows per width plus a footer record carrying the fitted slopes."""
    lines = ["m,grad_norm,hess_norm_max,ntk_drift"]
    for i, m in enumerate(report.widths):
        lines.append(f"{int(m)},{float(report.grad_norms[i])!r},"
                     f"{float(report.hess_norms[i])!r},{float(report.ntk_drifts[i])!r}")
    lines.append(f"slope,{float(report.grad_slope)!r},{float(report.hess_slope)!r},"
                 f"{float(report.drift_slope)!r}")
    return "\n".join(lines) + "\n"
