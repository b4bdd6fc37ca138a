"""Penalised L2 cost, its analytic gradient in theta, and the annealed
estimation loop.

The cost is entropy - 2*cross + lambda*roughness, where roughness is the
integral of the squared second derivatives of phi over the control-grid box
(midpoint quadrature; the affine part contributes nothing). Annealing runs
the inner quasi-Newton solver at a decreasing bandwidth schedule
h = hmax, hmax*factor, ... down to hmin, warm-starting each stage.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import gmm
from .colors import RGB
from .warp import (
    TPS,
    GAUSSIAN,
    INVERSE_MULTIQUADRIC,
    ControlGrid,
    RbfKind,
    WarpParameters,
    basis_matrix,
    identity_warp,
    pack_theta,
    unpack_theta,
    warp_from_theta,
)

MODE_NOCORR = "nocorr"
MODE_CORR = "corr"

# Selected (lambda, epsilon) per (rbf kind, space, mode); epsilon is None for TPS.
DEFAULT_PARAMETERS = {
    ("tps", "rgb", MODE_CORR): (3e-3, None),
    ("tps", "lab", MODE_CORR): (3e-3, None),
    ("gaussian", "rgb", MODE_CORR): (3e-5, 6e-3),
    ("gaussian", "lab", MODE_CORR): (6e-3, 3.0),
    ("imq", "rgb", MODE_CORR): (3e-5, 6e-3),
    ("imq", "lab", MODE_CORR): (6e-3, 10.0),
    ("iq", "rgb", MODE_CORR): (3e-6, 6e-3),
    ("iq", "lab", MODE_CORR): (6e-3, 30.0),
    ("tps", "rgb", MODE_NOCORR): (3e-6, None),
    ("tps", "lab", MODE_NOCORR): (3e-4, None),
    ("gaussian", "rgb", MODE_NOCORR): (3e-8, 6e-3),
    ("gaussian", "lab", MODE_NOCORR): (3e-4, 3.0),
    ("imq", "rgb", MODE_NOCORR): (3e-8, 6e-3),
    ("imq", "lab", MODE_NOCORR): (3e-4, 3.0),
    ("iq", "rgb", MODE_NOCORR): (3e-8, 6e-3),
    ("iq", "lab", MODE_NOCORR): (3e-4, 3.0),
}


def default_parameters(rbf_kind, space, mode):
    """(lambda, epsilon) defaults keyed by kernel, working space and mode."""
    try:
        return DEFAULT_PARAMETERS[(rbf_kind, space, mode)]
    except KeyError:
        raise ValueError(f"no default parameters for {(rbf_kind, space, mode)}")


@dataclass(frozen=True)
class EstimationConfig:
    lam: float = 3e-6
    eps: float | None = None
    hmax: float = 0.5
    hmin: float = 0.05
    anneal_factor: float = 0.5
    inner_max_iters: int = 200
    inner_tol: float = 1e-8
    mode: str = MODE_NOCORR

    def __post_init__(self):
        if not 0 < self.hmin < self.hmax:
            raise ValueError("need 0 < hmin < hmax")
        if not 0 < self.anneal_factor < 1:
            raise ValueError("anneal_factor must lie in (0, 1)")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.mode not in (MODE_NOCORR, MODE_CORR):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def for_setup(cls, rbf_kind, space, mode, **overrides):
        lam, eps = default_parameters(rbf_kind, space, mode)
        merged = {"lam": lam, "eps": eps, "mode": mode}
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**merged)


@dataclass(frozen=True)
class CostBreakdown:
    entropy: float
    cross: float
    roughness: float
    total: float


@dataclass(frozen=True)
class StageRecord:
    """Per-annealing-stage trace: cost breakdown at start plus one entry per
    accepted inner iteration."""

    stage: int
    h: float
    totals: tuple
    entropies: tuple
    crosses: tuple
    roughnesses: tuple

    @property
    def iterations(self):
        return len(self.totals) - 1


@dataclass(frozen=True)
class EstimationDiagnostics:
    stages: tuple

    def to_text(self):
        lines = ["stage h iteration total entropy cross roughness"]
        for rec in self.stages:
            for i, (t, e, c, r) in enumerate(
                zip(rec.totals, rec.entropies, rec.crosses, rec.roughnesses)
            ):
                lines.append(
                    "%d %.6g %d %.10g %.10g %.10g %.10g" % (rec.stage, rec.h, i, t, e, c, r)
                )
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Roughness: integral of squared second derivatives over the grid box.
#
# For one RBF component psi(|x - c|), the Hessian is
#   H(x) = alpha(r) u u^T + beta(r) I,   u = x - c, r = |u|,
# with alpha = (psi'' - psi'/r)/r^2 and beta = psi'/r. The Frobenius inner
# product of two such Hessians is closed-form, so the integrand
# |D^2 phi|^2 = tr(W G(x) W^T) needs only the m x m matrix G(x); midpoint
# quadrature over the box yields a constant Gram matrix G per (grid, rbf, N).
# ---------------------------------------------------------------------------

_GRAM_CACHE = {}


def _hessian_coeffs(rbf, r):
    """(alpha, beta) such that the psi-component Hessian is alpha*uu^T + beta*I."""
    if rbf.kind == TPS:
        r = np.maximum(r, 1e-9)  # integrable singularity; midpoints avoid 0
        return 1.0 / r**3, -1.0 / r
    e2 = rbf.eps**2
    s = 1.0 + e2 * r**2
    if rbf.kind == GAUSSIAN:
        g = np.exp(-e2 * r**2)
        return 4.0 * e2 * e2 * g, -2.0 * e2 * g
    if rbf.kind == INVERSE_MULTIQUADRIC:
        return 3.0 * e2 * e2 * s**-2.5, -e2 * s**-1.5
    return 8.0 * e2 * e2 * s**-3, -2.0 * e2 * s**-2  # inverse quadric


def roughness_gram(grid, rbf, n_quad=8):
    """Midpoint-quadrature Gram matrix G with roughness(W) = tr(W G W^T)."""
    key = (grid, rbf, n_quad)
    cached = _GRAM_CACHE.get(key)
    if cached is not None:
        return cached
    lo = np.array(grid.lo)
    hi = np.array(grid.hi)
    axes = [lo[i] + (hi[i] - lo[i]) * (np.arange(n_quad) + 0.5) / n_quad for i in range(3)]
    nodes = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    cell = np.prod(hi - lo) / n_quad**3
    centers = grid.points()
    G = np.zeros((grid.m, grid.m))
    for x in nodes:
        U = x - centers
        r2 = (U * U).sum(axis=1)
        alpha, beta = _hessian_coeffs(rbf, np.sqrt(r2))
        P = U @ U.T
        ar2 = alpha * r2
        G += (
            np.outer(alpha, alpha) * P**2
            + np.outer(ar2, beta)
            + np.outer(beta, ar2)
            + 3.0 * np.outer(beta, beta)
        )
    G *= cell
    G = 0.5 * (G + G.T)
    G.setflags(write=False)
    _GRAM_CACHE[key] = G
    return G


def roughness(w, n_quad=8):
    """Integral of |D^2 phi|^2 over the grid box and its gradient w.r.t. W.

    The affine part has zero second derivatives, so the gradient w.r.t. A
    and o vanishes identically.
    """
    G = roughness_gram(w.grid, w.rbf, n_quad)
    value = float(np.einsum("ij,jk,ik->", w.W, G, w.W))
    return value, 2.0 * w.W @ G


# ---------------------------------------------------------------------------
# Cost and analytic gradient.
# ---------------------------------------------------------------------------


def _check_mode(gmms, cfg):
    if gmms.paired != (cfg.mode == MODE_CORR):
        raise ValueError(
            f"gmms paired={gmms.paired} does not match config mode {cfg.mode!r}"
        )


def cost(gmms, w, h, cfg):
    """CostBreakdown at bandwidth h: entropy - 2*cross + lambda*roughness."""
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    _check_mode(gmms, cfg)
    at_h = gmms.with_bandwidth(h)
    entropy = gmm.entropy_term(at_h.target, w, paired=gmms.paired)
    cross = gmm.cross_term(at_h, w)
    rough, _ = roughness(w)
    return CostBreakdown(entropy, cross, rough, entropy - 2.0 * cross + cfg.lam * rough)


class _CostModel:
    """Fused cost/gradient evaluations for one problem instance."""

    def __init__(self, gmms, grid, rbf, lam):
        self.Mt = gmms.target.means
        self.Mp = gmms.palette.means
        self.paired = gmms.paired
        self.grid, self.rbf, self.lam = grid, rbf, lam
        self.Psi = basis_matrix(grid, rbf, self.Mt)
        self.G = roughness_gram(grid, rbf)
        self.m = grid.m

    def cost_grad(self, theta, h):
        # non-finite intermediates are caught by the caller's isfinite check
        with np.errstate(invalid="ignore"):
            return self._cost_grad(theta, h)

    def _cost_grad(self, theta, h):
        A, o, W = unpack_theta(theta, self.m)
        Y = self.Mt @ A.T + o + self.Psi @ W.T
        Kt, Kp = len(self.Mt), len(self.Mp)
        h2 = h * h
        coef = (4.0 * np.pi * h2) ** -1.5

        if self.paired:
            D = Y - self.Mp
            e = coef * np.exp(-(D * D).sum(axis=1) / (4.0 * h2))
            entropy = coef / Kt
            cross = e.sum() / Kt**2
            # d(-2*cross)/dY
            GY = e[:, None] * D / (h2 * Kt**2)
        else:
            Nm = _products(Y, Y, coef, h2)
            entropy = Nm.sum() / Kt**2
            GY = -(Y * Nm.sum(axis=1)[:, None] - Nm @ Y) / (Kt**2 * h2)
            Nx = _products(Y, self.Mp, coef, h2)
            cross = Nx.sum() / (Kt * Kp)
            GY += (Y * Nx.sum(axis=1)[:, None] - Nx @ self.Mp) / (Kt * Kp * h2)

        rough = float(np.einsum("ij,jk,ik->", W, self.G, W))
        total = entropy - 2.0 * cross + self.lam * rough
        gA = GY.T @ self.Mt
        go = GY.sum(axis=0)
        gW = GY.T @ self.Psi + self.lam * 2.0 * W @ self.G
        return total, pack_theta(gA, go, gW), (entropy, cross, rough)


def _products(a, b, coef, h2):
    d2 = (a**2).sum(axis=1)[:, None] + (b**2).sum(axis=1)[None, :] - 2.0 * a @ b.T
    np.maximum(d2, 0.0, out=d2)
    return coef * np.exp(-d2 / (4.0 * h2))


def cost_gradient(gmms, w, h, cfg):
    """Analytic gradient of cost(...).total w.r.t. the packed theta vector."""
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    _check_mode(gmms, cfg)
    model = _CostModel(gmms, w.grid, w.rbf, cfg.lam)
    _, grad, _ = model.cost_grad(w.theta, h)
    return grad


def anneal_schedule(cfg):
    """Bandwidths visited by the outer loop: hmax, hmax*f, ... while >= hmin."""
    hs = []
    h = cfg.hmax
    while h >= cfg.hmin - 1e-12:
        hs.append(h)
        h *= cfg.anneal_factor
    return hs


def estimate_theta(gmms, cfg, grid=None, rbf=None, space=RGB):
    """Annealed estimation (identity start) returning the fitted warp and
    per-stage diagnostics.

    Each bandwidth stage runs a deterministic L-BFGS descent on the analytic
    cost, warm-started from the previous stage. Raises FloatingPointError if
    the cost turns non-finite.
    """
    _check_mode(gmms, cfg)
    grid = grid or ControlGrid()
    rbf = rbf or RbfKind()
    model = _CostModel(gmms, grid, rbf, cfg.lam)
    theta = identity_warp(grid, rbf, space).theta

    stages = []
    for stage, h in enumerate(anneal_schedule(cfg)):
        totals, entropies, crosses, roughs = [], [], [], []

        def evaluate(th):
            total, grad, parts = model.cost_grad(th, h)
            if not np.isfinite(total):
                raise FloatingPointError(
                    f"non-finite cost at stage {stage} (h={h:.6g}), "
                    f"iteration {len(totals)}"
                )
            return total, grad, parts

        def record(th):
            total, _, (entropy, cross, rough) = evaluate(th)
            totals.append(total)
            entropies.append(entropy)
            crosses.append(cross)
            roughs.append(rough)

        record(theta)
        res = minimize(
            lambda th: evaluate(th)[:2],
            theta,
            jac=True,
            method="L-BFGS-B",
            callback=record,
            options={
                "maxiter": cfg.inner_max_iters,
                "ftol": cfg.inner_tol,
                "gtol": 1e-12,
            },
        )
        theta = res.x
        stages.append(
            StageRecord(
                stage, h, tuple(totals), tuple(entropies), tuple(crosses), tuple(roughs)
            )
        )

    warp = warp_from_theta(theta, grid, rbf, space)
    return warp, EstimationDiagnostics(tuple(stages))
