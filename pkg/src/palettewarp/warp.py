"""The parametric colour-space deformation phi(x) = A x + o + W Psi(x):
affine part plus a radial-basis expansion over a fixed regular control grid.

theta packs as [A row-major (9), o (3), W column-major (3m)], giving the
387-dimensional parameter vector for the default 5x5x5 grid. phi is linear
in theta, which is what makes stored warps interpolable.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .colors import RGB, SPACES

TPS = "tps"
GAUSSIAN = "gaussian"
INVERSE_MULTIQUADRIC = "imq"
INVERSE_QUADRIC = "iq"
RBF_KINDS = (TPS, GAUSSIAN, INVERSE_MULTIQUADRIC, INVERSE_QUADRIC)

_MAGIC = "palettewarp-warp"
_VERSION = 1


@dataclass(frozen=True)
class RbfKind:
    """Radial kernel choice; eps scales the three non-TPS kernels."""

    kind: str = TPS
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in RBF_KINDS:
            raise ValueError(f"unknown rbf kind {self.kind!r}")
        if self.kind == TPS:
            object.__setattr__(self, "eps", None)
        elif self.eps is None or self.eps <= 0:
            raise ValueError(f"rbf {self.kind!r} needs eps > 0, got {self.eps}")


@dataclass(frozen=True)
class ControlGrid:
    """Regular g^3 lattice of control points over an axis-aligned box."""

    g: int = 5
    lo: tuple = (0.0, 0.0, 0.0)
    hi: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.g < 2:
            raise ValueError("grid needs at least 2 points per axis")
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if not all(h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError("grid box must have positive extent on every axis")

    @property
    def m(self):
        return self.g**3

    def points(self):
        """The m control points in lexicographic (axis-0 slowest) order."""
        axes = [np.linspace(l, h, self.g) for l, h in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([a.ravel() for a in mesh], axis=1)


def rbf_eval(rbf, r):
    """Kernel profile psi(r) for r >= 0 (vectorised)."""
    r = np.asarray(r, dtype=np.float64)
    if rbf.kind == TPS:
        return -r
    s = (rbf.eps * r) ** 2
    if rbf.kind == GAUSSIAN:
        return np.exp(-s)
    if rbf.kind == INVERSE_MULTIQUADRIC:
        return 1.0 / np.sqrt(1.0 + s)
    return 1.0 / (1.0 + s)  # inverse quadric


def basis_matrix(grid, rbf, x):
    """Psi evaluated at rows of x: (N, m) with entry [i, j] = psi(|x_i - c_j|)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    c = grid.points()
    d2 = (
        (x**2).sum(axis=1)[:, None]
        + (c**2).sum(axis=1)[None, :]
        - 2.0 * x @ c.T
    )
    np.maximum(d2, 0.0, out=d2)
    return rbf_eval(rbf, np.sqrt(d2))


def basis_vector(grid, rbf, x):
    """Psi(x) for a single colour triple: an m-vector."""
    return basis_matrix(grid, rbf, np.asarray(x, dtype=np.float64).reshape(1, 3))[0]


@dataclass(frozen=True)
class WarpParameters:
    A: np.ndarray  # (3, 3)
    o: np.ndarray  # (3,)
    W: np.ndarray  # (3, m)
    grid: ControlGrid = field(default_factory=ControlGrid)
    rbf: RbfKind = field(default_factory=RbfKind)
    space: str = RGB

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64).reshape(3, 3)
        o = np.asarray(self.o, dtype=np.float64).reshape(3)
        W = np.asarray(self.W, dtype=np.float64).reshape(3, self.grid.m)
        for name, arr in (("A", A), ("o", o), ("W", W)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.space not in SPACES:
            raise ValueError(f"unknown colour space {self.space!r}")

    @property
    def theta(self):
        return pack_theta(self.A, self.o, self.W)


def pack_theta(A, o, W):
    """[A row-major, o, W column-major] -> 3m+12 vector."""
    return np.concatenate([
        np.asarray(A, dtype=np.float64).ravel(),
        np.asarray(o, dtype=np.float64).ravel(),
        np.asarray(W, dtype=np.float64).ravel(order="F"),
    ])


def unpack_theta(theta, m):
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (3 * m + 12,):
        raise ValueError(f"theta must have length {3 * m + 12}, got {theta.shape}")
    A = theta[:9].reshape(3, 3)
    o = theta[9:12]
    W = theta[12:].reshape(3, m, order="F")
    return A, o, W


def warp_from_theta(theta, grid, rbf, space=RGB):
    A, o, W = unpack_theta(theta, grid.m)
    return WarpParameters(A, o, W, grid, rbf, space)


def identity_warp(grid=None, rbf=None, space=RGB):
    grid = grid or ControlGrid()
    rbf = rbf or RbfKind()
    return WarpParameters(np.eye(3), np.zeros(3), np.zeros((3, grid.m)), grid, rbf, space)


def eval_warp(w, x):
    """phi(x) = A x + o + W Psi(x), rows of x; no gamut clamping here."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    y = x @ w.A.T + w.o + basis_matrix(w.grid, w.rbf, x) @ w.W.T
    return y[0] if single else y


def interpolate(warps, gammas):
    """Convex combination of packed theta vectors (Eq. of palette mixing).

    All warps must share grid, rbf and space; gammas must be nonnegative and
    sum to 1.
    """
    if len(warps) != len(gammas) or not warps:
        raise ValueError("need equally many warps and gammas (at least one)")
    first = warps[0]
    for w in warps[1:]:
        if w.grid != first.grid or w.rbf != first.rbf or w.space != first.space:
            raise ValueError("warps must share grid, rbf and colour space")
    gammas = np.asarray(gammas, dtype=np.float64)
    if (gammas < 0).any() or abs(gammas.sum() - 1.0) > 1e-9:
        raise ValueError("gammas must be nonnegative and sum to 1")
    theta = sum(g * w.theta for g, w in zip(gammas, warps))
    return warp_from_theta(theta, first.grid, first.rbf, first.space)


def save_warp(w, path):
    """Versioned UTF-8 text format: header lines then one %.17g float per line."""
    buf = io.StringIO()
    buf.write(f"{_MAGIC} {_VERSION}\n")
    buf.write(f"space {w.space}\n")
    lo, hi = w.grid.lo, w.grid.hi
    buf.write("grid %d %.17g %.17g %.17g %.17g %.17g %.17g\n" % ((w.grid.g,) + lo + hi))
    if w.rbf.kind == TPS:
        buf.write("rbf tps\n")
    else:
        buf.write("rbf %s %.17g\n" % (w.rbf.kind, w.rbf.eps))
    theta = w.theta
    buf.write(f"theta {len(theta)}\n")
    for v in theta:
        buf.write("%.17g\n" % v)
    with open(path, "w", encoding="utf-8") as f:
        f.write(buf.getvalue())


def load_warp(path):
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    try:
        return _parse_warp_lines(lines)
    except Exception as exc:
        raise ValueError(f"malformed warp file {path!r}: {exc}") from exc


def _parse_warp_lines(lines):
    magic = lines[0].split()
    if magic[0] != _MAGIC:
        raise ValueError(f"bad magic {lines[0]!r}")
    if int(magic[1]) != _VERSION:
        raise ValueError(f"unsupported version {magic[1]}")
    header = {}
    for i, line in enumerate(lines[1:], start=1):
        key, *rest = line.split()
        if key == "theta":
            count = int(rest[0])
            block = lines[i + 1 : i + 1 + count]
            if len(block) != count:
                raise ValueError("truncated theta block")
            header["theta"] = np.array([float(v) for v in block])
            break
        header[key] = rest
    space = header["space"][0]
    g = int(header["grid"][0])
    box = [float(v) for v in header["grid"][1:7]]
    grid = ControlGrid(g, tuple(box[:3]), tuple(box[3:]))
    rbf_fields = header["rbf"]
    rbf = RbfKind(rbf_fields[0], float(rbf_fields[1]) if len(rbf_fields) > 1 else None)
    return warp_from_theta(header["theta"], grid, rbf, space)
