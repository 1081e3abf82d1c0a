"""Precomputed EF-field lattice over nuclear coordinates.

The dynamics never evaluates Green's functions on the fly; it interpolates
bilinearly from a FieldGrid computed once per parameter set.  Grids persist
as a single .npz container (see FILE FORMAT in the README): a mandatory
version byte, the grid spec, a SHA-256 fingerprint of the physics parameters,
and row-major field arrays.  A fingerprint mismatch on load is always fatal
so stale physics can never be reused silently.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, OutOfBounds, QuadratureNotConverged
from .fields import EFSample, evaluate_sample
from .model import ModelParams, as_point
from .quadrature import QuadratureSpec

FORMAT_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Rectangular nuclear grid with an out-of-bounds policy."""

    x_min: float = -8.0
    x_max: float = 2.0
    y_min: float = -7.0
    y_max: float = 3.0
    nx: int = 101
    ny: int = 101
    out_of_bounds_policy: str = "error"

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)
                and np.isfinite(self.y_min) and np.isfinite(self.y_max)):
            raise ConfigError("grid bounds must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigError("grid bounds must satisfy min < max")
        if self.nx < 2 or self.ny < 2:
            raise ConfigError("nx and ny must be >= 2")
        if self.out_of_bounds_policy not in ("error", "clamp"):
            raise ConfigError("out_of_bounds_policy must be 'error' or 'clamp'")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)


def params_fingerprint(p: ModelParams, q: QuadratureSpec) -> str:
    """SHA-256 over the physics parameters and the file format version."""
    payload = {"format": FORMAT_VERSION, "model": asdict(p), "quad": asdict(q)}
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


class FieldGrid:
    """Immutable EFSample lattice with bilinear interpolation."""

    def __init__(self, spec: GridSpec, fingerprint: str, force, gamma,
                 diffusion, current):
        self.spec = spec
        self.fingerprint = fingerprint
        self.force = np.asarray(force)          # (nx, ny, 2)
        self.gamma = np.asarray(gamma)          # (nx, ny, 2, 2)
        self.diffusion = np.asarray(diffusion)  # (nx, ny, 2, 2)
        self.current = np.asarray(current)      # (nx, ny)
        expected = (spec.nx, spec.ny)
        if (self.force.shape != expected + (2,)
                or self.gamma.shape != expected + (2, 2)
                or self.diffusion.shape != expected + (2, 2)
                or self.current.shape != expected):
            raise ConfigError("field array shapes do not match the grid spec")
        # node coordinates cached so interpolation weights are computed
        # against the exact stored values (bit-exact at nodes)
        self._xs = spec.xs
        self._ys = spec.ys

    # -- interpolation ---------------------------------------------------

    def _locate(self, pts: np.ndarray):
        s = self.spec
        x, y = pts[:, 0], pts[:, 1]
        if s.out_of_bounds_policy == "clamp":
            x = np.clip(x, s.x_min, s.x_max)
            y = np.clip(y, s.y_min, s.y_max)
        else:
            bad = ((x < s.x_min) | (x > s.x_max)
                   | (y < s.y_min) | (y > s.y_max))
            if np.any(bad):
                i = int(np.argmax(bad))
                raise OutOfBounds(
                    f"point ({pts[i, 0]:.4f}, {pts[i, 1]:.4f}) outside grid "
                    f"[{s.x_min}, {s.x_max}]x[{s.y_min}, {s.y_max}]",
                    point=(float(pts[i, 0]), float(pts[i, 1])),
                    trajectory=i)
        dx = (s.x_max - s.x_min) / (s.nx - 1)
        dy = (s.y_max - s.y_min) / (s.ny - 1)
        ix = np.clip(((x - s.x_min) / dx).astype(int), 0, s.nx - 2)
        iy = np.clip(((y - s.y_min) / dy).astype(int), 0, s.ny - 2)
        x0 = self._xs[ix]
        y0 = self._ys[iy]
        wx = (x - x0) / (self._xs[ix + 1] - x0)
        wy = (y - y0) / (self._ys[iy + 1] - y0)
        return ix, iy, wx, wy

    def sample_batch(self, pts: np.ndarray) -> dict[str, np.ndarray]:
        """Bilinear field bundle at an (n, 2) batch of points."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        ix, iy, wx, wy = self._locate(pts)
        w00 = (1 - wx) * (1 - wy)
        w01 = (1 - wx) * wy
        w10 = wx * (1 - wy)
        w11 = wx * wy

        def mix(arr):
            extra = (1,) * (arr.ndim - 2)
            return (w00.reshape(-1, *extra) * arr[ix, iy]
                    + w01.reshape(-1, *extra) * arr[ix, iy + 1]
                    + w10.reshape(-1, *extra) * arr[ix + 1, iy]
                    + w11.reshape(-1, *extra) * arr[ix + 1, iy + 1])

        return {"force": mix(self.force), "gamma": mix(self.gamma),
                "diffusion": mix(self.diffusion), "current": mix(self.current)}

    def interpolate(self, r) -> EFSample:
        """EFSample at one point; exact at grid nodes."""
        r = as_point(r)
        b = self.sample_batch(np.array([[r.x, r.y]]))
        return EFSample(force=b["force"][0], gamma=b["gamma"][0],
                        diffusion=b["diffusion"][0],
                        local_current=float(b["current"][0]))

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        s = self.spec
        np.savez(
            path,
            version=np.array([FORMAT_VERSION], dtype=np.uint8),
            fingerprint=np.frombuffer(
                self.fingerprint.encode("ascii"), dtype=np.uint8),
            bounds=np.array([s.x_min, s.x_max, s.y_min, s.y_max]),
            shape=np.array([s.nx, s.ny], dtype=np.int64),
            policy=np.array([s.out_of_bounds_policy]),
            force=self.force, gamma=self.gamma,
            diffusion=self.diffusion, current=self.current)

    @classmethod
    def load(cls, path, p: ModelParams, q: QuadratureSpec) -> "FieldGrid":
        with np.load(path, allow_pickle=False) as data:
            version = int(data["version"][0])
            if version != FORMAT_VERSION:
                raise ConfigError(
                    f"unsupported field-grid format version {version}")
            stored = bytes(data["fingerprint"]).decode("ascii")
            expected = params_fingerprint(p, q)
            if stored != expected:
                raise ConfigError(
                    "field-grid fingerprint mismatch: file was computed with "
                    "different physics parameters (stale grid?)")
            x0, x1, y0, y1 = data["bounds"]
            nx, ny = (int(v) for v in data["shape"])
            spec = GridSpec(float(x0), float(x1), float(y0), float(y1),
                            nx, ny, str(data["policy"][0]))
            return cls(spec, stored, data["force"], data["gamma"],
                       data["diffusion"], data["current"])


# -- precompute ------------------------------------------------------------

_WORK: dict = {}


def _init_worker(p, q, xs, ys, clamp_blas=False):
    if clamp_blas:
        from ._blas import set_blas_threads
        set_blas_threads(1)
    _WORK.update(p=p, q=q, xs=xs, ys=ys)


def _eval_row(ix: int):
    p, q, xs, ys = _WORK["p"], _WORK["q"], _WORK["xs"], _WORK["ys"]
    force = np.empty((len(ys), 2))
    gamma = np.empty((len(ys), 2, 2))
    diffusion = np.empty((len(ys), 2, 2))
    current = np.empty(len(ys))
    for iy, y in enumerate(ys):
        try:
            s = evaluate_sample((xs[ix], y), p, q)
        except QuadratureNotConverged as exc:
            raise QuadratureNotConverged(
                f"at grid node ({xs[ix]:.4f}, {y:.4f}): {exc}",
                node=(float(xs[ix]), float(y))) from exc
        force[iy] = s.force
        gamma[iy] = s.gamma
        diffusion[iy] = s.diffusion
        current[iy] = s.local_current
    return ix, force, gamma, diffusion, current


def precompute(p: ModelParams, q: QuadratureSpec, g: GridSpec,
               threads: int = 1) -> FieldGrid:
    """Evaluate every grid node; parallel over rows, deterministic output."""
    xs, ys = g.xs, g.ys
    force = np.empty((g.nx, g.ny, 2))
    gamma = np.empty((g.nx, g.ny, 2, 2))
    diffusion = np.empty((g.nx, g.ny, 2, 2))
    current = np.empty((g.nx, g.ny))

    if threads > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(threads, initializer=_init_worker,
                      initargs=(p, q, xs, ys, True)) as pool:
            rows = pool.map(_eval_row, range(g.nx))
    else:
        _init_worker(p, q, xs, ys)
        rows = [_eval_row(ix) for ix in range(g.nx)]

    for ix, frow, grow, drow, crow in rows:
        force[ix] = frow
        gamma[ix] = grow
        diffusion[ix] = drow
        current[ix] = crow
    return FieldGrid(g, params_fingerprint(p, q), force, gamma,
                     diffusion, current)
