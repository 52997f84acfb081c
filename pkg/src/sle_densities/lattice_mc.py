"""Triangular-lattice site percolation Monte Carlo at p = 1/2 (the kappa = 6
universality class): cluster connectivity to a wired boundary interval, and
exploration-interface tracing for left-passage frequencies.

Lattice layout: sites (col i, row j) with neighbors (i+-1, j), (i, j+-1),
(i-1, j+1), (i+1, j-1), embedded equilaterally at

    x = (i - cx + j/2) * a,   y = j * (sqrt(3)/2) * a.

Determinism: every sample draws its sites from its own Philox stream keyed
by (seed, sample_index), and per-probe outcomes are accumulated as integer
counts, so results are bitwise identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DomainError

__all__ = [
    "McConfig",
    "McEstimate",
    "sample_connectivity",
    "trace_interface_lpp",
    "fit_shape",
]

_ROW_H = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class McConfig:
    """Lattice box, wired interval on the bottom boundary, and run size."""

    box_width: int
    box_height: int
    spacing: float
    wired_interval: tuple[float, float]
    seed: int
    n_samples: int
    p: float = 0.5

    def __post_init__(self):
        if self.box_width < 4 or self.box_height < 4:
            raise DomainError("box must be at least 4 x 4 sites")
        if self.p != 0.5:
            raise DomainError("site percolation is only critical at p = 1/2")
        if self.n_samples < 1:
            raise DomainError("n_samples must be positive")

    @property
    def center_col(self) -> float:
        return 0.5 * (self.box_width - 1)

    def site_xy(self, i, j):
        a = self.spacing
        return (i - self.center_col + 0.5 * j) * a, j * _ROW_H * a

    def nearest_site(self, z: complex) -> tuple[int, int]:
        a = self.spacing
        j = int(round(z.imag / (_ROW_H * a)))
        i = int(round(z.real / a + self.center_col - 0.5 * j))
        return i, j

    def wired_cols(self) -> tuple[int, int]:
        """Column range [lo, hi] of bottom-row sites inside the wired interval."""
        a = self.spacing
        xlo, xhi = self.wired_interval
        lo = int(math.ceil(xlo / a + self.center_col))
        hi = int(math.floor(xhi / a + self.center_col))
        if not (0 <= lo <= hi < self.box_width):
            raise DomainError("wired interval must lie on the bottom boundary inside the box")
        return lo, hi


@dataclass(frozen=True)
class McEstimate:
    """Frequency estimates at the probe points."""

    probes: tuple
    means: np.ndarray
    std_errors: np.ndarray
    n_samples: int
    seed: int
    counts: np.ndarray = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "schema": "sle-densities/v1",
            "probes": [[z.real, z.imag] for z in self.probes],
            "means": list(map(float, self.means)),
            "std_errors": list(map(float, self.std_errors)),
            "n_samples": int(self.n_samples),
            "seed": int(self.seed),
        }


def _estimate_from_counts(probes, counts, n, seed) -> McEstimate:
    counts = np.asarray(counts, dtype=np.int64)
    means = counts / float(n)
    if n > 1:
        # Bernoulli sample standard deviation / sqrt(n)
        var = means * (1.0 - means) * n / (n - 1.0)
        std = np.sqrt(var / n)
    else:
        std = np.full_like(means, np.inf)
    return McEstimate(
        probes=tuple(probes), means=means, std_errors=std, n_samples=n, seed=seed,
        counts=counts,
    )


def _sample_occupancy(config: McConfig, index: int) -> np.ndarray:
    """Fair-bit site occupation (p = 1/2 exactly) from the sample's own
    counter-based Philox stream."""
    key = np.array([config.seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    bg = np.random.Philox(key=key)
    n = config.box_height * config.box_width
    raw = bg.random_raw((n + 63) // 64)
    bits = np.unpackbits(raw.view(np.uint8), count=n)
    return bits.reshape(config.box_height, config.box_width).astype(np.bool_)


@njit(cache=True, nogil=True, inline="always")
def _uf_find(parent, x):
    # path halving
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True, inline="always")
def _uf_union(parent, rank, a, b):
    ra = _uf_find(parent, a)
    rb = _uf_find(parent, b)
    if ra == rb:
        return
    if rank[ra] < rank[rb]:
        parent[ra] = rb
    elif rank[ra] > rank[rb]:
        parent[rb] = ra
    else:
        parent[rb] = ra
        rank[ra] += 1


@njit(cache=True, nogil=True)
def _connectivity_kernel(occ, wired_lo, wired_hi, probe_i, probe_j, hits):
    """Union-find over triangular adjacency; records, for each probe site,
    whether it connects to the wired interval."""
    h, w = occ.shape
    n = h * w
    parent = np.arange(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int8)
    for j in range(h - 1):
        base = j * w
        nxt = base + w
        for i in range(w - 1):
            if not occ[j, i]:
                continue
            k = base + i
            if occ[j, i + 1]:
                _uf_union(parent, rank, k, k + 1)
            if occ[j + 1, i]:
                _uf_union(parent, rank, k, k + w)
            if i > 0 and occ[j + 1, i - 1]:
                _uf_union(parent, rank, k, k + w - 1)
        i = w - 1
        if occ[j, i]:
            k = base + i
            if occ[j + 1, i]:
                _uf_union(parent, rank, k, k + w)
            if occ[j + 1, i - 1]:
                _uf_union(parent, rank, k, k + w - 1)
    j = h - 1
    base = j * w
    for i in range(w - 1):
        if occ[j, i] and occ[j, i + 1]:
            _uf_union(parent, rank, base + i, base + i + 1)
    wired_root = _uf_find(parent, wired_lo)
    for m in range(probe_i.size):
        k = probe_j[m] * w + probe_i[m]
        if occ[probe_j[m], probe_i[m]] and _uf_find(parent, k) == wired_root:
            hits[m] += 1


def _worker_count() -> int:
    raw = os.environ.get("SLE_DENSITIES_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(8, os.cpu_count() or 1)
    return n


def sample_connectivity(config: McConfig, probes) -> McEstimate:
    """Frequency with which each probe's nearest site belongs to the cluster
    of the wired boundary interval, over n_samples critical configurations."""
    probes = [complex(z) for z in probes]
    lo, hi = config.wired_cols()
    pi = np.empty(len(probes), dtype=np.int64)
    pj = np.empty(len(probes), dtype=np.int64)
    for m, z in enumerate(probes):
        i, j = config.nearest_site(z)
        if not (0 <= i < config.box_width and 0 <= j < config.box_height):
            raise DomainError(f"probe {z} falls outside the lattice box")
        if j > 0 and (
            i < 5 or i >= config.box_width - 5 or j >= config.box_height - 5
        ):
            raise DomainError(f"probe {z} is within 5 spacings of the box edge")
        pi[m], pj[m] = i, j

    def run_block(bounds):
        s0, s1 = bounds
        hits = np.zeros(len(probes), dtype=np.int64)
        for s in range(s0, s1):
            occ = _sample_occupancy(config, s)
            occ[0, lo : hi + 1] = True
            _connectivity_kernel(occ, lo, hi, pi, pj, hits)
        return hits

    workers = _worker_count()
    blocks = _split_blocks(config.n_samples, workers)
    if len(blocks) == 1:
        total = run_block(blocks[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(run_block, blocks))
    return _estimate_from_counts(probes, total, config.n_samples, config.seed)


def _split_blocks(n: int, workers: int):
    size = max(1, (n + 4 * workers - 1) // (4 * workers))
    return [(s, min(s + size, n)) for s in range(0, n, size)]


# ---------------------------------------------------------------------------
# exploration interface


@njit(cache=True, nogil=True)
def _trace_kernel(occ, start_col, cx, probe_x, probe_y, crossings, record, faces_out):
    """Walk the percolation exploration path on the hexagonal (dual) lattice.

    State: ordered site pair (A = occupied left, B = vacant right) plus the
    current triangular face holding both and the third site N about to be
    examined.  Faces are (i, j, orient): orient 0 is {(i,j),(i+1,j),(i,j+1)},
    orient 1 is {(i+1,j),(i,j+1),(i+1,j+1)}.

    Counts crossings of each probe's descending vertical ray on the fly.
    Returns the number of steps, or -1 for a bottom exit (adjacency bug),
    -2 if the path exceeded the step budget.
    """
    h, w = occ.shape
    ai, aj = start_col, 0
    bi, bj = start_col + 1, 0
    fi, fj, forient = start_col, 0, 0
    # face-center coordinates in lattice units (x relative to cx, y in rows)
    def _cx(i, j, orient):
        if orient == 0:
            return (3.0 * i + 1.0) / 3.0 - cx + 0.5 * (j + 1.0 / 3.0)
        return (3.0 * i + 2.0) / 3.0 - cx + 0.5 * (j + 2.0 / 3.0)

    def _cy(j, orient):
        return (j + (1.0 / 3.0 if orient == 0 else 2.0 / 3.0)) * 0.8660254037844386

    x0 = _cx(fi, fj, forient)
    y0 = _cy(fj, forient)
    steps = 0
    budget = 8 * h * w
    nrec = 0
    while True:
        steps += 1
        if steps > budget:
            return -2, nrec
        # third site of the current face
        if forient == 0:
            ni, nj = fi, fj
            # face sites: (fi,fj),(fi+1,fj),(fi,fj+1); find the one != A,B
            if (ni == ai and nj == aj) or (ni == bi and nj == bj):
                ni, nj = fi + 1, fj
                if (ni == ai and nj == aj) or (ni == bi and nj == bj):
                    ni, nj = fi, fj + 1
        else:
            ni, nj = fi + 1, fj
            if (ni == ai and nj == aj) or (ni == bi and nj == bj):
                ni, nj = fi, fj + 1
                if (ni == ai and nj == aj) or (ni == bi and nj == bj):
                    ni, nj = fi + 1, fj + 1
        if occ[nj, ni]:
            ai, aj = ni, nj
        else:
            bi, bj = ni, nj
        # next face: the other face containing the pair (A, B)
        di, dj = bi - ai, bj - aj
        if di == 1 and dj == 0:
            f0i, f0j, f0o = ai, aj, 0
            f1i, f1j, f1o = ai, aj - 1, 1
        elif di == -1 and dj == 0:
            f0i, f0j, f0o = bi, bj, 0
            f1i, f1j, f1o = bi, bj - 1, 1
        elif di == 0 and dj == 1:
            f0i, f0j, f0o = ai, aj, 0
            f1i, f1j, f1o = ai - 1, aj, 1
        elif di == 0 and dj == -1:
            f0i, f0j, f0o = bi, bj, 0
            f1i, f1j, f1o = bi - 1, bj, 1
        elif di == -1 and dj == 1:
            f0i, f0j, f0o = bi, aj, 0
            f1i, f1j, f1o = ai - 1, aj, 1
        else:  # di == 1, dj == -1
            f0i, f0j, f0o = ai, bj, 0
            f1i, f1j, f1o = bi - 1, bj, 1
        if f0i == fi and f0j == fj and f0o == forient:
            fi, fj, forient = f1i, f1j, f1o
        else:
            fi, fj, forient = f0i, f0j, f0o
        # out-of-box checks: faces need sites inside [0,w)x[0,h)
        imax = fi + 1
        jmax = fj + 1
        if fj < 0:
            return -1, nrec  # bottom exit: impossible on valid configurations
        if fi < 0 or imax >= w or jmax >= h:
            return steps, nrec
        x1 = _cx(fi, fj, forient)
        y1 = _cy(fj, forient)
        if record:
            faces_out[nrec, 0] = fi
            faces_out[nrec, 1] = fj
            faces_out[nrec, 2] = forient
            nrec += 1
        for m in range(probe_x.size):
            px = probe_x[m]
            if (x0 < px) != (x1 < px):
                yc = y0 + (px - x0) * (y1 - y0) / (x1 - x0)
                if yc < probe_y[m]:
                    crossings[m] += 1
        x0, y0 = x1, y1


def trace_interface_lpp(config: McConfig, probes) -> McEstimate:
    """Left-passage frequencies of the percolation exploration interface.

    The bottom boundary is forced occupied left of the origin and vacant
    right of it; the interface from the origin is traced until it leaves
    the box, and each probe is classified by the parity of path crossings
    of its descending vertical ray.
    """
    probes = [complex(z) for z in probes]
    a = config.spacing
    half_width = 0.5 * config.box_width * a
    half_height = config.box_height * _ROW_H * a
    radius = min(half_width, half_height)
    rmax = max(abs(z) for z in probes)
    if radius < 8.0 * rmax:
        raise DomainError(
            f"box radius {radius:.3g} must be at least 8 * max|probe| = {8 * rmax:.3g}"
        )
    # start bond: between the last column with x < 0 and the first with x >= 0
    start_col = int(math.ceil(config.center_col)) - 1
    # Dobrushin split wrapped around the box: bottom/top rows and the side
    # columns are forced so the interface must run from the origin to the
    # top-center split, the lattice stand-in for infinity
    top_split = int(math.ceil(config.center_col - 0.5 * (config.box_height - 1))) - 1
    top_split = min(max(top_split, 0), config.box_width - 2)
    px = np.array([z.real / a for z in probes])
    py = np.array([z.imag / a for z in probes])
    dummy = np.empty((1, 3), dtype=np.int64)

    def run_block(bounds):
        s0, s1 = bounds
        hits = np.zeros(len(probes), dtype=np.int64)
        cross = np.zeros(len(probes), dtype=np.int64)
        for s in range(s0, s1):
            occ = _sample_occupancy(config, s)
            occ[0, : start_col + 1] = True
            occ[0, start_col + 1 :] = False
            occ[:, 0] = True
            occ[:, -1] = False
            occ[-1, : top_split + 1] = True
            occ[-1, top_split + 1 :] = False
            cross[:] = 0
            status, _ = _trace_kernel(
                occ, start_col, config.center_col, px, py, cross, False, dummy
            )
            if status == -1:
                raise DomainError("interface exited through the bottom boundary")
            if status == -2:
                raise DomainError("interface exceeded its step budget")
            for m in range(len(probes)):
                right_exit = probes[m].real > 0.0
                even = cross[m] % 2 == 0
                if (right_exit and even) or (not right_exit and not even):
                    hits[m] += 1
        return hits

    workers = _worker_count()
    blocks = _split_blocks(config.n_samples, workers)
    if len(blocks) == 1:
        total = run_block(blocks[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(run_block, blocks))
    return _estimate_from_counts(probes, total, config.n_samples, config.seed)


def trace_one_interface(config: McConfig, index: int):
    """Trace a single configuration's interface and return its face list
    (diagnostic path for the non-self-crossing invariant)."""
    occ = _sample_occupancy(config, index)
    start_col = int(math.ceil(config.center_col)) - 1
    occ[0, : start_col + 1] = True
    occ[0, start_col + 1 :] = False
    faces = np.empty((8 * occ.size, 3), dtype=np.int64)
    status, nrec = _trace_kernel(
        occ,
        start_col,
        config.center_col,
        np.empty(0, dtype=float),
        np.empty(0, dtype=float),
        np.empty(0, dtype=np.int64),
        True,
        faces,
    )
    if status < 0:
        raise DomainError(f"trace failed with status {status}")
    return faces[:nrec]


def fit_shape(estimate: McEstimate, formula_values) -> tuple[float, float]:
    """One-parameter weighted least squares absorbing the lattice
    normalization: c minimizing sum((mean_i - c f_i)^2 / sigma_i^2),
    plus the RMS of the relative residuals."""
    f = np.asarray(formula_values, dtype=float)
    m = np.asarray(estimate.means, dtype=float)
    s = np.asarray(estimate.std_errors, dtype=float)
    if f.shape != m.shape:
        raise DomainError("formula values and estimates must have equal length")
    if not np.all(f > 0):
        raise DomainError("formula values must be positive")
    if np.all(m == 0):
        raise DomainError("degenerate all-zero estimate")
    w = 1.0 / np.where(s > 0, s, np.min(s[s > 0]) if np.any(s > 0) else 1.0) ** 2
    c = float(np.sum(w * m * f) / np.sum(w * f * f))
    rel = (m - c * f) / (c * f)
    return c, float(np.sqrt(np.mean(rel**2)))
