"""Finite discrete metric measure spaces.

A space is a finite weighted point cloud with one of three metrics
(closed-form Euclidean, graph shortest path, or an explicit matrix), a
positive measure atom per point, and a designated boundary subset.  Closed
balls, set measures, and boundary distances are the primitives every other
module builds on.  The probe_* methods estimate the structural constants the
regularity theory assumes (doubling, annular decay, ring continuity,
geodesicity); on a finite cloud these are estimators with explicit
degeneracy guards, never proofs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import ConvexHull, cKDTree

from .errors import ConfigurationError, DisconnectedSpaceError, SpaceFormatError

METRIC_KINDS = ("euclidean", "graph", "matrix")


@dataclass(frozen=True)
class Ball:
    """Closed ball: members = {y : d(center, y) <= radius}, ascending ids."""

    center: int
    radius: float
    members: np.ndarray

    def __len__(self):
        return len(self.members)


@dataclass
class SpaceProbeReport:
    """Estimates of the structural constants of a space.

    doubling_estimate and the annular decay estimates are lower bounds for
    the best constants (max over sampled configurations, clamped at 1).
    ring_jump is the largest single-radius atom fraction of r -> mu(B(x,r));
    a discrete measure is never ring-continuous, so this reports the atom
    scale instead of a boolean.  geodesic_defect is the worst excess of
    hop-graph path length over metric distance on sampled pairs.
    """

    doubling_estimate: float
    annular_decay_estimates: dict
    ring_jump: float
    geodesic_defect: float
    samples: int = 0
    seed: int = 0

    def to_dict(self):
        return {
            "doubling_estimate": self.doubling_estimate,
            "annular_decay_estimates": {
                repr(k): v for k, v in self.annular_decay_estimates.items()
            },
            "ring_jump": self.ring_jump,
            "geodesic_defect": self.geodesic_defect,
            "samples": self.samples,
            "seed": self.seed,
        }


def _as_readonly(a, dtype=None):
    out = np.array(a, dtype=dtype)
    out.flags.writeable = False
    return out


class Space:
    """Immutable finite metric measure space with a boundary subset.

    Construction validates the metric contract (symmetry, zero diagonal,
    triangle inequality for explicit matrices, nonnegative edge weights for
    graphs, positive weights everywhere, no duplicate points).  After
    construction all queries are pure reads and safe to share.
    """

    def __init__(self, *, weights, boundary, coords=None, metric="euclidean",
                 edges=None, matrix=None, ids=None, analytic_constants=None,
                 geodesic_like=None, validate=True, triangle_check_seed=0):
        if metric not in METRIC_KINDS:
            raise SpaceFormatError(f"unknown metric kind {metric!r}")
        self.metric = metric
        self.weights = _as_readonly(weights, float)
        n = len(self.weights)
        if n == 0:
            raise SpaceFormatError("no points")
        bmask = np.zeros(n, dtype=bool)
        bmask[np.asarray(boundary, dtype=int)] = True
        self.boundary_mask = _as_readonly(bmask)
        self.ids = _as_readonly(np.arange(n) if ids is None else ids, np.int64)
        if len(np.unique(self.ids)) != n:
            raise SpaceFormatError("duplicate point ids")

        self.coords = None if coords is None else _as_readonly(coords, float)
        self._matrix = None if matrix is None else _as_readonly(matrix, float)
        self._graph = None
        self.edges = None
        if metric == "euclidean":
            if self.coords is None or self.coords.ndim != 2:
                raise SpaceFormatError("euclidean metric requires point coordinates")
            if len(self.coords) != n:
                raise SpaceFormatError("coords/weights length mismatch")
        elif metric == "graph":
            if edges is None:
                raise SpaceFormatError("graph metric requires an edge list")
            e = np.asarray(edges, dtype=float)
            if e.ndim != 2 or e.shape[1] != 3:
                raise SpaceFormatError("edges must be rows [i, j, weight]")
            if np.any(e[:, 2] < 0):
                raise SpaceFormatError("negative edge weight")
            self.edges = _as_readonly(e)
            i, j, w = e[:, 0].astype(int), e[:, 1].astype(int), e[:, 2]
            self._graph = sparse.csr_matrix(
                (np.concatenate([w, w]),
                 (np.concatenate([i, j]), np.concatenate([j, i]))),
                shape=(n, n))
        else:
            if self._matrix is None or self._matrix.shape != (n, n):
                raise SpaceFormatError("matrix metric requires an n-by-n matrix")

        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise SpaceFormatError("weights must be positive and finite")

        self.analytic_constants = dict(analytic_constants) if analytic_constants else None
        if geodesic_like is None:
            geodesic_like = metric == "graph"
        self.geodesic_like = bool(geodesic_like)

        self._dist_rows = {}      # per-source cache for graph metric
        self._bdry_dist = None
        self._diameter = None
        self._resolution = None
        self._tree = None

        if validate:
            self._validate(triangle_check_seed)

    # -- basic structure ----------------------------------------------------

    def __len__(self):
        return len(self.weights)

    @property
    def n_points(self):
        return len(self.weights)

    @property
    def boundary_indices(self):
        return np.flatnonzero(self.boundary_mask)

    @property
    def interior_indices(self):
        return np.flatnonzero(~self.boundary_mask)

    def _validate(self, seed):
        n = len(self)
        if self.metric == "matrix":
            m = self._matrix
            if not np.array_equal(m, m.T):
                raise SpaceFormatError("asymmetric distance matrix")
            if np.any(np.diag(m) != 0.0):
                raise SpaceFormatError("distance matrix has a nonzero diagonal")
            if np.any(m < 0):
                raise SpaceFormatError("negative distance entry")
            if np.any(m[~np.eye(n, dtype=bool)] <= 0):
                raise SpaceFormatError("duplicate points: zero distance between distinct ids")
            if n <= 200:
                # full triple scan: d(i,k) <= d(i,j) + d(j,k)
                lhs = m[:, None, :]
                rhs = m[:, :, None] + m[None, :, :]
                if np.any(lhs > rhs + 1e-12 * np.maximum(lhs, 1.0)):
                    raise SpaceFormatError("triangle inequality violated")
            else:
                rng = np.random.default_rng(seed)
                idx = rng.integers(0, n, size=(100_000, 3))
                i, j, k = idx.T
                bad = m[i, k] > m[i, j] + m[j, k] + 1e-12
                if np.any(bad):
                    raise SpaceFormatError("triangle inequality violated (sampled)")
        elif self.metric == "euclidean" and n > 1:
            if self.resolution() <= 0:
                raise SpaceFormatError("duplicate points: zero distance between distinct ids")

    # -- distances ----------------------------------------------------------

    def _check_index(self, i):
        if not 0 <= int(i) < len(self):
            raise SpaceFormatError(f"unknown point index {i}")
        return int(i)

    def distances_from(self, i):
        """Distance row d(i, .) as a read-only array."""
        i = self._check_index(i)
        if self.metric == "euclidean":
            diff = self.coords - self.coords[i]
            return np.sqrt((diff * diff).sum(axis=1))
        if self.metric == "matrix":
            return self._matrix[i]
        row = self._dist_rows.get(i)
        if row is None:
            row = dijkstra(self._graph, indices=i, directed=False)
            row.flags.writeable = False
            self._dist_rows[i] = row
        return row

    def distance(self, i, j):
        j = self._check_index(j)
        d = float(self.distances_from(i)[j])
        if np.isinf(d):
            raise DisconnectedSpaceError(f"no path between points {i} and {j}")
        return d

    def _distance_block(self, rows, chunk=512):
        """Yields (row_indices, distance_block) over the whole space."""
        rows = np.asarray(rows, dtype=int)
        if self.metric == "euclidean":
            for lo in range(0, len(rows), chunk):
                blk = rows[lo:lo + chunk]
                diff = self.coords[blk, None, :] - self.coords[None, :, :]
                yield blk, np.sqrt((diff * diff).sum(axis=2))
        else:
            for lo in range(0, len(rows), chunk):
                blk = rows[lo:lo + chunk]
                yield blk, np.vstack([self.distances_from(i) for i in blk])

    # -- balls and measures ---------------------------------------------------

    def ball(self, x, r):
        if r < 0:
            raise SpaceFormatError(f"negative ball radius {r}")
        x = self._check_index(x)
        members = np.flatnonzero(self.distances_from(x) <= r)
        return Ball(center=x, radius=float(r), members=members)

    def measure(self, members):
        members = np.asarray(list(members) if isinstance(members, set) else members, dtype=int)
        if members.size == 0:
            return 0.0
        return float(self.weights[members].sum())

    def total_measure(self):
        return float(self.weights.sum())

    # -- boundary geometry ----------------------------------------------------

    def boundary_distances(self):
        """dist(x, boundary) for every point; zero exactly on the boundary."""
        if self._bdry_dist is None:
            b = self.boundary_indices
            if len(b) == 0:
                raise ConfigurationError("space has an empty boundary")
            if self.metric == "euclidean":
                out = np.empty(len(self))
                bc = self.coords[b]
                for lo in range(0, len(self), 2048):
                    blk = slice(lo, min(lo + 2048, len(self)))
                    diff = self.coords[blk, None, :] - bc[None, :, :]
                    out[blk] = np.sqrt((diff * diff).sum(axis=2)).min(axis=1)
            elif self.metric == "graph":
                out = dijkstra(self._graph, indices=b, directed=False).min(axis=0)
            else:
                out = self._matrix[:, b].min(axis=1)
            out[b] = 0.0
            out.flags.writeable = False
            self._bdry_dist = out
        return self._bdry_dist

    def dist_to_boundary(self, x):
        x = self._check_index(x)
        return float(self.boundary_distances()[x])

    def ell(self):
        """Largest distance to the boundary over the space."""
        return float(self.boundary_distances().max())

    def diameter(self):
        if self._diameter is None:
            if self.metric == "euclidean" and self.coords.shape[1] >= 2 and len(self) > 4:
                try:
                    hull = ConvexHull(self.coords)
                    v = hull.vertices
                    diff = self.coords[v, None, :] - self.coords[None, v, :]
                    self._diameter = float(np.sqrt((diff * diff).sum(axis=2)).max())
                except Exception:
                    self._diameter = self._diameter_scan()
            elif self.metric == "euclidean" and self.coords.shape[1] == 1:
                self._diameter = float(self.coords.max() - self.coords.min())
            else:
                self._diameter = self._diameter_scan()
        return self._diameter

    def _diameter_scan(self):
        best = 0.0
        for _, dmat in self._distance_block(np.arange(len(self))):
            finite = dmat[np.isfinite(dmat)]
            if finite.size:
                best = max(best, float(finite.max()))
        return best

    def kdtree(self):
        """Cached cKDTree over the coordinates (euclidean spaces only)."""
        if self._tree is None:
            if self.coords is None:
                raise ConfigurationError("no coordinates for a KD-tree")
            self._tree = cKDTree(self.coords)
        return self._tree

    def resolution(self):
        """Smallest positive inter-point distance (the grid step h on grids)."""
        if self._resolution is None:
            if len(self) < 2:
                self._resolution = 0.0
            elif self.metric == "euclidean":
                d, _ = self.kdtree().query(self.coords, k=2)
                self._resolution = float(d[:, 1].min())
            elif self.metric == "graph":
                self._resolution = float(self.edges[:, 2][self.edges[:, 2] > 0].min())
            else:
                off = self._matrix[~np.eye(len(self), dtype=bool)]
                self._resolution = float(off[off > 0].min())
        return self._resolution

    # -- probes ----------------------------------------------------------------

    def _probe_centers(self, rng, extra=4):
        """Extremal points (bounding box corners, deepest point) plus random ones."""
        centers = set()
        if self.coords is not None:
            lo, hi = self.coords.min(axis=0), self.coords.max(axis=0)
            for corner in itertools.product(*zip(lo, hi)):
                d2 = ((self.coords - np.asarray(corner)) ** 2).sum(axis=1)
                centers.add(int(np.argmin(d2)))
            mid = (lo + hi) / 2.0
            centers.add(int(np.argmin(((self.coords - mid) ** 2).sum(axis=1))))
        else:
            centers.add(0)
            centers.add(len(self) - 1)
        for _ in range(extra):
            centers.add(int(rng.integers(len(self))))
        return sorted(centers)

    def probe_annular_decay(self, delta=1.0, samples=200, seed=0,
                            r_min=None, min_width=None):
        """Estimate the annular decay constant for the given exponent.

        Max over sampled (x, r, R) of mu(B(x,R)\\B(x,r)) / (((R-r)/R)^delta
        * mu(B(x,R))).  Radii snap to realized distances from the center so
        that annulus widths are honest multiples of the local shell spacing;
        samples with R - r below the grid resolution are skipped.  A
        deterministic structured family (extremal centers, thin shells at
        several radius fractions) is always included, plus seeded random
        samples.  Result is clamped below at 1.
        """
        if not 0.0 < delta <= 1.0:
            raise SpaceFormatError(f"annular decay exponent must be in (0, 1], got {delta}")
        res = self.resolution()
        if res <= 0:
            return 1.0
        if r_min is None:
            r_min = 16.0 * res
        if min_width is None:
            min_width = res
        rng = np.random.default_rng(seed)
        best = 1.0

        def visit(d, R, r):
            nonlocal best
            if R <= 0 or R - r < min_width or R - r < res or r < r_min:
                return
            mu_R = float(self.weights[d <= R].sum())
            if mu_R <= 0:
                return
            mu_ann = float(self.weights[(d > r) & (d <= R)].sum())
            est = mu_ann / (((R - r) / R) ** delta * mu_R)
            if est > best:
                best = est

        # structured shells at extremal centers
        for x in self._probe_centers(rng):
            d = self.distances_from(x)
            vals = np.unique(d[np.isfinite(d)])
            vals = vals[vals > 0]
            if len(vals) < 2:
                continue
            dmax = vals[-1]
            for frac in (0.5, 0.7, 0.85, 0.95, 1.0):
                k = np.searchsorted(vals, frac * dmax, side="right") - 1
                if k < 1:
                    continue
                R = vals[k]
                for cells in (1, 2, 4, 8):
                    width = max(cells * res, min_width)
                    j = np.searchsorted(vals, R - width, side="right") - 1
                    if j < 0 or vals[j] >= R:
                        continue
                    visit(d, R, vals[j])

        # seeded random shells (wider: single-cell random shells are too noisy)
        width_floor = max(2.0 * res, min_width)
        for _ in range(samples):
            x = int(rng.integers(len(self)))
            d = self.distances_from(x)
            vals = np.unique(d[np.isfinite(d)])
            vals = vals[vals >= r_min]
            if len(vals) < 2:
                continue
            R = float(vals[rng.integers(1, len(vals))])
            lo = vals[vals <= R - width_floor]
            if len(lo) == 0:
                continue
            r = float(lo[rng.integers(len(lo))])
            visit(d, R, r)
        return best

    def probe_doubling(self, samples=200, seed=0, r_min=None):
        """Estimate the doubling constant: max mu(B(x,2r))/mu(B(x,r))."""
        res = self.resolution()
        if res <= 0:
            return 1.0
        if r_min is None:
            r_min = 16.0 * res
        rng = np.random.default_rng(seed)
        best = 1.0
        centers = self._probe_centers(rng, extra=max(4, samples // 8))
        quantiles = np.linspace(0.0, 1.0, 9)
        for x in centers:
            d = self.distances_from(x)
            vals = np.unique(d[np.isfinite(d)])
            vals = vals[vals >= max(r_min, res)]
            if len(vals) == 0:
                continue
            picks = vals[np.unique((quantiles * (len(vals) - 1)).astype(int))]
            lo_r = rng.choice(vals, size=min(len(vals), max(1, samples // len(centers))))
            for r in np.unique(np.concatenate([picks, lo_r])):
                mu_r = float(self.weights[d <= r].sum())
                if mu_r <= 0:
                    continue
                mu_2r = float(self.weights[d <= 2.0 * r].sum())
                best = max(best, mu_2r / mu_r)
        return best

    def probe_ring_continuity(self, x, radii):
        """Largest relative single-step jump of r -> mu(B(x,r)) over the sweep."""
        radii = np.asarray(radii, dtype=float)
        if len(radii) < 2 or np.any(np.diff(radii) <= 0):
            raise SpaceFormatError("radii must be strictly increasing")
        d = self.distances_from(x)
        mus = np.array([self.weights[d <= r].sum() for r in radii])
        jump = 0.0
        for a, b in zip(mus[:-1], mus[1:]):
            if b > 0:
                jump = max(jump, (b - a) / b)
        return jump

    def probe_geodesic_defect(self, samples=100, seed=0, hop_radius=None):
        """Worst excess of hop-graph path length over metric distance.

        Hop graph joins pairs within hop_radius (default 1.5 * resolution),
        edge length = metric distance.  Graph-metric spaces are path metrics
        already, so their defect is 0 by construction.  Infinite result means
        the hop graph is disconnected (strongly non-geodesic cloud).
        """
        if self.metric == "graph":
            return 0.0
        res = self.resolution()
        if res <= 0 or len(self) < 3:
            return 0.0
        if hop_radius is None:
            hop_radius = 1.5 * res
        if self.metric == "euclidean":
            tree = cKDTree(self.coords)
            adj = tree.sparse_distance_matrix(tree, hop_radius, output_type="coo_matrix").tocsr()
        else:
            m = np.where(self._matrix <= hop_radius, self._matrix, 0.0)
            adj = sparse.csr_matrix(m)
        rng = np.random.default_rng(seed)
        sources = rng.choice(len(self), size=min(samples, len(self)), replace=False)
        paths = dijkstra(adj, indices=sources, directed=False)
        defect = 0.0
        for row, src in zip(paths, sources):
            direct = self.distances_from(src)
            finite = np.isfinite(row)
            if not finite.all():
                return float("inf")
            defect = max(defect, float((row - direct).max()))
        return defect

    def probe_report(self, samples=200, seed=0, deltas=(0.5, 1.0)):
        rng = np.random.default_rng(seed)
        ann = {float(d): self.probe_annular_decay(d, samples=samples, seed=seed)
               for d in deltas}
        centers = self._probe_centers(rng, extra=2)
        jump = 0.0
        r_floor = 16.0 * self.resolution()
        for x in centers:
            d = self.distances_from(x)
            vals = np.unique(d[np.isfinite(d)])
            vals = vals[vals >= r_floor]
            if len(vals) < 2:
                continue
            sweep = vals[:: max(1, len(vals) // 200)]
            if len(sweep) >= 2:
                jump = max(jump, self.probe_ring_continuity(x, sweep))
        return SpaceProbeReport(
            doubling_estimate=self.probe_doubling(samples=samples, seed=seed),
            annular_decay_estimates=ann,
            ring_jump=jump,
            geodesic_defect=self.probe_geodesic_defect(samples=min(samples, 64), seed=seed),
            samples=samples,
            seed=seed,
        )


# -- built-in generators -------------------------------------------------------
#
# Grids carry their analytic constants (Lebesgue cell weights make the
# continuum annulus/doubling computations exact up to boundary cells).


def interval_grid(n, lo=0.0, hi=1.0):
    """1D grid with n points inclusive of both endpoints; boundary = {lo, hi}."""
    if n < 3:
        raise SpaceFormatError("interval grid needs at least 3 points")
    xs = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    return Space(
        coords=xs.reshape(-1, 1),
        weights=np.full(n, h),
        boundary=[0, n - 1],
        metric="euclidean",
        geodesic_like=True,
        analytic_constants={"doubling": 2.0, "annular_decay": {1.0: 1.0}, "delta": 1.0},
    )


def square_grid(n, lo=0.0, hi=1.0):
    """n-by-n grid on [lo,hi]^2; boundary = outer frame; weights = h^2."""
    if n < 3:
        raise SpaceFormatError("square grid needs at least 3 points per side")
    xs = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    coords = np.column_stack([X.ravel(), Y.ravel()])
    I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    frame = (I == 0) | (I == n - 1) | (J == 0) | (J == n - 1)
    return Space(
        coords=coords,
        weights=np.full(n * n, h * h),
        boundary=np.flatnonzero(frame.ravel()),
        metric="euclidean",
        geodesic_like=True,
        analytic_constants={"doubling": 4.0, "annular_decay": {1.0: 2.0}, "delta": 1.0},
    )


def disk_grid(n, radius=0.5):
    """Lattice points of the n-by-n unit-square grid inside the centered disk.

    Boundary = lattice points whose 4-neighborhood leaves the disk.
    """
    if n < 5:
        raise SpaceFormatError("disk grid needs at least 5 points per side")
    xs = np.linspace(0.0, 1.0, n)
    h = 1.0 / (n - 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    coords = np.column_stack([X.ravel(), Y.ravel()])
    c = np.array([0.5, 0.5])
    r2 = ((coords - c) ** 2).sum(axis=1)
    inside = r2 <= radius * radius
    coords = coords[inside]

    kept = {tuple(np.round(p / h).astype(int)) for p in coords}
    bdry = []
    for k, p in enumerate(coords):
        i, j = np.round(p / h).astype(int)
        nb = [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
        if any(q not in kept for q in nb):
            bdry.append(k)
    return Space(
        coords=coords,
        weights=np.full(len(coords), h * h),
        boundary=bdry,
        metric="euclidean",
        geodesic_like=True,
        analytic_constants={"doubling": 4.0, "annular_decay": {1.0: 2.0}, "delta": 1.0},
    )


def path_graph(n, edge_weight=1.0, weights=None):
    """Path graph 0 - 1 - ... - (n-1) with unit weights; boundary = endpoints."""
    if n < 3:
        raise SpaceFormatError("path graph needs at least 3 nodes")
    edges = [[i, i + 1, edge_weight] for i in range(n - 1)]
    return Space(
        weights=np.full(n, 1.0) if weights is None else weights,
        boundary=[0, n - 1],
        metric="graph",
        edges=edges,
        analytic_constants={"doubling": 2.0, "annular_decay": {1.0: 1.0}, "delta": 1.0},
    )


def lattice_graph(nx, ny, edge_weight=1.0):
    """nx-by-ny grid graph with unit edges; boundary = outer frame."""
    if nx < 3 or ny < 3:
        raise SpaceFormatError("lattice graph needs at least 3 nodes per side")
    def node(i, j):
        return i * ny + j
    edges = []
    for i in range(nx):
        for j in range(ny):
            if i + 1 < nx:
                edges.append([node(i, j), node(i + 1, j), edge_weight])
            if j + 1 < ny:
                edges.append([node(i, j), node(i, j + 1), edge_weight])
    frame = [node(i, j) for i in range(nx) for j in range(ny)
             if i in (0, nx - 1) or j in (0, ny - 1)]
    return Space(
        weights=np.full(nx * ny, 1.0),
        boundary=frame,
        metric="graph",
        edges=edges,
        analytic_constants={"doubling": 4.0, "annular_decay": {1.0: 2.0}, "delta": 1.0},
    )


# -- file format ---------------------------------------------------------------

def space_from_dict(doc):
    """Build a Space from the JSON document format.

    { "metric": "euclidean"|"graph"|"matrix",
      "points": [ {"id": int, "coords": [..]?, "weight": real, "boundary": bool} ],
      "edges": [ [i, j, w] ]?,        # graph metric, ids refer to point ids
      "matrix": [[..]]?,              # explicit matrix, point order
      "geodesic": bool? }
    """
    try:
        metric = doc["metric"]
        points = doc["points"]
    except (KeyError, TypeError) as exc:
        raise SpaceFormatError(f"missing required key: {exc}") from exc
    if metric == "graph_shortest_path":
        metric = "graph"
    if metric == "explicit_matrix":
        metric = "matrix"
    if not points:
        raise SpaceFormatError("no points")
    ids, weights, coords, boundary = [], [], [], []
    for k, p in enumerate(points):
        try:
            ids.append(int(p["id"]))
            weights.append(float(p["weight"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpaceFormatError(f"invalid point record #{k}: {p!r}") from exc
        if weights[-1] <= 0:
            raise SpaceFormatError(f"nonpositive weight at point id {ids[-1]}")
        if p.get("boundary", False):
            boundary.append(k)
        if "coords" in p and p["coords"] is not None:
            coords.append([float(c) for c in p["coords"]])
    if coords and len(coords) != len(points):
        raise SpaceFormatError("coords given for some points but not all")
    id_to_index = {pid: k for k, pid in enumerate(ids)}
    if len(id_to_index) != len(ids):
        raise SpaceFormatError("duplicate point ids")
    edges = None
    if doc.get("edges") is not None:
        edges = []
        for row in doc["edges"]:
            i, j, w = row
            try:
                edges.append([id_to_index[int(i)], id_to_index[int(j)], float(w)])
            except KeyError as exc:
                raise SpaceFormatError(f"edge endpoint id {exc} not among points") from exc
    return Space(
        coords=np.asarray(coords) if coords else None,
        weights=weights,
        boundary=boundary,
        metric=metric,
        edges=edges,
        matrix=doc.get("matrix"),
        ids=ids,
        geodesic_like=doc.get("geodesic"),
    )


def load_space(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpaceFormatError(f"not valid JSON: {exc}") from exc
    return space_from_dict(doc)
