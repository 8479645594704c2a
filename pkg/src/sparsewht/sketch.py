"""Hypergraph sketching from cut queries.

The cut function of a hypergraph, viewed as a signal over vertex-subset
indicators m, has a sparse unnormalized Walsh expansion: a DC term
s - sum_e 2^(1-|e|) and, for every edge e and every nonempty
even-cardinality subset S of e, a coefficient -2^(1-|e|) at the index
supported on S (contributions from overlapping edges accumulate). Cut
values are integers and noiseless, so the exact-arithmetic detector with
value snapping recovers the expansion from Theta(K n) queries.

Vertices are numbered 1..n and vertex i maps to index position i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import frontend, gf2, peeling
from .bin_detect import DetectorConfig, make_detector
from .signal_model import SparseSpectrum


@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: tuple  # frozensets of vertex ids in 1..n

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            if not 2 <= len(e):
                raise ValueError("edges need at least two vertices")
            if not all(1 <= v <= self.n for v in e):
                raise ValueError("vertex id outside 1..n")
            if e in seen:
                raise ValueError("duplicate edge")
            seen.add(e)

    @classmethod
    def from_edge_lists(cls, n: int, edges) -> "Hypergraph":
        return cls(n, tuple(frozenset(e) for e in edges))

    def edge_masks(self) -> np.ndarray:
        if self.n > 63:
            raise ValueError("packed cut evaluation limited to n <= 63")
        masks = [sum(1 << (v - 1) for v in e) for e in self.edges]
        return np.array(masks, dtype=np.uint64)

    def save(self, path) -> None:
        """Header ``n=<n>`` then one edge per line as vertex ids."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"n={self.n}\n")
            for e in self.edges:
                fh.write(" ".join(str(v) for v in sorted(e)) + "\n")

    @classmethod
    def load(cls, path) -> "Hypergraph":
        with open(path, "r", encoding="utf-8") as fh:
            n = int(fh.readline().split("=")[1])
            edges = [frozenset(map(int, line.split())) for line in fh if line.strip()]
        return cls.from_edge_lists(n, edges)


def cut_value(h: Hypergraph, m) -> int:
    """Number of edges with vertices on both sides of the partition m."""
    word = m if isinstance(m, (int, np.integer)) else m.word
    return int(cut_values(h, np.array([word], dtype=np.uint64))[0])


def cut_values(h: Hypergraph, m_words: np.ndarray) -> np.ndarray:
    m_words = np.asarray(m_words, dtype=np.uint64)
    out = np.zeros(len(m_words), dtype=np.int64)
    for mask in h.edge_masks():
        inter = m_words & mask
        out += (inter != 0) & (inter != mask)
    return out


def analytic_spectrum(h: Hypergraph) -> SparseSpectrum:
    """Exact unnormalized Walsh expansion of the cut function."""
    entries: dict = {}
    dc = 0.0
    for e in h.edges:
        weight = 2.0 ** (1 - len(e))
        dc += 1.0 - weight
        verts = sorted(e)
        for size in range(2, len(e) + 1, 2):
            for subset in combinations(verts, size):
                word = sum(1 << (v - 1) for v in subset)
                entries[word] = entries.get(word, 0.0) - weight
    if dc != 0.0:
        entries[0] = entries.get(0, 0.0) + dc
    return SparseSpectrum(h.n, entries)


def random_disjoint_hypergraph(n: int, s: int, rng, min_size: int = 2, max_size: int = 6) -> Hypergraph:
    """s vertex-disjoint edges with sizes uniform in [min_size, max_size]."""
    if s * min_size > n:
        raise ValueError("edges cannot fit disjointly")
    while True:
        sizes = rng.integers(min_size, max_size + 1, size=s)
        if sizes.sum() <= n:
            break
    verts = list(rng.permutation(np.arange(1, n + 1)))
    edges = []
    at = 0
    for size in sizes:
        edges.append(frozenset(int(v) for v in verts[at : at + size]))
        at += size
    return Hypergraph(n, tuple(edges))


class CutQueryAccess:
    """Sample access backed by a cut oracle, one cached query per position."""

    def __init__(self, source, n: int | None = None):
        if isinstance(source, Hypergraph):
            self.n = source.n
            self._oracle = lambda words: cut_values(source, words)
        else:
            if n is None:
                raise ValueError("n is required for a callable oracle")
            self.n = n
            self._oracle = source
        self.sigma = 0.0
        self._cache: dict = {}

    def take(self, positions) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.uint64)
        missing = [int(p) for p in np.unique(positions) if int(p) not in self._cache]
        if missing:
            fresh = np.asarray(self._oracle(np.array(missing, dtype=np.uint64)), dtype=np.float64)
            self._cache.update(zip(missing, fresh))
        return np.array([self._cache[int(p)] for p in positions], dtype=np.float64)

    def query(self, m) -> float:
        word = m if isinstance(m, (int, np.integer)) else m.word
        return float(self.take(np.array([word], dtype=np.uint64))[0])

    @property
    def samples_queried(self) -> int:
        return len(self._cache)


@dataclass
class SketchResult:
    spectrum: SparseSpectrum  # unnormalized convention
    edges: list | None
    queries: int
    report: peeling.DecodeReport
    partial: bool


def _components(supports):
    """Group vertex-support sets that share vertices (union-find)."""
    parent = {}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for sup in supports:
        for v in sup:
            parent.setdefault(v, v)
        root = find(next(iter(sup)))
        for v in sup:
            parent[find(v)] = root
    groups: dict = {}
    for sup in supports:
        groups.setdefault(find(next(iter(sup))), []).append(sup)
    return list(groups.values())


def reconstruct_edges(spectrum: SparseSpectrum, tol: float = 1e-9):
    """Rebuild a vertex-disjoint edge list from the cut spectrum.

    Each connected component of the recovered supports must consist of
    exactly the even-cardinality subsets of one vertex set, all carrying
    -2^(1-|e|); the edge is that union. Returns None when any component
    fails the pattern or the DC term is inconsistent.
    """
    supports = []
    dc = 0.0
    for word, value in spectrum.entries.items():
        if word == 0:
            dc = value
            continue
        supports.append(frozenset(t + 1 for t in range(spectrum.n) if (word >> t) & 1))
    if not supports:
        return [] if abs(dc) <= tol else None
    edges = []
    by_support = {frozenset(t + 1 for t in range(spectrum.n) if (w >> t) & 1): v
                  for w, v in spectrum.entries.items() if w != 0}
    for component in _components(supports):
        union = frozenset().union(*component)
        size = len(union)
        expected_count = (1 << (size - 1)) - 1
        expected_value = -(2.0 ** (1 - size))
        if len(component) != expected_count:
            return None
        for sup in component:
            if len(sup) % 2 or abs(by_support[sup] - expected_value) > tol:
                return None
        edges.append(union)
    expected_dc = len(edges) - sum(2.0 ** (1 - len(e)) for e in edges)
    if abs(dc - expected_dc) > tol:
        return None
    return sorted(edges, key=sorted)


def sketch_recover(source, n: int | None = None, sparsity_budget: int = 1, seed: int = 0,
                   coeff_resolution: float | None = None, c_groups: int = 3) -> SketchResult:
    """Recover the cut spectrum (and, when possible, the edges) by the
    sparse-transform pipeline over the noiseless cut oracle.

    ``sparsity_budget`` must dominate the true spectral sparsity (at most
    s 2^(d-1) for s edges of size at most d); ``coeff_resolution`` snaps
    recovered coefficients to multiples of it (2^(1-d) for cut spectra).
    Structured supports are not uniformly spread, so the subsampling
    matrices here are drawn random full-column-rank.
    """
    access = CutQueryAccess(source, n)
    n = access.n
    rng = np.random.default_rng(seed)
    b = max(1, math.ceil(math.log2(max(2, sparsity_budget))))
    if b >= n:
        raise ValueError("sparsity budget needs b < n")
    mats = tuple(gf2.random_full_column_rank(n, b, rng) for _ in range(c_groups))
    plan = frontend.SubsamplingPlan(n, b, c_groups, mats, "random")
    offsets = frontend.build_offsets("noiseless", plan)
    obs = frontend.observe(access, plan, offsets)
    root_n = math.sqrt(2.0**n)
    cfg = DetectorConfig(
        zero_tol=1e-9 * root_n,
        ratio_tol=1e-6,
        constellation=False,
        value_grid=None if coeff_resolution is None else coeff_resolution * root_n,
    )
    detector = make_detector(plan, offsets, cfg)
    machine, report = peeling.decode(obs, plan, offsets, detector,
                                     stall_energy=c_groups * plan.bins * cfg.zero_tol**2)
    entries = {k: v / root_n for k, v in machine.entries.items()}
    if coeff_resolution is not None:
        entries = {k: round(v / coeff_resolution) * coeff_resolution for k, v in entries.items()}
    spectrum = SparseSpectrum(n, entries)
    partial = report.stalled
    edges = None if partial else reconstruct_edges(spectrum)
    return SketchResult(spectrum, edges, access.samples_queried, report, partial)
