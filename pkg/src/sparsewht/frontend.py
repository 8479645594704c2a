"""Observation generator: subsampling plans, offset plans, bin observations.

A plan holds C subsampling matrices M_c (n x b, full column rank); the
hash of coefficient k in group c is j = M_c^T k. Observations are built
by gathering the B = 2^b samples u[M_c l + d] for each offset row d,
applying a B-point unnormalized butterfly and scaling by sqrt(N)/B, which
yields U_{c,p}[j] = sum_{M_c^T k = j} X[k] (-1)^<d_{c,p}, k> plus noise of
variance N sigma^2 / B per entry.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2, kernels

# minimum redundancy B/K that lets peeling finish, by group count
MIN_REDUNDANCY = {2: 1.0000, 3: 0.4073, 4: 0.3237, 5: 0.2850, 6: 0.2616, 8: 0.2336}

REGIMES = ("window", "cyclic-drop", "common-prefix-6", "common-prefix-8", "common-prefix-dense")
VARIANTS = ("noiseless", "near-linear", "nso", "so")


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class SubsamplingPlan:
    n: int
    b: int
    c_groups: int
    matrices: tuple  # C BitMatrix values, each n x b
    regime: str
    _coset_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.matrices) != self.c_groups:
            raise PlanError("group count does not match matrices")
        for m in self.matrices:
            if m.rows != self.n or m.cols != self.b:
                raise PlanError("matrix shape mismatch")
            if gf2.rank_transpose(m) != self.b:
                raise PlanError("subsampling matrix lacks full column rank")

    @property
    def bins(self) -> int:
        return 1 << self.b

    def bin_of(self, c: int, k_word: int) -> int:
        return self.matrices[c].transpose_apply_word(k_word)

    def bins_of_many(self, c: int, k_words: np.ndarray) -> np.ndarray:
        cols = self.matrices[c].col_words_u64()
        par = kernels.parity_words(np.asarray(k_words, dtype=np.uint64)[:, None] & cols[None, :])
        weights = np.uint64(1) << np.arange(self.b, dtype=np.uint64)
        return (par.astype(np.uint64) * weights).sum(axis=1)

    def coset(self, c: int, j_word: int) -> np.ndarray:
        """All k hashing to bin j in group c, as packed uint64 words."""
        span, units = self._coset_parts(c)
        part = np.uint64(0)
        t = 0
        j = j_word
        while j:
            if j & 1:
                part ^= units[t]
            j >>= 1
            t += 1
        return span ^ part

    def _coset_parts(self, c: int):
        if c not in self._coset_cache:
            if self.n - self.b > 24:
                raise PlanError("coset enumeration limited to n - b <= 24")
            m = self.matrices[c]
            _, basis = gf2.solve_affine(m, gf2.BitIndex(0, self.b))
            span = gf2.span_words([v.word for v in basis])
            units = np.zeros(self.b, dtype=np.uint64)
            for t in range(self.b):
                particular, _ = gf2.solve_affine(m, gf2.BitIndex(1 << t, self.b))
                units[t] = particular.word
            self._coset_cache[c] = (span, units)
        return self._coset_cache[c]

    def sample_positions(self, c: int) -> np.ndarray:
        """Packed words M_c l for l in F_2^b, indexed by the word of l."""
        cols = self.matrices[c].col_words
        out = np.zeros(self.bins, dtype=np.uint64)
        for t, col in enumerate(cols):
            half = 1 << t
            out[half : 2 * half] = out[:half] ^ np.uint64(col)
        return out


def _window_positions(n: int, b: int, c_groups: int, spread: bool) -> list:
    if spread:
        # windows overlap when C*b > n; spread starts evenly and keep
        # every bit position covered by at least one group
        starts = [round((n - b) * c / (c_groups - 1)) for c in range(c_groups)] if c_groups > 1 else [0]
    else:
        starts = [c * b for c in range(c_groups)]
    return [list(range(s, s + b)) for s in starts]


def _segment_ranges(n: int, count: int, prefix: int) -> list:
    """count equal segments followed by one prefix segment of the top bits."""
    seg = (n - prefix) // count
    ranges = [list(range(i * seg, (i + 1) * seg)) for i in range(count)]
    ranges.append(list(range(count * seg, n)))
    return ranges


def _prefix_size(n: int, n_segments: int, kept: int, b_req: int) -> int:
    """Smallest prefix length making segments equal and b >= b_req.

    With p prefix bits, each of the n_segments segments has
    (n - p) / n_segments bits and each hash keeps ``kept`` of them plus
    the prefix, so b = kept (n - p) / n_segments + p grows with p.
    """
    for p in range(n % n_segments, n - n_segments + 1, n_segments):
        seg = (n - p) // n_segments
        if seg < 1:
            break
        if kept * seg + p >= b_req:
            return p
    raise PlanError(f"no common-prefix layout fits n={n}, b_req={b_req}")


def _common_prefix_plan(n: int, b_req: int, groups_kept: list, n_segments: int, regime: str) -> SubsamplingPlan:
    kept = len(groups_kept[0])
    prefix = _prefix_size(n, n_segments, kept, b_req)
    ranges = _segment_ranges(n, n_segments, prefix)
    matrices = []
    for kept_segs in groups_kept:
        positions = []
        for s in kept_segs:
            positions.extend(ranges[s - 1])
        positions.extend(ranges[n_segments])
        matrices.append(gf2.selection_matrix(n, positions))
    b = kept * ((n - prefix) // n_segments) + prefix
    return SubsamplingPlan(n, b, len(groups_kept), tuple(matrices), regime)


# which equal-size segments each group's hash keeps (1-based), before the
# shared prefix segment that every hash keeps
_KEPT_6 = [(2, 3), (1, 3), (1, 2), (5, 6), (4, 6), (4, 5)]
_KEPT_8 = [(2, 3, 4), (1, 3, 4), (1, 2, 4), (1, 2, 3), (6, 7, 8), (5, 7, 8), (5, 6, 8), (5, 6, 7)]


def build_plan(n: int, k: int, regime: str = "auto", profile: str = "theory",
               c_groups: int | None = None, b: int | None = None) -> SubsamplingPlan:
    """Construct the subsampling plan for sparsity K at signal size 2^n.

    Auto mode selects the construction from delta = log K / log N;
    ``profile='benchmark'`` forces the 3-group window design with
    b = ceil(log2 K) regardless of delta. Passing ``b`` overrides the
    bin-count sizing rule of the window designs.
    """
    if not 1 <= k <= (1 << n):
        raise PlanError(f"need 1 <= K <= 2^n, got K={k}, n={n}")
    delta = math.log2(max(k, 2)) / n

    if profile == "benchmark":
        c = c_groups or 3
        b = b or max(1, math.ceil(math.log2(k)))
        if b >= n:
            raise PlanError("benchmark profile needs b < n")
        spread = c * b > n
        mats = tuple(gf2.selection_matrix(n, pos) for pos in _window_positions(n, b, c, spread))
        return SubsamplingPlan(n, b, c, mats, "window")
    if profile != "theory":
        raise PlanError(f"unknown profile {profile!r}")

    if regime == "auto":
        if delta <= 1 / 3:
            regime = "window"
        elif delta <= 0.73:
            regime = "common-prefix-6"
        elif delta <= 7 / 8:
            regime = "common-prefix-8"
        elif delta <= 0.99:
            regime = "common-prefix-dense"
        else:
            raise PlanError(f"auto mode covers delta <= 0.99, got {delta:.3f}")

    if regime == "window":
        c = c_groups or 3
        b = b or max(1, math.ceil(math.log2(MIN_REDUNDANCY.get(c, MIN_REDUNDANCY[3]) * k)))
        if c * b > n:
            raise PlanError(f"window regime needs C*b <= n (C={c}, b={b}, n={n})")
        mats = tuple(gf2.selection_matrix(n, pos) for pos in _window_positions(n, b, c, spread=False))
        return SubsamplingPlan(n, b, c, mats, "window")

    if regime == "cyclic-drop":
        c = c_groups or 3
        if n % c:
            raise PlanError(f"cyclic-drop needs C | n (C={c}, n={n})")
        t = n // c
        mats = []
        for drop in range(c):
            positions = [p for seg in range(c) if seg != drop for p in range(seg * t, (seg + 1) * t)]
            mats.append(gf2.selection_matrix(n, positions))
        return SubsamplingPlan(n, (c - 1) * t, c, tuple(mats), "cyclic-drop")

    if regime == "common-prefix-6":
        b_req = max(1, math.ceil(math.log2(MIN_REDUNDANCY[6] * k)))
        return _common_prefix_plan(n, b_req, [list(g) for g in _KEPT_6], 6, regime)

    if regime == "common-prefix-8":
        b_req = max(1, math.ceil(math.log2(MIN_REDUNDANCY[8] * k)))
        return _common_prefix_plan(n, b_req, [list(g) for g in _KEPT_8], 8, regime)

    if regime == "common-prefix-dense":
        b_req = max(1, math.ceil(math.log2(MIN_REDUNDANCY[8] * k)))
        kept = [[s for s in range(1, 9) if s != drop] for drop in range(1, 9)]
        return _common_prefix_plan(n, b_req, kept, 8, regime)

    raise PlanError(f"unknown regime {regime!r}; expected one of {REGIMES}")


@dataclass(frozen=True)
class OffsetPlan:
    """Per-group offset matrices D_c, stored as packed row words.

    ``layout`` names row ranges by role; ``nominal_rows`` is the row
    count entering the sample-cost formulas (P1*P2 for the modulated
    variant, the actual row count otherwise).
    """

    variant: str
    n: int
    groups: tuple  # per group, uint64 array of offset row words
    layout: dict
    nominal_rows: int
    code: object = None

    @property
    def rows(self) -> int:
        return len(self.groups[0])

    def rows_u64(self, c: int) -> np.ndarray:
        return self.groups[c]


def _random_words(n: int, count: int, rng) -> np.ndarray:
    return rng.integers(0, 1 << n, size=count, dtype=np.int64).astype(np.uint64)


def build_offsets(variant: str, plan: SubsamplingPlan, p1: int | None = None, p2: int | None = None,
                  p3: int | None = None, code=None, rng=None) -> OffsetPlan:
    """Construct the offset rows for one detector variant.

    noiseless: n+1 rows, the zero reference then the n unit rows.
    near-linear: p1 fully random rows (default 3n).
    nso: p1 random base rows (default 2n) each followed later by its n
        modulated rows d_p xor e_q, ordered [bases..., block_1, block_2, ...].
    so: p1 random rows, p2 zero rows, then the code generator rows.
    """
    n = plan.n
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "noiseless":
        words = np.zeros(n + 1, dtype=np.uint64)
        words[1:] = np.uint64(1) << np.arange(n, dtype=np.uint64)
        groups = tuple(words.copy() for _ in range(plan.c_groups))
        layout = {"reference": 0, "units": (1, n + 1)}
        return OffsetPlan(variant, n, groups, layout, n + 1)

    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    if variant == "near-linear":
        p1 = p1 or 3 * n
        groups = tuple(_random_words(n, p1, rng) for _ in range(plan.c_groups))
        layout = {"random": (0, p1)}
        return OffsetPlan(variant, n, groups, layout, p1)

    if variant == "nso":
        p1 = p1 or 2 * n
        p2 = n if p2 is None else p2
        if p2 != n:
            raise ValueError(f"nso requires P2 = n modulated rows per base, got {p2}")
        groups = []
        for _ in range(plan.c_groups):
            base = _random_words(n, p1, rng)
            units = np.uint64(1) << np.arange(n, dtype=np.uint64)
            blocks = base[:, None] ^ units[None, :]
            groups.append(np.concatenate([base, blocks.reshape(-1)]))
        layout = {"base": (0, p1), "p1": p1, "p2": p2}
        return OffsetPlan(variant, n, tuple(groups), layout, p1 * p2)

    # so
    if code is None:
        raise ValueError("so offsets require a linear code")
    if code.n_info != n:
        raise ValueError(f"code has {code.n_info} information bits, plan needs {n}")
    p1 = p1 or n
    p2 = n if p2 is None else p2
    p3 = code.n_block if p3 is None else p3
    if p3 != code.n_block:
        raise ValueError("P3 must equal the code block length")
    coded = np.array(code.generator_rows(), dtype=np.uint64)
    groups = []
    for _ in range(plan.c_groups):
        rand = _random_words(n, p1, rng)
        groups.append(np.concatenate([rand, np.zeros(p2, dtype=np.uint64), coded]))
    layout = {"random": (0, p1), "zero": (p1, p1 + p2), "coded": (p1 + p2, p1 + p2 + p3)}
    return OffsetPlan("so", n, tuple(groups), layout, p1 + p2 + p3, code=code)


@dataclass
class BinObservations:
    """The C x B x P tensor of bin observation values U_{c,p}[j]."""

    data: np.ndarray
    n: int
    b: int
    variant: str
    nominal_samples: int
    distinct_samples: int

    @property
    def c_groups(self) -> int:
        return self.data.shape[0]

    @property
    def rows(self) -> int:
        return self.data.shape[2]

    def save(self, path) -> None:
        """Raw little-endian float64 in (c, j, p) order plus a JSON sidecar."""
        path = str(path)
        self.data.astype("<f8").tofile(path)
        header = {"n": self.n, "b": self.b, "C": self.c_groups, "P": self.rows, "variant": self.variant}
        with open(path + ".json", "w", encoding="utf-8") as fh:
            json.dump(header, fh)

    @classmethod
    def load(cls, path) -> "BinObservations":
        path = str(path)
        with open(path + ".json", "r", encoding="utf-8") as fh:
            header = json.load(fh)
        flat = np.fromfile(path, dtype="<f8")
        data = flat.reshape(header["C"], 1 << header["b"], header["P"]).astype(np.float64)
        return cls(data, header["n"], header["b"], header["variant"], 0, 0)


def observe(access, plan: SubsamplingPlan, offsets: OffsetPlan) -> BinObservations:
    """Compute all bin observations via small WHTs (one per offset row)."""
    if offsets.n != plan.n:
        raise PlanError("plan and offsets disagree on n")
    if len(offsets.groups) != plan.c_groups:
        raise PlanError("plan and offsets disagree on group count")
    size = 1 << plan.n
    bins = plan.bins
    scale = math.sqrt(size) / bins
    before = access.samples_queried
    data = np.empty((plan.c_groups, bins, offsets.rows), dtype=np.float64)
    for c in range(plan.c_groups):
        base = plan.sample_positions(c)
        rows = offsets.rows_u64(c)
        positions = rows[:, None] ^ base[None, :]
        samples = access.take(positions.reshape(-1)).reshape(len(rows), bins)
        kernels.fwht_rows_inplace(samples)
        samples *= scale
        data[c] = samples.T
    distinct = access.samples_queried - before
    nominal = plan.c_groups * bins * offsets.nominal_rows
    return BinObservations(data, plan.n, plan.b, offsets.variant, nominal, distinct)
