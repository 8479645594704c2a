"""Random sparse-spectrum ensemble and noisy query access to time samples.

The ensemble draws K distinct support indices uniformly (exact-K
sparsity; independent draws could collide and silently reduce sparsity)
and, in the default constellation mode, coefficient values +/-rho with
equal probability. Noise attaches to the sample, not the query: a
position read twice returns one consistent realization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fwht import synthesize_many

_DENSE_NOISE_LIMIT = 24  # full-array noise cache; 2^24 doubles = 128 MiB


@dataclass
class SparseSpectrum:
    """Map from packed index word to nonzero coefficient value."""

    n: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        limit = 1 << self.n
        clean = {}
        for k, v in self.entries.items():
            k = int(k)
            if not 0 <= k < limit:
                raise ValueError(f"index {k} out of range for n={self.n}")
            if v != 0.0:
                clean[k] = float(v)
        self.entries = clean

    @property
    def sparsity(self) -> int:
        return len(self.entries)

    def support(self) -> set:
        return set(self.entries)

    def as_arrays(self):
        if not self.entries:
            return np.zeros(0, dtype=np.uint64), np.zeros(0, dtype=np.float64)
        words = np.fromiter(self.entries.keys(), dtype=np.uint64, count=len(self.entries))
        values = np.fromiter(self.entries.values(), dtype=np.float64, count=len(self.entries))
        return words, values

    def save(self, path) -> None:
        """Text format: header ``n=<n> K=<K>``, then one
        ``<bitstring> <value>`` line per entry (bitstring MSB first)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"n={self.n} K={self.sparsity}\n")
            for k in sorted(self.entries):
                fh.write(f"{format(k, f'0{self.n}b')} {self.entries[k]!r}\n")

    @classmethod
    def load(cls, path) -> "SparseSpectrum":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            meta = dict(item.split("=") for item in header)
            n = int(meta["n"])
            entries = {}
            for line in fh:
                if not line.strip():
                    continue
                bits, value = line.split()
                entries[int(bits, 2)] = float(value)
        spec = cls(n, entries)
        if "K" in meta and spec.sparsity != int(meta["K"]):
            raise ValueError("entry count does not match header K")
        return spec


def draw_spectrum(n: int, k: int, rho: float, rng, constellation: bool = True) -> SparseSpectrum:
    """K distinct uniform support indices with +/-rho (or continuous) values."""
    size = 1 << n
    if not 0 <= k <= size:
        raise ValueError(f"K={k} exceeds 2^n={size}")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if n <= 25:
        support = rng.choice(size, size=k, replace=False)
    else:
        chosen = set()
        while len(chosen) < k:
            draw = rng.integers(0, size, size=k - len(chosen), dtype=np.int64)
            chosen.update(int(x) for x in draw)
        support = np.fromiter(chosen, dtype=np.int64, count=k)
    if constellation:
        values = rho * (1.0 - 2.0 * rng.integers(0, 2, size=k))
    else:
        # continuous-amplitude mode: magnitude uniform in [rho/2, 3 rho/2]
        values = rng.uniform(rho / 2, 3 * rho / 2, size=k) * (1.0 - 2.0 * rng.integers(0, 2, size=k))
    return SparseSpectrum(n, dict(zip((int(s) for s in support), values)))


def sigma_for_snr(rho: float, k: int, total: int, snr_linear: float) -> float:
    """Noise sigma so that rho^2 / (sigma^2 N / K) equals the target SNR."""
    if min(rho, k, total, snr_linear) <= 0:
        raise ValueError("all arguments must be positive")
    return rho * math.sqrt(k / (total * snr_linear))


def snr_from_db(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


class NoisyAccess:
    """Noise-corrupted sample access u[m] = x[m] + w[m], w ~ N(0, sigma^2).

    The full noise realization is drawn lazily from the seeded generator,
    so repeated queries of one position agree and results do not depend
    on query order. Single-writer: concurrent experiments should use
    independent instances with independent seeds.
    """

    def __init__(self, spectrum: SparseSpectrum, sigma: float, rng):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if sigma > 0 and spectrum.n > _DENSE_NOISE_LIMIT:
            raise ValueError(f"noise cache supports n <= {_DENSE_NOISE_LIMIT}")
        self.spectrum = spectrum
        self.sigma = float(sigma)
        self._rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self._noise = None
        self._queried = np.zeros(1 << spectrum.n, dtype=bool) if spectrum.n <= _DENSE_NOISE_LIMIT else None
        self._queried_set = set() if self._queried is None else None

    @property
    def n(self) -> int:
        return self.spectrum.n

    def _noise_array(self) -> np.ndarray:
        if self._noise is None:
            self._noise = self.sigma * self._rng.standard_normal(1 << self.n)
        return self._noise

    def prepare(self) -> None:
        """Materialize the noise realization up front (keeps it out of
        timed observation/decoding sections)."""
        if self.sigma > 0:
            self._noise_array()

    def take(self, positions) -> np.ndarray:
        """Vectorized sample reads at packed index words."""
        positions = np.asarray(positions, dtype=np.uint64)
        values = synthesize_many(self.spectrum, positions)
        if self.sigma > 0:
            values = values + self._noise_array()[positions.astype(np.int64)]
        if self._queried is not None:
            self._queried[positions.astype(np.int64)] = True
        else:
            self._queried_set.update(int(p) for p in positions)
        return values

    def query(self, m) -> float:
        word = m if isinstance(m, (int, np.integer)) else m.word
        return float(self.take(np.array([word], dtype=np.uint64))[0])

    @property
    def samples_queried(self) -> int:
        """Distinct positions read so far (shared samples counted once)."""
        if self._queried is not None:
            return int(np.count_nonzero(self._queried))
        return len(self._queried_set)
