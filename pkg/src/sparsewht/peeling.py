"""Iterative peeling decoder over bin observations.

Every detected single-ton is peeled immediately: its contribution is
subtracted from the matching bin of every group and its value is
accumulated into the running spectrum. Accumulation (rather than
insert-once) matters: a multi-ton whose column aliases exactly onto a
valid signature triggers a false peel, but the resulting ghost later
isolates as the same index with the opposite value and the second peel
cancels the first everywhere, so the net-zero entry drops out of the
result. Re-peels of an index holding a nonzero value are still counted
as conflicts for diagnostics. The decoder stops at a fixed point (a full
sweep with no peel) or at the sweep cap.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bin_detect import SINGLE_TON
from .signal_model import SparseSpectrum


@dataclass
class DecodeReport:
    sweeps: int = 0
    peels: int = 0
    conflicts: int = 0
    stalled: bool = False
    residual_energy: float = 0.0
    samples_used: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "sweeps": self.sweeps,
                "peels": self.peels,
                "conflicts": self.conflicts,
                "stalled": self.stalled,
                "residual_energy": self.residual_energy,
                "samples_used": self.samples_used,
            }
        )


@dataclass(frozen=True)
class SupportCheck:
    support_match: bool
    values_match: bool

    def __bool__(self) -> bool:
        return self.support_match


def _per_bin_energy(data: np.ndarray) -> np.ndarray:
    # per-bin mean square over offset rows, comparable to nu^2
    return (data * data).mean(axis=2)


def decode(obs, plan, offsets, detector, max_iters: int | None = None,
           stall_energy: float | None = None, sweep_hook=None):
    """Run peeling until fixed point; returns (spectrum, report).

    ``detector`` maps ``(column, bin_word, group) -> Detection`` and must
    match the offsets the observations were generated with.
    ``stall_energy`` is the residual-energy level above which a stopped
    decode is flagged as stalled (defaults to a float-noise allowance).
    ``max_iters`` caps the sweep count (default 2 C B + 10).
    """
    data = obs.data.copy()
    c_groups, bins, _ = data.shape
    recovered: dict = {}
    report = DecodeReport(samples_used=obs.distinct_samples)
    # only bins touched since their last classification need revisiting
    pending = [set(range(bins)) for _ in range(c_groups)]
    if max_iters is None:
        # aliased multi-tons can re-trigger after partial re-exposure, so
        # the sweep count needs a structural cap, not just a fixed point
        max_iters = 2 * c_groups * bins + 10

    while True:
        if report.sweeps >= max_iters:
            break
        sweep_peels = 0
        for c in range(c_groups):
            todo = sorted(pending[c])
            pending[c].clear()
            for j in todo:
                det = detector(data[c, j], j, c)
                if det.kind != SINGLE_TON:
                    continue
                k_word, value = det.index, det.value
                if recovered.get(k_word, 0.0) != 0.0:
                    report.conflicts += 1
                total = recovered.get(k_word, 0.0) + value
                if total == 0.0:
                    recovered.pop(k_word, None)
                else:
                    recovered[k_word] = total
                report.peels += 1
                sweep_peels += 1
                kw = np.array([k_word], dtype=np.uint64)
                for c2 in range(c_groups):
                    j2 = plan.bin_of(c2, k_word)
                    signs = kernels.sign_matrix(kw, offsets.rows_u64(c2))[0]
                    data[c2, j2] -= value * signs
                    pending[c2].add(j2)
        report.sweeps += 1
        if sweep_hook is not None:
            sweep_hook(data, dict(recovered), report.sweeps)
        if sweep_peels == 0:
            break

    per_bin = _per_bin_energy(data)
    report.residual_energy = float(per_bin.sum())
    if stall_energy is None:
        # without a configured noise allowance, take the median bin as the
        # floor: stuck bins sit far above it, a clean noisy residual does not
        stall_energy = c_groups * bins * max(1e-12, 4.0 * float(np.median(per_bin)))
    report.stalled = report.residual_energy > stall_energy
    return SparseSpectrum(obs.n, recovered), report


def verify_support(recovered: SparseSpectrum, truth: SparseSpectrum, value_tol: float = 1e-9) -> SupportCheck:
    """Set equality of supports; value agreement reported separately."""
    if recovered.n != truth.n:
        raise ValueError("spectra live in different dimensions")
    support_match = recovered.support() == truth.support()
    values_match = support_match and all(
        abs(recovered.entries[k] - truth.entries[k]) <= value_tol for k in truth.entries
    )
    return SupportCheck(support_match, values_match)
