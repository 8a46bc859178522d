"""Seedable Monte Carlo generation of complex random states and their extremes.

States are drawn by normalizing 2N independent standard Gaussians (real and
imaginary parts), which makes the intensities exactly uniform on the
(N-1)-simplex.  Large ensembles are cut into fixed-size blocks, each with its
own counter-derived RNG stream, so the output does not depend on how many
workers produce it.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import _check_n

__all__ = [
    "SeedSpec",
    "StateVector",
    "ExtremeRecord",
    "ExtremeSample",
    "sample_state",
    "sample_intensities",
    "sample_intensities_exponential",
    "extremes_of",
    "monte_carlo_ensemble",
    "write_records_csv",
]

#: States per RNG block; part of the determinism contract.
BLOCK_SIZE = 1 << 16

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a stream index for parallel reproducibility."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream index must be nonnegative")

    def generator(self, block=None):
        """Independent generator for this stream (and optional block)."""
        key = (self.stream,) if block is None else (self.stream, block)
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key))
        )


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-d array")
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state is not normalized (norm**2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self):
        return self.amplitudes.size

    @property
    def intensities(self):
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class ExtremeRecord:
    max_intensity: float
    min_intensity: float
    n: int
    source: str = "random"


@dataclass
class ExtremeSample:
    """Column-oriented collection of extreme records for one dimension."""

    n: int
    max: np.ndarray
    min: np.ndarray
    source: str = "random"
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.max)

    def __getitem__(self, i):
        return ExtremeRecord(float(self.max[i]), float(self.min[i]), self.n, self.source)

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def _gaussian_states(rng, n, count):
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    norms = np.sqrt(np.sum(z.real**2 + z.imag**2, axis=1))
    # the all-zero draw has probability zero but is still redrawn
    while np.any(norms == 0.0):
        bad = np.flatnonzero(norms == 0.0)
        z[bad] = rng.standard_normal((bad.size, n)) + 1j * rng.standard_normal((bad.size, n))
        norms[bad] = np.sqrt(np.sum(np.abs(z[bad]) ** 2, axis=1))
    return z / norms[:, None]


def sample_state(n: int, seed: SeedSpec) -> StateVector:
    """Draw one random state of dimension ``n``."""
    n = _check_n(n)
    return StateVector(_gaussian_states(seed.generator(), n, 1)[0])


def sample_intensities(n: int, count: int, seed: SeedSpec) -> np.ndarray:
    """``(count, n)`` intensity vectors from normalized Gaussian states."""
    n = _check_n(n)
    z = _gaussian_states(seed.generator(), n, count)
    return z.real**2 + z.imag**2


def sample_intensities_exponential(n: int, count: int, seed: SeedSpec) -> np.ndarray:
    """Same law as :func:`sample_intensities` via normalized exponential spacings."""
    n = _check_n(n)
    e = seed.generator().standard_exponential((count, n))
    return e / e.sum(axis=1, keepdims=True)


def extremes_of(state: StateVector, source: str = "random") -> ExtremeRecord:
    """Largest and smallest intensity of a state."""
    amps = state.amplitudes
    lo = hi = None
    for z in amps:
        p = z.real * z.real + z.imag * z.imag
        if hi is None or p > hi:
            hi = p
        if lo is None or p < lo:
            lo = p
    return ExtremeRecord(float(hi), float(lo), amps.size, source)


def _block(n, seed, block, count):
    z = _gaussian_states(seed.generator(block), n, count)
    p = z.real**2 + z.imag**2
    return p.max(axis=1), p.min(axis=1)


def monte_carlo_ensemble(n: int, count: int, seed: SeedSpec, workers: int = 1) -> ExtremeSample:
    """Extremes of ``count`` independent random states.

    The ensemble is split into blocks of :data:`BLOCK_SIZE` states; block
    ``b`` draws from the stream ``(seed.stream, b)``.  Results are merged in
    block order, so the output is bit-identical for any ``workers``.
    """
    n = _check_n(n)
    if count < 1:
        raise ValueError("count must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    sizes = [min(BLOCK_SIZE, count - lo) for lo in range(0, count, BLOCK_SIZE)]
    jobs = list(enumerate(sizes))
    if workers == 1:
        parts = [_block(n, seed, b, c) for b, c in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _block(n, seed, *job), jobs))
    return ExtremeSample(
        n=n,
        max=np.concatenate([p[0] for p in parts]),
        min=np.concatenate([p[1] for p in parts]),
    )


def write_records_csv(path_or_file, sample: ExtremeSample, header_lines=()):
    """Dump ``index,max,min`` rows with 17 significant digits."""
    def _write(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "max", "min"])
        for i, (hi, lo) in enumerate(zip(sample.max, sample.min)):
            w.writerow([i, f"{hi:.17g}", f"{lo:.17g}"])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
