"""Quantum kicked rotor on the torus: Floquet matrix, eigenstates, extremes.

The classical standard map is iterated on the unit torus with the kick
applied before free motion.  Its quantization on an N-dimensional Hilbert
space has the position-basis propagator

    U[n, n'] = (1/N) exp(i N K/(2 pi) cos(2 pi (n' + alpha)/N))
               * sum_m exp(-i pi (m + beta)**2 / N + 2 pi i (m + beta)(n - n')/N)

with Bloch phases ``alpha`` (parity) and ``beta`` (time reversal).
"""
from __future__ import annotations

import csv
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import _check_n
from .sampler import ExtremeSample

__all__ = [
    "RotorParams",
    "UnitaryMatrix",
    "EigenDecomposition",
    "ClassicalState",
    "EnsembleSpec",
    "UnitarityError",
    "DiagonalizationError",
    "classical_step",
    "floquet_entries",
    "build_floquet",
    "shift_operator",
    "diagonalize",
    "ensemble_extremes",
    "lyapunov_probe",
    "write_rotor_csv",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
DEGENERACY_GAP = 1e-8


class UnitarityError(ArithmeticError):
    pass


class DiagonalizationError(ArithmeticError):
    def __init__(self, message, params=None):
        super().__init__(message if params is None else f"{message} [{params}]")
        self.params = params


def _mod1(x):
    r = x % 1.0
    # tiny negative inputs round up to exactly 1.0
    return np.where(r >= 1.0, 0.0, r) if np.ndim(r) else (0.0 if r >= 1.0 else r)


# ---------------------------------------------------------------------------
# classical map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalState:
    q: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "q", float(_mod1(self.q)))
        object.__setattr__(self, "p", float(_mod1(self.p)))


def _step(q, p, kick):
    p = _mod1(p - kick / (2 * math.pi) * np.sin(2 * math.pi * q))
    q = _mod1(q + p)
    return q, p


def classical_step(state: ClassicalState, K: float) -> ClassicalState:
    """One period of the standard map: kick, then free motion, both mod 1."""
    q, p = _step(state.q, state.p, K)
    return ClassicalState(q, p)


def lyapunov_probe(K, steps=10_000, seeds=20, seed=0):
    """Mean finite-time Lyapunov exponent of the standard map.

    Tangent vectors are propagated with the Jacobian
    ``[[1 - K cos(2 pi q), 1], [-K cos(2 pi q), 1]]`` acting on ``(dq, dp)``
    and renormalized every step.  Initial points are uniform on the torus.
    """
    if steps < 1000 or seeds < 10:
        raise ValueError("need steps >= 1000 and seeds >= 10")
    rng = np.random.default_rng(seed)
    q, p = rng.random(seeds), rng.random(seeds)
    dq, dp = np.ones(seeds), np.zeros(seeds)
    acc = np.zeros(seeds)
    for _ in range(steps):
        c = K * np.cos(2 * math.pi * q)
        dp = dp - c * dq
        dq = dq + dp
        norm = np.hypot(dq, dp)
        acc += np.log(norm)
        dq, dp = dq / norm, dp / norm
        q, p = _step(q, p, K)
    return float(np.mean(acc / steps))


# ---------------------------------------------------------------------------
# quantum map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RotorParams:
    """Dimension N, kick strength K and Bloch phases (reduced mod 1)."""

    n: int
    kick: float
    alpha: float = 0.35
    beta: float = 0.17

    def __post_init__(self):
        _check_n(self.n)
        object.__setattr__(self, "alpha", float(_mod1(self.alpha)))
        object.__setattr__(self, "beta", float(_mod1(self.beta)))


@dataclass(frozen=True)
class UnitaryMatrix:
    entries: np.ndarray
    unitarity_residual: float

    @property
    def n(self):
        return self.entries.shape[0]


def floquet_entries(n, kick, alpha, beta):
    """Raw propagator entries for the given phases, without reducing them mod 1."""
    idx = np.arange(n)
    mb = idx + beta
    # V[j, m] = exp(2 pi i (m + beta) j / N); U = V diag(free) V^H diag(kick) / N
    v = np.exp(2j * math.pi * np.outer(idx, mb) / n)
    free = np.exp(-1j * math.pi * mb**2 / n)
    kick_phase = np.exp(1j * n * kick / (2 * math.pi) * np.cos(2 * math.pi * (idx + alpha) / n))
    return ((v * free) @ v.conj().T) * kick_phase[None, :] / n


def unitarity_residual(u):
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def build_floquet(params: RotorParams) -> UnitaryMatrix:
    """Position-basis Floquet matrix with its unitarity residual attached."""
    u = floquet_entries(params.n, params.kick, params.alpha, params.beta)
    res = unitarity_residual(u)
    if res > 1e-12 * params.n:
        raise UnitarityError(f"unitarity residual {res:.3g} exceeds 1e-12*N for {params}")
    return UnitaryMatrix(u, res)


def shift_operator(n, beta=0.0):
    """Twisted translation ``|j> -> |j+1>``; commutes with the free propagator."""
    t = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    t[0, n - 1] = np.exp(2j * math.pi * beta)
    return t


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    max_residual: float
    degenerate_clusters: list

    @property
    def intensities(self):
        """``|v_j(i)|**2``; column ``j`` holds eigenvector ``j``."""
        v = self.eigenvectors
        return v.real**2 + v.imag**2


def _clusters(eigenvalues, gap):
    phases = np.angle(eigenvalues)
    order = np.argsort(phases)
    groups, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if abs(eigenvalues[b] - eigenvalues[a]) < gap:
            current.append(b)
        else:
            groups.append(current)
            current = [b]
    groups.append(current)
    if len(groups) > 1 and abs(eigenvalues[groups[0][0]] - eigenvalues[groups[-1][-1]]) < gap:
        groups[0] = groups[-1] + groups[0]
        groups.pop()
    return [sorted(int(i) for i in g) for g in groups if len(g) > 1]


def diagonalize(u, *, refine_with=None, rng=None, gap=DEGENERACY_GAP) -> EigenDecomposition:
    """Eigendecomposition of a unitary matrix through its complex Schur form.

    For a normal matrix the Schur factor is diagonal and the Schur vectors
    are an orthonormal eigenbasis.  Eigenvalues closer than ``gap`` are
    reported as degenerate clusters; inside each cluster the basis is
    re-diagonalized against ``refine_with`` (a matrix commuting with ``u``)
    or, by default, a random Hermitian matrix projected into the subspace.
    Eigenpairs are returned sorted by eigenphase.
    """
    if isinstance(u, UnitaryMatrix):
        u = u.entries
    u = np.asarray(u, dtype=complex)
    try:
        t, z = scipy.linalg.schur(u, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DiagonalizationError(f"Schur decomposition failed: {exc}") from exc
    lam = np.diag(t).copy()
    order = np.argsort(np.angle(lam), kind="stable")
    lam, z = lam[order], z[:, order]

    clusters = _clusters(lam, gap)
    if clusters:
        if rng is None:
            rng = np.random.default_rng(0)
        for idx in clusters:
            sub = z[:, idx]
            if refine_with is not None:
                h = sub.conj().T @ np.asarray(refine_with) @ sub
                # commuting operator restricted to the subspace is normal
                _, w = scipy.linalg.schur(h, output="complex")
            else:
                a = rng.standard_normal((len(idx), len(idx))) + 1j * rng.standard_normal((len(idx), len(idx)))
                _, w = np.linalg.eigh(a + a.conj().T)
            z[:, idx] = sub @ w
            lam[idx] = np.einsum("ij,ij->j", z[:, idx].conj(), u @ z[:, idx])

    resid = np.linalg.norm(u @ z - z * lam[None, :], axis=0)
    max_res = float(resid.max())
    if max_res > RESIDUAL_TOL or not np.all(np.isfinite(z)):
        raise DiagonalizationError(f"eigen-residual {max_res:.3g} exceeds {RESIDUAL_TOL}")
    return EigenDecomposition(lam, z, max_res, clusters)


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    """Parameter grid: ``k_count`` kicks at the midpoints of ``k_count``
    equal cells of ``(k_min, k_max)``, crossed with the alpha and beta lists.

    Nonzero ``alpha_jitter``/``beta_jitter`` add independent uniform offsets
    in ``[-jitter, jitter]`` to each tuple's phases, drawn from ``seed``.
    """

    n: int = 32
    k_min: float = 13.8
    k_max: float = 14.8
    k_count: int = 940
    alphas: tuple = (0.35,)
    betas: tuple = (0.17,)
    alpha_jitter: float = 0.0
    beta_jitter: float = 0.0
    seed: int = 0
    break_time_reversal: bool = True

    def __post_init__(self):
        _check_n(self.n)
        if self.k_count < 1:
            raise ValueError("k_count must be >= 1")
        if not self.k_max >= self.k_min:
            raise ValueError("k_max must be >= k_min")
        if not self.alphas or not self.betas:
            raise ValueError("need at least one alpha and one beta")
        if self.alpha_jitter < 0 or self.beta_jitter < 0:
            raise ValueError("jitter must be nonnegative")
        if self.break_time_reversal:
            for b in self.betas:
                b = float(_mod1(b))
                d = min(abs(b), abs(b - 0.5), abs(b - 1.0)) - self.beta_jitter
                if d < 0.05:
                    raise ValueError(
                        f"beta={b} is within 0.05 of a time-reversal-symmetric value"
                    )

    def kicks(self):
        width = (self.k_max - self.k_min) / self.k_count
        return [self.k_min + (j + 0.5) * width for j in range(self.k_count)]

    def tuples(self):
        out = []
        jitter = self.alpha_jitter > 0 or self.beta_jitter > 0
        rng = np.random.default_rng(self.seed) if jitter else None
        for k, a, b in itertools.product(self.kicks(), self.alphas, self.betas):
            if rng is not None:
                a += rng.uniform(-self.alpha_jitter, self.alpha_jitter)
                b += rng.uniform(-self.beta_jitter, self.beta_jitter)
            out.append(RotorParams(self.n, k, a, b))
        return out


def _tuple_extremes(params):
    u = build_floquet(params)
    dec = diagonalize(u)
    p = dec.intensities
    return p.max(axis=0), p.min(axis=0)


def ensemble_extremes(spec: EnsembleSpec, workers=1, on_error="raise") -> ExtremeSample:
    """Eigenvector extremes over every parameter tuple of ``spec``.

    Emits N records per tuple in tuple order then eigenphase order.  With
    ``on_error="skip"`` failing tuples are logged and left out.
    """
    if on_error not in ("raise", "skip"):
        raise ValueError("on_error must be 'raise' or 'skip'")
    tuples = spec.tuples()

    def work(params):
        try:
            return _tuple_extremes(params)
        except (DiagonalizationError, UnitarityError) as exc:
            if on_error == "raise":
                raise DiagonalizationError(str(exc), params) from exc
            log.warning("skipping %s: %s", params, exc)
            return None

    if workers == 1:
        results = [work(p) for p in tuples]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, tuples))

    keep = [(p, r) for p, r in zip(tuples, results) if r is not None]
    n = spec.n
    cols = {
        "K": np.repeat([p.kick for p, _ in keep], n),
        "alpha": np.repeat([p.alpha for p, _ in keep], n),
        "beta": np.repeat([p.beta for p, _ in keep], n),
        "eig_index": np.tile(np.arange(n), len(keep)),
    }
    hi = np.concatenate([r[0] for _, r in keep]) if keep else np.empty(0)
    lo = np.concatenate([r[1] for _, r in keep]) if keep else np.empty(0)
    return ExtremeSample(n=n, max=hi, min=lo, source="rotor", extra=cols)


def write_rotor_csv(path_or_file, sample: ExtremeSample, header_lines=()):
    """``K,alpha,beta,eig_index,max,min`` rows, 17 significant digits."""
    x = sample.extra

    def _write(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["K", "alpha", "beta", "eig_index", "max", "min"])
        for row in zip(x["K"], x["alpha"], x["beta"], x["eig_index"], sample.max, sample.min):
            k, a, b, j, hi, lo = row
            w.writerow([f"{k:.17g}", f"{a:.17g}", f"{b:.17g}", int(j), f"{hi:.17g}", f"{lo:.17g}"])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
