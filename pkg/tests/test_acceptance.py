"""Acceptance criteria, one group per criterion.

Every group is tagged with ``@pytest.mark.criterion(k)``; ``conftest.py``
prints one ``ACCEPTANCE criterion k: PASS|FAIL`` line per group at the end of
the run.  Seeds are fixed in advance and never tuned.
"""
import math

import numpy as np
import pytest

from evstates import cli, core, rotor, stats
from evstates.sampler import SeedSpec, monte_carlo_ensemble

SEED = 12345
MC_COUNT = 1_000_000


@pytest.fixture(scope="module")
def ensembles():
    return {n: monte_carlo_ensemble(n, MC_COUNT, SeedSpec(SEED, n), workers=4) for n in (2, 3, 8, 32)}


# 1. exact CDFs against Monte Carlo ------------------------------------------

@pytest.mark.criterion(1)
@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3, 8, 32])
def test_c1_max_and_min_cdf(ensembles, n):
    rec = ensembles[n]
    ks_max = stats.ks_distance(rec.max, lambda t: core.max_cdf(t, n, atol=1e-10))
    ks_min = stats.ks_distance(rec.min, lambda s: core.min_cdf(s, n))
    print(f"N={n} ks_max={ks_max.distance:.3e} ks_min={ks_min.distance:.3e} critical={ks_max.critical_1pct:.3e}")
    assert ks_max.critical_1pct == pytest.approx(1.63e-3, abs=1e-15)
    assert ks_max.distance <= 1.63e-3
    assert ks_min.distance <= 1.63e-3


# 2. moments -----------------------------------------------------------------

@pytest.mark.criterion(2)
@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 32])
def test_c2_monte_carlo_means(ensembles, n):
    rec = ensembles[n]
    se_max = rec.max.std(ddof=1) / math.sqrt(len(rec))
    se_min = rec.min.std(ddof=1) / math.sqrt(len(rec))
    assert core.mean_max(n) == pytest.approx(core.harmonic_number(n, 1) / n, rel=1e-15)
    assert abs(rec.max.mean() - core.mean_max(n)) <= 4 * se_max
    assert abs(rec.min.mean() - 1.0 / n**2) <= 4 * se_min


@pytest.mark.criterion(2)
@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3, 8, 32, 128])
def test_c2_quadrature_mean(n):
    assert abs(core.integrate_max_pdf(n, power=1) - core.harmonic_number(n, 1) / n) <= 1e-8


# 3. algebraic identities ----------------------------------------------------

@pytest.mark.criterion(3)
def test_c3_inclusion_exclusion():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 129))
        t = 1.0 / n + rng.random() * (1.0 - 1.0 / n)
        worst = max(worst, abs(core.inclusion_exclusion_cdf(t, n) - core.max_cdf(t, n)))
    print(f"max |inclusion-exclusion - resummed| = {worst:.2e}")
    assert worst <= 1e-13


@pytest.mark.criterion(3)
def test_c3_alternating_form():
    rng = np.random.default_rng(SEED + 1)
    for n in range(1, 31):
        for t in rng.random(20):
            assert abs(core.max_cdf_alternating(t, n) - core.max_cdf(t, n)) <= 1e-9


@pytest.mark.criterion(3)
def test_c3_reflection():
    rng = np.random.default_rng(SEED + 2)
    for n in range(2, 129):
        for u in rng.random(10):
            t = 1.0 / n + u * (1.0 / (n - 1) - 1.0 / n)
            assert abs(core.max_cdf(t, n) - (1.0 - core.min_cdf(2.0 / n - t, n))) <= 1e-12


# 4. Gumbel convergence ------------------------------------------------------

@pytest.mark.criterion(4)
def test_c4_gumbel_convergence():
    ns = [8, 16, 32, 64, 128]
    d = [stats.gumbel_density_distance(n) for n in ns]
    print("D(N) =", dict(zip(ns, np.round(d, 4))))
    assert all(a > b for a, b in zip(d, d[1:]))
    assert stats.gumbel_density_distance(100) > 0.01


# 5. Weibull limit -----------------------------------------------------------

@pytest.mark.criterion(5)
def test_c5_weibull_convergence():
    d = [stats.weibull_cdf_distance(n) for n in (8, 32, 128)]
    print("Weibull gaps:", d)
    assert d[0] > d[1] > d[2]


# 6. rotor validity ----------------------------------------------------------

@pytest.mark.criterion(6)
@pytest.mark.parametrize("n", [8, 32, 64])
def test_c6_rotor_validity(n):
    rng = np.random.default_rng(SEED + n)
    for _ in range(20):
        params = rotor.RotorParams(n, rng.uniform(5, 30), rng.uniform(0, 1), rng.uniform(0.05, 0.45))
        u = rotor.build_floquet(params)
        assert u.unitarity_residual <= 1e-12 * n
        d = rotor.diagonalize(u)
        assert d.max_residual <= 1e-10
        assert np.max(np.abs(d.intensities.sum(axis=1) - 1.0)) <= 1e-10


# 7. kicked-rotor eigenvector extremes ---------------------------------------

@pytest.fixture(scope="module")
def rotor_records():
    return rotor.ensemble_extremes(rotor.EnsembleSpec(), workers=4)


@pytest.mark.criterion(7)
@pytest.mark.slow
def test_c7_rotor_max(rotor_records):
    assert len(rotor_records) == 30_080
    ks = stats.ks_distance(rotor_records.max, lambda t: core.max_cdf(t, 32, atol=1e-10))
    print(f"rotor max: ks={ks.distance:.4g} critical={ks.critical_1pct:.4g} ratio={ks.distance / ks.critical_1pct:.2f}")
    assert ks.distance <= 1.5 * ks.critical_1pct


@pytest.mark.criterion(7)
@pytest.mark.slow
def test_c7_rotor_min(rotor_records):
    ks = stats.ks_distance(rotor_records.min, lambda s: core.min_cdf(s, 32))
    print(f"rotor min: ks={ks.distance:.4g} critical={ks.critical_1pct:.4g} ratio={ks.distance / ks.critical_1pct:.2f}")
    assert ks.distance <= 1.5 * ks.critical_1pct


# 8. determinism -------------------------------------------------------------

@pytest.mark.criterion(8)
def test_c8_cli_determinism(tmp_path):
    rec = str(tmp_path / "records.csv")
    commands = [
        ["exact", "--n", "32", "--which", "max"],
        ["exact", "--n", "32", "--which", "gumbel"],
        ["exact", "--n", "32", "--which", "weibull"],
        ["moments", "--n", "2,3,8,32,128"],
        ["sample", "--n", "32", "--count", "200000", "--seed", str(SEED), "--workers", "4"],
        ["rotor", "--k-count", "20", "--alpha-jitter", "0.2", "--seed", str(SEED), "--workers", "4"],
        ["compare", "--records", rec, "--n", "32"],
    ]
    assert cli.main(["sample", "--n", "32", "--count", "50000", "--seed", str(SEED), "--out", rec]) == 0
    for argv in commands:
        out = tmp_path / f"{argv[0]}.csv"
        assert cli.main([*argv, "--out", str(out)]) == 0
        first = out.read_bytes()
        assert cli.main([*argv, "--out", str(out)]) == 0
        assert out.read_bytes() == first, argv
