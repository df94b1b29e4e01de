import math

import numpy as np
import pytest

from planar_symplectic.errors import DomainError
from planar_symplectic.finite_kernels import RadialPotential
from planar_symplectic.sampler import (McmcConfig, batch_means_error, log_weight,
                                       run_mcmc, summarize_samples, write_samples_csv)


def test_log_weight_single_particle():
    pot = RadialPotential.gaussian(1)
    x, y = 0.3, 0.8
    assert log_weight(pot, [x + 1j * y]) == pytest.approx(math.log(4 * y * y) - (x * x + y * y))
    assert log_weight(pot, [0.5 + 0j]) == -math.inf


def test_log_weight_symmetries(rng):
    pot = RadialPotential.mittag_leffler(0.5, 0.3, 5)
    pts = rng.uniform(-1, 1, 5) + 1j * rng.uniform(-1, 1, 5)
    base = log_weight(pot, pts)
    assert log_weight(pot, pts[::-1]) == pytest.approx(base, abs=1e-12)
    flip = pts.copy()
    flip[2] = np.conj(flip[2])
    assert log_weight(pot, flip) == pytest.approx(base, abs=1e-12)
    assert log_weight(pot, np.concatenate([pts[:4], pts[:1]])) == -math.inf


def test_config_validation():
    with pytest.raises(DomainError):
        McmcConfig(10, 10, 0.1)
    with pytest.raises(DomainError):
        McmcConfig(10, 2, 0.0)
    with pytest.raises(DomainError):
        McmcConfig(10, 2, 0.1, seed=-1)


def test_default_acceptance_and_drift():
    pot = RadialPotential.gaussian(6)
    s = run_mcmc(pot, McmcConfig.default(6, 30_000, seed=1, resync_every=500))
    assert 0.1 < s.acceptance[0] < 0.9
    assert s.max_drift <= 1e-8


def test_determinism_and_chains(tmp_path):
    pot = RadialPotential.gaussian(3)
    cfg = McmcConfig.default(3, 3000, seed=11, n_chains=2)
    a, b = run_mcmc(pot, cfg), run_mcmc(pot, cfg)
    write_samples_csv(a, tmp_path / "a.csv")
    write_samples_csv(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert not np.array_equal(a.chains[0], a.chains[1])
    head = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert head == "chain,step,particle_index,re,im"


def test_detailed_balance_two_particles():
    # N=2: e^{-H} is a polynomial times a Gaussian, so Gauss-Legendre gives the
    # exact probability of each |Im z_1| bin; compare with the chain
    pot = RadialPotential.gaussian(2)
    s = run_mcmc(pot, McmcConfig(400_000, 20_000, 0.6, seed=5, thin=1))
    y = np.abs(s.chains[0][:, 0].imag)
    edges = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 4.5])
    g, wg = np.polynomial.legendre.leggauss(48)
    g, wg = 4.5 * g, 4.5 * wg

    def weight(y1, wy):
        X1, Y1, X2, Y2 = np.meshgrid(g, y1, g, g, indexing="ij", sparse=True)
        z1, z2 = X1 + 1j * Y1, X2 + 1j * Y2
        f = (np.abs(z1 - z2) * np.abs(z1 - np.conj(z2))) ** 2 * 16 * Y1 ** 2 * Y2 ** 2 \
            * np.exp(-2 * (np.abs(z1) ** 2 + np.abs(z2) ** 2))
        W = wg[:, None, None, None] * wy[None, :, None, None] * wg[None, None, :, None] * wg
        return float(np.sum(W * f))
    probs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        t, wt = np.polynomial.legendre.leggauss(16)
        yy = 0.5 * (hi - lo) * (t + 1) + lo
        probs.append(weight(yy, 0.5 * (hi - lo) * wt))
    probs = np.array(probs) / sum(probs)
    for (lo, hi), p_exact in zip(zip(edges[:-1], edges[1:]), probs):
        ind = ((y >= lo) & (y < hi)).astype(float)
        se = batch_means_error(ind, 40)
        assert abs(ind.mean() - p_exact) <= 4 * se


def test_summaries(rng):
    pot = RadialPotential.gaussian(8)
    s = run_mcmc(pot, McmcConfig.default(8, 60_000, seed=2))
    gap = summarize_samples(s, "axis_gap")
    assert gap["fraction"][0] * 2 <= gap["flat_reference"][0]
    rad = summarize_samples(s, "radial_histogram", pot)
    # the axis repulsion depletes small |z| at finite N; compare on an annulus
    ring = (rad["r_lo"] >= 0.5) & (rad["r_hi"] <= 1.2)
    assert np.allclose(rad["empirical"][ring], rad["equilibrium"][ring], atol=0.1)
    cloud = summarize_samples(s, "edge_rescaled_cloud", pot)
    assert cloud["re"].shape == s.points.shape
    short = run_mcmc(pot, McmcConfig.default(8, 400, burn_in=0, seed=2))
    with pytest.raises(DomainError):
        summarize_samples(short, "axis_gap")


def test_ml_lambda2_radial_profile_rises():
    pot = RadialPotential.mittag_leffler(2, 0, 8)
    s = run_mcmc(pot, McmcConfig.default(8, 80_000, seed=4))
    rad = summarize_samples(s, "radial_histogram", pot, bins=10)
    inside = rad["r_hi"] <= 0.85 * pot.droplet_radius()
    emp = rad["empirical"][inside]
    assert emp[-1] > 3 * emp[0]
