"""Metropolis sampling of the symplectic Coulomb gas.

The Gibbs weight is ``exp(-H_N)`` with

    -H_N = sum_{j != k} log(|z_j - z_k| |z_j - conj z_k|)
           + sum_j [log |z_j - conj z_j|^2 - N Q(z_j)].

Points live in the whole plane; ``H_N`` is invariant under conjugating any
single point, so statistics are folded to ``|Im z|`` where needed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .finite_kernels import RadialPotential, ScalingWindow, micro_scale

NEG_INF = -math.inf


@dataclass(frozen=True)
class McmcConfig:
    n_steps: int
    burn_in: int
    proposal_sigma: float
    seed: int = 0
    n_chains: int = 1
    resync_every: int = 10_000
    thin: int = 0                  # 0 means one sweep (N single-particle moves)

    def __post_init__(self):
        if self.n_steps < 1 or self.burn_in < 0 or self.burn_in >= self.n_steps:
            raise DomainError("need 0 <= burn_in < n_steps")
        if not self.proposal_sigma > 0:
            raise DomainError("proposal_sigma must be positive")
        if self.n_chains < 1:
            raise DomainError("n_chains must be >= 1")
        if self.resync_every < 1 or self.thin < 0:
            raise DomainError("resync_every must be >= 1 and thin >= 0")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must fit in 64 bits")

    @classmethod
    def default(cls, N, n_steps, burn_in=None, seed=0, **kw):
        burn = n_steps // 5 if burn_in is None else burn_in
        return cls(n_steps, burn, 0.3 / math.sqrt(N), seed, **kw)


@dataclass
class ParticleConfiguration:
    points: np.ndarray
    log_weight: float


@dataclass
class SampleSet:
    """Post-burn-in configurations of every chain."""

    N: int
    steps: np.ndarray                      # step index of each stored sample
    chains: list                           # per chain: array (n_samples, N)
    acceptance: list                       # per chain acceptance rate
    max_drift: float = 0.0                 # worst incremental vs full mismatch
    config: McmcConfig | None = field(default=None, repr=False)

    @property
    def points(self):
        """All stored points of all chains, flattened."""
        return np.concatenate([c.ravel() for c in self.chains])

    def to_csv(self, path):
        write_samples_csv(self, path)


def _pair_term(z, others):
    """sum_k log(|z - z_k| |z - conj z_k|) over the given others."""
    return float(np.sum(np.log(np.abs(z - others)) + np.log(np.abs(z - np.conj(others)))))


def _self_term(potential, z):
    y = abs(z.imag)
    if y == 0:
        return NEG_INF
    return 2.0 * math.log(2.0 * y) - potential.N * float(potential.Q(z))


def log_weight(potential: RadialPotential, points) -> float:
    """-H_N for the configuration ``points`` (``-inf`` on degenerate input)."""
    pts = np.asarray(points, dtype=complex).ravel()
    n = pts.size
    if np.any(pts.imag == 0):
        return NEG_INF
    with np.errstate(divide="ignore"):
        diff = np.abs(pts[:, None] - pts[None, :])
        cross = np.abs(pts[:, None] - np.conj(pts)[None, :])
        off = ~np.eye(n, dtype=bool)
        if np.any(diff[off] == 0):
            return NEG_INF
        inter = np.sum(np.log(diff[off])) + np.sum(np.log(cross[off]))
    own = sum(_self_term(potential, z) for z in pts)
    val = float(inter + own)
    return val if math.isfinite(val) else NEG_INF


def initial_configuration(potential, rng):
    """I.i.d. uniform points on the droplet disk, kept away from the axis."""
    N = potential.N
    R = potential.droplet_radius()
    r = R * np.sqrt(rng.random(N))
    t = 2 * math.pi * rng.random(N)
    pts = r * np.exp(1j * t)
    for j in range(N):
        while abs(pts[j].imag) <= 1e-3:
            rr = R * math.sqrt(rng.random())
            pts[j] = rr * np.exp(2j * math.pi * rng.random())
    return pts


def _run_chain(potential, config, rng):
    N = potential.N
    pts = initial_configuration(potential, rng)
    lw = log_weight(potential, pts)
    thin = config.thin or N
    sigma = config.proposal_sigma
    accepted = 0
    since_sync = 0
    drift = 0.0
    stored, steps = [], []
    idx_all = rng.integers(0, N, size=config.n_steps)
    noise = rng.standard_normal((config.n_steps, 2)) * sigma
    unif = rng.random(config.n_steps)
    for step in range(config.n_steps):
        i = int(idx_all[step])
        old = pts[i]
        new = old + complex(noise[step, 0], noise[step, 1])
        if new.imag != 0:
            others = np.delete(pts, i) if N > 1 else pts[:0]
            with np.errstate(divide="ignore"):
                delta = 2.0 * (_pair_term(new, others) - _pair_term(old, others)) \
                    + _self_term(potential, new) - _self_term(potential, old)
            if math.isfinite(delta) and (delta >= 0 or unif[step] < math.exp(delta)):
                pts[i] = new
                lw += delta
                accepted += 1
                since_sync += 1
                if since_sync >= config.resync_every:
                    full = log_weight(potential, pts)
                    drift = max(drift, abs(full - lw))
                    lw = full
                    since_sync = 0
        if step >= config.burn_in and (step - config.burn_in) % thin == thin - 1:
            stored.append(pts.copy())
            steps.append(step)
    full = log_weight(potential, pts)
    drift = max(drift, abs(full - lw))
    samples = np.array(stored) if stored else np.empty((0, N), dtype=complex)
    return samples, np.array(steps, dtype=np.int64), accepted / config.n_steps, drift


def run_mcmc(potential: RadialPotential, config: McmcConfig) -> SampleSet:
    """Single-particle Metropolis chains with incremental O(N) updates.

    Chains use independent streams spawned from ``config.seed``, so output
    is reproducible regardless of how chains are scheduled.
    """
    seeds = np.random.SeedSequence(int(config.seed)).spawn(config.n_chains)
    chains, acc = [], []
    steps = None
    drift = 0.0
    for ss in seeds:
        rng = np.random.Generator(np.random.PCG64(ss))
        samples, st, a, d = _run_chain(potential, config, rng)
        chains.append(samples)
        acc.append(a)
        drift = max(drift, d)
        steps = st
    return SampleSet(potential.N, steps, chains, acc, drift, config)


def write_samples_csv(samples: SampleSet, path):
    """Columns step, particle_index, re, im (plus chain when there are several)."""
    multi = len(samples.chains) > 1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow((["chain"] if multi else []) + ["step", "particle_index", "re", "im"])
        for c, arr in enumerate(samples.chains):
            for s, conf in zip(samples.steps, arr):
                for j, z in enumerate(conf):
                    row = [int(s), j, f"{z.real:.17g}", f"{z.imag:.17g}"]
                    w.writerow(([c] if multi else []) + row)


def batch_means_error(values, n_batches=20):
    """Standard error of the mean from non-overlapping batch means."""
    v = np.asarray(values, dtype=float)
    m = v.size // n_batches
    if m < 1:
        raise DomainError("too few values for batch means")
    means = v[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def summarize_samples(samples: SampleSet, which, potential=None, bins=30):
    """Histogram tables for the stored configurations.

    ``radial_histogram``
        Density of ``|z|`` per unit area (``dA = d^2 z / pi``) against the
        equilibrium density ``Delta Q / 2`` inside the droplet; needs
        ``potential``.
    ``axis_gap``
        Histogram of ``|Im z|`` with the prediction of a uniform density of
        the same total mass near the axis.
    ``edge_rescaled_cloud``
        Points mapped through the boundary window at ``p = sqrt2``.
    """
    n_conf = sum(len(c) for c in samples.chains)
    if n_conf < 100:
        raise DomainError("need at least 100 post-burn-in configurations")
    pts = samples.points
    N = samples.N
    if which == "radial_histogram":
        if potential is None:
            raise DomainError("radial_histogram needs the potential")
        R = potential.droplet_radius()
        edges = np.linspace(0.0, 1.5 * R, bins + 1)
        counts, _ = np.histogram(np.abs(pts), edges)
        area = edges[1:] ** 2 - edges[:-1] ** 2          # (pi r^2 difference) / pi
        emp = counts / (n_conf * N) / area
        mid = 0.5 * (edges[1:] + edges[:-1])
        theory = np.where(mid <= R, 0.5 * potential.laplacian_Q(mid + 0j), 0.0)
        return {"r_lo": edges[:-1], "r_hi": edges[1:], "empirical": emp,
                "equilibrium": np.asarray(theory, dtype=float)}
    if which == "axis_gap":
        width = 0.05
        edges = np.arange(0.0, 1.0 + width / 2, width)
        y = np.abs(pts.imag)
        counts, _ = np.histogram(y, edges)
        frac = counts / (n_conf * N)
        # a flat density near the axis: mass per strip proportional to width
        flat = np.mean(frac[len(frac) // 2:])
        return {"y_lo": edges[:-1], "y_hi": edges[1:], "fraction": frac,
                "flat_reference": np.full(frac.shape, flat)}
    if which == "edge_rescaled_cloud":
        pot = potential or RadialPotential.gaussian(N)
        win = micro_scale(pot, math.sqrt(2.0), "boundary")
        z = win.from_zeta(pts)
        return {"re": z.real, "im": z.imag}
    raise DomainError(f"unknown summary {which!r}")


__all__ = ["McmcConfig", "ParticleConfiguration", "SampleSet", "log_weight",
           "initial_configuration", "run_mcmc", "write_samples_csv",
           "batch_means_error", "summarize_samples"]
