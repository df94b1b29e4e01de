"""Finite-N kernels from skew-orthogonal polynomials of radial potentials.

For a radial potential the skew-orthogonal polynomials are explicit in
terms of the moments ``h_j = int |zeta|^{2j} e^{-N Q} dA``.  Writing
``P_m = prod_{i<=m} h_{2i}/h_{2i-1}`` the pre-kernel becomes

    kappa_N(zeta, eta) = G(zeta, eta) - G(eta, zeta),
    G(zeta, eta) = sum_k (P_k/s_k) zeta^{2k+1} sum_{l<=k} eta^{2l}/P_l,

which is evaluated in O(N) per pair with running log-scaled partial sums.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import AccuracyError, DomainError
from .numerics import integrate_disk_polar
from .pfaffian import pfaffian
from .specfun import lgamma


@dataclass(frozen=True)
class RadialPotential:
    """Radially symmetric confining potential.

    ``kind`` is ``"gaussian"``, ``"mittag_leffler"`` or ``"numeric_radial"``.
    For the Mittag-Leffler kind ``Q(zeta) = |zeta|^{2 lam} - (2c/N) log|zeta|``;
    the Gaussian is the case ``lam=1, c=0``.  ``Q_radial`` (numeric kind) maps
    ``r >= 0`` to ``Q``.
    """

    kind: str
    N: int
    lam: float = 1.0
    c: float = 0.0
    Q_radial: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "mittag_leffler", "numeric_radial"):
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("N must be a positive integer")
        if self.kind == "gaussian" and (self.lam != 1.0 or self.c != 0.0):
            raise DomainError("the gaussian potential has lam=1, c=0")
        if self.kind == "mittag_leffler":
            if self.lam <= 0:
                raise DomainError("lambda must be positive")
            if self.c <= -1:
                raise DomainError("c must exceed -1")
        if self.kind == "numeric_radial" and self.Q_radial is None:
            raise DomainError("numeric_radial needs Q_radial")

    @classmethod
    def gaussian(cls, N):
        return cls("gaussian", int(N))

    @classmethod
    def mittag_leffler(cls, lam, c, N):
        return cls("mittag_leffler", int(N), float(lam), float(c))

    @property
    def is_ml_type(self):
        return self.kind in ("gaussian", "mittag_leffler")

    def half_weight_log(self, zeta):
        """``-N Q(zeta) / 2`` (real part of the log weight per argument)."""
        zeta = np.asarray(zeta, dtype=complex)
        r = np.abs(zeta)
        if self.is_ml_type:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = -0.5 * self.N * r ** (2 * self.lam)
                if self.c != 0:
                    out = out + self.c * np.log(r)
            return out
        return -0.5 * self.N * np.asarray(self.Q_radial(r), dtype=float)

    def Q(self, zeta):
        return -2.0 * self.half_weight_log(zeta) / self.N

    def laplacian_Q(self, zeta):
        """dbar d Q, away from the origin."""
        zeta = np.asarray(zeta, dtype=complex)
        r = np.abs(zeta)
        if self.is_ml_type:
            return self.lam ** 2 * r ** (2 * self.lam - 2)
        h = 1e-4 * np.maximum(r, 1.0)
        q = self.Q_radial
        d2 = (q(r + h) - 2 * q(r) + q(r - h)) / h ** 2
        d1 = (q(r + h) - q(r - h)) / (2 * h)
        return 0.25 * (d2 + d1 / r)

    def droplet_radius(self):
        """Radius of the disk carrying the equilibrium density Delta Q / 2."""
        if self.is_ml_type:
            # lam R^{2 lam} / 2 = 1 + c/N
            return (2.0 * (1.0 + self.c / self.N) / self.lam) ** (1.0 / (2 * self.lam))
        # mass of Delta Q / 2 on the disk of radius r is r Q'(r) / 4
        q = self.Q_radial

        def mass(r):
            h = 1e-6 * max(r, 1.0)
            return r * (q(r + h) - q(r - h)) / (2 * h) / 4.0 - 1.0
        return optimize.brentq(mass, 1e-8, 1e3)


# --------------------------------------------------------------------------
# Moments and skew-orthogonal basis
# --------------------------------------------------------------------------

def log_moment(potential, j):
    """log h_j for the potential (h_j > 0 always)."""
    if j < 0 or j > 2 * potential.N + 2:
        raise DomainError("moment index out of range")
    if potential.is_ml_type:
        lam, c, N = potential.lam, potential.c, potential.N
        e = (j + c + 1.0) / lam
        return lgamma(e) - math.log(lam) - e * math.log(N)
    # h_j = int_0^inf t^j exp(-N Q(sqrt t)) dt, t = |zeta|^2
    N = potential.N
    q = potential.Q_radial

    def logf(t):
        return j * math.log(t) - N * float(q(math.sqrt(t)))
    # rescale around the maximiser of the integrand
    tmax = optimize.minimize_scalar(lambda s: -logf(math.exp(s)) - s,
                                    bounds=(-30, 10), method="bounded").x
    peak = logf(math.exp(tmax)) + tmax
    # below the peak the integrand decays at least like e^{(j+1)(s - tmax)};
    # above it, superlogarithmic growth of Q makes the decay faster still
    lo, hi = tmax - 80.0, min(tmax + 60.0, 700.0)
    val, err = integrate.quad(lambda s: math.exp(logf(math.exp(s)) + s - peak),
                              lo, hi, epsabs=0, epsrel=1e-13, limit=400, points=[tmax])
    if not np.isfinite(val) or val <= 0 or err > 1e-9 * val:
        raise AccuracyError(f"moment h_{j}: quadrature failed", partial=val)
    return math.log(val) + peak


def moments(potential, j):
    """Moment h_j = int |zeta|^{2j} e^{-N Q} dA."""
    return math.exp(log_moment(potential, j))


@dataclass(frozen=True)
class SkewBasis:
    """Skew-orthogonal polynomials ``q_0..q_{2N-1}`` with norms ``s_k``.

    ``log_P[k] = log prod_{i<=k} h_{2i}/h_{2i-1}`` and ``log_s[k] = log s_k``
    hold the data the kernel needs; ``polys`` lists ascending coefficient
    arrays.
    """

    potential: RadialPotential
    log_h: np.ndarray
    log_P: np.ndarray
    log_s: np.ndarray

    @property
    def norms(self):
        return np.exp(self.log_s)

    @property
    def moments(self):
        return np.exp(self.log_h)

    def poly(self, n):
        """Ascending coefficients of q_n."""
        if not 0 <= n < 2 * self.potential.N:
            raise DomainError("polynomial index outside 0..2N-1")
        coef = np.zeros(n + 1)
        if n % 2 == 1:
            coef[n] = 1.0
            return coef
        k = n // 2
        for l in range(k + 1):
            coef[2 * l] = math.exp(self.log_P[k] - self.log_P[l])
        return coef

    @property
    def polys(self):
        return [self.poly(n) for n in range(2 * self.potential.N)]


def skew_orthogonal_basis(potential):
    N = potential.N
    log_h = np.array([log_moment(potential, j) for j in range(2 * N + 1)])
    steps = np.array([log_h[2 * i] - log_h[2 * i - 1] for i in range(1, N)])
    log_P = np.concatenate([[0.0], np.cumsum(steps)])
    log_s = math.log(2.0) + log_h[1:2 * N:2]
    return SkewBasis(potential, log_h, log_P, log_s)


def _radial_cutoff(potential, degree, drop=45.0):
    """Radius past which r^degree e^{-NQ(r)} is e^{-drop} below its peak."""
    r = np.linspace(1e-6, 1.0, 2000) * 10 * max(1.0, potential.droplet_radius())
    while True:
        with np.errstate(divide="ignore"):
            logf = degree * np.log(r) + 2 * potential.half_weight_log(r)
        i = int(np.argmax(logf))
        below = np.nonzero(logf[i:] < logf[i] - drop)[0]
        if below.size:
            return float(r[i + below[0]])
        r = r * 2


def skew_product(potential, f, g, rmax=None, n_r=200, n_t=64):
    """Anti-symmetric scalar product of two polynomials (ascending coeffs).

    <f|g> = int (conj(z) - z) e^{-NQ} (f conj(g) - conj(f) g) dA
    """
    if rmax is None:
        rmax = _radial_cutoff(potential, len(f) + len(g))
    # Gauss-Legendre in r^(1/2)-type substitution handles |z|^{2c} at 0
    s, ws = np.polynomial.legendre.leggauss(n_r)
    s = 0.5 * (s + 1.0)
    ws = 0.5 * ws
    r = rmax * s ** 2
    wr = rmax * 2 * s * ws
    t = 2 * math.pi * (np.arange(n_t) + 0.5) / n_t
    R, T = np.meshgrid(r, t, indexing="ij")
    Z = R * np.exp(1j * T)
    fz = np.polynomial.polynomial.polyval(Z, f)
    gz = np.polynomial.polynomial.polyval(Z, g)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.exp(2 * potential.half_weight_log(Z))
    w = np.where(R == 0, 0.0, w)
    integrand = (np.conj(Z) - Z) * w * (fz * np.conj(gz) - np.conj(fz) * gz)
    return np.sum(wr[:, None] * (2 * math.pi / n_t) * R * integrand) / math.pi


# --------------------------------------------------------------------------
# Pre-kernels
# --------------------------------------------------------------------------

def _log(z):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(z)


def _double_sum(log_a, log_b, x, y, extra):
    """exp(extra) * sum_k a_k x^{2k+1} sum_{l<=k} b_l y^{2l}, log-scaled.

    ``log_a``, ``log_b`` are real coefficient logs, ``x``, ``y`` complex
    arrays of a common shape and ``extra`` a real array added to every
    exponent before exponentiation (the weights).
    """
    lx = _log(x)
    ly = _log(y)
    n = len(log_a)
    # running log-scaled inner partial sum: inner = exp(m) * s
    m = np.full(x.shape, log_b[0], dtype=float)
    s = np.ones(x.shape, dtype=complex)
    tot_m = np.full(x.shape, -np.inf)
    tot = np.zeros(x.shape, dtype=complex)
    y_zero = y == 0
    for k in range(n):
        if k > 0:
            with np.errstate(invalid="ignore"):
                eb = log_b[k] + 2 * k * ly
            eb = np.where(y_zero, -np.inf + 0j, eb)
            m_new = np.maximum(m, eb.real)
            s = s * np.exp(m - m_new) + np.exp(eb - m_new)
            m = m_new
        with np.errstate(invalid="ignore"):
            ea = log_a[k] + (2 * k + 1) * lx
        term_log = ea + m + extra
        t_m = term_log.real
        new_m = np.maximum(tot_m, t_m)
        finite = np.isfinite(new_m)
        with np.errstate(invalid="ignore", over="ignore"):
            scale_old = np.where(finite, np.exp(tot_m - new_m), 0.0)
            term = np.where(finite, np.exp(term_log - new_m) * s, 0.0)
        tot = tot * scale_old + term
        tot_m = np.where(finite, new_m, tot_m)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(np.isfinite(tot_m), tot * np.exp(tot_m), 0.0)
    if not np.all(np.isfinite(out)):
        raise AccuracyError("finite kernel overflow despite log scaling")
    return out


class PreKernelHandle:
    """Pre-kernel with its weight convention.

    ``weighted(z, w)`` returns ``e^{omega(z) + omega(w)} kappa(z, w)`` where
    ``omega`` is ``weight_exponent``.  ``partner(z)`` is the point paired
    with ``z`` in the 2x2 block (its complex conjugate in the unscaled
    variable) and ``prefactor(z)`` the per-point factor in front of the
    Pfaffian.
    """

    def evaluate(self, z, w):
        raise NotImplementedError

    def weight_exponent(self, z):
        raise NotImplementedError

    def weighted(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex),
                                   np.asarray(w, dtype=complex))
        return np.exp(self.weight_exponent(z) + self.weight_exponent(w)) * self.evaluate(z, w)

    def partner(self, z):
        return np.conj(z)

    def prefactor(self, z):
        z = np.asarray(z, dtype=complex)
        return self.partner(z) - z


class FinitePreKernel(PreKernelHandle):
    """Unscaled finite-N pre-kernel with weight ``e^{-N Q / 2}``."""

    def __init__(self, basis, fast_gaussian=False):
        pot = basis.potential
        if fast_gaussian and pot.kind != "gaussian":
            raise DomainError("fast_gaussian requires the gaussian potential")
        self.basis = basis
        self.potential = pot
        self.fast_gaussian = fast_gaussian
        N = pot.N
        if fast_gaussian:
            k = np.arange(N)
            log_dfact_odd = np.array([_log_double_factorial(2 * i + 1) for i in k])
            log_dfact_even = np.array([_log_double_factorial(2 * i) for i in k])
            self._log_a = math.log(N * math.sqrt(N) / 2.0) - log_dfact_odd
            self._log_b = -log_dfact_even
            self._arg_scale = math.sqrt(N)
        else:
            self._log_a = basis.log_P - basis.log_s
            self._log_b = -basis.log_P
            self._arg_scale = 1.0

    def _G(self, x, y, extra):
        s = self._arg_scale
        return _double_sum(self._log_a, self._log_b, s * x, s * y, extra)

    def weight_exponent(self, z):
        return self.potential.half_weight_log(z)

    def weighted(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex),
                                   np.asarray(w, dtype=complex))
        extra = self.weight_exponent(z) + self.weight_exponent(w)
        return self._G(z, w, extra) - self._G(w, z, extra)

    def evaluate(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex),
                                   np.asarray(w, dtype=complex))
        zero = np.zeros(z.shape)
        return self._G(z, w, zero) - self._G(w, z, zero)


def _log_double_factorial(n):
    if n <= 0:
        return 0.0
    if n % 2 == 0:
        k = n // 2
        return k * math.log(2.0) + math.lgamma(k + 1)
    k = (n + 1) // 2
    return math.lgamma(2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)


def pre_kernel_finite(basis, fast_gaussian=False):
    return FinitePreKernel(basis, fast_gaussian)


# --------------------------------------------------------------------------
# Rescaling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingWindow:
    p: complex
    theta: float
    micro_scale: float
    regime: str

    def __post_init__(self):
        if self.micro_scale <= 0:
            raise DomainError("micro-scale must be positive")
        if self.regime not in ("interior", "boundary"):
            raise DomainError(f"unknown regime {self.regime!r}")
        if self.regime == "interior" and self.theta != 0:
            raise DomainError("interior windows have theta = 0")

    @property
    def rotation(self):
        return cmath.exp(1j * self.theta) if self.regime == "boundary" else 1.0

    def to_zeta(self, z):
        return self.p + self.rotation * self.micro_scale * np.asarray(z, dtype=complex)

    def from_zeta(self, zeta):
        return (np.asarray(zeta, dtype=complex) - self.p) / (self.rotation * self.micro_scale)


def micro_scale(potential, p=0.0, regime="interior", theta=None):
    """Scaling window at ``p``.

    Boundary windows take ``theta`` as the outer normal angle, defaulting to
    ``arg p``.
    """
    p = complex(p)
    R = potential.droplet_radius()
    if abs(p) > R * (1 + 1e-9):
        raise DomainError("p lies outside the droplet")
    if regime not in ("interior", "boundary"):
        raise DomainError(f"unknown regime {regime!r}")
    if theta is None:
        theta = cmath.phase(p) if regime == "boundary" else 0.0
    N = potential.N
    if potential.is_ml_type and (potential.kind == "gaussian" or potential.lam == 1.0):
        r = math.sqrt(2.0 / N)
    elif potential.is_ml_type:
        if p != 0:
            r = _solve_micro_scale(potential, p)
        else:
            lam = potential.lam
            r = (lam * N / 2.0) ** (-1.0 / (2 * lam))
    else:
        r = _solve_micro_scale(potential, p)
    return ScalingWindow(p, float(theta), r, regime)


def _solve_micro_scale(potential, p):
    N = potential.N

    def mass(r):
        return integrate_disk_polar(lambda w: potential.laplacian_Q(w) / 2.0,
                                    p, r).real - 1.0 / N
    lo, hi = 1e-8, 1.0
    while mass(hi) < 0:
        hi *= 2
        if hi > 1e6:
            raise DomainError("micro-scale bracket failure")
    return optimize.brentq(mass, lo, hi, xtol=1e-14)


class RescaledPreKernel(PreKernelHandle):
    """Finite-N pre-kernel in rescaled coordinates ``zeta = p + e^{i theta} r z``.

    The 2x2 block pairs ``z`` with the rescaled image of ``conj(zeta)``, so
    correlation functions are exact for any window.
    """

    def __init__(self, kernel, window):
        self.kernel = kernel
        self.window = window

    def weighted(self, z, w):
        r = self.window.micro_scale
        return r ** 3 * self.kernel.weighted(self.window.to_zeta(z), self.window.to_zeta(w))

    def evaluate(self, z, w):
        r = self.window.micro_scale
        return r ** 3 * self.kernel.evaluate(self.window.to_zeta(z), self.window.to_zeta(w))

    def weight_exponent(self, z):
        return self.kernel.weight_exponent(self.window.to_zeta(z))

    def partner(self, z):
        return self.window.from_zeta(np.conj(self.window.to_zeta(z)))

    def prefactor(self, z):
        zeta = self.window.to_zeta(z)
        return (np.conj(zeta) - zeta) / self.window.micro_scale


# --------------------------------------------------------------------------
# Correlation functions
# --------------------------------------------------------------------------

def correlation(kernel, points, check=True):
    """k-point function prod(prefactor) * Pf[weighted kernel] for one point set."""
    pts = np.asarray(points, dtype=complex).ravel()
    k = pts.size
    if k == 0:
        raise DomainError("need at least one point")
    allpts = np.empty(2 * k, dtype=complex)
    allpts[0::2] = pts
    allpts[1::2] = kernel.partner(pts)
    M = kernel.weighted(allpts[:, None], allpts[None, :])
    val = np.prod(kernel.prefactor(pts)) * pfaffian(M)
    return _realify(val, check)


def _realify(val, check):
    val = np.asarray(val)
    if check:
        mag = np.abs(val)
        if np.any(np.abs(val.imag) > 1e-9 * np.maximum(mag, 1e-300) + 1e-14):
            raise AccuracyError("correlation function not real", partial=val)
    out = val.real
    return out.item() if out.ndim == 0 else out


def density(kernel, z, check=False):
    """One-point function on an array of points (vectorised)."""
    z = np.asarray(z, dtype=complex)
    val = kernel.prefactor(z) * kernel.weighted(z, kernel.partner(z))
    return _realify(val, check)


def rescaled_correlation(basis, window, points, fast_gaussian=None):
    """Rescaled k-point function R_{N,k} at the given points.

    Coincident points give zero by Pfaffian degeneracy.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size > basis.potential.N:
        raise DomainError("k must not exceed N")
    if fast_gaussian is None:
        fast_gaussian = basis.potential.kind == "gaussian"
    kern = RescaledPreKernel(FinitePreKernel(basis, fast_gaussian), window)
    if pts.size == 1:
        return float(density(kern, pts[0]))
    return correlation(kern, pts)


def rescaled_kernel(potential, window, fast_gaussian=None):
    """Convenience: the rescaled finite pre-kernel handle for a potential."""
    basis = skew_orthogonal_basis(potential)
    if fast_gaussian is None:
        fast_gaussian = potential.kind == "gaussian"
    return RescaledPreKernel(FinitePreKernel(basis, fast_gaussian), window)


class CocycleKernel(PreKernelHandle):
    """Pre-kernel multiplied by h(z) h(w); correlations are unchanged."""

    def __init__(self, kernel, h):
        self.kernel = kernel
        self.h = h

    def weighted(self, z, w):
        return self.h(z) * self.h(w) * self.kernel.weighted(z, w)

    def evaluate(self, z, w):
        return self.h(z) * self.h(w) * self.kernel.evaluate(z, w)

    def weight_exponent(self, z):
        return self.kernel.weight_exponent(z)

    def partner(self, z):
        return self.kernel.partner(z)

    def prefactor(self, z):
        return self.kernel.prefactor(z)


__all__ = [
    "RadialPotential", "SkewBasis", "ScalingWindow", "PreKernelHandle",
    "FinitePreKernel", "RescaledPreKernel", "CocycleKernel",
    "moments", "log_moment", "skew_orthogonal_basis", "skew_product",
    "pre_kernel_finite", "micro_scale", "rescaled_correlation",
    "rescaled_kernel", "correlation", "density",
]
