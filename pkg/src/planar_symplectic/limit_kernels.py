"""Limiting pre-kernels of the symplectic ensembles.

All kernels are exposed as :class:`PreKernelHandle` objects whose
``weighted`` method folds the Gaussian-type weight into the kernel before
exponentiating, so values stay finite well away from the real axis.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError
from .finite_kernels import PreKernelHandle, correlation
from .numerics import (DEFAULT_QUAD, GeneralizedPowerSeries, QuadratureSpec,
                       gauss_legendre, integrate_interval)
from .specfun import (SpecFunAccuracy, barnes_g, bessel_i, erf_complex,
                      kilbas_saigo, lgamma_sign, mittag_leffler_2p, pochhammer)

_SQRT_PI = math.sqrt(math.pi)
_SQRT2 = math.sqrt(2.0)
_KERNEL_ACC = SpecFunAccuracy(rel_tol=1e-14)
_EDGE_QUAD = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-13, max_depth=14,
                            semi_infinite_cutoff=6.0)


def _c(x):
    return np.asarray(x, dtype=complex)


def _gauss_phase(z):
    """z^2 - |z|^2: the log of e^{z^2} times the weight e^{-|z|^2}."""
    return z * z - (z * np.conj(z)).real


# --------------------------------------------------------------------------
# Bulk and edge family
# --------------------------------------------------------------------------

class EdgeFamilyKernel(PreKernelHandle):
    """Pre-kernel with integration endpoint ``a`` (``inf`` gives the bulk).

    ``kappa_a(z, w) = sqrt(pi) e^{z^2+w^2} int_{-inf}^a W(f_w, f_z)(u) du``
    with ``f_z(u) = erfc(sqrt2 (z - u)) / 2``.  The weight is ``e^{-|z|^2}``.

    Representations
    ---------------
    wronskian_integral
        Adaptive quadrature of the Wronskian integral in ``u``.
    alternative_sinh
        Integral of ``e^{-t^2} sinh(2t(w-z)) erfc(z+w-t)`` (``a = 0`` only).
    path_integral
        The z-derivative of the Wronskian integral is elementary, so the
        kernel is an integral along the segment from ``w`` to ``z`` with fixed
        Gauss-Legendre nodes.  Finite ``a`` enters through a shift by ``a``.
        This is the fast default.
    """

    REPRESENTATIONS = ("path_integral", "wronskian_integral", "alternative_sinh")

    def __init__(self, a=math.inf, representation="path_integral",
                 quad=_EDGE_QUAD):
        if representation not in self.REPRESENTATIONS:
            raise DomainError(f"unknown representation {representation!r}")
        if representation == "alternative_sinh" and a != 0:
            raise DomainError("the sinh representation holds for a = 0 only")
        if np.isnan(a) or a == -math.inf:
            raise DomainError("a must be real or +inf")
        self.a = float(a)
        self.representation = representation
        self.quad = quad

    def weight_exponent(self, z):
        z = _c(z)
        return -(z * np.conj(z)).real

    def _reduced(self, z, w, log_scale):
        """e^{log_scale} f(z, w), where kappa = e^{z^2 + w^2} f."""
        if self.a == math.inf:
            return np.exp(log_scale) * _SQRT_PI * erf_complex(z - w, "erf")
        if self.representation == "alternative_sinh":
            return _edge_sinh_reduced(z, w, self.quad, log_scale)
        if self.representation == "wronskian_integral":
            return _wronskian_reduced(z, w, self.a, self.quad, log_scale)
        return _path_reduced(z - self.a, w - self.a, log_scale, self.quad)

    def evaluate(self, z, w):
        z, w = np.broadcast_arrays(_c(z), _c(w))
        return np.exp(z * z + w * w) * self._reduced(z, w, np.zeros(z.shape))

    def weighted(self, z, w):
        z, w = np.broadcast_arrays(_c(z), _c(w))
        return self._reduced(z, w, _gauss_phase(z) + _gauss_phase(w))


def _path_reduced(z, w, log_scale, quad=_EDGE_QUAD, n=None):
    # d_z f = e^{-(z-w)^2} erfc(z+w) - e^{-2z^2} erfc(sqrt2 w)/sqrt2 and f(w, w) = 0
    shape = z.shape
    zf, wf, ls = z.ravel(), w.ravel(), np.broadcast_to(log_scale, shape).ravel()
    # f is antisymmetric: start the segment at the argument nearer the real
    # axis, where erfc(2w) is smallest
    swap = np.abs(wf.imag) > np.abs(zf.imag)
    zf, wf = np.where(swap, wf, zf), np.where(swap, zf, wf)
    sign = np.where(swap, -1.0, 1.0)
    d = zf - wf
    out = np.empty(zf.shape, dtype=complex)
    mag = np.empty(zf.shape)
    # node count tracks the variation of the integrand along the segment
    if n is None:
        # calibrated against a 800-node rule at the 1e-13 level
        npts = np.clip(24 + 8 * np.ceil(np.abs(d)), 32, 512).astype(int)
    else:
        npts = np.full(zf.shape, int(n))
    for m in np.unique(npts):
        idx = np.nonzero(npts == m)[0]
        t, wt = gauss_legendre(int(m), 0.0, 1.0)
        for start in range(0, idx.size, 2048):
            sl = idx[start:start + 2048]
            dd = d[sl, None]
            td = t * dd
            integ = np.exp(ls[sl, None] - td * td) * erf_complex(2 * wf[sl, None] + td, "erfc")
            out[sl] = dd[:, 0] * (integ * wt).sum(axis=1)
            mag[sl] = np.abs(dd[:, 0]) * (np.abs(integ) * wt).sum(axis=1)
    s2 = _SQRT2
    e2 = 0.25 * _SQRT_PI * np.exp(ls) * erf_complex(s2 * wf, "erfc")
    ez, ew = erf_complex(s2 * zf, "erf"), erf_complex(s2 * wf, "erf")
    out = out - e2 * (ez - ew)
    mag = mag + np.abs(e2) * (np.abs(ez) + np.abs(ew))
    # the segment integral cancels far from the real axis; there the sinh
    # integral (shift-covariant, so valid for the shifted arguments) takes over
    bad = ~(mag < 10.0) | ~np.isfinite(out)
    if np.any(bad):
        out[bad] = _edge_sinh_reduced(zf[bad], wf[bad], quad, ls[bad])
    return (sign * out).reshape(shape)


def _wronskian_reduced(z, w, a, quad, log_scale=None):
    # sqrt(pi) * int [f_w f_z' - f_w' f_z] du with f' = sqrt(2/pi) e^{-2(.-u)^2}
    shape = z.shape
    zf, wf = z.ravel(), w.ravel()
    ls = np.zeros(zf.shape) if log_scale is None else np.broadcast_to(log_scale, shape).ravel()
    lo = min(zf.real.min(), wf.real.min())
    hi = min(a, max(zf.real.max(), wf.real.max()) + quad.semi_infinite_cutoff)
    lo = min(lo, hi) - quad.semi_infinite_cutoff

    def integrand(u):
        u = u[:, None]
        dz = zf[None, :] - u
        dw = wf[None, :] - u
        fz = erf_complex(_SQRT2 * dz, "erfc")
        fw = erf_complex(_SQRT2 * dw, "erfc")
        return 0.5 * (fw * np.exp(ls - 2 * dz * dz) - fz * np.exp(ls - 2 * dw * dw))

    val = integrate_interval(integrand, ("finite", lo, hi), quad)
    return (_SQRT2 * val).reshape(shape)


def _edge_sinh_reduced(z, w, quad, log_scale=None):
    # kappa = e^{2zw} int_{-inf}^0 e^{-t^2} sinh(2t(w-z)) erfc(z+w-t) dt
    shape = z.shape
    zf, wf = z.ravel(), w.ravel()
    ls = np.zeros(zf.shape) if log_scale is None else np.broadcast_to(log_scale, shape).ravel()
    d = wf - zf
    s = zf + wf
    # e^{2zw - z^2 - w^2} = e^{-(z-w)^2}
    pref = ls - (zf - wf) ** 2
    lo = min(0.0, s.real.min()) - quad.semi_infinite_cutoff - 2 * np.abs(d.real).max()

    def integrand(t):
        t = t[:, None]
        e1 = pref - t * t + 2 * t * d
        e2 = pref - t * t - 2 * t * d
        return 0.5 * (np.exp(e1) - np.exp(e2)) * erf_complex(s - t, "erfc")

    val = integrate_interval(integrand, ("finite", lo, 0.0), quad)
    return val.reshape(shape)


def kappa_edge_family(a, z, w, representation="wronskian_integral"):
    """Unweighted edge-family pre-kernel kappa_a(z, w)."""
    return EdgeFamilyKernel(a, representation).evaluate(z, w)


def bulk_density(z):
    """Closed form 2 sqrt(pi) y e^{-4y^2} erfi(2y) of the bulk one-point function."""
    y = np.imag(_c(z))
    val = 2 * _SQRT_PI * y * np.exp(-4 * y * y) * np.real(erf_complex(2 * y, "erfi"))
    return val


# --------------------------------------------------------------------------
# Crossover to the complex Ginibre edge
# --------------------------------------------------------------------------

class CrossoverKernel(PreKernelHandle):
    """Edge kernel seen from p = sqrt2 e^{i t / sqrt N}.

    Entries are edge-kernel entries at ``z + i t``, the partner of ``z`` is
    ``conj(z) - 2 i t`` and the prefactor ``conj(z) - z - 2 i t``.
    """

    def __init__(self, t, edge=None):
        if not np.isfinite(t):
            raise DomainError("t must be finite")
        self.t = float(t)
        self.edge = edge or EdgeFamilyKernel(0.0)

    def weight_exponent(self, z):
        return self.edge.weight_exponent(_c(z) + 1j * self.t)

    def evaluate(self, z, w):
        return self.edge.evaluate(_c(z) + 1j * self.t, _c(w) + 1j * self.t)

    def weighted(self, z, w):
        return self.edge.weighted(_c(z) + 1j * self.t, _c(w) + 1j * self.t)

    def partner(self, z):
        return np.conj(_c(z)) - 2j * self.t


def complex_edge_kernel(z, w):
    """Determinantal edge kernel e^{-|z|^2-|w|^2+2 z conj(w)} erfc(z+conj(w))/2."""
    z, w = np.broadcast_arrays(_c(z), _c(w))
    wb = np.conj(w)
    ex = -(z * np.conj(z)).real - (w * wb).real + 2 * z * wb
    return np.exp(ex) * 0.5 * erf_complex(z + wb, "erfc")


def crossover_kernels(t, z, w, which="pfaffian_entry"):
    if which == "pfaffian_entry":
        return CrossoverKernel(t).weighted(z, w)
    if which == "determinantal_edge":
        return complex_edge_kernel(z, w)
    raise DomainError(f"unknown crossover kernel {which!r}")


# --------------------------------------------------------------------------
# Translation-invariant family
# --------------------------------------------------------------------------

class TranslationInvariantKernel(PreKernelHandle):
    """``kappa = pi^{-1/2} e^{z^2+w^2} int_E e^{-u^2} sin(2u(z-w)) du/u``.

    ``E`` is symmetric; pass ``a`` for E = (-a, a) or ``intervals`` as a list
    of positive intervals ``[(lo, hi), ...]`` whose mirror images complete E.
    """

    def __init__(self, a=None, intervals=None, n_nodes=48):
        if intervals is None:
            if a is None or not (0 < a < math.inf):
                raise DomainError("need finite a > 0 or explicit intervals")
            intervals = [(0.0, float(a))]
        self.intervals = [(float(lo), float(hi)) for lo, hi in intervals]
        for lo, hi in self.intervals:
            if not (0 <= lo < hi < math.inf):
                raise DomainError("intervals must satisfy 0 <= lo < hi < inf")
        nodes, weights = [], []
        for lo, hi in self.intervals:
            # panels of width <= 0.5 keep the oscillatory factor resolved
            npan = max(1, int(math.ceil((hi - lo) / 0.5)))
            for p in range(npan):
                x, wt = gauss_legendre(n_nodes // 2, lo + (hi - lo) * p / npan,
                                       lo + (hi - lo) * (p + 1) / npan)
                nodes.append(x)
                weights.append(wt)
        self._u = np.concatenate(nodes)
        self._wu = np.concatenate(weights)

    @property
    def a(self):
        return self.intervals[-1][1] if len(self.intervals) == 1 else None

    def spectral_density(self, u):
        """J-hat(u) = (2 sqrt(pi)/i) e^{-u^2/4} / u on 2E (zero elsewhere)."""
        u = np.asarray(u, dtype=float)
        half = np.abs(u) / 2
        inside = np.zeros(u.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (half > lo) & (half < hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (2 * _SQRT_PI / 1j) * np.exp(-u * u / 4) / u
        return np.where(inside, val, 0.0)

    def profile(self, d):
        """Psi(d) = pi^{-1/2} int_E e^{-u^2} sin(2ud)/u du."""
        d = _c(d)
        flat = d.ravel()
        u = self._u
        out = np.empty(flat.shape, dtype=complex)
        for start in range(0, flat.size, 4096):
            dd = flat[start:start + 4096, None]
            arg = 2 * u[None, :] * dd
            # sin(x)/u, with the u -> 0 limit 2d handled by sinc
            vals = np.sinc(arg / math.pi) * 2 * dd
            out[start:start + 4096] = (vals * (np.exp(-u * u) * self._wu)).sum(axis=1)
        return (2.0 / _SQRT_PI * out).reshape(d.shape)

    def weight_exponent(self, z):
        z = _c(z)
        return -(z * np.conj(z)).real

    def evaluate(self, z, w):
        z, w = np.broadcast_arrays(_c(z), _c(w))
        return np.exp(z * z + w * w) * self.profile(z - w)

    def weighted(self, z, w):
        z, w = np.broadcast_arrays(_c(z), _c(w))
        return np.exp(_gauss_phase(z) + _gauss_phase(w)) * self.profile(z - w)

    def density(self, z):
        """(2/(sqrt(pi) i)) y e^{-4y^2} int_E e^{-u^2} sin(4iyu) du/u."""
        z = _c(z)
        y = z.imag
        return np.real((np.conj(z) - z) * np.exp(-4 * y * y) * self.profile(2j * y))


def kappa_translation_invariant(a, z, w):
    return TranslationInvariantKernel(a).evaluate(z, w)


# --------------------------------------------------------------------------
# Mittag-Leffler kernels
# --------------------------------------------------------------------------

def _log_ratio_products(lam, c, K):
    """log|A_k| for k < K and log|B_l| for l < K (with signs).

    A_k = prod_{j=0}^k Gamma((2j+1+c)/lam) / Gamma((2j+2+c)/lam)
    B_l = prod_{j=1}^l Gamma((2j+c)/lam) / Gamma((2j-1+c)/lam) / Gamma((2l+1+c)/lam)
    """
    j = np.arange(K)
    n1, s1 = lgamma_sign((2 * j + 1 + c) / lam)
    n2, s2 = lgamma_sign((2 * j + 2 + c) / lam)
    logA = np.cumsum(n1 - n2)
    sA = np.cumprod(s1 * s2)
    # B_l: prod over j = 1..l of Gamma((2j+c)/lam)/Gamma((2j-1+c)/lam)
    jj = np.arange(1, K)
    m1, t1 = lgamma_sign((2 * jj + c) / lam)
    m2, t2 = lgamma_sign((2 * jj - 1 + c) / lam)
    logP = np.concatenate([[0.0], np.cumsum(m1 - m2)])
    sP = np.concatenate([[1.0], np.cumprod(t1 * t2)])
    lg, sg = lgamma_sign((2 * j + 1 + c) / lam)
    logB = logP - lg
    sB = sP * sg
    return logA, sA, logB, sB


class MittagLefflerKernel(PreKernelHandle):
    """Limiting pre-kernel at the origin of the Mittag-Leffler ensemble.

    Representations
    ---------------
    general_series
        kappa~ = G~(z,w) - G~(w,z) from the double power series (any lambda).
    integer_m_wronskian
        Integral over s in [0, 1] built from g_{j,m} and their Wronskians
        (lambda = 1/m).
    m1_closed_integer_c
        Error-function closed forms (lambda = 1, c a non-negative integer).
    m1_integral
        Single integral with E_{2,1+c} (lambda = 1).
    m2_bessel
        Integral with modified Bessel functions (lambda = 1/2).
    m2_special
        Trigonometric integral (lambda = 1/2, c in {0, -1/2}).
    """

    REPRESENTATIONS = ("general_series", "integer_m_wronskian", "m1_closed_integer_c",
                       "m1_integral", "m2_bessel", "m2_special")

    def __init__(self, lam, c, representation="general_series", K=80,
                 n_s=64, g_terms=60):
        if lam <= 0:
            raise DomainError("lambda must be positive")
        if c <= -1:
            raise DomainError("c must exceed -1")
        if representation not in self.REPRESENTATIONS:
            raise DomainError(f"unknown representation {representation!r}")
        m = 1.0 / lam
        is_int_m = abs(m - round(m)) < 1e-12
        if representation == "integer_m_wronskian" and not is_int_m:
            raise DomainError("integer_m_wronskian requires lambda = 1/m")
        if representation in ("m1_closed_integer_c",) and not (
                lam == 1 and c >= 0 and float(c).is_integer()):
            raise DomainError("m1_closed_integer_c requires lambda = 1, integer c >= 0")
        if representation == "m1_integral" and lam != 1:
            raise DomainError("m1_integral requires lambda = 1")
        if representation == "m2_bessel" and lam != 0.5:
            raise DomainError("m2_bessel requires lambda = 1/2")
        if representation == "m2_special" and not (lam == 0.5 and c in (0.0, -0.5)):
            raise DomainError("m2_special requires lambda = 1/2 and c in {0, -1/2}")
        self.lam = float(lam)
        self.c = float(c)
        self.m = int(round(m)) if is_int_m else None
        self.representation = representation
        self.K = int(K)
        self.n_s = n_s
        self.g_terms = g_terms
        if representation == "general_series":
            self._series = _SeriesCache(self.lam, self.c, self.K)

    # -- weight and scaling ------------------------------------------------

    def weight_exponent(self, z):
        z = _c(z)
        return -np.abs(z) ** (2 * self.lam) / self.lam

    def _scaled_arg(self, z):
        return math.sqrt(2 / self.lam) * _power(z, self.lam)

    def _check_branch(self, z):
        if self.lam != 1 and np.any((z.imag == 0) & (z.real < 0)):
            raise DomainError("argument on the branch cut (negative real axis)")

    def evaluate(self, z, w):
        z, w = np.broadcast_arrays(_c(z), _c(w))
        return self._evaluate(z, w, np.zeros(z.shape))

    def weighted(self, z, w):
        z, w = np.broadcast_arrays(_c(z), _c(w))
        return self._evaluate(z, w, self.weight_exponent(z) + self.weight_exponent(w))

    def _evaluate(self, z, w, log_weight):
        self._check_branch(z)
        self._check_branch(w)
        rep = self.representation
        if rep in ("m1_closed_integer_c", "m1_integral", "m2_bessel", "m2_special"):
            val = getattr(self, "_" + rep)(z, w)
            return np.exp(log_weight) * val
        lam = self.lam
        pref = (2 / lam) ** (1 / (2 * lam)) * _power(z, lam - 1) * _power(w, lam - 1)
        Z, W = self._scaled_arg(z), self._scaled_arg(w)
        if rep == "general_series":
            kt = self._series.kappa_tilde(Z, W, log_weight)
            return pref * kt
        kt = _kappa_tilde_wronskian(self.m, self.c, Z, W, self.n_s, self.g_terms)
        return np.exp(log_weight) * pref * kt

    # -- lambda = 1 --------------------------------------------------------

    def _m1_integral(self, z, w):
        # 2 (2zw)^c int_0^1 s^c (z e^{(1-s^2) z^2} - w e^{(1-s^2) w^2}) E_{2,1+c}((2szw)^2) ds
        c = self.c
        s, ws = _jacobi_unit(self.n_s, c)
        zz, ww = z[..., None], w[..., None]
        x = 2 * s * zz * ww
        E = mittag_leffler_2p(2.0, 1.0 + c, x * x, accuracy=_KERNEL_ACC, guard=False)
        body = zz * np.exp((1 - s * s) * zz * zz) - ww * np.exp((1 - s * s) * ww * ww)
        return 2 * _power(2 * z * w, c) * np.sum(ws * body * E, axis=-1)

    def _m1_closed_integer_c(self, z, w):
        c = int(self.c)
        sp = _SQRT_PI
        if c % 2 == 0:
            n = c // 2
            val = sp * np.exp(z * z + w * w) * erf_complex(z - w, "erf")
            for k in range(n):
                for l in range(k):
                    val = val + (w ** (2 * k) * z ** (2 * l + 1) - z ** (2 * k) * w ** (2 * l + 1)) \
                        / (math.factorial(k) * pochhammer(0.5, l + 1))
            sz = sum(z ** (2 * k) / math.factorial(k) for k in range(n))
            sw = sum(w ** (2 * k) / math.factorial(k) for k in range(n))
            val = val + sp * np.exp(w * w) * erf_complex(w, "erf") * sz \
                - sp * np.exp(z * z) * erf_complex(z, "erf") * sw
            return val
        n = (c + 1) // 2
        val = sp * np.exp(z * z + w * w) * (erf_complex(z - w, "erf") - erf_complex(z, "erf")
                                            + erf_complex(w, "erf"))
        top = (c - 1) // 2
        for k in range(1, top + 1):
            for l in range(1, k):
                val = val + (w ** (2 * k - 1) * z ** (2 * l) - z ** (2 * k - 1) * w ** (2 * l)) \
                    / (math.factorial(l) * pochhammer(0.5, k))
        sz = sum(z ** (2 * k - 1) / pochhammer(0.5, k) for k in range(1, top + 1))
        sw = sum(w ** (2 * k - 1) / pochhammer(0.5, k) for k in range(1, top + 1))
        val = val + (np.exp(w * w) - 1) * sz - (np.exp(z * z) - 1) * sw
        del n
        return val

    # -- lambda = 1/2 ------------------------------------------------------

    def _m2_bessel(self, z, w):
        # pi 2^{7/2} (16zw)^c int_0^1 s^c (z h_s(z) - w h_s(w)) E_{4,2+2c}((16szw)^2) ds
        # h_s splits into an analytic part and s^{1/2} times an analytic part,
        # each integrated with its own Gauss-Jacobi weight
        c = self.c
        zz, ww = z[..., None], w[..., None]

        def part(beta, nu, shift):
            s, ws = _jacobi_unit(self.n_s, beta)
            x = 16 * s * zz * ww
            E = mittag_leffler_2p(4.0, 2.0 + 2 * c, x * x, accuracy=_KERNEL_ACC, guard=False)

            def h(v):
                return s ** shift * bessel_i(nu, 2 * s * v, guard=False) \
                    * bessel_i(-nu, 2 * v, guard=False)
            return np.sum(ws * (zz * h(zz) - ww * h(ww)) * E, axis=-1)

        integ = part(c, -0.25, 0.25) - part(c + 0.5, 0.25, -0.25)
        return math.pi * 2 ** 3.5 * _power(16 * z * w, c) * integ

    def _m2_special(self, z, w):
        # theta = (pi/2) t^2 removes the (sin theta)^{-1/2} endpoint singularity
        t, wt = gauss_legendre(self.n_s)
        t = 0.5 * (t + 1)
        wt = 0.5 * wt
        theta = 0.5 * math.pi * t * t
        jac = math.pi * t
        with np.errstate(divide="ignore", invalid="ignore"):
            sin_fac = np.where(t > 0, jac / np.sqrt(np.sin(theta)), 0.0)
        r = np.sqrt(z)[..., None] * np.sqrt(w)[..., None]
        arg = 4 * r * np.sin(theta)
        first = np.sinh(arg) if self.c == 0 else np.cosh(arg)
        second = np.sinh(2 * (z - w)[..., None] * np.cos(theta))
        integ = np.sum(wt * sin_fac * first * second, axis=-1)
        return 2 / (np.sqrt(z) * np.sqrt(w)) * integ


def _power(z, p):
    """Principal z^p with 0^p = 0 for p > 0."""
    z = _c(z)
    if p == 0:
        return np.ones(z.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(p * np.log(z))
    if p > 0:
        out = np.where(z == 0, 0.0, out)
    return out


@lru_cache(maxsize=64)
def _jacobi_unit_cached(n, beta):
    x, w = roots_jacobi(n, 0.0, beta)
    s = 0.5 * (x + 1.0)
    w = w / 2.0 ** (beta + 1.0)
    return s, w


def _jacobi_unit(n, beta):
    """Nodes/weights for int_0^1 s^beta f(s) ds (Gauss-Jacobi)."""
    return _jacobi_unit_cached(int(n), float(beta))


class _SeriesCache:
    """Coefficients of G~ with cached partial sums in l."""

    def __init__(self, lam, c, K):
        self.lam, self.c, self.K = lam, c, K
        self.logA, self.sA, self.logB, self.sB = _log_ratio_products(lam, c, K)
        self.alpha_z = (2 + c) / lam - 1      # exponent of z in G~(z, .) at k = 0
        self.alpha_w = (1 + c) / lam - 1      # exponent of w at l = 0
        self.step = 2 / lam

    def G(self, x, y, log_weight):
        """e^{log_weight} G~(x, y) with running log-scaled inner sums."""
        lx = _log_safe(x)
        ly = _log_safe(y)
        K = self.K
        m = np.full(x.shape, -np.inf)
        s = np.zeros(x.shape, dtype=complex)
        tot = np.zeros(x.shape, dtype=complex)
        last = np.zeros(x.shape)
        for k in range(K):
            eb = self.logB[k] + (self.alpha_w + self.step * k) * ly
            m_new = np.maximum(m, eb.real)
            with np.errstate(invalid="ignore", over="ignore"):
                s = np.where(np.isfinite(m), s * np.exp(m - m_new), 0.0) \
                    + self.sB[k] * np.exp(eb - m_new)
            m = np.where(np.isfinite(m_new), m_new, m)
            ea = self.logA[k] + (self.alpha_z + self.step * k) * lx + m + log_weight
            with np.errstate(over="ignore", invalid="ignore"):
                term = self.sA[k] * np.exp(ea) * s
            term = np.where(np.isfinite(ea.real) | (ea.real > 0), term, 0.0)
            tot = tot + term
            last = np.abs(term)
        scale = np.abs(tot)
        if np.any(last > 1e-13 * np.maximum(scale, 1e-300) + 1e-300):
            bad = last > 1e-13 * np.maximum(scale, 1e-300)
            if self.K < 2000 and np.any(bad & (last > 1e-15)):
                bigger = _SeriesCache(self.lam, self.c, 2 * self.K)
                return bigger.G(x, y, log_weight)
        return tot

    def kappa_tilde(self, Z, W, log_weight):
        return self.G(Z, W, log_weight) - self.G(W, Z, log_weight)

    def series_in_z(self, w, part):
        """G~(., w) (part='first') or G~(w, .) (part='second') as a GPS in z."""
        K = self.K
        lw = complex(np.log(complex(w)))
        A = self.sA * np.exp(self.logA)
        B = self.sB * np.exp(self.logB)
        if part == "first":
            wl = np.exp((self.alpha_w + self.step * np.arange(K)) * lw)
            inner = np.cumsum(B * wl)
            return GeneralizedPowerSeries(self.alpha_z, self.step, A * inner)
        if part == "second":
            wk = np.exp((self.alpha_z + self.step * np.arange(K)) * lw)
            tail = np.cumsum((A * wk)[::-1])[::-1]
            return GeneralizedPowerSeries(self.alpha_w, self.step, B * tail)
        raise DomainError(part)


def _log_safe(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(_c(x))


# -- Wronskian representation for lambda = 1/m -------------------------------

@lru_cache(maxsize=32)
def g_series(j, m, terms=60):
    """Ascending polynomial coefficients of g_{j,m}(z) = z^{j-1} E_{m,2,1+(j-1)/m}(z^{2m})."""
    if not 1 <= j <= m:
        raise DomainError("need 1 <= j <= m")
    deg = 2 * m * (terms - 1) + j - 1
    coef = np.zeros(deg + 1)
    logc = 0.0
    for k in range(terms):
        coef[2 * m * k + j - 1] = math.exp(logc)
        logc += math.lgamma(2 * m * k + m + j) - math.lgamma(2 * m * k + 2 * m + j)
        if logc < -745:
            break
    return coef


def g_function(j, m, z, derivative=0, terms=60):
    coef = g_series(j, m, terms)
    if derivative:
        coef = np.polynomial.polynomial.polyder(coef, derivative)
    return np.polynomial.polynomial.polyval(_c(z), coef)


def g_function_ks(j, m, z):
    """Same function through the Kilbas-Saigo routine (for cross-checks)."""
    z = _c(z)
    return _power(z, j - 1) * kilbas_saigo(m, 2, 1 + (j - 1) / m, z ** (2 * m))


def wronskian(funcs_idx, m, z, terms=60):
    """Wronskian of the g_{j,m}, j in funcs_idx, at the points z."""
    z = _c(z)
    n = len(funcs_idx)
    if n == 0:
        return np.ones(z.shape, dtype=complex)
    M = np.empty(z.shape + (n, n), dtype=complex)
    for col, j in enumerate(funcs_idx):
        for row in range(n):
            M[..., row, col] = g_function(j, m, z, row, terms)
    return np.linalg.det(M)


def F_mc(m, c, x):
    """F_{m,c}(x) = x^{m(1+c)-1} E_{2m, m(1+c)}(x^{2m})."""
    x = _c(x)
    return _power(x, m * (1 + c) - 1) * mittag_leffler_2p(
        2.0 * m, m * (1.0 + c), x ** (2 * m), accuracy=_KERNEL_ACC, guard=False)


def _kappa_tilde_wronskian(m, c, Z, W, n_s, terms):
    beta = m * (1 + c) - 1
    s, ws = _jacobi_unit(n_s, beta)
    ZZ, WW = Z[..., None], W[..., None]
    x = s * ZZ * WW
    # F_{m,c}(x) / s^beta, the s^beta being carried by the Gauss-Jacobi weight
    Fred = _power(ZZ * WW, beta) * mittag_leffler_2p(
        2.0 * m, m * (1.0 + c), x ** (2 * m), accuracy=_KERNEL_ACC, guard=False)
    if m == 1:
        body = ZZ * np.exp(0.5 * (1 - s * s) * ZZ * ZZ) - WW * np.exp(0.5 * (1 - s * s) * WW * WW)
        return np.sum(ws * body * Fred, axis=-1)
    total = 0.0
    for j in range(1, m + 1):
        others = tuple(i for i in range(1, m + 1) if i != j)
        gz = g_function(j, m, ZZ, 0, terms)
        gw = g_function(j, m, WW, 0, terms)
        Wz = wronskian(others, m, s * ZZ, terms)
        Ww = wronskian(others, m, s * WW, terms)
        total = total + (-1) ** (m - j) * (ZZ * gz * Wz - WW * gw * Ww)
    return np.sum(ws * total * Fred, axis=-1) / barnes_g(m + 1)


def kappa_ml(kernel, z, w):
    return kernel.evaluate(z, w)


def limit_correlation(kernel, points):
    """k-point function of a limiting kernel: prod(prefactor) * Pf[kernel]."""
    return correlation(kernel, points)


__all__ = [
    "limit_correlation", "EdgeFamilyKernel", "CrossoverKernel", "TranslationInvariantKernel",
    "MittagLefflerKernel", "kappa_edge_family", "kappa_translation_invariant",
    "kappa_ml", "crossover_kernels", "complex_edge_kernel", "bulk_density",
    "g_function", "g_function_ks", "wronskian", "F_mc", "DEFAULT_QUAD",
]
