"""Quadrature, generalised power series and finite-difference derivatives.

The area measure is ``dA = d^2 z / pi`` everywhere, so the Gaussian
``exp(-|w|^2)`` integrates to one over the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError
from .specfun import lgamma_sign


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 12
    semi_infinite_cutoff: float = 6.0

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-2):
                raise DomainError(f"{name} must lie in (0, 1e-2], got {v}")
        if self.semi_infinite_cutoff < 4:
            raise DomainError("semi_infinite_cutoff must be >= 4")
        if self.max_depth < 1:
            raise DomainError("max_depth must be positive")


DEFAULT_QUAD = QuadratureSpec()

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre nodes and weights on [a, b]."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    x, w = _GL_CACHE[n]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


# --------------------------------------------------------------------------
# Generalised power series  f(z) = sum_k c_k z^(alpha0 + k delta)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneralizedPowerSeries:
    base_exponent: float
    step: float
    coefficients: np.ndarray
    dropped: tuple = field(default=(), compare=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size < 2:
            raise DomainError("need at least two coefficients (K >= 1)")
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite coefficient")
        if self.step <= 0:
            raise DomainError("step must be positive")
        object.__setattr__(self, "coefficients", c)

    @property
    def K(self):
        return self.coefficients.size - 1

    @property
    def exponents(self):
        return self.base_exponent + self.step * np.arange(self.coefficients.size)


def _neumaier(terms, axis=-1):
    """Compensated sum along ``axis``."""
    terms = np.moveaxis(terms, axis, 0)
    s = np.zeros(terms.shape[1:], dtype=terms.dtype)
    comp = np.zeros_like(s)
    for t in terms:
        tot = s + t
        big = np.abs(s) >= np.abs(t)
        comp = comp + np.where(big, (s - tot) + t, (t - tot) + s)
        s = tot
    return s + comp


def gps_eval(series, z):
    """Evaluate a generalised power series at ``z`` (principal branch)."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    beta = series.exponents
    c = series.coefficients
    nz = c != 0
    if np.any(z == 0) and np.any(beta[nz] < 0):
        raise DomainError("z = 0 with a negative exponent")
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.log(z)[..., None]
        powers = np.exp(beta * logz)
    # 0^0 = 1, 0^beta = 0 for beta > 0
    zero = (z == 0)[..., None]
    powers = np.where(zero, np.where(beta == 0, 1.0, 0.0), powers)
    out = _neumaier(np.where(nz, c * powers, 0.0))
    return out.item() if scalar else out


def gps_caputo(series, nu, convention="caputo"):
    """Term-wise fractional derivative of order ``nu``.

    ``D^nu z^b = Gamma(b+1)/Gamma(b-nu+1) z^(b-nu)``.  With
    ``convention="caputo"`` non-negative integer exponents below ``ceil(nu)``
    are annihilated (constants have zero Caputo derivative).  With
    ``convention="power_rule"`` the Gamma ratio is applied to every term,
    which is the Riemann-Liouville action on monomials; the two differ only
    for non-integer ``nu``.  Exponents in (-1, 0) are accepted.  A term whose
    exponent sits on a pole of Gamma(b+1) is dropped and its index recorded
    in ``dropped``.
    """
    if nu <= 0:
        raise DomainError("Caputo order must be positive")
    if convention not in ("caputo", "power_rule"):
        raise DomainError(f"unknown convention {convention!r}")
    beta = series.exponents
    c = series.coefficients
    live = c != 0
    if np.any(beta[live] <= -1):
        raise DomainError("Caputo rule needs exponents > -1")
    ln, sn = lgamma_sign(beta + 1.0)
    ld, sd = lgamma_sign(beta - nu + 1.0)
    with np.errstate(invalid="ignore", over="ignore"):
        ratio = np.where(sd == 0, 0.0, sn * sd * np.exp(ln - ld))
    if convention == "caputo":
        integer = (beta >= 0) & (beta == np.floor(beta)) & (beta < math.ceil(nu))
        ratio = np.where(integer, 0.0, ratio)
    bad = np.nonzero((sn == 0) & live)[0]
    ratio[bad] = 0.0
    return GeneralizedPowerSeries(series.base_exponent - nu, series.step,
                                  c * ratio, dropped=tuple(int(i) for i in bad))


# --------------------------------------------------------------------------
# Quadrature on intervals
# --------------------------------------------------------------------------

def _panel(f, a, b, n, with_abs=False):
    x, w = gauss_legendre(n, a, b)
    vals = np.asarray(f(x))
    val = np.tensordot(w, vals, axes=(0, 0))
    if with_abs:
        return val, np.tensordot(w, np.abs(vals), axes=(0, 0))
    return val


def _adaptive(f, a, b, spec, order=20):
    """Adaptive Gauss-Legendre: compare n- and 2n-point rules per panel."""
    stack = [(a, b, 0)]
    total = 0.0
    worst = 0.0
    failed = False
    while stack:
        lo, hi, depth = stack.pop()
        coarse = _panel(f, lo, hi, order)
        fine, mag = _panel(f, lo, hi, 2 * order, with_abs=True)
        diff = np.abs(fine - coarse)
        err = np.max(diff)
        scale = np.max(np.abs(fine))
        # tolerance share proportional to panel width
        share = (hi - lo) / (b - a)
        tol = max(spec.abs_tol * share, spec.rel_tol * scale * share)
        # below the rounding floor of the panel nothing more can be gained
        floor_ok = np.all(diff <= 1e3 * np.finfo(float).eps * mag)
        if err <= tol or floor_ok or depth >= spec.max_depth:
            if err > tol and not floor_ok:
                failed = True
            total = total + fine
            worst = max(worst, err)
            continue
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    return total, worst, failed


def integrate_interval(f, domain, spec=DEFAULT_QUAD, center=0.0, scale=1.0,
                       order=20):
    """Integrate a complex (possibly array-valued) function over an interval.

    Parameters
    ----------
    f : callable
        Vectorised in its argument: ``f(u)`` with ``u`` of shape (n,) returns
        an array whose first axis matches ``u``.
    domain : tuple
        ``("finite", a, b)``, ``("left", a)`` for (-inf, a], or ``("both",)``.
    center, scale : float
        Location and width of the Gaussian decay, used to truncate unbounded
        ends at ``center -/+ cutoff * scale``.

    Returns
    -------
    complex or ndarray
    """
    kind = domain[0]
    cut = spec.semi_infinite_cutoff * scale
    if kind == "finite":
        a, b = float(domain[1]), float(domain[2])
    elif kind == "left":
        b = float(domain[1])
        a = min(center, b) - cut
    elif kind == "both":
        a, b = center - cut, center + cut
    else:
        raise DomainError(f"unknown domain {domain!r}")
    if b <= a:
        if b == a:
            return 0.0 * _panel(f, a, a + 1.0, 2)
        raise DomainError("empty interval")
    val, err, failed = _adaptive(f, a, b, spec, order)
    if failed:
        raise AccuracyError(f"integrate_interval: estimated error {err:.3g} "
                            "exceeds tolerance at max_depth", partial=val)
    return val


# --------------------------------------------------------------------------
# Quadrature over the plane
# --------------------------------------------------------------------------

def _tensor_rule(x0, x1, y0, y1, panels, n):
    xs, wx = [], []
    for p in range(panels):
        a = x0 + (x1 - x0) * p / panels
        b = x0 + (x1 - x0) * (p + 1) / panels
        x, w = gauss_legendre(n, a, b)
        xs.append(x)
        wx.append(w)
    xs, wx = np.concatenate(xs), np.concatenate(wx)
    ys, wy = [], []
    for p in range(panels):
        a = y0 + (y1 - y0) * p / panels
        b = y0 + (y1 - y0) * (p + 1) / panels
        y, w = gauss_legendre(n, a, b)
        ys.append(y)
        wy.append(w)
    ys, wy = np.concatenate(ys), np.concatenate(wy)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return X + 1j * Y, np.outer(wx, wy)


def integrate_box(f, x0, x1, y0, y1, spec=DEFAULT_QUAD, n=16, panels=2):
    """Tensor Gauss-Legendre over a rectangle, refining until stable.

    Returns the integral with respect to ``dA = dx dy / pi``.
    """
    prev = None
    for _ in range(spec.max_depth):
        W, wts = _tensor_rule(x0, x1, y0, y1, panels, n)
        val = np.sum(wts * f(W)) / math.pi
        if prev is not None:
            err = abs(val - prev)
            if err <= max(spec.abs_tol, spec.rel_tol * abs(val)):
                return val
        prev = val
        panels *= 2
    raise AccuracyError("integrate_box: no convergence", partial=prev)


def integrate_plane(f, decay_center=0.0, spec=DEFAULT_QUAD, gamma=1.0):
    """Integrate ``f`` over the plane against ``dA = d^2 w / pi``.

    ``f`` must be vectorised over complex arrays and decay like
    ``exp(-gamma |w - decay_center|^2)``.
    """
    h = spec.semi_infinite_cutoff * max(1.0, 1.0 / math.sqrt(gamma))
    c = complex(decay_center)
    return integrate_box(f, c.real - h, c.real + h, c.imag - h, c.imag + h, spec)


def integrate_disk_polar(f, center, radius, n_r=32, n_t=64, singular=False):
    """Integral of ``f`` over a disk against dA, in polar coordinates.

    With ``singular=True`` the integrand is assumed to carry a factor
    ``1/(center - w)``: the caller passes ``f`` without that factor and the
    Jacobian ``r`` cancels it.
    """
    r, wr = gauss_legendre(n_r, 0.0, radius)
    t = 2 * math.pi * np.arange(n_t) / n_t
    wt = 2 * math.pi / n_t
    R, T = np.meshgrid(r, t, indexing="ij")
    e = np.exp(1j * T)
    W = center + R * e
    vals = f(W)
    if singular:
        # r dr dtheta / (center - w) = -e^{-i theta} dr dtheta
        integrand = -vals / e
    else:
        integrand = vals * R
    return np.sum(wr[:, None] * wt * integrand) / math.pi


# --------------------------------------------------------------------------
# Finite differences
# --------------------------------------------------------------------------

def _central(F, z, h, direction):
    return (F(z + h * direction) - F(z - h * direction)) / (2 * h)


def _second(F, z, h, direction, f0):
    return (F(z + h * direction) - 2 * f0 + F(z - h * direction)) / (h * h)


def complex_derivatives(F, z, which="dbar", h=1e-3):
    """Wirtinger derivatives by Richardson-extrapolated central differences.

    ``which`` is ``"d"``, ``"dbar"`` or ``"laplacian_quarter"`` (the latter is
    d dbar F = (F_xx + F_yy) / 4).
    """
    if not (1e-5 <= h <= 1e-2):
        raise DomainError("h must lie in [1e-5, 1e-2]")
    z = complex(z)

    def G(p):
        v = F(p)
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite sample at {p}")
        return v

    if which in ("d", "dbar"):
        def rich(d):
            return (4 * _central(G, z, h / 2, d) - _central(G, z, h, d)) / 3
        fx = rich(1.0)
        fy = rich(1j)
        sign = -1j if which == "d" else 1j
        return 0.5 * (fx + sign * fy)
    if which == "laplacian_quarter":
        f0 = G(z)

        def rich2(d):
            return (4 * _second(G, z, h / 2, d, f0) - _second(G, z, h, d, f0)) / 3
        return 0.25 * (rich2(1.0) + rich2(1j))
    raise DomainError(f"unknown derivative {which!r}")
