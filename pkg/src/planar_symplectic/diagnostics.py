"""Residuals of the functional equations satisfied by the kernels.

Every check returns plain floats or a :class:`ResidualReport`; nothing here
asserts, so the same functions drive the tests, the CLI ``verify`` command
and ad-hoc exploration.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .finite_kernels import (FinitePreKernel, PreKernelHandle, RadialPotential,
                             RescaledPreKernel, ScalingWindow, _double_sum,
                             _log_double_factorial, correlation, density,
                             micro_scale, skew_orthogonal_basis)
from .limit_kernels import (CrossoverKernel, EdgeFamilyKernel, _SeriesCache,
                            complex_edge_kernel, wronskian)
from .numerics import (QuadratureSpec, _tensor_rule, complex_derivatives,
                       gauss_legendre, gps_caputo, gps_eval, integrate_box)
from .specfun import (barnes_g, erf_complex, kilbas_saigo, mittag_leffler_2p,
                      regularized_gamma, rgamma, gamma)


@dataclass
class ResidualReport:
    label: str
    points: list
    residuals: list
    tolerance_used: float
    max_residual: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.residuals = [float(r) for r in self.residuals]
        self.points = [complex(p) for p in self.points]
        if len(self.points) != len(self.residuals):
            raise DomainError("points and residuals differ in length")
        self.max_residual = max(self.residuals) if self.residuals else 0.0
        self.passed = bool(self.max_residual <= self.tolerance_used)

    def to_dict(self):
        return {
            "label": self.label,
            "tolerance": self.tolerance_used,
            "points": [{"re": p.real, "im": p.imag, "residual": r}
                       for p, r in zip(self.points, self.residuals)],
            "max_residual": self.max_residual,
            "passed": self.passed,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


# --------------------------------------------------------------------------
# Berezin kernel and mass-one
# --------------------------------------------------------------------------

def berezin(kernel: PreKernelHandle, z, w):
    """B(z, w) = R(z) R(w) - R_2(z, w), divided by R(z).

    Written through weighted kernel entries so that the same code serves
    limiting and finite (rescaled) kernels.
    """
    z = complex(z)
    zp = complex(kernel.partner(z))
    if zp == z:
        raise DomainError("Berezin kernel needs z off the symmetry axis")
    w = np.asarray(w, dtype=complex)
    wp = kernel.partner(w)
    m12 = complex(kernel.weighted(z, zp))
    m13 = kernel.weighted(z, w)
    m24 = kernel.weighted(zp, wp)
    m14 = kernel.weighted(z, wp)
    m23 = kernel.weighted(zp, w)
    if m12 == 0:
        raise DomainError("vanishing diagonal entry")
    val = kernel.prefactor(w) * (m13 * m24 - m14 * m23) / m12
    return val.item() if val.ndim == 0 else val


def _real_ish(v):
    return np.real(v)


def _composite(a, b, panel, n):
    P = max(1, int(math.ceil((b - a) / panel)))
    xs, ws = [], []
    for p in range(P):
        x, w = gauss_legendre(n, a + (b - a) * p / P, a + (b - a) * (p + 1) / P)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _edge_line(kernel):
    """Real part of the boundary line for kernels with an edge, else None."""
    if isinstance(kernel, EdgeFamilyKernel) and math.isfinite(kernel.a):
        return kernel.a
    return None


def berezin_mass(kernel, z, half_width=6.0, panel=1.0, nodes=8, spec=None):
    """int B(z, w) dA(w).

    Kernels with a boundary line (edge family with finite ``a``) have a
    Berezin kernel that decays only like ``1/Im(w)^2`` along that line.  For
    them the integral runs over a fixed composite rule up to ``|Im w| = H``
    and the remainder is added from a fit ``c/Y^2 + d/Y^3 + e/Y^4`` of the
    horizontal line integrals at ``Y = H, 1.25H, 1.5H``.  Other kernels decay
    like a Gaussian and use the adaptive box rule.
    """
    z = complex(z)
    edge = _edge_line(kernel)
    if edge is None:
        spec = spec or QuadratureSpec(abs_tol=1e-9, rel_tol=1e-9, max_depth=6)

        def f(W):
            return np.real(berezin(kernel, z, W))
        h = half_width
        return float(integrate_box(f, z.real - h, z.real + h, z.imag - h, z.imag + h, spec))
    x, wx = _composite(min(z.real, edge) - half_width, max(z.real, edge) + half_width,
                       panel, nodes)
    H = abs(z.imag) + half_width
    y, wy = _composite(-H, H, panel, nodes)
    X, Y = np.meshgrid(x, y, indexing="ij")
    B = np.real(berezin(kernel, z, (X + 1j * Y).ravel())).reshape(X.shape)
    total = float(np.sum(np.outer(wx, wy) * B)) / math.pi
    Ys = H * np.array([1.0, 1.25, 1.5])
    A = np.stack([Ys ** -2, Ys ** -3, Ys ** -4], axis=1)
    for sgn in (1.0, -1.0):
        L = np.array([np.sum(wx * np.real(berezin(kernel, z, x + 1j * sgn * Yv)))
                      for Yv in Ys]) / math.pi
        c, d, e = np.linalg.solve(A, L)
        total += c / H + d / (2 * H ** 2) + e / (3 * H ** 3)
    return total


def mass_one_residual(kernel, z, **kw):
    """|int B(z, w) dA(w) - 1|; keyword arguments go to :func:`berezin_mass`."""
    return abs(berezin_mass(kernel, z, **kw) - 1.0)


# --------------------------------------------------------------------------
# Ward's equation
# --------------------------------------------------------------------------

def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
    return a / (a + b)


class CauchyTransform:
    """C(z) = int B(z, w)/(z - w) dA(w) with a rule attached to ``z``.

    The plane is split by a smooth partition of unity chi(|w - z|): chi = 1
    on the disk of radius ``rho`` and 0 outside ``2 rho``.  The chi part is
    integrated in polar coordinates (which absorb the 1/(z-w) singularity),
    the rest on a tensor Gauss-Legendre box.  Node offsets are relative to
    ``z``, so nearby evaluations share one rule and finite differences see
    smooth quadrature error.
    """

    def __init__(self, kernel, rho=0.5, half_width=7.0, n_r=40, n_t=64,
                 box_n=16, box_panels=16):
        self.kernel = kernel
        self.rho = rho
        r, wr = gauss_legendre(n_r, 0.0, 2 * rho)
        t = 2 * math.pi * np.arange(n_t) / n_t
        R, T = np.meshgrid(r, t, indexing="ij")
        e = np.exp(1j * T)
        chi = 1.0 - _smooth_step((R - rho) / rho)
        # r dr dtheta / (z - w) = -e^{-i theta} dr dtheta, then / pi
        self._polar_off = (R * e).ravel()
        self._polar_w = (-(wr[:, None] * (2 * math.pi / n_t)) * chi / e).ravel() / math.pi
        W, wts = _tensor_rule(-half_width, half_width, -half_width, half_width,
                              box_panels, box_n)
        W = W.ravel()
        wts = wts.ravel()
        r_abs = np.abs(W)
        outer = _smooth_step((r_abs - rho) / rho)
        keep = outer > 0
        self._box_off = W[keep]
        self._box_w = (wts[keep] * outer[keep] / (-W[keep])) / math.pi

    def __call__(self, z):
        z = complex(z)
        wp = z + self._polar_off
        wb = z + self._box_off
        B1 = berezin(self.kernel, z, wp)
        B2 = berezin(self.kernel, z, wb)
        return np.sum(self._polar_w * B1) + np.sum(self._box_w * B2)


def _limit_density(kernel, z):
    return float(np.real(density(kernel, np.asarray([complex(z)]))[0]))


def ward_residual(kernel, z, mode="limit", potential=None, window=None,
                  h=1e-3, cauchy=None):
    """|dbar C - [R - 1 - (1/2) d dbar log R + 1/(z - zbar)^2]|.

    In ``mode="finite"`` the constant 1 is replaced by
    ``N r^2 Delta Q(p + r z) / 2`` (Delta = d dbar), computed from
    ``potential`` and ``window``; this is implemented for the Gaussian
    potential only.
    """
    z = complex(z)
    for p in (z + h, z - h, z + 1j * h, z - 1j * h):
        if complex(kernel.partner(p)) == p:
            raise DomainError("stencil point on the symmetry axis")
    C = cauchy or CauchyTransform(kernel)
    dbarC = complex_derivatives(C, z, "dbar", h)

    def logR(p):
        return math.log(_limit_density(kernel, p))

    R = _limit_density(kernel, z)
    lap = complex_derivatives(logR, z, "laplacian_quarter", h)
    if mode == "limit":
        mid = 1.0
    elif mode == "finite":
        if potential is None or window is None:
            raise DomainError("finite mode needs potential and window")
        if potential.kind != "gaussian":
            raise DomainError("finite Ward check is restricted to the Gaussian potential")
        r = window.micro_scale
        mid = potential.N * r * r / 2 * float(potential.laplacian_Q(window.to_zeta(z)))
    else:
        raise DomainError(f"unknown mode {mode!r}")
    zp = complex(kernel.partner(z))
    rhs = R - mid - 0.5 * lap + 1.0 / (z - zp) ** 2
    return abs(dbarC - rhs)


# --------------------------------------------------------------------------
# Differential identities
# --------------------------------------------------------------------------

def _edge_hat(z, w, kern):
    return np.exp(-2 * z * w) * kern.evaluate(z, w)


def _edge_ode(z, w):
    kern = EdgeFamilyKernel(0.0)
    khat = complex(_edge_hat(z, w, kern))
    lhs = complex_derivatives(lambda p: complex(_edge_hat(p, w, kern)), z, "d", 1e-3)
    t1 = 2 * (z - w) * khat
    t2 = complex(erf_complex(z + w, "erfc"))
    t3 = complex(np.exp((z - w) ** 2 - 2 * z * z) * erf_complex(math.sqrt(2) * w, "erfc")
                 / math.sqrt(2))
    return abs(lhs - (t1 + t2 - t3)) / max(1.0, abs(lhs), abs(t1), abs(t2), abs(t3))


def _finite_gaussian_ode(N, z, w):
    if not (1 <= N <= 256):
        raise DomainError("finite_gaussian needs 1 <= N <= 256")
    sN = math.sqrt(N)
    A = np.asarray([math.sqrt(2 * N) + math.sqrt(2) * z], dtype=complex)
    B = np.asarray([math.sqrt(2 * N) + math.sqrt(2) * w], dtype=complex)
    ldf = np.vectorize(_log_double_factorial, otypes=[float])
    k = np.arange(N)
    la = -ldf(2 * k + 1)
    lb = -ldf(2 * k)
    la_d = -ldf(2 * k - 1)
    L = np.asarray([-2 * (sN + z) * (sN + w)], dtype=complex)
    # kappa_hat = e^L (G(z,w) - G(w,z)), G(x,y) = sqrt2 sum A^{2k+1}/(2k+1)!! sum B^{2l}/(2l)!!
    Gzw = _double_sum(la, lb, A, B, L)
    Gwz = _double_sum(la, lb, B, A, L)
    khat = math.sqrt(2) * (Gzw - Gwz)
    # exact term-wise z-derivatives
    dGzw = 2 * _double_sum(la_d, lb, A, B, L) / A
    diag = np.exp(la + lb + (2 * k + 1) * np.log(B[0]) + 2 * k * np.log(A[0]) + L[0]).sum()
    dGwz = 2 * A * (Gwz - diag)
    lhs = -2 * (sN + w) * khat + (dGzw - dGwz)
    lam = 2 * (sN + z) * (sN + w)
    lam_t = (sN + w) ** 2
    t1 = 2 * (z - w) * khat
    t2 = 2 * regularized_gamma(2 * N, lam, mode="Q_int")
    logpref = (z - w) ** 2 - (sN + z) ** 2 + 2 * N * np.log(A[0]) - _log_double_factorial(2 * N - 1)
    t3 = 2 * np.exp(logpref) * regularized_gamma(N, lam_t, mode="Q_int")
    lhs = complex(lhs[0])
    rhs = complex(t1[0]) + complex(t2) - complex(t3)
    scale = max(1.0, abs(lhs), abs(complex(t1[0])), abs(complex(t2)), abs(complex(t3)))
    return abs(lhs - rhs) / scale


def fractional_cd_terms(lam, c, z, w, K=120):
    """Left and right sides of the fractional Christoffel-Darboux identity.

    The derivative acts term-wise with the Gamma-ratio rule on every term
    (``convention="power_rule"``).
    """
    z, w = complex(z), complex(w)
    sc = _SeriesCache(lam, c, K)
    g1 = sc.series_in_z(w, "first")
    g2 = sc.series_in_z(w, "second")
    nu = 1.0 / lam
    lhs = gps_eval(gps_caputo(g1, nu, "power_rule"), z) \
        - gps_eval(gps_caputo(g2, nu, "power_rule"), z)
    kt = gps_eval(g1, z) - gps_eval(g2, z)
    zw = z * w
    base = zw ** ((1 + c) / lam - 1)
    rhs = z ** nu * kt + base * complex(mittag_leffler_2p(nu, (1 + c) / lam, zw ** nu))
    coef = gamma((1 + c) / lam) * rgamma(c / lam) * rgamma((2 + c) / lam)
    if coef != 0:
        rhs -= coef * base * (w / z) ** nu * complex(kilbas_saigo(nu, 2, 3 + c - lam,
                                                                  w ** (2 / lam)))
    return complex(lhs), complex(rhs)


def ode_residual(which, z, w):
    """Scaled residual of one of the kernel differential identities.

    ``which`` is ``"edge_limit"``, ``("finite_gaussian", N)`` or
    ``("fractional_cd", lam, c)``.  The residual is divided by
    ``max(1, |terms|)``.
    """
    z, w = complex(z), complex(w)
    if which == "edge_limit":
        return _edge_ode(z, w)
    if isinstance(which, tuple) and which[0] == "finite_gaussian":
        return _finite_gaussian_ode(int(which[1]), z, w)
    if isinstance(which, tuple) and which[0] == "fractional_cd":
        lhs, rhs = fractional_cd_terms(float(which[1]), float(which[2]), z, w)
        return abs(lhs - rhs) / max(1.0, abs(lhs))
    raise DomainError(f"unknown identity {which!r}")


# --------------------------------------------------------------------------
# Identity checks
# --------------------------------------------------------------------------

def comb_identity_residual(m, c):
    lhs = sum(math.comb(m - 1, j - 1) * (-1) ** (m - j) / (2 * m + m * c - j)
              for j in range(1, m + 1)) / math.factorial(m - 1)
    rhs = math.exp(math.lgamma(m + m * c) - math.lgamma(2 * m + m * c))
    return abs(lhs - rhs)


def identity_checks(which, m=None, c=None, seed=0, tol=None):
    """Algebraic identities behind the Mittag-Leffler kernels.

    ``which``: ``"comb_identity"`` (needs ``m``, ``c``),
    ``"wronskian_const"`` (needs ``m``) or ``"q_asymptotic"``.
    """
    if which == "comb_identity":
        if not (1 <= m <= 5) or c <= -1:
            raise DomainError("comb_identity needs 1 <= m <= 5 and c > -1")
        r = comb_identity_residual(m, c)
        return ResidualReport(f"comb_identity(m={m}, c={c})", [complex(c)], [r],
                              tol if tol is not None else 1e-12)
    if which == "wronskian_const":
        if not (1 <= m <= 5):
            raise DomainError("wronskian_const needs 1 <= m <= 5")
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-1, 1, 10) + 1j * rng.uniform(-1, 1, 10)
        W = wronskian(tuple(range(1, m + 1)), m, pts)
        target = barnes_g(m + 1)
        res = np.abs(W - target) / target
        return ResidualReport(f"wronskian_const(m={m})", pts, res,
                              tol if tol is not None else 1e-9)
    if which == "q_asymptotic":
        a = 10 ** 4
        pts = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
        Q = regularized_gamma(a, a + math.sqrt(2 * a) * pts, mode="Q_int")
        ref = 0.5 * erf_complex(pts, "erfc")
        res = np.abs(Q - ref)
        return ResidualReport("q_asymptotic(a=1e4)", pts, res,
                              tol if tol is not None else 2e-2)
    raise DomainError(f"unknown identity {which!r}")


# --------------------------------------------------------------------------
# Crossover and convergence
# --------------------------------------------------------------------------

def crossover_ratio(t, z):
    """R_1^t(z) / K_edge^C(z, z)."""
    z = complex(z)
    R = correlation(CrossoverKernel(t), [z])
    K = complex_edge_kernel(z, z).real
    return R / float(K)


def grid_points(x0, x1, y0, y1, nx, ny):
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return xs, ys, X + 1j * Y


@dataclass
class ConvergenceTable:
    rows: list                      # (N, sup_error)
    grid: tuple
    limit_density: np.ndarray
    finite_densities: dict = dataclasses.field(default_factory=dict)

    def strictly_decreasing(self):
        errs = [e for _, e in self.rows]
        return all(b < a for a, b in zip(errs, errs[1:]))


def convergence_study(potential, window, N_list, grid, reference,
                      fast_gaussian=None, keep_densities=False):
    """Sup-grid error between finite and limiting one-point functions.

    Parameters
    ----------
    potential : callable
        ``N -> RadialPotential``.
    window : callable
        ``RadialPotential -> ScalingWindow``.
    grid : tuple
        ``(x0, x1, y0, y1, nx, ny)``.
    reference : PreKernelHandle
        Limiting kernel; its density is evaluated on the same grid.
    """
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise DomainError("N_list must be increasing")
    _, _, Z = grid_points(*grid)
    # on the symmetry axis every one-point function vanishes identically
    off = Z.imag != 0
    lim = np.zeros(Z.shape)
    lim[off] = np.real(density(reference, Z[off]))
    rows = []
    kept = {}
    for N in N_list:
        pot = potential(N)
        win = window(pot)
        basis = skew_orthogonal_basis(pot)
        fast = (pot.kind == "gaussian") if fast_gaussian is None else fast_gaussian
        kern = RescaledPreKernel(FinitePreKernel(basis, fast), win)
        fin = np.zeros(Z.shape)
        fin[off] = np.real(density(kern, Z[off]))
        rows.append((N, float(np.max(np.abs(fin - lim)))))
        if keep_densities:
            kept[N] = fin
    return ConvergenceTable(rows, tuple(grid), lim, kept)


def gaussian_window(p=0.0, regime="interior"):
    """Window factory for the Gaussian potential at p."""
    def make(pot):
        return micro_scale(pot, p, regime)
    return make


__all__ = [
    "ResidualReport", "berezin", "berezin_mass", "mass_one_residual", "CauchyTransform",
    "ward_residual", "ode_residual", "fractional_cd_terms", "identity_checks",
    "comb_identity_residual", "crossover_ratio", "convergence_study",
    "ConvergenceTable", "grid_points", "gaussian_window",
]
