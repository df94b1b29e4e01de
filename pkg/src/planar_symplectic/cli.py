"""Command-line front-end.

Subcommands ``density``, ``kernel``, ``correlate``, ``sample``, ``verify``,
``converge`` and ``render``.  Options may also come from a flat ``key=value``
file passed with ``--config``; flags given on the command line win.

Exit codes: 0 success, 1 a verification ran but did not pass, 2 invalid
configuration, 3 numerical failure (partial output is flagged).
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .diagnostics import (ResidualReport, convergence_study, crossover_ratio,
                          berezin, identity_checks, mass_one_residual,
                          ode_residual, ward_residual)
from .errors import AccuracyError, DomainError
from .finite_kernels import (RadialPotential, correlation, density, micro_scale,
                             rescaled_kernel)
from .limit_kernels import (CrossoverKernel, EdgeFamilyKernel,
                            MittagLefflerKernel, TranslationInvariantKernel)
from .sampler import McmcConfig, run_mcmc, summarize_samples, write_samples_csv

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

KERNELS = ("finite", "bulk", "edge", "ti", "ml", "crossover")
VERIFY_CHECKS = ("mass-one", "ward", "ode", "cd", "comb", "wronskian", "crossover")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class GridSpec:
    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int

    @classmethod
    def parse(cls, text):
        try:
            x0, x1, y0, y1, counts = text.split(":")
            nx, ny = counts.lower().split("x")
            g = cls(float(x0), float(x1), float(y0), float(y1), int(nx), int(ny))
        except ValueError:
            raise ConfigError(f"bad grid {text!r}; expected x0:x1:y0:y1:NXxNY") from None
        if g.nx < 1 or g.ny < 1 or (g.nx < 2 and g.x0 != g.x1) or (g.ny < 2 and g.y0 != g.y1):
            raise ConfigError("grid counts must be >= 2 unless the range is a single line")
        return g

    def axes(self):
        return np.linspace(self.x0, self.x1, self.nx), np.linspace(self.y0, self.y1, self.ny)


def parse_complex(text):
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"bad complex number {text!r}") from None


def read_config_file(path):
    """Flat ``key=value`` pairs; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


# --------------------------------------------------------------------------
# Building objects from options
# --------------------------------------------------------------------------

def build_potential(opts, N=None):
    N = N if N is not None else opts.N
    if N is None:
        raise ConfigError("--N is required")
    kind = opts.potential
    if kind == "gaussian":
        if opts.lam is not None and opts.lam != 1 or opts.c:
            raise ConfigError("the gaussian potential has lambda=1, c=0")
        return RadialPotential.gaussian(N)
    if kind in ("ml", "mittag_leffler", "mittag-leffler"):
        lam = 1.0 if opts.lam is None else opts.lam
        return RadialPotential.mittag_leffler(lam, opts.c or 0.0, N)
    raise ConfigError(f"unknown potential {kind!r}")


def build_window(opts, pot):
    spec = opts.window
    if spec == "origin":
        return micro_scale(pot, 0.0, "interior")
    if spec == "edge":
        return micro_scale(pot, pot.droplet_radius(), "boundary")
    if spec.startswith("bulk:"):
        return micro_scale(pot, parse_complex(spec[5:]), "interior")
    raise ConfigError(f"bad window {spec!r}; use origin, bulk:p or edge")


def limit_kernel(opts):
    """The limiting kernel matching the potential and window."""
    if opts.potential != "gaussian" and opts.window == "origin":
        lam = 1.0 if opts.lam is None else opts.lam
        return MittagLefflerKernel(lam, opts.c or 0.0, opts.m_rep or "general_series")
    if opts.window == "edge":
        return EdgeFamilyKernel(0.0)
    return EdgeFamilyKernel()


def build_kernel(opts):
    kind = opts.kernel or ("finite" if opts.N is not None else "bulk")
    if kind == "finite":
        pot = build_potential(opts)
        return rescaled_kernel(pot, build_window(opts, pot))
    if kind == "bulk":
        return EdgeFamilyKernel()
    if kind == "edge":
        return EdgeFamilyKernel(0.0 if opts.a is None else opts.a)
    if kind == "ti":
        if opts.a is None:
            raise ConfigError("--a is required for the translation-invariant kernel")
        return TranslationInvariantKernel(opts.a)
    if kind == "ml":
        lam = 1.0 if opts.lam is None else opts.lam
        return MittagLefflerKernel(lam, opts.c or 0.0, opts.m_rep or "general_series")
    if kind == "crossover":
        if opts.t is None:
            raise ConfigError("--t is required for the crossover kernel")
        return CrossoverKernel(opts.t)
    raise ConfigError(f"unknown kernel {kind!r}")


# --------------------------------------------------------------------------
# Grid evaluation and output
# --------------------------------------------------------------------------

def evaluate_grid(func, grid, workers=1):
    """Apply ``func`` (array of z -> array of columns) row by row.

    Rows are dispatched to a thread pool and reassembled in row order, so the
    result does not depend on ``workers``.  Rows that raise
    :class:`AccuracyError` are filled with NaN and reported.
    """
    xs, ys = grid.axes()

    def row(y):
        z = xs + 1j * y
        try:
            return np.atleast_2d(func(z)), None
        except AccuracyError as exc:
            return None, f"y={y:.17g}: {exc}"

    if workers > 1:
        with cf.ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(row, ys))
    else:
        results = [row(y) for y in ys]
    ncol = next((r.shape[0] for r, _ in results if r is not None), 1)
    cols = np.full((ncol, grid.ny, grid.nx), np.nan)
    failures = []
    for j, (r, msg) in enumerate(results):
        if r is None:
            failures.append(msg)
        else:
            cols[:, j, :] = r
    return xs, ys, cols, failures


def grid_csv_text(xs, ys, columns, names):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"] + list(names))
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            w.writerow([f"{x:.17g}", f"{y:.17g}"] + [f"{c[j, i]:.17g}" for c in columns])
    return buf.getvalue()


def grid_json_text(xs, ys, columns, names):
    doc = {"x": xs.tolist(), "y": ys.tolist()}
    for name, c in zip(names, columns):
        doc[name] = [[None if not np.isfinite(v) else float(v) for v in row] for row in c]
    return json.dumps(doc, indent=1)


def _viridis_like(t):
    # short linear ramp through dark blue, teal, yellow
    stops = np.array([[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]], float)
    t = min(max(t, 0.0), 1.0) * (len(stops) - 1)
    k = min(int(t), len(stops) - 2)
    rgb = stops[k] + (t - k) * (stops[k + 1] - stops[k])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in rgb)


def svg_heatmap(xs, ys, values, title=""):
    """Heatmap with a linear colour map; min and max are annotated."""
    finite = values[np.isfinite(values)]
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    span = vmax - vmin or 1.0
    cell = max(2, min(12, 600 // max(len(xs), len(ys))))
    W, H = cell * len(xs), cell * len(ys)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W + 20}" height="{H + 60}">',
           f'<text x="10" y="16" font-size="12">{title}</text>']
    for j in range(len(ys)):
        for i in range(len(xs)):
            v = values[j, i]
            col = _viridis_like((v - vmin) / span) if np.isfinite(v) else "#ff00ff"
            # y increases upward
            out.append(f'<rect x="{10 + i * cell}" y="{24 + (len(ys) - 1 - j) * cell}" '
                       f'width="{cell}" height="{cell}" fill="{col}"/>')
    out.append(f'<text x="10" y="{H + 44}" font-size="12">min {vmin:.6g}  max {vmax:.6g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def read_grid_csv(path, column="value"):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or column not in rows[0]:
        raise ConfigError(f"{path}: no column {column!r}")
    xs = sorted({float(r["x"]) for r in rows})
    ys = sorted({float(r["y"]) for r in rows})
    ix = {x: i for i, x in enumerate(xs)}
    iy = {y: j for j, y in enumerate(ys)}
    vals = np.full((len(ys), len(xs)), np.nan)
    for r in rows:
        vals[iy[float(r["y"])], ix[float(r["x"])]] = float(r[column])
    return np.array(xs), np.array(ys), vals


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit_grid(opts, xs, ys, cols, names, failures, title):
    fmt = opts.format or "csv"
    if fmt == "csv":
        text = grid_csv_text(xs, ys, cols, names)
    elif fmt == "json":
        text = grid_json_text(xs, ys, cols, names)
    elif fmt == "svg":
        text = svg_heatmap(xs, ys, cols[0], title)
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    _write(opts.out, text)
    if failures:
        _flag_partial(opts.out, failures)
        return EXIT_NUMERIC
    return EXIT_OK


def _flag_partial(out, failures):
    msg = {"partial": True, "failures": failures}
    if out not in (None, "-"):
        _write(out + ".partial.json", json.dumps(msg, indent=1) + "\n")
    print(f"numerical failure in {len(failures)} row(s); output is partial", file=sys.stderr)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_density(opts):
    kern = build_kernel(opts)
    grid = GridSpec.parse(opts.grid)

    def f(z):
        out = np.zeros(z.shape)
        off = kern.partner(z) != z
        if np.any(off):
            out[off] = np.real(density(kern, z[off]))
        return out
    xs, ys, cols, fails = evaluate_grid(f, grid, opts.workers)
    return emit_grid(opts, xs, ys, cols, ["value"], fails, "density")


def cmd_kernel(opts):
    kern = build_kernel(opts)
    grid = GridSpec.parse(opts.grid)
    w = parse_complex(opts.w if opts.w is not None else "0")

    def f(z):
        k = kern.weighted(z, np.full(z.shape, w))
        return np.vstack([np.abs(k), k.real, k.imag])
    xs, ys, cols, fails = evaluate_grid(f, grid, opts.workers)
    return emit_grid(opts, xs, ys, cols, ["value", "re_k", "im_k"], fails, "|kappa|")


def cmd_correlate(opts):
    kern = build_kernel(opts)
    grid = GridSpec.parse(opts.grid)
    if not opts.w:
        raise ConfigError("--w is required (comma separated fixed points)")
    fixed = [parse_complex(s) for s in opts.w.split(",")]

    if opts.berezin:
        if len(fixed) != 1:
            raise ConfigError("--berezin takes exactly one fixed point")

        def f(z):
            out = np.zeros(z.shape)
            off = kern.partner(z) != z
            out[off] = np.real(berezin(kern, fixed[0], z[off]))
            return out
    else:
        def f(z):
            out = np.zeros(z.shape)
            for i, zi in enumerate(z):
                if kern.partner(zi) != zi:
                    out[i] = correlation(kern, [zi] + fixed, check=False)
            return out
    xs, ys, cols, fails = evaluate_grid(f, grid, opts.workers)
    label = "Berezin" if opts.berezin else f"R_{len(fixed) + 1}"
    return emit_grid(opts, xs, ys, cols, ["value"], fails, label)


def cmd_sample(opts):
    pot = build_potential(opts)
    if not opts.out or opts.out == "-":
        raise ConfigError("sample needs --out for the CSV dump")
    sigma = opts.sigma if opts.sigma is not None else 0.3 / math.sqrt(pot.N)
    burn = opts.burn_in if opts.burn_in is not None else opts.steps // 5
    cfg = McmcConfig(opts.steps, burn, sigma, opts.seed or 0, opts.chains)
    samples = run_mcmc(pot, cfg)
    write_samples_csv(samples, opts.out)
    summary = {"N": pot.N, "acceptance": samples.acceptance,
               "max_resync_drift": samples.max_drift,
               "configurations": int(sum(len(c) for c in samples.chains))}
    if summary["configurations"] >= 100:
        for which in ("radial_histogram", "axis_gap"):
            tab = summarize_samples(samples, which, pot)
            summary[which] = {k: np.asarray(v).tolist() for k, v in tab.items()}
        pts = samples.points
        summary["fraction_inside_radius_plus_0.3"] = float(
            np.mean(np.abs(pts) <= pot.droplet_radius() + 0.3))
    _write(os.path.splitext(opts.out)[0] + ".summary.json", json.dumps(summary, indent=1) + "\n")
    return EXIT_OK


def _points(opts, default):
    if not opts.z:
        return default
    return [parse_complex(s) for s in opts.z.split(",")]


def cmd_verify(opts):
    check = opts.check
    tol = opts.tol
    if check == "mass-one":
        kern = build_kernel(opts)
        pts = _points(opts, [0.3 + 0.4j])
        res = [mass_one_residual(kern, z) for z in pts]
        rep = ResidualReport("mass_one", pts, res, 1e-3 if tol is None else tol)
    elif check == "ward":
        kern = build_kernel(opts)
        pts = _points(opts, [0.3 + 0.6j])
        res = [ward_residual(kern, z) for z in pts]
        rep = ResidualReport("ward", pts, res, 1e-2 if tol is None else tol)
    elif check in ("ode", "cd"):
        if check == "cd":
            which = ("fractional_cd", 1.0 if opts.lam is None else opts.lam, opts.c or 0.0)
        elif opts.N is not None:
            which = ("finite_gaussian", opts.N)
        else:
            which = "edge_limit"
        pts = _points(opts, [0.3 + 0.2j, -0.5 + 0.7j])
        w = parse_complex(opts.w) if opts.w else 0.4 - 0.3j
        res = [ode_residual(which, z, w) for z in pts]
        rep = ResidualReport(check, pts, res, 1e-8 if tol is None else tol)
    elif check in ("comb", "wronskian"):
        name = "comb_identity" if check == "comb" else "wronskian_const"
        m = opts.m or 2
        rep = identity_checks(name, m=m, c=opts.c or 0.0, seed=opts.seed or 0, tol=tol)
    elif check == "crossover":
        if opts.t is None:
            raise ConfigError("--t is required")
        pts = _points(opts, [0j, 0.3 + 0.2j])
        res = [abs(crossover_ratio(opts.t, z) - 1.0) for z in pts]
        rep = ResidualReport("crossover", pts, res, 3e-2 if tol is None else tol)
    else:
        raise ConfigError(f"unknown check {check!r}")
    _write(opts.out, rep.to_json(indent=1) + "\n")
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_converge(opts):
    if not opts.N_list:
        raise ConfigError("--N-list is required")
    try:
        Ns = [int(s) for s in opts.N_list.split(",")]
    except ValueError:
        raise ConfigError(f"bad --N-list {opts.N_list!r}") from None
    grid = GridSpec.parse(opts.grid)
    build_potential(opts, Ns[0])            # validate early
    tab = convergence_study(lambda N: build_potential(opts, N),
                            lambda pot: build_window(opts, pot), Ns,
                            (grid.x0, grid.x1, grid.y0, grid.y1, grid.nx, grid.ny),
                            limit_kernel(opts))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "sup_error"])
    for N, e in tab.rows:
        w.writerow([N, f"{e:.17g}"])
    _write(opts.out, buf.getvalue())
    return EXIT_OK


def cmd_render(opts):
    xs, ys, vals = read_grid_csv(opts.csv, opts.column)
    _write(opts.out, svg_heatmap(xs, ys, vals, opts.column))
    return EXIT_OK


COMMANDS = {"density": cmd_density, "kernel": cmd_kernel, "correlate": cmd_correlate,
            "sample": cmd_sample, "verify": cmd_verify, "converge": cmd_converge,
            "render": cmd_render}


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p):
    p.add_argument("--config", help="file of key=value pairs mirroring the flags")
    p.add_argument("--potential", default="gaussian", choices=["gaussian", "ml", "mittag_leffler"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--window", default="origin", help="origin | bulk:p | edge")
    p.add_argument("--kernel", choices=KERNELS)
    p.add_argument("--grid", default="-3:3:-3:3:61x61")
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "json", "svg"])
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--a", type=float, help="endpoint of the kernel family")
    p.add_argument("--t", type=float, help="crossover parameter")
    p.add_argument("--m-rep", dest="m_rep", choices=MittagLefflerKernel.REPRESENTATIONS)
    p.add_argument("--workers", type=int, default=1)


def make_parser():
    top = _Parser(prog="planar-symplectic", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("density", "kernel", "correlate", "converge"):
        p = sub.add_parser(name)
        _common(p)
        if name in ("kernel", "correlate"):
            p.add_argument("--w", help="fixed second argument(s)")
        if name == "correlate":
            p.add_argument("--berezin", action="store_true")
        if name == "converge":
            p.add_argument("--N-list", dest="N_list")
    p = sub.add_parser("sample")
    _common(p)
    p.add_argument("--steps", type=int, default=200_000)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--chains", type=int, default=1)
    p = sub.add_parser("verify")
    p.add_argument("check", choices=VERIFY_CHECKS)
    _common(p)
    p.add_argument("--z", help="comma separated evaluation points")
    p.add_argument("--w")
    p.add_argument("--m", type=int)
    p = sub.add_parser("render")
    p.add_argument("csv")
    p.add_argument("--column", default="value")
    p.add_argument("--out", default="-")
    return top


def _apply_config(parser, argv):
    """Parse twice: once to find --config, then with its values as defaults."""
    opts = parser.parse_args(argv)
    path = getattr(opts, "config", None)
    if not path:
        return opts
    values = read_config_file(path)
    known = vars(opts)
    unknown = [k for k in values if k not in known or k in ("command", "check", "config")]
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    sub = parser._subparsers._group_actions[0].choices[opts.command]
    converted = {}
    for action in sub._actions:
        if action.dest in values:
            raw = values[action.dest]
            if action.const is True:
                converted[action.dest] = raw.lower() in ("1", "true", "yes")
                continue
            val = action.type(raw) if action.type else raw
            if action.choices and val not in action.choices:
                raise ConfigError(f"config {action.dest}={raw!r} not in {list(action.choices)}")
            converted[action.dest] = val
    sub.set_defaults(**converted)
    return parser.parse_args(argv)


def _validate(opts):
    lam = getattr(opts, "lam", None)
    c = getattr(opts, "c", None)
    if lam is not None and not lam > 0:
        raise ConfigError("lambda must be positive")
    if c is not None and not c > -1:
        raise ConfigError("c must exceed -1")
    N = getattr(opts, "N", None)
    if N is not None and N < 1:
        raise ConfigError("N must be positive")
    if getattr(opts, "workers", 1) < 1:
        raise ConfigError("workers must be >= 1")


_VALUE_FLAGS = {"--grid", "--z", "--w", "--a", "--t", "--c", "--lambda", "--window"}


def _join_negative_values(argv):
    """``--grid -3:3:...`` -> ``--grid=-3:3:...`` so argparse keeps the value."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}" if nxt.startswith("-") else tok)
                if not nxt.startswith("-"):
                    out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        opts = _apply_config(make_parser(), argv)
        _validate(opts)
        return COMMANDS[opts.command](opts)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccuracyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SystemExit as exc:                # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
