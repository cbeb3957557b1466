"""``ptlab`` command line: spectra, phase diagram, WKB, classical paths, the
C operator (spectral and perturbative), the 2x2 model, and figure data.

Every artifact carries a provenance block and a ``schema_version``.  Exit
codes: 0 success, 1 ``--verify`` mismatch, 2 bad input / domain error,
3 convergence or integration failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError, IntegrationError
from .svg import FigureArtifact, emit_svg

SCHEMA_VERSION = 1
log = logging.getLogger("ptlab")

__all__ = ["RunConfig", "Artifact", "build_parser", "load_config", "run", "main"]


@dataclass
class RunConfig:
    command: str
    params: dict
    fmt: str
    output: str | None

    def __post_init__(self):
        for k, v in self.params.items():
            if ("tol" in k) and v is not None and not v > 0:
                raise DomainError(f"tolerance {k} must be positive")

    @property
    def config_hash(self) -> str:
        blob = json.dumps({"command": self.command, "params": self.params},
                          sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class Artifact:
    kind: str
    payload: dict
    table: tuple | None = None  # (header, rows)
    figure: FigureArtifact | None = None
    files: dict = field(default_factory=dict)  # name -> Artifact (reproduce)


def _versions() -> dict:
    import numba
    import scipy
    return {"ptlab": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def provenance(cfg: RunConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": cfg.command,
            "config": cfg.params, "config_hash": cfg.config_hash, "versions": _versions()}


def _c(z) -> list:
    z = complex(z)
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def _cmat(a) -> list:
    return [[_c(v) for v in row] for row in np.asarray(a)]


def _pair(text: str) -> complex:
    """``'re,im'`` or a Python complex literal such as ``'30.7+0.7j'``."""
    s = str(text).replace(" ", "")
    try:
        if "," in s:
            re, im = s.split(",")
            return complex(float(re), float(im))
        return complex(s)
    except ValueError:
        raise DomainError(f"expected 're,im' or 'a+bj', got {text!r}") from None


# --- commands ---------------------------------------------------------------

def cmd_spectrum(p: dict) -> Artifact:
    from .spectra import find_complex_eigenvalue, find_real_eigenvalues
    if p.get("complex_seed"):
        pair = find_complex_eigenvalue(p["N"], _pair(p["complex_seed"]), step=p["step"],
                                       tol=p["tol"])
        row = {"n": None, "E_re": pair.E.real, "E_im": pair.E.imag, "residual": pair.residual}
        return Artifact("spectrum", {"N": p["N"], "levels": [row]},
                        (list(row), [list(row.values())]))
    res = find_real_eigenvalues(p["N"], p["levels"], step=p["step"], tol=p["tol"],
                                junction_depth=p.get("junction_depth"))
    rows = [[q.n, float(q.E.real), float(q.E.imag), q.residual] for q in res]
    header = ["n", "E_re", "E_im", "residual"]
    payload = {"N": p["N"], "requested": p["levels"], "complete": res.complete,
               "levels": [dict(zip(header, r)) for r in rows]}
    return Artifact("spectrum", payload, (header, rows))


def cmd_phase_diagram(p: dict) -> Artifact:
    from .spectra import spectrum_scan
    rows = spectrum_scan(p["N_from"], p["N_to"], p["N_step"], p["levels"], tol=p["tol"])
    return _phase_artifact(rows, p["levels"])


def _phase_artifact(rows, levels) -> Artifact:
    table = []
    for r in rows:
        for k, e in zip(r.levels, r.energies):
            table.append([r.N, k, e, int(r.merged[k])])
    series = []
    for k in range(levels):
        pts = [(r.N, e) for r in rows for kk, e in zip(r.levels, r.energies) if kk == k]
        if pts:
            series.append({"name": f"n={k}", "points": pts, "style": "points"})
    fig = FigureArtifact("spectrum-vs-N", series, {}, "Real eigenvalues", "N", "E")
    payload = {"rows": [{"N": r.N, "levels": r.levels, "energies": r.energies,
                         "merged": r.merged} for r in rows]}
    return Artifact("spectrum-vs-N", payload, (["N", "n", "E", "merged"], table), fig)


def cmd_wkb(p: dict) -> Artifact:
    from .semiclassic import quantization_residual, solve_quantization, wkb_energy
    e = wkb_energy(p["n"], p["N"])
    # the closed form must solve the quantisation integral
    payload = {"N": p["N"], "n": p["n"], "E_wkb": e,
               "residual_check": quantization_residual(e, p["n"], p["N"])}
    if p.get("quadrature"):
        payload["E_quadrature"] = solve_quantization(p["n"], p["N"])
    return Artifact("wkb", payload, (list(payload), [list(payload.values())]))


def _trajectory_rows(label, traj, xs=None):
    xs = traj.x if xs is None else xs
    return [[label, float(t), float(z.real), float(z.imag), int(s)]
            for t, z, s in zip(traj.t, xs, traj.sheet)]


def cmd_classical(p: dict) -> Artifact:
    from .classical import detect_closure, integrate_trajectory, rescale
    from .semiclassic import turning_points
    N, E = p["N"], p["E"]
    if p.get("x0"):
        x0, p0 = _pair(p["x0"]), None
    else:
        x0, p0 = turning_points(E, N).x_minus, 0.0
    traj = integrate_trajectory(x0, E, N, p["tmax"], p["dt"], p0=p0)
    rep = detect_closure(traj, p["closure_tol"])
    xs = rescale(traj) if p.get("rescale") else traj.x
    rows = [r[1:] for r in _trajectory_rows(0, traj, xs)]
    payload = {"N": N, "E": E, "x0": _c(x0), "escaped": traj.escaped,
               "closed": rep.closed, "period": rep.period,
               "closure_distance": rep.closure_distance, "turns": rep.turns,
               "energy_residual": traj.energy_residual(),
               "sheets": sorted(set(int(s) for s in traj.sheet))}
    fig = FigureArtifact("trajectory", [{"name": "path", "points": [(z.real, z.imag) for z in xs]}],
                         {}, f"N={N}, E={E}", "Re x", "Im x", equal_aspect=True)
    return Artifact("trajectory", payload, (["t", "re_x", "im_x", "sheet"], rows), fig)


def cmd_cop_spectral(p: dict) -> Artifact:
    from .ptnorm import (build_c_kernel, apply_kernel, expectation_x_ground, gaussian_bump,
                         gram_matrix, normalized_eigenpairs, verify_completeness)
    pairs = normalized_eigenpairs(p["N"], p["levels"])
    c = pairs[0].contour
    G = gram_matrix(pairs)
    ck = build_c_kernel(pairs)
    g = gaussian_bump(c, 1.0, c.junction)
    c2 = float(np.max(np.abs(apply_kernel(ck, apply_kernel(ck, g)) - g)))
    table = [[q.n, float(q.E.real), q.pt_norm_sign, _c(G[q.n, q.n])[0], _c(G[q.n, q.n])[1]]
             for q in pairs]
    off = G - np.diag(np.diag(G))
    payload = {
        "N": p["N"], "levels": p["levels"],
        "norm_table": [{"n": r[0], "E": r[1], "sign": r[2], "pt_norm": [r[3], r[4]]} for r in table],
        "max_offdiagonal": float(np.max(np.abs(off))),
        "completeness_residual": verify_completeness(pairs, g),
        "c_squared_residual": c2,
        "x_expectation": _c(expectation_x_ground(p["N"], pairs)),
    }
    return Artifact("kernel-report", payload,
                    (["n", "E", "sign", "re_pt_norm", "im_pt_norm"], table))


def cmd_cop_perturbative(p: dict) -> Artifact:
    from .opalg import solve_q_hierarchy, verify_c_commutes
    q = solve_q_hierarchy(p["order"])
    res = verify_c_commutes(q, p["order"])
    rows = [[f"Q{k}", f"S({m},{n})", str(v)] for k, poly in sorted(q.terms.items())
            for (m, n), v in sorted(poly.terms.items(), key=lambda t: (-sum(t[0]), -t[0][0]))]
    payload = {"order": p["order"], **q.to_dict(), "residual": str(res)}
    return Artifact("perturbative-c", payload, (["Q", "monomial", "coefficient"], rows))


def cmd_matrix2(p: dict) -> Artifact:
    from .matrix2 import (MatrixModel, PARITY, c_from_q, c_matrix, completeness_2,
                          eigensystem, is_observable_2, q_matrix)
    m = MatrixModel(p["r"], p["s"], p["theta"])
    es = eigensystem(m)
    payload = {"r": m.r, "s": m.s, "theta": m.theta, **es.to_dict(), "C": None, "Q": None,
               "checks": None}
    if not (es.broken or es.exceptional):
        C = c_matrix(m)
        comp = completeness_2(m)
        payload.update({
            "C": _cmat(C), "Q": _cmat(q_matrix(m)),
            "checks": {
                "c_squared": float(np.max(np.abs(C @ C - np.eye(2)))),
                "c_equals_p": bool(np.max(np.abs(C - PARITY)) < 1e-12),
                "exp_q_p": float(np.max(np.abs(c_from_q(m) - C))),
                "completeness": comp.identity_error,
                "signed_completeness": comp.c_error,
                "observables": {"C": is_observable_2(C, m), "H": is_observable_2(m.hamiltonian(), m)},
            },
        })
    return Artifact("matrix2", payload)


def _orbit_figure(name, title, orbits, rescaled=False, by_sheet=False):
    """``orbits``: list of (label, Trajectory)."""
    from .classical import rescale
    series, rows = [], []
    for label, tr in orbits:
        xs = rescale(tr) if rescaled else tr.x
        rows += _trajectory_rows(label, tr, xs)
        if by_sheet:
            for s in sorted(set(int(v) for v in tr.sheet)):
                pts = [(z.real, z.imag) for z, ss in zip(xs, tr.sheet) if ss == s]
                series.append({"name": f"{label} sheet {s}", "points": pts, "style": "points"})
        else:
            series.append({"name": label, "points": [(z.real, z.imag) for z in xs]})
    fig = FigureArtifact("trajectory", series, {}, title, "Re x", "Im x", equal_aspect=True)
    return Artifact("trajectory", {"figure": name, "orbits": [lab for lab, _ in orbits]},
                    (["orbit", "t", "re_x", "im_x", "sheet"], rows), fig)


def cmd_reproduce(p: dict) -> Artifact:
    from .classical import integrate_trajectory, period, turning_point_orbit
    from .semiclassic import turning_points
    fig = p["figure"]
    if fig == "fig1":
        from .spectra import spectrum_scan
        art = _phase_artifact(spectrum_scan(1.05, 5.0, 0.05, 8), 8)
    elif fig == "fig3":
        T = period(1.0, 2.0)
        orbits = [("x0=-1", turning_point_orbit(1.0, 2.0))]
        for b in (0.1, 0.3, 0.6, 1.0):
            orbits.append((f"x0=-{b}i", integrate_trajectory(-1j * b, 1.0, 2.0, T, T / 400)))
        art = _orbit_figure(fig, "N=2: nested ellipses", orbits)
    elif fig == "fig4":
        T = period(1.0, 3.0)
        orbits = [("x0=x_-", turning_point_orbit(1.0, 3.0))]
        for b in (0.2, 0.5, 1.0):
            orbits.append((f"x0=-{b}i", integrate_trajectory(-1j * b, 1.0, 3.0, T, T / 400)))
        # at rest on the upper turning point x = i the path runs up the axis
        orbits.append(("x0=i", integrate_trajectory(1j, 1.0, 3.0, 5.0, 0.005, p0=0.0,
                                                    escape_radius=6.0)))
        art = _orbit_figure(fig, "N=3: closed orbits and a path to i*infinity", orbits)
    elif fig == "fig5":
        T = period(1.0, 2.5)
        orbits = [(f"x0={x0}", integrate_trajectory(x0, 1.0, 2.5, 3 * T, T / 400))
                  for x0 in (0.2 + 0.2j, 1.0 + 0.5j)]
        art = _orbit_figure(fig, "N=2.5: projection of paths on three sheets", orbits,
                            rescaled=True, by_sheet=True)
    elif fig == "fig6":
        orbits = []
        for N in (1.8, 1.85, 1.9):
            tp = turning_points(1.0, N)
            orbits.append((f"N={N}", integrate_trajectory(tp.x_minus, 1.0, N, 200.0, 0.005,
                                                          p0=0.0, escape_radius=10.0)))
        art = _orbit_figure(fig, "N<2: outward spirals from x_-", orbits)
    else:
        raise DomainError(f"unknown figure {fig!r}")
    return art


COMMANDS = {
    "spectrum": cmd_spectrum,
    "phase-diagram": cmd_phase_diagram,
    "wkb": cmd_wkb,
    "classical": cmd_classical,
    "cop-spectral": cmd_cop_spectral,
    "cop-perturbative": cmd_cop_perturbative,
    "matrix2": cmd_matrix2,
    "reproduce": cmd_reproduce,
}
FORMATS = {
    "spectrum": ("json", "csv"),
    "phase-diagram": ("csv", "json", "svg"),
    "wkb": ("json", "csv", "text"),
    "classical": ("csv", "json", "svg"),
    "cop-spectral": ("json", "csv"),
    "cop-perturbative": ("json", "csv", "text"),
    "matrix2": ("json",),
    "reproduce": ("csv", "json", "svg"),
}


# --- parsing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from .spectra import DEFAULT_STEP, EIGEN_TOL
    ap = argparse.ArgumentParser(prog="ptlab", description=__doc__.split("\n\n")[0].replace("\n", " "))
    ap.add_argument("--version", action="version", version=f"ptlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, default_fmt):
        sp.add_argument("--format", dest="fmt", default=None,
                        help=f"output format (default {default_fmt})")
        sp.add_argument("--output", "-o", default=None, help="output file (default stdout)")
        sp.add_argument("--config", default=None, help="key = value file; flags override it")
        sp.add_argument("--verify", action="store_true",
                        help="run twice and check the output is byte-identical")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("spectrum", help="real (or one complex) eigenvalue(s)")
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--levels", type=int, default=6)
    sp.add_argument("--tol", type=float, default=EIGEN_TOL)
    sp.add_argument("--step", type=float, default=DEFAULT_STEP)
    sp.add_argument("--junction-depth", type=float, default=None)
    sp.add_argument("--complex-seed", default=None, help="'re,im' seed for Newton")
    common(sp, "json")

    sp = sub.add_parser("phase-diagram", help="real levels against N")
    sp.add_argument("--from", "--N-min", dest="N_from", type=float, default=1.3)
    sp.add_argument("--to", "--N-max", dest="N_to", type=float, default=2.0)
    sp.add_argument("--step", "--N-step", dest="N_step", type=float, default=0.01)
    sp.add_argument("--levels", type=int, default=8)
    sp.add_argument("--tol", type=float, default=1e-8)
    common(sp, "csv")

    sp = sub.add_parser("wkb", help="leading-order WKB energy")
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--quadrature", action="store_true",
                    help="also solve the quantisation integral numerically")
    common(sp, "json")

    sp = sub.add_parser("classical", help="complex classical trajectory")
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--E", type=float, default=1.0)
    sp.add_argument("--x0", default=None, help="'re,im'; default: start at rest at x_-")
    sp.add_argument("--tmax", type=float, default=20.0)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--closure-tol", type=float, default=1e-6)
    sp.add_argument("--rescale", action="store_true", help="divide samples by max |x|")
    common(sp, "csv")

    sp = sub.add_parser("cop-spectral", help="C operator from eigenfunctions")
    sp.add_argument("--N", type=float, default=3.0)
    sp.add_argument("--levels", type=int, default=12)
    common(sp, "json")

    sp = sub.add_parser("cop-perturbative", help="exact Q hierarchy")
    sp.add_argument("--order", type=int, default=5, choices=(1, 3, 5))
    common(sp, "json")

    sp = sub.add_parser("matrix2", help="2x2 PT-symmetric model")
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--theta", type=float, required=True)
    common(sp, "json")

    sp = sub.add_parser("reproduce", help="regenerate figure data")
    sp.add_argument("figure", choices=("fig1", "fig3", "fig4", "fig5", "fig6"))
    sp.add_argument("--output-dir", default=None,
                    help="write <figure>.csv and <figure>.svg here")
    common(sp, "csv")
    return ap


def load_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{i}: expected 'key = value'")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.replace("_", "-").lstrip("-")] = v
    return out


def _subparser(ap, name):
    for act in ap._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[name]
    raise KeyError(name)


def _config_argv(sp, cfg: dict) -> list:
    known = {}
    for act in sp._actions:
        for opt in act.option_strings:
            if opt.startswith("--"):
                known[opt[2:]] = act
    argv = []
    for k, v in cfg.items():
        act = known.get(k) or known.get(k.replace("-", "_"))
        if act is None or k in ("config",):
            raise DomainError(f"unknown config key {k!r}")
        if isinstance(act, argparse._StoreTrueAction):
            if v.lower() in ("1", "true", "yes", "on"):
                argv.append(act.option_strings[-1])
        else:
            argv += [act.option_strings[-1], v]
    return argv


def _config_path(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def parse(argv) -> RunConfig:
    ap = build_parser()
    path = _config_path(argv)
    cmd_at = next((i for i, a in enumerate(argv) if a in COMMANDS), None)
    if path and cmd_at is not None:
        # file values go first so that explicit flags override them
        extra = _config_argv(_subparser(ap, argv[cmd_at]), load_config(path))
        argv = argv[:cmd_at + 1] + extra + argv[cmd_at + 1:]
    ns = ap.parse_args(argv)
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "fmt", "output", "config", "verify", "verbose", "output_dir")}
    fmt = ns.fmt or FORMATS[ns.command][0]
    if fmt not in FORMATS[ns.command]:
        raise DomainError(f"{ns.command} supports formats {FORMATS[ns.command]}")
    cfg = RunConfig(ns.command, params, fmt, ns.output)
    cfg.verify = ns.verify
    cfg.verbose = ns.verbose
    cfg.output_dir = getattr(ns, "output_dir", None)
    return cfg


# --- serialisation ----------------------------------------------------------

def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return _c(o)
    return str(o)


def render(art: Artifact, cfg: RunConfig, fmt: str) -> str:
    prov = provenance(cfg)
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "kind": art.kind, "provenance": prov,
               "data": art.payload}
        return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    if fmt == "csv":
        if art.table is None:
            raise DomainError(f"{art.kind} has no tabular form")
        buf = io.StringIO()
        buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
        buf.write("# provenance: " + json.dumps(prov, sort_keys=True, default=str) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        header, rows = art.table
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        return buf.getvalue()
    if fmt == "svg":
        if art.figure is None:
            raise DomainError(f"{art.kind} cannot be plotted")
        art.figure.provenance = prov
        return emit_svg(art.figure)
    if fmt == "text":
        return "\n".join(f"{k}: {v}" for k, v in art.payload.items()
                         if not isinstance(v, dict)) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


def _emit(cfg: RunConfig, art: Artifact) -> dict:
    """Render to strings keyed by destination (None for stdout)."""
    if cfg.command == "reproduce" and cfg.output_dir:
        d = Path(cfg.output_dir)
        name = cfg.params["figure"]
        out = {str(d / f"{name}.csv"): render(art, cfg, "csv")}
        if art.figure is not None:
            out[str(d / f"{name}.svg")] = render(art, cfg, "svg")
        out[str(d / f"{name}.json")] = render(
            Artifact(art.kind, art.payload), cfg, "json")
        return out
    return {cfg.output: render(art, cfg, cfg.fmt)}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse(argv)
        logging.basicConfig(level=logging.DEBUG if cfg.verbose else logging.WARNING,
                            format="%(name)s: %(message)s")
        docs = _emit(cfg, COMMANDS[cfg.command](cfg.params))
        if cfg.verify:
            again = _emit(cfg, COMMANDS[cfg.command](cfg.params))
            if again != docs:
                bad = [k or "<stdout>" for k in docs if docs[k] != again.get(k)]
                print(f"ptlab: verify failed, outputs differ: {bad}", file=sys.stderr)
                return 1
            print("ptlab: verify ok (byte-identical rerun)", file=sys.stderr)
        for dest, text in docs.items():
            if dest is None:
                sys.stdout.write(text)
            else:
                Path(dest).parent.mkdir(parents=True, exist_ok=True)
                Path(dest).write_text(text)
        return 0
    except SystemExit as e:  # argparse
        return int(e.code or 0)
    except DomainError as e:
        print(f"ptlab: domain error: {e}", file=sys.stderr)
        return 2
    except (ConvergenceError, IntegrationError) as e:
        print(f"ptlab: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
