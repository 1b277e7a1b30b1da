"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure.  Settings come from
flags, then a ``key = value`` config file, then built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bessel, entire, functional, linsys, sequences, series
from .errors import DomainError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def parse_complex(text):
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def float_list(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _flag(name, default=None, **kw):
    return name, default, kw


_COMMON = [
    _flag("--config", None, type=str, help="key = value settings file"),
    _flag("--out", None, type=str, help="write output here instead of stdout"),
    _flag("--format", "json", choices=["json", "csv"]),
    _flag("--seed", 0, type=int),
]

_COMMANDS = {
    "seq": ("strong-regularity report and growth functions of a moment sequence", [
        _flag("--family", "dunkl", choices=["factorial", "dunkl", "file"]),
        _flag("--alpha", -0.5, type=float),
        _flag("--file", None, type=str, help="two-column 'p, m(p)' file for --family file"),
        _flag("--range", 200, type=int, dest="range_n"),
        _flag("--probe", 100000, type=int),
        _flag("--d-samples", [10.0, 100.0, 1e3, 1e4], type=float_list),
    ]),
    "solve": ("fundamental system of Lambda_alpha y = A y", [
        _flag("--matrix", None, type=str, help="JSON matrix of [re, im] pairs"),
        _flag("--alpha", 0.0, type=float),
        _flag("--tol", 1e-8, type=float),
        _flag("--order", 60, type=int),
        _flag("--grid", [], type=lambda s: [parse_complex(x) for x in s.split(";") if x.strip()],
              help="sample points 'z1;z2;...'"),
        _flag("--growth", False, action="store_true"),
        _flag("--rmin", 4.0, type=float),
        _flag("--rmax", 40.0, type=float),
        _flag("--nradii", 10, type=int),
    ]),
    "roots": ("zeros of sum c_l E_m(omega_l z) and the matching solutions", [
        _flag("--problem", None, type=str, help="JSON problem file"),
        _flag("--tol", None, type=float),
    ]),
    "moments": ("quadrature check of gamma_{n,alpha} as Hamburger moments", [
        _flag("--alpha", [-0.9, -0.75, -0.6], type=float_list),
        _flag("--nmax", 8, type=int),
    ]),
    "translate": ("generalised translation of a truncated series", [
        _flag("--series", None, type=str, help="JSON [[re, im], ...] or @file"),
        _flag("--y", 0j, type=parse_complex),
        _flag("--family", "dunkl", choices=["factorial", "dunkl"]),
        _flag("--alpha", -0.5, type=float),
        _flag("--even", False, action="store_true"),
        _flag("--digits", 6, type=int),
    ]),
    "growth": ("order, type and indicator estimates of an entire function", [
        _flag("--target", "dunkl-exp", choices=["dunkl-exp", "exp", "dunkl-even", "chain"]),
        _flag("--alpha", -0.5, type=float),
        _flag("--lam", 1 + 0j, type=parse_complex),
        _flag("--h", 1, type=int),
        _flag("--rmin", 4.0, type=float),
        _flag("--rmax", 40.0, type=float),
        _flag("--nradii", 10, type=int),
        _flag("--directions", 16, type=int),
    ]),
}


_FORMAT_DEFAULTS = {"moments": "csv"}


def _dest(name, kw):
    return kw.get("dest", name.lstrip("-").replace("-", "_"))


def build_parser():
    parser = argparse.ArgumentParser(prog="dunklmoment", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, (helptext, flags) in _COMMANDS.items():
        p = sub.add_parser(cmd, help=helptext, argument_default=argparse.SUPPRESS)
        for name, _, kw in _COMMON + flags:
            p.add_argument(name, **kw)
    return parser


def read_config(path):
    settings = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            settings[key.replace("-", "_")] = value
    return settings


def _convert(value, default, kw):
    if kw.get("action") == "store_true":
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    conv = kw.get("type", str)
    try:
        out = conv(value)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        raise DomainError(f"bad config value {value!r}: {exc}") from None
    if "choices" in kw and out not in kw["choices"]:
        raise DomainError(f"config value {value!r} not in {kw['choices']}")
    return out


def resolve(args):
    """Merge defaults < config file < flags into one namespace."""
    flags = _COMMON + _COMMANDS[args.command][1]
    given = vars(args)
    config = read_config(given["config"]) if given.get("config") else {}
    merged = {"command": args.command}
    known = set()
    for name, default, kw in flags:
        dest = _dest(name, kw)
        key = name.lstrip("-").replace("-", "_")
        known.update((dest, key))
        if dest in given:
            merged[dest] = given[dest]
        elif key in config or dest in config:
            merged[dest] = _convert(config.get(key, config.get(dest)), default, kw)
        else:
            merged[dest] = _FORMAT_DEFAULTS.get(args.command, default) if dest == "format" else default
    unknown = set(config) - known
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return argparse.Namespace(**merged)


# -- serialisation ---------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def dump_json(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path, what):
    if path is None:
        raise DomainError(f"{what} file is required")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: malformed JSON: {exc}") from None


def _to_complex(entry):
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if isinstance(entry, list) and len(entry) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry
    ):
        return complex(entry[0], entry[1])
    raise DomainError(f"expected a number or [re, im] pair, got {entry!r}")


def read_matrix(data):
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise DomainError("matrix must be a nonempty list of rows")
    n = len(data)
    if any(len(r) != n for r in data):
        raise DomainError("matrix must be square")
    return np.array([[_to_complex(x) for x in row] for row in data], dtype=complex)


def _sequence(family, alpha, p_max=sequences.DEFAULT_P_MAX, path=None):
    if family == "file":
        if not path:
            raise DomainError("--family file needs --file")
        return sequences.MomentSequence.from_file(path)
    return sequences.MomentSequence.from_spec(family, alpha if family == "dunkl" else None, p_max)


# -- commands --------------------------------------------------------------

def cmd_seq(cfg):
    if cfg.range_n < 4:
        raise DomainError("--range must be at least 4")
    # M(t) peaks near the index where theta_p ~ t
    reach = int(2 * max(cfg.d_samples, default=0.0)) + 64
    p_max = max(sequences.DEFAULT_P_MAX, 8 * cfg.range_n, reach)
    seq = _sequence(cfg.family, cfg.alpha, p_max, cfg.file)
    report = sequences.check_strong_regularity(seq, cfg.range_n)
    out = {"sequence": seq.describe(), "report": report.to_dict(), "all_ok": report.all_ok,
           "equivalence": sequences.equivalence_constants(seq, cfg.range_n)}
    if seq.family is sequences.Family.CUSTOM and seq.p_max < 10 * max(cfg.probe, 1000):
        out["omega"] = None
    else:
        om = sequences.omega_estimate(seq, cfg.probe)
        out["omega"] = {"probe": om.probe, "value": om.value, "value_at_10x": om.value_at_10x,
                        "trend": om.trend}
    out["d"] = [{"t": t, "M": sequences.assoc_M(seq, t), "d": sequences.proximate_order_d(seq, t)}
                for t in cfg.d_samples]
    return dump_json(out)


def _solution_rows(sols, grid):
    rows = []
    for i, y in enumerate(sols):
        vals = y(np.array(grid, dtype=complex)) if grid else np.zeros((y.dim, 0))
        for k, z in enumerate(grid):
            row = {"solution": i, "z_re": z.real, "z_im": z.imag}
            for j in range(y.dim):
                row[f"comp_{j}_re"] = vals[j, k].real
                row[f"comp_{j}_im"] = vals[j, k].imag
            rows.append(row)
    return rows


def cmd_solve(cfg):
    A = read_matrix(_load_json(cfg.matrix, "matrix"))
    if cfg.order < 8:
        raise DomainError("--order must be at least 8")
    chains = linsys.jordan_chains(A, cfg.tol)
    sols = linsys.fundamental_solutions(A, cfg.alpha, cfg.tol, chains)
    rows = _solution_rows(sols, cfg.grid)
    if cfg.format == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()
    rng = np.random.default_rng(cfg.seed)
    weights = rng.normal(size=len(sols)) + 1j * rng.normal(size=len(sols))
    combo = linsys.SolutionCombination(list(zip(weights, sols)))
    out = {
        "alpha": cfg.alpha,
        "chains": chains.to_dict(),
        "solutions": [y.to_dict() for y in sols],
        "residuals": [linsys.residual_check(y, A, cfg.alpha, cfg.order) for y in sols],
        "superposition_residual": linsys.residual_check(combo, A, cfg.alpha, cfg.order),
        "fundamental_smin": linsys.fundamental_matrix_smin(sols, cfg.alpha),
        "samples": rows,
    }
    if cfg.alpha == -0.5 and cfg.grid:
        import scipy.linalg

        worst = 0.0
        for y in sols:
            v = y.terms[0][0]
            for z in cfg.grid:
                ref = scipy.linalg.expm(A * z) @ v
                worst = max(worst, float(np.abs(y(z) - ref).max()))
        out["matrix_exponential_deviation"] = worst
    if cfg.growth:
        radii = np.geomspace(cfg.rmin, cfg.rmax, cfg.nradii)
        directions = np.linspace(-math.pi, math.pi, 16, endpoint=False)
        out["asymptotics"] = linsys.solution_asymptotics(
            sols, radii, directions, diagonalizable=chains.diagonalizable).to_dict()
    return dump_json(out)


def _default_box(F):
    scale = max(1.0, float(np.max(np.abs(F.freqs))))
    mags = np.abs(F.coeffs[F.coeffs != 0])
    spread = 1.0 + math.log(mags.max() / mags.min())
    r = 10.0 * spread / scale
    return {"re_min": -r, "re_max": r, "im_min": -r, "im_max": r}


def cmd_roots(cfg):
    prob = _load_json(cfg.problem, "problem")
    if not isinstance(prob, dict):
        raise DomainError("problem must be a JSON object")
    try:
        c = [_to_complex(x) for x in prob["c"]]
        omega = [_to_complex(x) for x in prob["omega"]]
    except KeyError as exc:
        raise DomainError(f"problem is missing {exc}") from None
    spec = prob.get("sequence", {"family": "factorial"})
    seq = _sequence(spec.get("family", "factorial"), spec.get("alpha"))
    F = functional.ExpPolynomial(c, omega, seq)
    tol = cfg.tol if cfg.tol is not None else float(prob.get("tol", 1e-10))
    box_spec = prob.get("box") or _default_box(F)
    try:
        box = functional.Box.from_any(box_spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad box: {exc}") from None
    out = {"problem": F.to_dict(), "box": box.to_dict(), "tol": tol, "roots": [], "failures": []}
    if not (box.width > 0 and box.height > 0):
        out["notice"] = "empty box"
        return dump_json(out)
    search = functional.find_roots(F, box, tol)
    disc = np.concatenate([[0.0], np.exp(2j * np.pi * np.arange(12) / 12),
                           0.5 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)])
    for r in search.roots:
        y = functional.build_solution(r.z0, seq)
        rec = r.to_dict()
        rec["equation_residual"] = functional.equation_residual(y, c, omega, seq, disc, "fast")
        rec["equation_residual_series"] = functional.equation_residual(y, c, omega, seq, disc, "slow")
        out["roots"].append(rec)
    out["failures"] = [{"box": b.to_dict(), "message": m} for b, m in search.failures]
    if len(search.roots) > 0:
        try:
            out["independence"] = functional.independence_check(search.roots).to_dict()
        except DomainError as exc:
            out["independence"] = {"independent": False, "message": str(exc)}
    return dump_json(out)


def cmd_moments(cfg):
    if not 0 <= cfg.nmax <= 12:
        raise DomainError("--nmax must be in [0, 12]")
    rows = bessel.moment_table(cfg.alpha, cfg.nmax)
    if cfg.format == "csv":
        return bessel.moment_table_csv(rows)
    return dump_json({"moments": rows})


def _read_series(text):
    if text is None:
        raise DomainError("--series is required")
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return series.TruncatedSeries.from_json(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed series JSON: {exc}") from None


def cmd_translate(cfg):
    f = _read_series(cfg.series)
    seq = _sequence(cfg.family, cfg.alpha, max(sequences.DEFAULT_P_MAX, f.order + 1))
    op = series.even_translate if cfg.even else series.m_translate
    g = op(f, cfg.y, seq)
    return dump_json({"y": cfg.y, "even": cfg.even, "sequence": seq.describe(),
                      "series": [[c.real, c.imag] for c in g.coeffs.tolist()],
                      "pretty": g.pretty(cfg.digits)})


def cmd_growth(cfg):
    if not (0 < cfg.rmin < cfg.rmax) or cfg.nradii < 4:
        raise DomainError("need 0 < rmin < rmax and at least 4 radii")
    lam, alpha = cfg.lam, cfg.alpha
    if cfg.target == "exp":
        def f(z):
            return np.exp(lam * np.asarray(z))
    elif cfg.target == "dunkl-exp":
        def f(z):
            return entire.E_alpha_array(lam * np.asarray(z), alpha)
    elif cfg.target == "dunkl-even":
        def f(z):
            return np.vectorize(lambda w: entire.I_alpha(lam * w, alpha).value)(z)
    else:
        def f(z):
            return entire.E_alpha_h_array(lam, z, cfg.h, alpha)
    if cfg.target != "exp" and not alpha > -1:
        raise DomainError("alpha must exceed -1")
    radii = np.geomspace(cfg.rmin, cfg.rmax, cfg.nradii)
    directions = np.linspace(-math.pi, math.pi, cfg.directions, endpoint=False)
    report = entire.growth_scan(f, radii, directions)
    return dump_json({"target": cfg.target, "alpha": alpha, "lam": lam, **report.to_dict()})


_HANDLERS = {"seq": cmd_seq, "solve": cmd_solve, "roots": cmd_roots, "moments": cmd_moments,
             "translate": cmd_translate, "growth": cmd_growth}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        text = _HANDLERS[cfg.command](cfg)
        _emit(text, cfg.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
