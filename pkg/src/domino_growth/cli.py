"""Command-line front end.

Every subcommand writes its results into ``--out`` (default: the current
directory); nothing is printed on standard output unless ``--stdout`` is
given.  Progress and diagnostics go to standard error.  Exit codes: 0 on
success, 1 on usage or input errors, 2 on numerical failures.

Options may also be supplied through ``--config FILE.json`` whose keys are
option names (``kmax``, ``rho``, ...); explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_weights(p):
    g = p.add_argument_group("weights")
    g.add_argument("--weights", help="weights JSON file")
    g.add_argument("--uniform", action="store_true", default=None, help="uniform weights")
    g.add_argument("--n", type=int, help="half period n for --uniform or --random-weights")
    g.add_argument("--random-weights", type=int, metavar="SEED",
                   help="random weights in [0.3, 3] drawn with this seed")


def _add_common(p):
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--stdout", action="store_true", default=None, help="also print the main result")
    p.add_argument("--threads", type=int, help="cap on worker threads")
    p.add_argument("--config", help="JSON file with default option values")


def build_parser():
    parser = _Parser(prog="domino-growth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, help, weights=True):
        p = sub.add_parser(name, help=help)
        _add_common(p)
        if weights:
            _add_weights(p)
        return p

    p = cmd("sample-aztec", "exact sample of the Aztec diamond, written as a dump")
    p.add_argument("--N", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--name", help="dump file name")

    p = cmd("evolve-weights", "iterate the weight dynamics and record invariants")
    p.add_argument("--steps", type=int)
    p.add_argument("--no-normalize", action="store_true", default=None)

    cmd("charpoly", "characteristic polynomial and Newton polygon")

    p = cmd("ronkin", "Ronkin function at one field or on a grid")
    p.add_argument("--B", type=float, nargs=2)
    p.add_argument("--grid", type=float, nargs=5, metavar=("B1MIN", "B1MAX", "B2MIN", "B2MAX", "COUNT"))
    p.add_argument("--tol", type=float)

    p = cmd("surface-tension", "surface tension and dual field at slopes")
    p.add_argument("--rho", type=float, nargs=2, action="append")
    p.add_argument("--tol", type=float)

    cmd("classify-slopes", "rough/smooth census of the integer slopes")

    p = cmd("edge-prob", "edge probabilities of the slope-rho Gibbs measure")
    p.add_argument("--rho", type=float, nargs=2)
    p.add_argument("--edge", nargs=3, action="append", metavar=("X", "Y", "H_OR_V"))
    p.add_argument("--tol", type=float)

    p = cmd("speed", "growth speed by the Kasteleyn sum or from a sampled limit shape")
    p.add_argument("--rho", type=float, nargs=2)
    p.add_argument("--method", choices=["kasteleyn", "limit-shape"])
    p.add_argument("--kmax", type=int)
    p.add_argument("--average", choices=["cesaro", "weighted"])
    p.add_argument("--N", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--shape", help="existing limit-shape CSV (skips sampling)")

    p = cmd("hessian", "Hessian of the speed (Kasteleyn sum, or from a limit-shape CSV)")
    p.add_argument("--rho", type=float, nargs=2)
    p.add_argument("--h", type=float)
    p.add_argument("--kmax", type=int)
    p.add_argument("--average", choices=["cesaro", "weighted"])
    p.add_argument("--shape", help="limit-shape CSV written by 'speed --method limit-shape'")

    p = cmd("fluctuations", "height variance along Aztec growth at a rescaled point")
    p.add_argument("--x", type=float, nargs=2)
    p.add_argument("--N", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)

    p = cmd("render", "draw a dump as PPM or SVG", weights=False)
    p.add_argument("--dump")
    p.add_argument("--format", choices=["ppm", "svg"])
    p.add_argument("--scale", type=int)
    p.add_argument("--name", help="image file name")
    return parser


DEFAULTS = {
    "out": ".",
    "stdout": False,
    "threads": 1,
    "n": 1,
    "N": 8,
    "steps": 20,
    "no_normalize": False,
    "tol": None,
    "kmax": 64,
    "method": "kasteleyn",
    "average": None,
    "samples": 100,
    "h": 0.1,
    "runs": 200,
    "format": "ppm",
    "scale": None,
    "x": [0.0, 0.0],
}


def _merge_config(args):
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if not hasattr(args, key):
                raise UsageError(f"unknown config key {key!r}")
            if getattr(args, key) is None:
                setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    for key in ("tol", "h"):
        v = getattr(args, key, None)
        if v is not None and not v > 0:
            raise UsageError(f"--{key} must be positive")
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be at least 1")


def _limit_threads(threads):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(threads)


def _weights(args):
    from .weights import PeriodicWeights, load_weights

    chosen = [args.weights is not None, bool(args.uniform), args.random_weights is not None]
    if sum(chosen) > 1:
        raise UsageError("give only one of --weights, --uniform, --random-weights")
    if args.weights:
        try:
            return load_weights(args.weights)
        except OSError as exc:
            raise UsageError(f"cannot read weights {args.weights}: {exc}") from exc
    if args.random_weights is not None:
        import numpy as np

        return PeriodicWeights.random(args.n, np.random.default_rng(args.random_weights))
    return PeriodicWeights.uniform(args.n)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for {args.command}")


def _progress(msg):
    print(msg, file=sys.stderr, flush=True)


def _write(args, name, text, binary=False):
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    with open(path, "wb" if binary else "w", newline=None if binary else "") as fh:
        fh.write(text)
    _progress(f"wrote {path}")
    return path


def _emit(args, name, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    _write(args, name, text)
    if args.stdout:
        sys.stdout.write(text)


USED_OPTIONS = {
    "evolve-weights": ("steps", "no_normalize"),
    "ronkin": ("tol",),
    "surface-tension": ("tol",),
    "edge-prob": ("tol",),
    "speed": ("method", "kmax", "average", "N", "samples", "seed", "shape"),
    "hessian": ("h", "kmax", "average", "shape"),
    "fluctuations": ("N", "runs", "seed"),
}


def _provenance(args, w=None):
    out = {"command": args.command}
    if w is not None:
        out["weights_sha256"] = w.sha256()
        out["n"] = w.n
    keys = USED_OPTIONS.get(args.command, ())
    if args.command == "speed":
        keys = ("method", "kmax", "average") if args.method == "kasteleyn" else ("method", "N", "samples", "seed", "shape")
    if args.command == "hessian":
        keys = ("shape",) if args.shape else ("h", "kmax", "average")
    for key in keys:
        if getattr(args, key, None) is not None:
            out[key] = getattr(args, key)
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample_aztec(args):
    from .io import dump_text
    from .shuffle import sample_aztec

    w = _weights(args)
    _require(args, "seed")
    _progress(f"sampling A_{args.N}")
    s = sample_aztec(args.N, w, args.seed)
    text = dump_text(s.config, args.seed, w.sha256(), s.config.time % 2)
    _write(args, args.name or f"aztec_N{args.N}_seed{args.seed}.txt", text)
    if args.stdout:
        sys.stdout.write(text)


def _cmd_evolve_weights(args):
    from .kasteleyn import charpoly_ratio
    from .weights import gauge_invariants, trajectory

    w = _weights(args)
    traj = trajectory(w, args.steps, normalize=not args.no_normalize)
    records = []
    for k, wk in enumerate(traj):
        inv = gauge_invariants(wk)
        c, dev = charpoly_ratio(wk) if k < len(traj) - 1 else (None, None)
        records.append({
            "k": k,
            "weights": wk.to_dict(),
            "W1": inv.W1,
            "W2": inv.W2,
            "charpoly_ratio": None if c is None else float(abs(c)),
            "ratio_spread": dev,
        })
    _emit(args, "evolve.json", {"provenance": _provenance(args, w), "trajectory": records})


def _cmd_charpoly(args):
    from .kasteleyn import characteristic_polynomial, newton_polygon

    w = _weights(args)
    P = characteristic_polynomial(w)
    poly = newton_polygon(P)
    lines = [f"# weights_sha256: {w.sha256()}", f"# newton_polygon: {json.dumps([list(v) for v in poly.vertices])}"]
    text = "\n".join(lines + P.to_lines()) + "\n"
    _write(args, "charpoly.txt", text)
    if args.stdout:
        sys.stdout.write(text)


def _cmd_ronkin(args):
    import numpy as np

    from .io import grid_text
    from .kasteleyn import characteristic_polynomial
    from .thermo import QuadratureError, ronkin_full

    w = _weights(args)
    P = characteristic_polynomial(w)
    tol = args.tol or 1e-6
    if args.grid:
        b1lo, b1hi, b2lo, b2hi, count = args.grid
        count = int(count)
        if count < 1:
            raise UsageError("grid count must be positive")
        pts = [(a, b) for a in np.linspace(b1lo, b1hi, count) for b in np.linspace(b2lo, b2hi, count)]
    else:
        pts = [tuple(args.B or (0.0, 0.0))]
    rows = []
    for B in pts:
        r = ronkin_full(P, B)
        if not r.error <= tol:
            raise QuadratureError(f"Ronkin quadrature error {r.error:.2e} above {tol:.1e} at B={B}")
        rows.append([B[0], B[1], r.value, r.gradient[0], r.gradient[1], r.error])
    meta = _provenance(args, w)
    meta["tol"] = tol
    text = grid_text(["B1", "B2", "R", "dR_dB1", "dR_dB2", "error"], rows, meta)
    _write(args, "ronkin.csv", text)
    if args.stdout:
        sys.stdout.write(text)


def _cmd_surface_tension(args):
    from .io import grid_text
    from .kasteleyn import characteristic_polynomial
    from .thermo import surface_tension

    w = _weights(args)
    P = characteristic_polynomial(w)
    rhos = args.rho or [[0.0, 0.0]]
    tol = args.tol or 1e-10
    rows = []
    for rho in rhos:
        st = surface_tension(P, rho, tol=tol)
        rows.append([rho[0], rho[1], st.sigma, st.B[0], st.B[1], st.mismatch])
    meta = _provenance(args, w)
    meta["tol"] = tol
    meta["note"] = "sigma is defined up to an additive constant fixed by the normalisation of P"
    text = grid_text(["rho1", "rho2", "sigma", "B1", "B2", "mismatch"], rows, meta)
    _write(args, "surface_tension.csv", text)
    if args.stdout:
        sys.stdout.write(text)


def _cmd_classify_slopes(args):
    from .kasteleyn import characteristic_polynomial, newton_polygon
    from .thermo import classify_slope_detail, slope_from_gradient

    w = _weights(args)
    P = characteristic_polynomial(w)
    poly = newton_polygon(P)
    pts = [tuple(int(round(t)) for t in slope_from_gradient(p)) for p in poly.interior_lattice_points()]
    result = {"smooth": [], "rough": [], "details": []}
    for rho in sorted(pts):
        _progress(f"classifying {rho}")
        c = classify_slope_detail(P, rho)
        key = "smooth" if c.label == "Smooth" else "rough"
        result[key].append(list(rho))
        result["details"].append({"rho": list(rho), "label": c.label, "gap": c.gap,
                                  "B": None if c.B is None else [float(b) for b in c.B]})
    result["provenance"] = _provenance(args, w)
    _emit(args, "classify.json", result)


def _parse_edges(raw):
    edges = []
    for x, y, kind in raw:
        if kind not in ("h", "v"):
            raise UsageError("edge kind must be 'h' or 'v'")
        try:
            edges.append((int(x), int(y), kind))
        except ValueError as exc:
            raise UsageError(f"bad edge {x} {y} {kind}") from exc
    return edges


def _cmd_edge_prob(args):
    from .thermo import edge_probabilities, vertex_edges

    w = _weights(args)
    rho = args.rho or [0.0, 0.0]
    edges = _parse_edges(args.edge) if args.edge else vertex_edges(0, 0)
    kw = {"tol": args.tol} if args.tol else {}
    res = edge_probabilities(w, rho, edges, **kw)
    out = {
        "rho": list(rho),
        "edges": [{"x": e[0], "y": e[1], "kind": e[2], "probability": float(p)} for e, p in zip(edges, res.values)],
        "error_estimate": res.error,
        "imag_residue": res.imag_residue,
        "smooth_flag": res.smooth_flag,
        "provenance": _provenance(args, w),
    }
    _emit(args, "edge_prob.json", out)


def _load_or_sample_shape(args, w):
    from .growth import empirical_limit_shape
    from .io import export_shape, import_shape

    if args.shape:
        try:
            return import_shape(args.shape)
        except OSError as exc:
            raise UsageError(f"cannot read shape {args.shape}: {exc}") from exc
    _require(args, "seed")
    _progress(f"sampling {args.samples} diamonds of size {args.N}")
    shape = empirical_limit_shape(w, args.N, args.samples, args.seed)
    os.makedirs(args.out, exist_ok=True)
    export_shape(os.path.join(args.out, "shape.csv"), shape)
    return shape


def _cmd_speed(args):
    from .growth import speed_kasteleyn, speed_limit_shape

    w = _weights(args)
    rho = args.rho or [0.0, 0.0]
    if args.method == "limit-shape":
        shape = _load_or_sample_shape(args, w)
        est = speed_limit_shape(shape, rho)
    else:
        args.average = args.average or "cesaro"
        est = speed_kasteleyn(w, rho, args.kmax, args.average)
    out = est.to_dict()
    out["provenance"] = _provenance(args, w)
    _emit(args, "speed.json", out)


def _cmd_hessian(args):
    from .growth import limit_shape_hessian, speed_hessian
    from .io import import_shape

    w = _weights(args)
    rho = args.rho or [0.0, 0.0]
    if args.shape:
        try:
            shape = import_shape(args.shape)
        except OSError as exc:
            raise UsageError(f"cannot read shape {args.shape}: {exc}") from exc
        D, det = limit_shape_hessian(shape, rho)
        out = {"rho": list(rho), "source": "limit-shape", "matrix": D.tolist(), "det": det}
    else:
        args.average = args.average or "weighted"
        H = speed_hessian(w, rho, args.h, args.kmax, args.average)
        out = {"rho": list(rho), "source": "kasteleyn-sum", "h": args.h, "matrix": H.matrix.tolist(),
               "det": H.det, "det_error": H.det_error, "det_negative_beyond_error": H.negative}
    out["provenance"] = _provenance(args, w)
    _emit(args, "hessian.json", out)


def _cmd_fluctuations(args):
    from .growth import fluctuation_stats
    from .io import grid_text

    w = _weights(args)
    _require(args, "seed")
    fs = fluctuation_stats(w, args.x, args.N, args.runs, args.seed)
    meta = _provenance(args, w)
    meta["x"] = list(fs.x)
    rows = [[int(k), float(m), float(v)] for k, m, v in zip(fs.times, fs.mean, fs.variance)]
    _write(args, "fluctuations.csv", grid_text(["k", "mean", "variance"], rows, meta))
    _emit(args, "fluctuations.json", {"x": list(fs.x), "sse": fs.sse, "scale": fs.scale, "model": fs.model,
                                      "fit_window": list(fs.fit_window), "provenance": meta})


def _cmd_render(args):
    from .io import FormatError, read_dump
    from .render import ppm_bytes, svg_text

    _require(args, "dump")
    try:
        config, meta = read_dump(args.dump)
    except OSError as exc:
        raise UsageError(f"cannot read dump {args.dump}: {exc}") from exc
    except FormatError as exc:
        raise UsageError(f"corrupt dump {args.dump}: {exc}") from exc
    base = os.path.splitext(os.path.basename(args.dump))[0]
    if args.format == "svg":
        data = svg_text(config, args.scale or 8, meta["time_parity"]).encode("utf-8")
    else:
        data = ppm_bytes(config, args.scale or 4, meta["time_parity"])
    _write(args, args.name or f"{base}.{args.format}", data, binary=True)


COMMANDS = {
    "sample-aztec": _cmd_sample_aztec,
    "evolve-weights": _cmd_evolve_weights,
    "charpoly": _cmd_charpoly,
    "ronkin": _cmd_ronkin,
    "surface-tension": _cmd_surface_tension,
    "classify-slopes": _cmd_classify_slopes,
    "edge-prob": _cmd_edge_prob,
    "speed": _cmd_speed,
    "hessian": _cmd_hessian,
    "fluctuations": _cmd_fluctuations,
    "render": _cmd_render,
}


def run_command(argv):
    """Run one subcommand; returns the exit code (0 ok, 1 usage/input, 2 numerical)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        _merge_config(args)
        _limit_threads(args.threads)
        COMMANDS[args.command](args)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        return _classify_failure(exc)


def _classify_failure(exc):
    from .growth import NotResolved, StencilError
    from .io import FormatError
    from .kasteleyn import InterpolationError, InvariantViolation
    from .thermo import Indeterminate, ThermoError
    from .weights import WeightError

    if isinstance(exc, (ThermoError, NotResolved, StencilError, InterpolationError, InvariantViolation, ArithmeticError)):
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        if isinstance(exc, Indeterminate) and exc.diagnostics:
            print(json.dumps(exc.diagnostics, default=str), file=sys.stderr)
        return 2
    if isinstance(exc, (WeightError, FormatError, ValueError, OSError, KeyError)):
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    raise exc


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
