"""Command-line interface: ingestion, synthetic generators, estimator fits,
design generation, metrics, and file/figure exports.

Every invocation ends with one machine-readable summary line of the form
``status=ok|error key=value ...``; computation failures exit 1, usage
errors exit 2. All commands are deterministic for fixed flags and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import design, doe as doemod, io, metrics, plots, quadsurf, sdr, service
from . import subspace as subspacemod, varpro
from .quadsurf import COMPAT_GAMMA, DEFAULT_GAMMA


def _emit(status: str, **kv) -> None:
    parts = [f"status={status}"]
    for key, value in kv.items():
        if isinstance(value, float):
            rendered = repr(value)
        elif isinstance(value, (bool, np.bool_)):
            rendered = "true" if value else "false"
        elif isinstance(value, (int, np.integer)):
            rendered = str(int(value))
        else:
            rendered = str(value)
            if any(ch.isspace() for ch in rendered) or rendered == "":
                rendered = json.dumps(rendered)
        parts.append(f"{key}={rendered}")
    print(" ".join(parts))


def _add_load_flags(p: argparse.ArgumentParser):
    p.add_argument("--in", dest="infile", required=True, help="input DoE table")
    p.add_argument(
        "--fcol", default=None, help="name of the output column (default: 'f' or last)"
    )
    p.add_argument(
        "--normalized",
        action="store_true",
        help="validate that inputs lie in [-1, 1]",
    )


def _load(args) -> doemod.DesignOfExperiments:
    return io.load_doe(args.infile, output_column=args.fcol, normalized=args.normalized)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise ValueError(f"cannot parse {text!r} as a comma-separated vector") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ridgekit",
        description="dimension-reducing subspace discovery and design exploration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    # --- fit -----------------------------------------------------------
    fit = sub.add_parser("fit", help="fit an estimator to a DoE")
    fitsub = fit.add_subparsers(dest="estimator", required=True)

    fq = fitsub.add_parser("quad", help="global quadratic + gradient covariance")
    _add_load_flags(fq)
    fq.add_argument("--out", required=True, help="quadratic model file")
    fq.add_argument("--gamma", type=float, default=DEFAULT_GAMMA,
                    help=f"covariance constant ({DEFAULT_GAMMA!r} exact, "
                         f"{COMPAT_GAMMA!r} compatibility)")
    fq.add_argument("--n", type=int, default=None, help="subspace dimension")
    fq.add_argument("--n-max", type=int, default=None,
                    help="gap-rule search bound when --n is omitted")
    fq.add_argument("--subspace-out", default=None)
    fq.add_argument("--eigen-out", default=None)
    fq.add_argument("--oversampling-min", type=float, default=1.5)
    fq.add_argument("--force", action="store_true",
                    help="fit even below the oversampling floor")

    for name, extra in (("sir", "slices"), ("save", "slices"), ("phd", None),
                        ("cr", "cr")):
        fp = fitsub.add_parser(name)
        _add_load_flags(fp)
        fp.add_argument("--out", required=True, help="subspace file")
        fp.add_argument("--n", type=int, required=True)
        if extra == "slices":
            fp.add_argument("--slices", type=int, default=sdr.DEFAULT_SLICES)
        if extra == "cr":
            fp.add_argument("--tolerance-c", type=float, required=True)
            fp.add_argument("--pair-cap", type=int, default=sdr.CR_PAIR_CAP)
            fp.add_argument("--seed", type=int, default=0)

    fv = fitsub.add_parser("varpro", help="polynomial variable projection")
    _add_load_flags(fv)
    fv.add_argument("--out", required=True, help="ridge model file")
    fv.add_argument("--n", type=int, required=True)
    fv.add_argument("--degree", type=int, required=True)
    fv.add_argument("--basis", choices=("total", "tensor"), default="total")
    fv.add_argument("--seed", type=int, default=0)
    fv.add_argument("--restarts", type=int, default=5)
    fv.add_argument("--max-iterations", type=int, default=100)
    fv.add_argument("--subspace-out", default=None)

    # --- bootstrap -------------------------------------------------------
    bs = sub.add_parser("bootstrap", help="subsampled eigenvalue bands")
    _add_load_flags(bs)
    bs.add_argument("--out", required=True, help="eigen report file")
    bs.add_argument("--subsample", type=int, required=True)
    bs.add_argument("--replicates", type=int, required=True)
    bs.add_argument("--seed", type=int, default=0)
    bs.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    bs.add_argument("--plot", default=None, help="also render a PNG figure")

    # --- subspace utilities ----------------------------------------------
    an = sub.add_parser("angle", help="distance angle between two subspaces")
    an.add_argument("--a", required=True)
    an.add_argument("--b", required=True)

    pj = sub.add_parser("project", help="summary-plot export of projections")
    _add_load_flags(pj)
    pj.add_argument("--subspace", required=True)
    pj.add_argument("--out", required=True)
    pj.add_argument("--plot", default=None)

    sf = sub.add_parser("surface", help="fit a response surface over a subspace")
    _add_load_flags(sf)
    sf.add_argument("--subspace", required=True)
    sf.add_argument("--degree", type=int, required=True)
    sf.add_argument("--basis", choices=("total", "tensor"), default="total")
    sf.add_argument("--name", default=None, help="operating point name")
    sf.add_argument("--out", required=True, help="operating point file")

    ct = sub.add_parser("contour", help="contour-grid export of a surface")
    ct.add_argument("--model", required=True, help="operating point file")
    ct.add_argument("--resolution", type=int, default=64)
    ct.add_argument("--out", required=True)
    ct.add_argument("--plot", default=None)

    # --- design ----------------------------------------------------------
    dg = sub.add_parser("design", help="constrained design generation")
    dgsub = dg.add_subparsers(dest="action", required=True)

    gen = dgsub.add_parser("generate")
    gen.add_argument("--model", required=True, help="operating point file")
    gen.add_argument("--y", required=True, help="reduced coordinates, comma-separated")
    gen.add_argument("--count", type=int, default=4)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="parallel-coordinates export")
    gen.add_argument("--plot", default=None)

    cp = dgsub.add_parser("crossproject")
    cp.add_argument("--designs", required=True, help="parallel-coordinates export")
    cp.add_argument("--model", required=True, help="other operating point file")
    cp.add_argument("--out", required=True)

    # --- synthetic generators ---------------------------------------------
    sy = sub.add_parser("synth", help="synthetic test functions")
    sysub = sy.add_subparsers(dest="generator", required=True)

    se = sysub.add_parser("exp", help="4-D exponential ridge")
    se.add_argument("--samples", type=int, required=True)
    se.add_argument("--seed", type=int, default=0)
    se.add_argument("--out", required=True)
    se.add_argument("--truth-out", default=None, help="true direction subspace file")

    sq = sysub.add_parser("quad", help="random quadratic with known spectrum")
    sq.add_argument("--d", type=int, required=True)
    sq.add_argument("--samples", type=int, required=True)
    sq.add_argument("--seed", type=int, default=0)
    sq.add_argument("--spectrum", default=None, help="comma-separated eigenvalues")
    sq.add_argument("--linear-scale", type=float, default=1.0)
    sq.add_argument("--out", required=True)
    sq.add_argument("--model-out", default=None, help="ground-truth model file")

    sr = sysub.add_parser("ridge", help="random polynomial ridge")
    sr.add_argument("--d", type=int, required=True)
    sr.add_argument("--n", type=int, default=1)
    sr.add_argument("--degree", type=int, default=3)
    sr.add_argument("--basis", choices=("total", "tensor"), default="total")
    sr.add_argument("--samples", type=int, required=True)
    sr.add_argument("--seed", type=int, default=0)
    sr.add_argument("--out", required=True)
    sr.add_argument("--truth-out", default=None)

    # --- metrics / normalize / serve ---------------------------------------
    me = sub.add_parser("metrics", help="stage performance metrics")
    me.add_argument("--in", dest="infile", required=True, help="station state JSON")
    me.add_argument("--out", default=None)

    nm = sub.add_parser("normalize", help="affine rescale inputs to [-1, 1]")
    nm.add_argument("--in", dest="infile", required=True)
    nm.add_argument("--fcol", default=None)
    nm.add_argument("--out", required=True)
    nm.add_argument("--map-out", required=True, help="rescaling map file")

    sv = sub.add_parser("serve", help="run the design-exploration service")
    sv.add_argument("--model", action="append", required=True,
                    help="operating point file (give exactly twice)")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8765)

    return parser


# ---------------------------------------------------------------------------
# Command bodies


def _cmd_fit_quad(args) -> None:
    sample = _load(args)
    model = quadsurf.fit_quadratic(
        sample,
        oversampling_min=args.oversampling_min,
        allow_undersampled=args.force,
    )
    io.save_quadratic_model(args.out, model)
    extra = {}
    if args.subspace_out or args.eigen_out or args.n is not None:
        K = quadsurf.gradient_covariance(model, args.gamma)
        U, report = quadsurf.active_subspace(K, n=args.n, n_max=args.n_max)
        extra["n"] = U.dim
        if args.subspace_out:
            io.write_subspace(args.subspace_out, U)
            extra["subspace_out"] = args.subspace_out
        if args.eigen_out:
            io.save_eigen_report(args.eigen_out, report)
            extra["eigen_out"] = args.eigen_out
    _emit("ok", cmd="fit-quad", out=args.out, degenerate=model.degenerate, **extra)


def _cmd_fit_sdr(args) -> None:
    sample = _load(args)
    if args.estimator == "sir":
        U = sdr.sir(sample, S=args.slices, n=args.n)
    elif args.estimator == "save":
        U = sdr.save(sample, S=args.slices, n=args.n)
    elif args.estimator == "phd":
        U = sdr.phd(sample, n=args.n)
    else:
        U = sdr.contour_regression(
            sample, c=args.tolerance_c, n=args.n,
            pair_cap=args.pair_cap, seed=args.seed,
        )
    io.write_subspace(args.out, U)
    _emit("ok", cmd=f"fit-{args.estimator}", out=args.out, n=args.n)


def _cmd_fit_varpro(args) -> None:
    sample = _load(args)
    options = varpro.VarproOptions(
        max_iterations=args.max_iterations,
        restarts=args.restarts,
        seed=args.seed,
    )
    model = varpro.varpro_fit(
        sample, n=args.n, p=args.degree, kind=args.basis, options=options
    )
    io.save_ridge_model(args.out, model)
    extra = {}
    if args.subspace_out:
        io.write_subspace(args.subspace_out, model.U)
        extra["subspace_out"] = args.subspace_out
    _emit(
        "ok",
        cmd="fit-varpro",
        out=args.out,
        residual_norm=model.residual_norm,
        r_squared=model.r_squared,
        iterations=model.iterations,
        converged=model.converged,
        **extra,
    )


def _cmd_bootstrap(args) -> None:
    sample = _load(args)
    report = quadsurf.bootstrap_eigenvalues(
        sample,
        subsample_size=args.subsample,
        replicates=args.replicates,
        seed=args.seed,
        gamma=args.gamma,
    )
    io.save_eigen_report(args.out, report)
    extra = {}
    if args.plot:
        plots.plot_eigen_report(args.plot, report)
        extra["plot"] = args.plot
    _emit("ok", cmd="bootstrap", out=args.out, replicates=args.replicates, **extra)


def _cmd_angle(args) -> None:
    a = io.load_subspace(args.a)
    b = io.load_subspace(args.b)
    _emit("ok", cmd="angle", phi=subspacemod.subspace_angle(a, b))


def _cmd_project(args) -> None:
    sample = _load(args)
    U = io.load_subspace(args.subspace)
    Y = subspacemod.project(sample, U)
    io.write_summary(args.out, Y, sample.outputs)
    extra = {}
    if args.plot:
        plots.plot_summary(args.plot, Y, sample.outputs, sample.objective_name)
        extra["plot"] = args.plot
    _emit("ok", cmd="project", out=args.out, rows=Y.shape[0], cols=Y.shape[1], **extra)


def _cmd_surface(args) -> None:
    sample = _load(args)
    U = io.load_subspace(args.subspace)
    Y = subspacemod.project(sample, U)
    surf = subspacemod.fit_response_surface(
        Y, sample.outputs, p=args.degree, kind=args.basis
    )
    point = io.OperatingPoint(
        name=args.name or sample.objective_name,
        subspace=U,
        surface=surf,
        training_y=Y,
        training_f=sample.outputs,
    )
    io.save_operating_point(args.out, point)
    _emit("ok", cmd="surface", out=args.out, r_squared=surf.r_squared,
          degenerate=surf.degenerate)


def _cmd_contour(args) -> None:
    point = io.load_operating_point(args.model)
    Y1, Y2, V = subspacemod.contour_grid(point.surface, args.resolution)
    io.write_contour(args.out, Y1, Y2, V)
    extra = {}
    if args.plot:
        plots.plot_contour(
            args.plot, Y1, Y2, V, objective=point.name, points=point.training_y
        )
        extra["plot"] = args.plot
    _emit("ok", cmd="contour", out=args.out, resolution=args.resolution, **extra)


def _cmd_design_generate(args) -> None:
    point = io.load_operating_point(args.model)
    y = _parse_vector(args.y)
    batch = design.generate_designs(point.subspace, y, count=args.count, seed=args.seed)
    io.write_designs(args.out, batch)
    extra = {}
    if args.plot:
        weights = np.abs(point.subspace.columns[:, 0])
        plots.plot_parallel_coordinates(args.plot, np.asarray(batch.designs), weights)
        extra["plot"] = args.plot
    _emit("ok", cmd="design-generate", out=args.out, count=len(batch),
          short=batch.short, **extra)


def _cmd_design_crossproject(args) -> None:
    X, _ = io.load_designs(args.designs)
    point = io.load_operating_point(args.model)
    Y = subspacemod.project(X, point.subspace)
    values = point.surface.evaluate(Y)
    flags = point.surface.out_of_bounds(Y)
    header = (
        ["design_id"]
        + [f"y{j + 1}" for j in range(Y.shape[1])]
        + ["value", "extrapolated"]
    )
    lines = [",".join(header)]
    for i in range(X.shape[0]):
        body = ",".join(io.fmt17(v) for v in Y[i])
        lines.append(f"{i},{body},{io.fmt17(values[i])},{int(flags[i])}")
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    _emit("ok", cmd="design-crossproject", out=args.out, count=X.shape[0],
          extrapolated=int(flags.sum()))


def _cmd_synth(args) -> None:
    if args.generator == "exp":
        sample = doemod.synth_exp_ridge(args.samples, seed=args.seed)
        io.write_doe(args.out, sample)
        extra = {}
        if args.truth_out:
            w = doemod.EXP_RIDGE_DIRECTION
            io.write_subspace(
                args.truth_out, subspacemod.orthonormalize(w[:, None])
            )
            extra["truth_out"] = args.truth_out
        _emit("ok", cmd="synth-exp", out=args.out, samples=args.samples, **extra)
    elif args.generator == "quad":
        spectrum = _parse_vector(args.spectrum) if args.spectrum else None
        sample, truth = doemod.synth_quadratic(
            args.d, args.samples, seed=args.seed,
            spectrum=spectrum, linear_scale=args.linear_scale,
        )
        io.write_doe(args.out, sample)
        extra = {}
        if args.model_out:
            io.save_quadratic_model(args.model_out, truth)
            extra["model_out"] = args.model_out
        _emit("ok", cmd="synth-quad", out=args.out, samples=args.samples, **extra)
    else:
        sample, U, _ = doemod.synth_poly_ridge(
            args.d, args.n, args.degree, args.samples,
            seed=args.seed, kind=args.basis,
        )
        io.write_doe(args.out, sample)
        extra = {}
        if args.truth_out:
            io.write_subspace(args.truth_out, U)
            extra["truth_out"] = args.truth_out
        _emit("ok", cmd="synth-ridge", out=args.out, samples=args.samples, **extra)


def _cmd_metrics(args) -> None:
    station = io.load_station(args.infile)
    values = metrics.perf_metrics(station)
    if args.out:
        tree = {"version": io.FORMAT_VERSION, "type": "perf_metrics", **values}
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(io.render_json(tree) + "\n")
    _emit("ok", cmd="metrics", **values)


def _cmd_normalize(args) -> None:
    sample = io.load_doe(args.infile, output_column=args.fcol, normalized=False)
    X = sample.inputs
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    T = np.where(span > 0, 2.0 * (X - lo) / safe - 1.0, 0.0)
    rescaled = doemod.DesignOfExperiments(
        inputs=T,
        outputs=sample.outputs,
        objective_name=sample.objective_name,
        normalized=True,
    )
    io.write_doe(args.out, rescaled)
    columns = [f"x{j + 1}" for j in range(X.shape[1])]
    io.save_normalize_map(args.map_out, columns, lo, hi)
    _emit("ok", cmd="normalize", out=args.out, map_out=args.map_out)


def _cmd_serve(args) -> None:
    session = service.load_session(args.model)
    server = service.build_server(session, host=args.host, port=args.port)
    host, port = server.server_address[:2]
    _emit("ok", cmd="serve", host=host, port=port,
          points=",".join(p.name for p in session.points))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def run_command(argv) -> int:
    """Dispatch one invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        if code != 0:
            _emit("error", error="usage")
        return code

    try:
        if args.command == "fit":
            if args.estimator == "quad":
                _cmd_fit_quad(args)
            elif args.estimator == "varpro":
                _cmd_fit_varpro(args)
            else:
                _cmd_fit_sdr(args)
        elif args.command == "bootstrap":
            _cmd_bootstrap(args)
        elif args.command == "angle":
            _cmd_angle(args)
        elif args.command == "project":
            _cmd_project(args)
        elif args.command == "surface":
            _cmd_surface(args)
        elif args.command == "contour":
            _cmd_contour(args)
        elif args.command == "design":
            if args.action == "generate":
                _cmd_design_generate(args)
            else:
                _cmd_design_crossproject(args)
        elif args.command == "synth":
            _cmd_synth(args)
        elif args.command == "metrics":
            _cmd_metrics(args)
        elif args.command == "normalize":
            _cmd_normalize(args)
        elif args.command == "serve":
            _cmd_serve(args)
        else:  # pragma: no cover - argparse enforces the choices
            raise AssertionError(f"unhandled command {args.command}")
    except Exception as exc:  # computation error: summary line + exit 1
        _emit("error", error=f"{type(exc).__name__}: {exc}")
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
