"""Command-line experiments: generate, fit, denoise, recover, spectrum.

Every command writes into an output directory: a verbatim copy of the
resolved configuration, plot-ready CSV artifacts, and a JSON report. Given a
fixed seed, reruns are byte-identical. The LSKR_THREADS environment variable
caps BLAS/OpenMP parallelism and must be handled before numpy loads.
"""

import os

_threads = os.environ.get("LSKR_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .errors import ConvergenceWarning, LskrError
from .geometry import FourierCoeffs, GaussianSpec, PointCloud, cube_support
from .irls import IrlsConfig, irls_recover, two_step_recover
from .kernels import gram_matrix, kernel_rank_profile
from .metrics import EvalReport, curve_distance, relative_error, rmse
from .operators import FourierMaskOp, IdentityOp, center_kspace_op, variable_density_masks
from .surface import extract_levelset_2d, fit_surface
from .synthdata import (
    DynSeriesSpec,
    add_noise,
    make_dynamic_series,
    make_shape,
    sample_surface,
)


def _dump_json(payload: dict, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _prepare_outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    _dump_json(cfg, out / "config.json")
    return out


def _save_levelset(polys, path: Path) -> None:
    if polys:
        rows = np.vstack(
            [
                np.column_stack([np.full(len(p), i), p])
                for i, p in enumerate(polys)
            ]
        )
    else:
        rows = np.empty((0, 3))
    np.savetxt(
        path,
        rows,
        fmt=["%d", "%.17g", "%.17g"],
        delimiter=",",
        header="curve,x,y",
        comments="",
    )


def _save_eigs(evals, path: Path) -> None:
    rows = np.column_stack([np.arange(len(evals)), np.asarray(evals)])
    np.savetxt(
        path,
        rows,
        fmt=["%d", "%.17g"],
        delimiter=",",
        header="index,eigenvalue",
        comments="",
    )


def _save_complex(mat: np.ndarray, out: Path, stem: str) -> None:
    np.savetxt(
        out / f"{stem}_re.csv", np.real(mat).T, fmt="%.17g", delimiter=","
    )
    np.savetxt(
        out / f"{stem}_im.csv", np.imag(mat).T, fmt="%.17g", delimiter=","
    )


def cmd_gen(args) -> int:
    out = _prepare_outdir(args)
    if args.series:
        spec = DynSeriesSpec(
            frame_shape=(args.size, args.size),
            num_frames=args.frames,
            cardiac_freq=args.cardiac_freq,
            resp_freq=args.resp_freq,
        )
        X = make_dynamic_series(spec)
        X.to_csv(out / "series.csv")
        _dump_json(spec.to_json_dict(), out / "series_spec.json")
        return 0
    params = {}
    if args.shape == "cos-curve":
        params["level"] = args.level
    if args.shape == "two-circles":
        params["offset"] = args.offset
        params["level"] = args.level if args.level != 1.0 else 1.6
    shape = make_shape(args.shape, **params)
    X = sample_surface(shape, args.n, args.seed)
    if args.noise > 0:
        X = add_noise(X, args.noise, args.seed + 1)
    X.to_csv(out / "cloud.csv")
    payload = shape.coeffs.to_json_dict()
    payload["name"] = shape.name
    payload["params"] = dict(shape.params)
    _dump_json(payload, out / "shape.json")
    return 0


def cmd_fit(args) -> int:
    out = _prepare_outdir(args)
    X = PointCloud.from_csv(args.cloud)
    support = cube_support(X.n, args.K)
    model = fit_surface(
        X, support, sigma=args.sigma, tol=args.tol, symmetrize=not args.no_symmetrize
    )
    payload = model.coeffs.to_json_dict()
    payload["nullspace_dim"] = model.nullspace_dim
    payload["weighted"] = model.weighted
    payload["sigma"] = model.sigma
    _dump_json(payload, out / "coeffs.json")
    _save_eigs(model.eigenvalues, out / "eigenvalues.csv")
    if X.n == 2:
        _save_levelset(extract_levelset_2d(model, args.grid_res), out / "levelset.csv")
    report = {
        "nullspace_dim": model.nullspace_dim,
        "min_eigenvalue": float(model.eigenvalues[-1]),
        "max_eigenvalue": float(model.eigenvalues[0]),
    }
    _dump_json(report, out / "report.json")
    return 0


def cmd_denoise(args) -> int:
    out = _prepare_outdir(args)
    X_in = PointCloud.from_csv(args.cloud)
    cfg = IrlsConfig(
        lam=args.lam,
        kernel=GaussianSpec(sigma=args.sigma),
        outer_iters=args.iters,
        seed=args.seed,
    )
    op = IdentityOp(n=X_in.n, N=X_in.N)
    start = time.perf_counter()
    caught: list = []
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always", ConvergenceWarning)
        X_out, state = irls_recover(op, op.forward(X_in), cfg=cfg)
        caught = [str(w.message) for w in rec if issubclass(w.category, ConvergenceWarning)]
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    X_out.to_csv(out / "recovered.csv")
    state.history_to_csv(out / "history.csv")
    report = EvalReport(
        rmse=rmse(X_out, X_in),
        rel_error=relative_error(X_out, X_in),
        runtime_ms=elapsed_ms,
        warnings=caught,
    )
    payload = report.to_json_dict()
    if args.truth:
        with open(args.truth) as fh:
            truth = FourierCoeffs.from_json_dict(json.load(fh))
        payload["mean_curve_dist_input"] = float(np.mean(curve_distance(X_in, truth)))
        payload["mean_curve_dist_output"] = float(np.mean(curve_distance(X_out, truth)))
    _dump_json(payload, out / "report.json")
    return 3 if (caught and args.strict_warnings) else 0


def cmd_recover(args) -> int:
    out = _prepare_outdir(args)
    X_true = PointCloud.from_csv(args.series)
    h = w = args.size
    if X_true.n != h * w:
        raise LskrError(
            f"series rows ({X_true.n}) do not match --size {args.size} frames"
        )
    masks = variable_density_masks((h, w), X_true.N, args.accel, args.seed)
    op_full = FourierMaskOp(frame_shape=(h, w), masks=masks)
    b_full = op_full.forward(X_true)
    cfg = IrlsConfig(
        lam=args.lam,
        kernel=None,
        outer_iters=args.iters,
        seed=args.seed,
        lambda_stage2=args.lam2,
        center_size=args.center,
        accel=args.accel,
    )
    start = time.perf_counter()
    caught: list = []
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always", ConvergenceWarning)
        if args.two_step:
            op_center = center_kspace_op((h, w), args.center, X_true.N)
            b_center = op_center.forward(X_true)
            X_rec, state = two_step_recover(
                b_center,
                b_full,
                (h, w),
                cfg,
                op_center=op_center,
                op_full=op_full,
            )
        else:
            X_rec, state = irls_recover(op_full, b_full, cfg=cfg)
        caught = [str(w.message) for w in rec if issubclass(w.category, ConvergenceWarning)]
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    _save_complex(X_rec.data, out, "recovered")
    state.history_to_csv(out / "history.csv")
    baseline = op_full.adjoint(b_full)
    report = EvalReport(
        rmse=rmse(np.real(X_rec.data), X_true),
        rel_error=relative_error(X_rec.data, X_true.data.astype(complex)),
        runtime_ms=elapsed_ms,
        warnings=caught,
    )
    payload = report.to_json_dict()
    payload["rel_error_baseline"] = relative_error(
        baseline, X_true.data.astype(complex)
    )
    _dump_json(payload, out / "report.json")
    return 3 if (caught and args.strict_warnings) else 0


def cmd_spectrum(args) -> int:
    out = _prepare_outdir(args)
    X = PointCloud.from_csv(args.cloud)
    if args.kernel == "dirichlet":
        from .geometry import DirichletSpec

        spec = DirichletSpec(support=cube_support(X.n, args.K))
    else:
        spec = GaussianSpec(sigma=args.sigma, periodic=not args.flat)
    G = gram_matrix(X, spec)
    profile = kernel_rank_profile(G, thresholds=(1e-3, 1e-8))
    _save_eigs(profile.eigenvalues, out / "eigenvalues.csv")
    _dump_json(
        {
            "thresholds": list(profile.thresholds),
            "ranks": list(profile.ranks),
            "N": G.N,
        },
        out / "report.json",
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lskr",
        description="Point clouds on bandlimited level sets: generation, "
        "fitting, and kernel low-rank recovery.",
    )
    p.add_argument("--config", help="JSON file whose entries override flags")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic cloud or image series")
    g.add_argument("--shape", choices=["cos-curve", "two-circles", "lemniscate"],
                   default="cos-curve")
    g.add_argument("--level", type=float, default=1.0)
    g.add_argument("--offset", type=float, default=0.22)
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--series", action="store_true", help="emit an image series instead")
    g.add_argument("--frames", type=int, default=64)
    g.add_argument("--size", type=int, default=32)
    g.add_argument("--cardiac-freq", type=float, default=0.173)
    g.add_argument("--resp-freq", type=float, default=0.031)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", help="fit a level-set model to a cloud")
    f.add_argument("--cloud", required=True)
    f.add_argument("--K", type=int, default=1)
    f.add_argument("--sigma", type=float, default=None)
    f.add_argument("--tol", type=float, default=1e-8)
    f.add_argument("--grid-res", type=int, default=512)
    f.add_argument("--no-symmetrize", action="store_true")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    d = sub.add_parser("denoise", help="kernel low-rank denoising of a cloud")
    d.add_argument("--cloud", required=True)
    d.add_argument("--sigma", type=float, default=0.15)
    d.add_argument("--lam", type=float, default=0.02)
    d.add_argument("--iters", type=int, default=30)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--truth", help="coefficient JSON for curve-distance reporting")
    d.add_argument("--strict-warnings", action="store_true")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_denoise)

    r = sub.add_parser("recover", help="undersampled Fourier recovery of a series")
    r.add_argument("--series", required=True)
    r.add_argument("--size", type=int, default=32)
    r.add_argument("--accel", type=float, default=8.0)
    r.add_argument("--center", type=int, default=9)
    r.add_argument("--two-step", action="store_true")
    r.add_argument("--lam", type=float, default=1e-2)
    r.add_argument("--lam2", type=float, default=None)
    r.add_argument("--iters", type=int, default=30)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--strict-warnings", action="store_true")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_recover)

    s = sub.add_parser("spectrum", help="kernel Gram eigenvalue profile")
    s.add_argument("--cloud", required=True)
    s.add_argument("--kernel", choices=["dirichlet", "gaussian"], default="dirichlet")
    s.add_argument("--K", type=int, default=2)
    s.add_argument("--sigma", type=float, default=0.15)
    s.add_argument("--flat", action="store_true",
                   help="non-periodic Gaussian (image-scale clouds)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        for key, value in overrides.items():
            setattr(args, key.replace("-", "_"), value)
    try:
        return args.func(args)
    except LskrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
