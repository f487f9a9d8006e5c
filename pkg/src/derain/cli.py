"""Command-line entry point: ``derain {derain,detect-angle,simulate,metrics}``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from derain import synth
from derain.geometry import detect_angle
from derain.metrics import quality_report
from derain.pipeline import derain_color, derain_luma
from derain.shrinkage import ShrinkMode
from derain.solver import SolverParams
from derain.tensor import ColorVideo
from derain.videoio import (
    FrameError,
    TensorFileError,
    read_frames,
    read_raw,
    rgb_to_yuv,
    write_frames,
    write_raw,
)

log = logging.getLogger("derain")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers


def _floats(text: str, count: int | None = None) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(values) != count:
        raise UsageError(f"expected {count} values, got {len(values)} in {text!r}")
    return values


def _parse_dims(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    try:
        m, n, t = (int(p) for p in parts)
    except ValueError:
        raise UsageError(f"--dims must look like MxNxT, got {text!r}") from None
    if min(m, n, t) < 1:
        raise UsageError(f"--dims must be positive, got {text!r}")
    return t, m, n


def _parse_range(text: str) -> range:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--sweep must look like LO:HI, got {text!r}") from None
    if not -90 < lo <= hi < 90:
        raise UsageError(f"--sweep bounds must lie in (-90, 90), got {text!r}")
    return range(lo, hi + 1)


def _parse_angle_mode(text: str, frames: int):
    kind, _, rest = text.partition(":")
    try:
        if kind == "fixed":
            return synth.FixedPerFrame(_floats(rest))
        if kind == "ramp":
            lo, hi = (float(v) for v in rest.split(":"))
            return synth.FixedPerFrame.ramp(lo, hi, frames)
        if kind == "uniform":
            lo, hi = (float(v) for v in rest.split(":"))
            return synth.UniformRange(lo, hi)
    except ValueError:
        pass
    raise UsageError(
        f"--angle-mode must be fixed:A[,A...], ramp:LO:HI or uniform:LO:HI, got {text!r}"
    )


def _solver_params(args) -> SolverParams:
    try:
        return SolverParams(
            alpha=tuple(_floats(args.alpha, 4)),
            mu=args.mu,
            tol=args.tol,
            max_iter=args.max_iter,
            mode=ShrinkMode(args.shrink),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _format_for(path: Path, fmt: str | None) -> str:
    if fmt:
        return fmt
    return "frames" if path.is_dir() or not path.suffix else "raw"


def _load(path: str, fmt: str | None):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{p}: no such file or directory")
    if _format_for(p, fmt) == "frames":
        return read_frames(p)
    return read_raw(p)


def _luma(video) -> np.ndarray:
    if isinstance(video, ColorVideo):
        return rgb_to_yuv(video)[0]
    return video


def _save(path: str, video, fmt: str | None) -> None:
    """Write atomically: a temp file/dir beside the target, renamed on success."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    if _format_for(target, fmt) == "frames":
        tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
        try:
            written = write_frames(tmp, video)
            target.mkdir(exist_ok=True)
            for f in written:
                os.replace(f, target / f.name)
        finally:
            shutil.rmtree(tmp, ignore_errors=True)
        return
    if isinstance(video, ColorVideo):
        raise UsageError(f"{target}: raw format holds one channel; use --format frames for color")
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    os.close(fd)
    try:
        write_raw(tmp_name, video)
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------- commands


def cmd_derain(args) -> int:
    params = _solver_params(args)
    if args.angle is not None and not -90 < args.angle < 90:
        raise UsageError(f"--angle must lie in (-90, 90), got {args.angle}")
    sweep = _parse_range(args.sweep)
    video = _load(args.input, args.format)
    if isinstance(video, ColorVideo) and _format_for(Path(args.out_bg), args.format) == "raw":
        raise UsageError("color input needs a frame directory for --out-bg (raw holds one channel)")
    ref = _luma(_load(args.ref, args.format)) if args.ref else None

    kwargs = dict(angle=args.angle, sweep=sweep)
    if args.detect_frames:
        t = video.shape[0]
        kwargs["detect_frames"] = np.unique(np.linspace(0, t - 1, min(args.detect_frames, t)).astype(int))
    try:
        if isinstance(video, ColorVideo):
            background, rain, result = derain_color(video, params, **kwargs)
        else:
            result = derain_luma(video, params, **kwargs)
            background, rain = result.B, result.R
    except (ValueError, FloatingPointError) as exc:
        print(f"derain: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    _save(args.out_bg, background, args.format)
    if args.out_rain:
        _save(args.out_rain, rain, args.format)

    solve = result.solve
    last = solve.history[-1]
    print(f"angle={result.angle:g}")
    print(f"plan=flip:{int(result.plan.flip_lr)},transpose:{int(result.plan.transpose)},"
          f"shift:{result.plan.shift_mode.value}")
    print(f"iterations={solve.iterations}")
    print(f"converged={str(solve.converged).lower()}")
    print(f"rel_change={last.rel_change:.3e}")
    print("residuals=" + ",".join(f"{r:.3e}" for r in last.residuals))
    if ref is not None:
        before = quality_report(ref, _luma(video))
        after = quality_report(ref, result.B)
        print(f"psnr_input={_num(before.psnr)}")
        print(f"psnr_output={_num(after.psnr)}")
        print(f"psnr_gain={_num(after.psnr - before.psnr)}")
        print(f"ssim_input={before.ssim_mean:.6f}")
        print(f"ssim_output={after.ssim_mean:.6f}")
    return EXIT_OK


def _num(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.4f}"


def cmd_detect_angle(args) -> int:
    sweep = _parse_range(args.sweep)
    video = _luma(_load(args.input, args.format))
    frames = None
    if args.detect_frames:
        t = video.shape[0]
        frames = np.unique(np.linspace(0, t - 1, min(args.detect_frames, t)).astype(int))
    try:
        est = detect_angle(video, sweep=sweep, frames=frames)
    except ValueError as exc:
        print(f"derain: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{est.theta_hat:g}")
    if args.csv:
        lines = ["theta_deg,y"] + [f"{th:g},{y:.6f}" for th, y in est.curve]
        text = "\n".join(lines) + "\n"
        if args.csv == "-":
            sys.stdout.write(text)
        else:
            Path(args.csv).write_text(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    shape = _parse_dims(args.dims)
    try:
        if args.preset:
            spec = synth.preset(args.preset, shape[0], args.seed)
        else:
            spec = synth.RainSpec(
                density=args.density,
                length=args.length,
                angle_mode=_parse_angle_mode(args.angle_mode, shape[0]),
                intensity=args.intensity,
                seed=args.seed,
            )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.sigma < 0:
        raise UsageError(f"--sigma must be >= 0, got {args.sigma}")
    if args.background:
        clean = _luma(_load(args.background, args.format))
        if clean.shape != shape:
            t, m, n = clean.shape
            raise UsageError(f"background is {m}x{n}x{t}, --dims asks for {args.dims}")
    else:
        clean = synth.moving_gradient_scene(shape, seed=args.seed)
    rain = synth.simulate_rain(shape, spec)
    rainy = synth.composite(clean, rain, args.sigma, seed=args.seed + 1)
    _save(args.out, rainy, args.format)
    if args.out_clean:
        _save(args.out_clean, clean, args.format)
    if args.out_rain:
        _save(args.out_rain, rain, args.format)
    t, m, n = shape
    print(f"dims={m}x{n}x{t}")
    print(f"streaks_per_frame={math.ceil(spec.density * m * n)}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    ref = _luma(_load(args.ref, args.format))
    test = _luma(_load(args.test, args.format))
    if ref.shape != test.shape:
        raise UsageError(f"--ref is {ref.shape} but --test is {test.shape} (t, m, n)")
    try:
        report = quality_report(ref, test)
    except ValueError as exc:
        print(f"derain: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(report.as_text())
    if args.csv:
        text = report.csv_header() + "\n" + report.csv_row() + "\n"
        if args.csv == "-":
            sys.stdout.write(text)
        else:
            Path(args.csv).write_text(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="derain", description="Video rain streak removal.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def io_format(p):
        p.add_argument("--format", choices=("raw", "frames"),
                       help="raw tensor file or frame directory (default: guess from path)")

    p = sub.add_parser("derain", help="separate background and rain layers")
    p.add_argument("--input", required=True)
    p.add_argument("--out-bg", required=True)
    p.add_argument("--out-rain")
    p.add_argument("--alpha", default="0.01,1e-5,1e-5,0.01",
                   help="weights: rain vertical TV, rain l1, background horizontal TV, "
                        "background temporal TV")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=100)
    angle = p.add_mutually_exclusive_group()
    angle.add_argument("--auto-angle", dest="angle", action="store_const", const=None,
                       help="detect the streak angle (default)")
    angle.add_argument("--angle", type=float, default=None,
                       help="fixed streak angle in degrees; 0 disables normalization")
    p.add_argument("--shrink", choices=("signed", "paper"), default="signed")
    p.add_argument("--sweep", default="-89:89", help="detection range LO:HI in degrees (write --sweep=-30:30 for negative bounds)")
    p.add_argument("--detect-frames", type=int, default=0,
                   help="run detection on this many evenly spaced frames (0: all)")
    p.add_argument("--ref", help="clean reference video; prints PSNR/SSIM before and after")
    io_format(p)
    p.set_defaults(func=cmd_derain)

    p = sub.add_parser("detect-angle", help="estimate the rain streak angle")
    p.add_argument("--input", required=True)
    p.add_argument("--sweep", default="-89:89")
    p.add_argument("--detect-frames", type=int, default=0)
    p.add_argument("--csv", help="write the sweep curve (theta_deg,y) here; '-' for stdout")
    io_format(p)
    p.set_defaults(func=cmd_detect_angle)

    p = sub.add_parser("simulate", help="synthesize a rainy test video")
    p.add_argument("--dims", required=True, help="MxNxT")
    p.add_argument("--preset", choices=("case1", "case2", "case3-like"))
    p.add_argument("--density", type=float, default=0.02)
    p.add_argument("--length", type=int, default=9)
    p.add_argument("--angle-mode", default="fixed:0")
    p.add_argument("--intensity", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--background", help="clean video to rain on (default: synthetic scene)")
    p.add_argument("--out", required=True, help="rainy video")
    p.add_argument("--out-clean")
    p.add_argument("--out-rain")
    io_format(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="PSNR and mean SSIM of a test video")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--csv", help="write a CSV header and row here; '-' for stdout")
    io_format(p)
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"derain: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TensorFileError, FrameError) as exc:
        print(f"derain: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
