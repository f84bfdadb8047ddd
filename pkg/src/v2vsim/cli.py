"""Command-line surface.

Subcommands: plan, oracle, codec, align, simulate.  Exit codes: 0 success,
2 validation error, 3 infeasible plan or unreachable budget, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .codec import (CodecConfig, EntropyModel, decode, deserialize_frame,
                    encode, rate_control, refine_model, serialize_frame)
from .errors import ImageFormatError, InfeasibleError, ValidationError
from .fourier import align
from .image_io import read_image, write_image
from .planner import SolverConfig, exhaustive_optimum, optimize, validate_plan
from .scenario_io import parse_scenario_document
from .simulate import (manifest_for, plan_csv, plan_matrix_report, simulate,
                       write_outputs)


def _solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--learning-rate", type=float, default=0.25)
    parser.add_argument("--max-iters", type=int, default=600)
    parser.add_argument("--relaxation-temperature", type=float, default=0.05)
    parser.add_argument("--rounding-rule", default="top-k-by-score")
    parser.add_argument("--convergence-tol", type=float, default=1e-9)


def _codec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--block-size", type=int, default=8)
    parser.add_argument("--quant-step", type=float, default=0.05)
    parser.add_argument("--rd-weight-max", type=float, default=100.0)
    parser.add_argument("--rd-weight-power", type=float, default=2.0)
    parser.add_argument("--rate-tolerance", type=float, default=0.05)


def _solver_config(args, seed: int) -> SolverConfig:
    return SolverConfig(learning_rate=args.learning_rate,
                        max_iters=args.max_iters,
                        relaxation_temperature=args.relaxation_temperature,
                        rounding_rule=args.rounding_rule,
                        seed=seed,
                        convergence_tol=args.convergence_tol)


def _codec_config(args) -> CodecConfig:
    return CodecConfig(block_size=args.block_size,
                       quant_step=args.quant_step,
                       rd_weight_max=args.rd_weight_max,
                       rd_weight_power=args.rd_weight_power,
                       rate_tolerance=args.rate_tolerance)


def _load_scenario(path: str):
    text = Path(path).read_text(encoding="utf-8")
    return text, parse_scenario_document(text)


def cmd_plan(args) -> int:
    _, doc = _load_scenario(args.scenario)
    plan = optimize(doc.scenario, _solver_config(args, args.seed))
    issues = validate_plan(plan, doc.scenario)
    if issues:
        raise ValidationError("; ".join(issues))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "plan.txt").write_text(plan_matrix_report(plan))
    (outdir / "plan.csv").write_text(plan_csv(plan, doc.scenario))
    print(f"average delay: {plan.avg_delay_s:.9g} s over {plan.num_links} links")
    return 0


def cmd_oracle(args) -> int:
    _, doc = _load_scenario(args.scenario)
    plan = exhaustive_optimum(doc.scenario)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "plan.txt").write_text(plan_matrix_report(plan))
    (outdir / "plan.csv").write_text(plan_csv(plan, doc.scenario))
    print(f"optimal average delay: {plan.avg_delay_s:.9g} s over {plan.num_links} links")
    return 0


def _refined_model(args, cfg: CodecConfig) -> EntropyModel:
    model = EntropyModel.generic()
    if args.refine_dir:
        frames = sorted(Path(args.refine_dir).glob("*.p[gp]m"))
        if not frames:
            raise ValidationError(f"no PGM/PPM frames found in {args.refine_dir}")
        fraction = Fraction(args.refine_fraction)
        if not (0 < fraction <= 1):
            raise ValidationError("refine fraction must lie in (0, 1]")
        stride = max(1, round(1 / fraction))
        subset = [read_image(p) for p in frames[::stride]]
        model = refine_model(model, subset, cfg)
    return model


def cmd_codec(args) -> int:
    cfg = _codec_config(args)
    if args.mode == "encode":
        img = read_image(args.image)
        model = _refined_model(args, cfg)
        if args.gamma is not None:
            step, frame = rate_control(img, args.gamma, model, cfg)
            print(f"rate control chose quant_step {step:.6g} "
                  f"({frame.bit_count:.1f} bits)")
        else:
            frame = encode(img, cfg, model)
            print(f"encoded at quant_step {cfg.quant_step:.6g} "
                  f"({frame.bit_count:.1f} bits)")
        Path(args.out).write_bytes(serialize_frame(frame))
        return 0
    frame = deserialize_frame(Path(args.frame).read_bytes())
    write_image(args.out, decode(frame))
    print(f"decoded {frame.width}x{frame.height} image to {args.out}")
    return 0


def cmd_align(args) -> int:
    src = read_image(args.source)
    tgt = read_image(args.target)
    write_image(args.out, align(src, tgt, args.alpha))
    print(f"aligned {args.source} toward {args.target} (alpha={args.alpha})")
    return 0


def cmd_simulate(args) -> int:
    text, doc = _load_scenario(args.scenario)
    base = Path(args.scenario).parent
    images = {}
    for node_id, rel in doc.image_paths.items():
        path = Path(rel)
        images[node_id] = read_image(path if path.is_absolute() else base / path)
    solver_cfg = _solver_config(args, args.seed)
    codec_cfg = _codec_config(args)
    result = simulate(doc.scenario, images, solver_cfg, codec_cfg,
                      align_alpha=args.alpha, seed=args.seed,
                      ratio_override=args.ratio_override)
    result.manifest = manifest_for(text, args.seed, solver_cfg, codec_cfg,
                                   args.alpha, args.ratio_override,
                                   scenario_path=str(args.scenario))
    write_outputs(result, doc.scenario, args.outdir)
    print(f"simulated {result.report.n_links} links; "
          f"avg delay {result.report.avg_delay_s:.9g} s; outputs in {args.outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="v2vsim",
        description="V2V link planning, adaptive compression, and domain alignment")
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="optimize a communication plan")
    p_plan.add_argument("--scenario", required=True)
    p_plan.add_argument("--seed", type=int, required=True)
    p_plan.add_argument("--outdir", default="plan_out")
    _solver_flags(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_oracle = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    p_oracle.add_argument("--scenario", required=True)
    p_oracle.add_argument("--outdir", default="oracle_out")
    p_oracle.set_defaults(func=cmd_oracle)

    p_codec = sub.add_parser("codec", help="encode or decode one image")
    p_codec.add_argument("mode", choices=("encode", "decode"))
    p_codec.add_argument("--image", help="input image for encode")
    p_codec.add_argument("--frame", help="input container for decode")
    p_codec.add_argument("--out", required=True)
    p_codec.add_argument("--gamma", type=float,
                         help="compression ratio; triggers rate control")
    p_codec.add_argument("--refine-dir",
                         help="directory of raw frames for model refinement")
    p_codec.add_argument("--refine-fraction", default="1/6",
                         help="fraction of frames used for refinement")
    _codec_flags(p_codec)
    p_codec.set_defaults(func=cmd_codec)

    p_align = sub.add_parser("align", help="align one image to a target's style")
    p_align.add_argument("--source", required=True)
    p_align.add_argument("--target", required=True)
    p_align.add_argument("--alpha", type=float, required=True)
    p_align.add_argument("--out", required=True)
    p_align.set_defaults(func=cmd_align)

    p_sim = sub.add_parser("simulate", help="full plan/compress/align/score run")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--outdir", required=True)
    p_sim.add_argument("--alpha", type=float, default=0.0)
    p_sim.add_argument("--ratio-override", type=float, default=None)
    _solver_flags(p_sim)
    _codec_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    try:
        if args.command == "codec":
            if args.mode == "encode" and not args.image:
                raise ValidationError("codec encode needs --image")
            if args.mode == "decode" and not args.frame:
                raise ValidationError("codec decode needs --frame")
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (ImageFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
