"""Command-line front end.

Exit codes: 0 when every checked condition or verdict passes, 2 when one
fails, 1 on any error (bad config, numerical breakdown, I/O).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, certifier, presets
from .config import RunConfig, example51_config
from .errors import H5Violated, TSBlowfliesError
from .model import theta
from .simulator import InitialCondition, default_max_step, history_start, simulate
from .timescale import as_family, build_grid, translation_group

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(certifier.jsonable(obj), indent=2, sort_keys=True) + "\n")


class Context:
    """Objects derived once from a config and the command-line overrides."""

    def __init__(self, cfg: RunConfig, args):
        self.cfg = cfg
        self.model = cfg.build_model()
        self.family = as_family(cfg.scale_family())
        self.max_step = args.max_step if args.max_step is not None else cfg.max_step
        self.out = Path(args.out or cfg.output)
        self.out.mkdir(parents=True, exist_ok=True)
        self.seed = args.seed
        self.ts = self.family.on(cfg.window(self.model))
        self.t0, self.t_end = cfg.t0, cfg.t_end
        start = history_start(self.ts, self.t0, theta(self.model))
        self.grid = build_grid(self.ts, (start, self.t_end), self.max_step or default_max_step(self.model),
                               anchors=(self.t0,))
        self.A1 = float(cfg.param("A1", 0.0))
        self.A2 = float(cfg.param("A2", 0.0))

    def references(self) -> dict:
        if self.cfg.model.get("preset") == "example51" and not self.cfg.model.get("scale") \
                and not self.cfg.model.get("override"):
            return {"listed": presets.LISTED_EXTREMA, "h5_display": presets.H5_DISPLAY_EXTREMA}
        return {}


def cmd_certify(ctx: Context) -> int:
    cert = certifier.certify(ctx.model, ctx.ts, ctx.grid, ctx.A1, ctx.A2, references=ctx.references())
    _write_json(ctx.out / "certificate.json", cert.to_dict())
    for c in cert.conditions:
        print(f"{c.name:<20} {'holds' if c.holds else 'FAILS':<6} margin={c.margin:.6g}")
    print(f"verdict: {'certified' if cert.verdict else 'not certified'}")
    return EXIT_OK if cert.verdict else EXIT_FAIL


def cmd_simulate(ctx: Context) -> int:
    check_box = ctx.A2 > ctx.A1 > 0
    summary = []
    ok = True
    for k, ic in enumerate(ctx.cfg.ics(), start=1):
        traj = simulate(ctx.model, ctx.ts, ic, ctx.t_end, grid=ctx.grid)
        traj.to_csv(ctx.out / f"trajectory_{k}.csv")
        entry = {"ic": k, "samples": len(traj)}
        if check_box:
            box = analysis.box_compliance(traj, ctx.A1, ctx.A2)
            entry.update(box.to_dict())
            ok &= box.compliant
            print(f"ic {k}: min={np.round(box.minima, 6).tolist()} max={np.round(box.maxima, 6).tolist()} "
                  f"in [{ctx.A1}, {ctx.A2}]: {'yes' if box.compliant else 'NO'}")
        else:
            print(f"ic {k}: {len(traj)} samples written")
        summary.append(entry)
    _write_json(ctx.out / "simulation.json", summary)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_envelope(ctx: Context) -> int:
    ics = ctx.cfg.ics()
    ref = ics[1] if len(ics) > 1 else None
    if ref is None and ctx.seed is not None:
        rng = np.random.default_rng(ctx.seed)
        base = ics[0](ctx.t0)
        ref = InitialCondition.constant(base + rng.uniform(-0.5, 0.5, size=len(base)), ctx.t0)
    try:
        run = analysis.run_envelope(ctx.model, ctx.family, ics[0], ctx.t_end, ref, ctx.max_step)
    except H5Violated as exc:
        _write_json(ctx.out / "envelope.json", {"error": str(exc), "violations": None})
        print(f"no certified decay rate: {exc}")
        return EXIT_FAIL
    _write_json(ctx.out / "envelope.json", run.report.to_dict())
    (ctx.out / "envelope.csv").write_text(run.report.to_csv())
    r = run.report
    print(f"alpha={r.alpha:.6g} M={r.M:.6g} violations={r.violations} worst_ratio={r.worst_ratio:.6g} "
          f"fitted_rate={r.fitted_rate}")
    return EXIT_OK if r.passed else EXIT_FAIL


def cmd_translate(ctx: Context) -> int:
    eps = float(ctx.cfg.param("eps", 0.05))
    cands = ctx.cfg.param("candidates", [])
    group = translation_group(ctx.family, cands, (ctx.t0, ctx.t_end))
    traj = simulate(ctx.model, ctx.ts, ctx.cfg.ics()[0], ctx.t_end, grid=ctx.grid)
    t_from = ctx.t0 + float(ctx.cfg.param("transient", 0.0))
    usable = [t for t in group.accepted if t > 0]
    if not usable:
        rep = None
    else:
        rep = analysis.translation_numbers(traj, eps, usable, t_from=t_from)
    out = {"scale_rejected": list(group.rejected), "report": rep.to_dict() if rep else None}
    _write_json(ctx.out / "translation.json", out)
    accepted = list(rep.accepted) if rep else []
    print(f"eps={eps} accepted={accepted} inclusion_length={rep.inclusion_length if rep else 'inf'}")
    return EXIT_OK if accepted else EXIT_FAIL


def cmd_compare(ctx: Context) -> int:
    ics = ctx.cfg.ics()
    ic_r = ics[0]
    raw_z = ctx.cfg.param("ic_integers")
    ic_z = InitialCondition.from_dict(raw_z) if raw_z is not None else ic_r
    if isinstance(raw_z, list):
        ic_z = InitialCondition(ic_z.phi, ctx.t0)
    summary = analysis.compare_scales(ctx.model, ic_r, ic_z, ctx.t_end - ctx.t0, ctx.A1, ctx.A2, ctx.max_step)
    _write_json(ctx.out / "compare.json", summary)
    print(f"verdict: {summary['verdict']}")
    return EXIT_OK if summary["verdict"] == analysis.SAME else EXIT_FAIL


def cmd_preset(args) -> int:
    out = Path(args.out or "example51")
    out.mkdir(parents=True, exist_ok=True)
    code = EXIT_OK
    for scale in ("reals", "integers"):
        cfg = example51_config(scale)
        sub = out / scale
        cfg.output = str(sub)
        sub.mkdir(parents=True, exist_ok=True)
        (sub / "config.json").write_text(cfg.dumps() + "\n")
        ns = argparse.Namespace(out=str(sub), max_step=args.max_step, seed=args.seed)
        ctx = Context(cfg, ns)
        print(f"== {scale}")
        code = max(code, cmd_certify(ctx), cmd_simulate(ctx))
    return code


COMMANDS = {
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "envelope": cmd_envelope,
    "translate": cmd_translate,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsblowflies", description="Patch blowfly models on time scales.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "preset-example51"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "preset-example51", help="JSON run configuration")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--max-step", type=float, help="largest step on dense stretches")
        sp.add_argument("--seed", type=int, help="seed for randomised diagnostics")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset-example51":
            return cmd_preset(args)
        cfg = RunConfig.load(args.config)
        return COMMANDS[args.command](Context(cfg, args))
    except (TSBlowfliesError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
