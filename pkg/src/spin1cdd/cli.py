"""Command-line front end.

Subcommands ``decay``, ``cdd``, ``dressed``, ``validate``, ``field`` and
``rerun`` (replay a run manifest and verify its checksum).
Data goes to ``--out`` (stdout by default); diagnostics go to stderr.
Times are in arbitrary units and frequencies in the matching inverse unit.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytic, montecarlo as mc, validation
from .noise import OuNoiseModel
from .physconfig import FieldConfig, epsilon_from_field, noise_scale_from_field, omega0_from_field

SEED_ENV = "SPIN1CDD_SEED"
MTILDE_TO_XI = {0: "x", 1: "y", -1: "z"}

# Rb-87 F = 1 data (CODATA 2018; Steck, "Rubidium 87 D Line Data")
RB87 = dict(gF=-0.5, gS=2.00231930436, gI=-0.0009951414, muB=9.2740100783e-24,
            muN=5.0507837461e-27, hbar=1.054571817e-34, deltaW_hf=6.62607015e-34 * 6.834682610904e9)


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return mc.DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _csv(header: list[str], columns: list[np.ndarray]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(v if isinstance(v, str) else f"{v:.15e}" for v in row) + "\n")
    return buf.getvalue()


def _emit(text: str, args, argv: list[str], params: dict):
    checksum = hashlib.sha256(text.encode()).hexdigest()
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    manifest_path = args.manifest or (None if args.out == "-" else str(Path(args.out).with_suffix(".json")))
    if manifest_path:
        manifest = {
            "command": args.command,
            "argv": argv,
            "params": params,
            "master_seed": params.get("seed"),
            "version": __version__,
            "output_sha256": checksum,
        }
        Path(manifest_path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"[{args.command}] sha256={checksum}", file=sys.stderr)


def _params(args) -> dict:
    skip = {"func", "out", "manifest", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _grid(args) -> np.ndarray:
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    if not args.t_max > 0:
        raise UsageError("--t-max must be > 0")
    return np.linspace(0.0, args.t_max, args.points)


def cmd_decay(args, argv) -> int:
    t = _grid(args)
    model = OuNoiseModel(args.var, args.alpha)
    if args.m not in (1, 0, -1) or args.mp not in (1, 0, -1):
        raise UsageError("--m and --mp must be in {1, 0, -1}")
    psi = np.zeros(3)
    psi[1 - args.m] += 1.0
    psi[1 - args.mp] += 1.0
    rho0 = analytic.pure_state(psi)
    coh = np.atleast_1d(analytic.coherence_free(rho0, args.m, args.mp, t, model, args.epsilon))
    initial = abs(rho0[1 - args.m, 1 - args.mp])
    header = ["t", "abs_coherence", "phase", "abs_ratio"]
    cols = [t, np.abs(coh), np.angle(coh), np.abs(coh) / initial]
    if args.mc:
        dt_max = args.dt if args.dt else args.t_max / (args.points - 1)
        cfg = mc.config_for_grid(args.t_max, args.points, dt_max, args.trajectories,
                                 args.seed, mc.Frame.FREE, args.workers)
        res = mc.simulate_free(rho0, model, args.epsilon, cfg)
        i, j = 1 - args.m, 1 - args.mp
        header += ["mc_abs", "mc_stderr"]
        cols += [np.abs(res.mean[:, i, j]), res.stderr[:, i, j]]
    _emit(_csv(header, cols), args, argv, _params(args))
    return 0


def _dressed_label(raw: str, quadratic: bool):
    if raw in ("x", "y", "z"):
        return raw
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"dressed state must be -1, 0, 1, x, y or z, got {raw!r}") from None
    if value not in MTILDE_TO_XI:
        raise UsageError(f"dressed state must be -1, 0, 1, x, y or z, got {raw!r}")
    return MTILDE_TO_XI[value] if quadratic else value


def cmd_cdd(args, argv) -> int:
    t = _grid(args)
    model = OuNoiseModel(args.var, args.alpha)
    quadratic = args.epsilon != 0 or any(s in ("x", "y", "z") for s in (args.from_, args.to))
    src, dst = _dressed_label(args.from_, quadratic), _dressed_label(args.to, quadratic)
    if src == dst:
        raise UsageError("--from and --to must differ")
    if args.omega_e is not None:
        if quadratic:
            raise UsageError("--omega-e applies to the linear case only; use --omega-d")
        omega_d = abs(args.omega_e / (dst - src))
    else:
        omega_d = args.omega_d
    if not omega_d or omega_d <= 0:
        raise UsageError("the drive strength must be > 0 (--omega-d or --omega-e)")
    basis = analytic.dressed_basis(omega_d, args.epsilon)
    if quadratic:
        est = analytic.cdd_transfer_quadratic(basis, src, dst, model, t)
        element_sq = basis.coupling(src, dst) ** 2
        i_src, i_dst = basis.index(src), basis.index(dst)
    else:
        est = analytic.cdd_transfer(omega_d, src, dst, model, t)
        element_sq = analytic.fx_element(src, dst) ** 2
        i_src, i_dst = basis.index(MTILDE_TO_XI[src]), basis.index(MTILDE_TO_XI[dst])
    scale = 1.0
    if args.scaled:
        a = element_sq * model.variance
        if a == 0:
            raise UsageError("--scaled needs a nonzero scale factor (coupled states and var > 0)")
        scale = 1.0 / a
    header = ["t", "p_analytic", "validity_flag"]
    cols = [t, np.asarray(est.probability) * scale, np.full(t.shape, str(int(est.perturbative)))]
    if args.mc:
        dt_max = mc.rotated_cdd_dt_bound(model, omega_d, args.epsilon)
        if args.dt:
            dt_max = min(dt_max, args.dt)
        cfg = mc.config_for_grid(args.t_max, args.points, dt_max, args.trajectories,
                                 args.seed, mc.Frame.CDD_ROTATED, args.workers)
        res = mc.simulate_cdd_rotated(basis.rotated_states()[i_src], model, omega_d, args.epsilon, cfg)
        header += ["mc_p", "mc_stderr"]
        cols += [res.mean[:, i_dst] * scale, res.stderr[:, i_dst] * scale]
    _emit(_csv(header, cols), args, argv, _params(args))
    return 0


def cmd_dressed(args, argv) -> int:
    if not args.omega_d > 0:
        raise UsageError("--omega-d must be > 0")
    b = analytic.dressed_basis(args.omega_d, args.epsilon)
    nb = analytic.numeric_dressed_basis(args.omega_d, args.epsilon)
    labels = analytic.DRESSED_LABELS
    coupling = {f"{a}-{c}": abs(b.coupling(a, c)) for a in labels for c in labels if a != c}
    out = {
        "omega_d": args.omega_d,
        "epsilon": args.epsilon,
        "eigenfrequencies": dict(zip(labels, b.omegas.tolist())),
        "coefficients": {xi: dict(zip(("1", "0", "-1"), row.tolist())) for xi, row in zip(labels, b.coeffs)},
        "rotated_states": {xi: row.real.tolist() for xi, row in zip(labels, b.rotated_states())},
        "residuals": dict(zip(labels, b.residuals().tolist())),
        "numeric_max_coeff_diff": float(np.abs(b.coeffs - nb.coeffs).max()),
        "abs_fx_elements": coupling,
        "transition_frequencies": {f"{a}-{c}": b.transition_frequency(a, c)
                                   for a in labels for c in labels if a < c},
    }
    text = json.dumps(out, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def cmd_validate(args, argv) -> int:
    report = validation.run_validation(args.seed, args.quick, args.workers, args.inject_fault)
    Path(args.report).write_text(validation.report_json(report))
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[validate] {status} {c['id']:2d} {c['name']}", file=sys.stderr)
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    if failed:
        print(f"[validate] failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_field(args, argv) -> int:
    cfg = FieldConfig(B0=args.b0_gauss * 1e-4, deltaB_rms=args.db_rms_mgauss * 1e-7, **RB87)
    noise_rms = noise_scale_from_field(cfg)
    out = {
        "B0_T": cfg.B0,
        "deltaB_rms_T": cfg.deltaB_rms,
        "omega0": omega0_from_field(cfg),
        "noise_rms": noise_rms,
        "var": noise_rms**2,
        "epsilon": epsilon_from_field(cfg),
        "units": "rad/s",
    }
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return 0


_OUTPUT_FLAGS = ("-o", "--out", "--manifest")


def _replay_argv(manifest: dict, out: str) -> list[str]:
    argv, kept, skip = manifest["argv"], [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in _OUTPUT_FLAGS:
            skip = True
            continue
        if tok.split("=", 1)[0] in _OUTPUT_FLAGS:
            continue
        kept.append(tok)
    # pin the recorded seed so an environment override cannot change the replay
    return kept + ["--seed", str(manifest["master_seed"]), "--out", out, "--manifest", os.devnull]


def cmd_rerun(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest_file).read_text())
        replay = _replay_argv(manifest, args.out)
        expected = manifest["output_sha256"]
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read manifest {args.manifest_file}: {exc}") from None
    if manifest.get("command") not in ("decay", "cdd"):
        raise UsageError("manifest does not describe a decay or cdd run")
    parser = build_parser(default_seed())
    replay_args = parser.parse_args(replay)
    buf = io.StringIO()
    real_stdout, sys.stdout = sys.stdout, buf
    try:
        code = replay_args.func(replay_args, replay)
    finally:
        sys.stdout = real_stdout
    if code:
        return code
    text = buf.getvalue() if args.out == "-" else Path(args.out).read_text()
    if args.out == "-":
        sys.stdout.write(text)
    got = hashlib.sha256(text.encode()).hexdigest()
    if got != expected:
        print(f"[rerun] checksum mismatch: {got} != {expected}", file=sys.stderr)
        return 1
    print("[rerun] checksum matches", file=sys.stderr)
    return 0


def _common_mc(p: argparse.ArgumentParser, seed: int, default_n: int):
    p.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    p.add_argument("--trajectories", type=int, default=default_n)
    p.add_argument("--dt", type=float, default=None, help="maximum integration step")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--workers", type=int, default=1)


def _output(p: argparse.ArgumentParser):
    p.add_argument("-o", "--out", default="-", help="output file ('-' for stdout)")
    p.add_argument("--manifest", default=None,
                   help="manifest path (default: OUT with .json suffix when OUT is a file)")


def build_parser(seed: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spin1cdd", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decay", help="coherence decay without driving")
    p.add_argument("--var", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--mp", type=int, default=0)
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--points", type=int, default=101)
    _common_mc(p, seed, 10_000)
    _output(p)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("cdd", help="dressed-state transfer probability under CDD")
    drive = p.add_mutually_exclusive_group(required=True)
    drive.add_argument("--omega-d", type=float)
    drive.add_argument("--omega-e", type=float)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--var", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--from", dest="from_", default="0")
    p.add_argument("--to", default="1")
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--scaled", action="store_true", help="divide by A = |fx|^2 var")
    _common_mc(p, seed, 2000)
    _output(p)
    p.set_defaults(func=cmd_cdd)

    p = sub.add_parser("dressed", help="quadratic-Zeeman dressed eigensystem")
    p.add_argument("--omega-d", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_dressed)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", default="validation_report.json")
    p.add_argument("--inject-fault", choices=["spectrum"], default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("field", help="Rb-87 F=1 model frequencies from lab fields")
    p.add_argument("--b0-gauss", type=float, required=True)
    p.add_argument("--db-rms-mgauss", type=float, default=0.0)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("rerun", help="replay a decay/cdd manifest and verify its checksum")
    p.add_argument("manifest_file")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(default_seed())
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except (UsageError, ValueError) as exc:
        print(f"spin1cdd: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
