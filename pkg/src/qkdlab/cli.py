"""Command-line surface for source characterization, keyrates, and attacks.

Subcommands
-----------
theta        characterize a stored source (overlap, conjugacy angle, qubit angles)
keyrate      evaluate one certified keyrate variant at given error rates
sweep        emit a plot-ready CSV keyrate curve over an error-rate interval
attack-eval  diagnostics plus every bound check for a stored attack
optimize     constrained attack search (fidelity or conditional entropy)
break-zvx    search for violations of the dim-2 norm inequality
simulate     seeded Monte Carlo protocol run

All results go to stdout as JSON (or CSV for ``sweep``); progress notes go
to stderr.  Exit codes: 0 for success, including "inapplicable" and "no
violation found" outcomes, which are results rather than errors; 2 for
invalid input (bad flags, malformed files, out-of-domain parameters); 3
for unexpected internal failures.

Angles are radians everywhere.  The environment variable QKDLAB_THREADS,
when set, caps the BLAS/LAPACK thread pools for the whole invocation.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys

import numpy as np
import threadpoolctl

from . import __version__
from .errors import QkdLabError, ValidationError
from .source import (
    OverlapCharacterization,
    QubitSourceAngles,
    compute_theta,
    extract_qubit_angles,
    load_source,
)
from .bounds import f_theta, fidelity_bound_qubit
from .keyrate import (
    ALL_VARIANTS,
    VARIANT_ARBITRARY,
    VARIANT_MINENTROPY,
    VARIANT_QUBIT,
    VARIANT_QUBIT_DIM2,
    VARIANT_UNCERTAINTY,
    KeyrateReport,
    ObservedStats,
    keyrate_arbitrary,
    keyrate_qubit,
    keyrate_qubit_dim2,
    keyrate_uncertainty_comparison,
    minentropy_rate,
)
from .attacks import (
    break_zvx_search,
    diagnostics,
    identity_attack,
    load_attack,
    minimize_conditional_entropy,
    minimize_fidelity,
    verify_bounds,
)
from .simulate import RunConfig, helstrom_detector, ideal_qubit_detector, simulate

_SIMULATABLE = (VARIANT_ARBITRARY, VARIANT_QUBIT, VARIANT_QUBIT_DIM2)


def _utc_timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _sig12(value) -> str:
    # 12 significant digits; enough to reproduce every suite tolerance.
    return "%.12g" % value


def _angles_type(text: str) -> QubitSourceAngles:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected alpha,beta,phi")
    try:
        alpha, beta, phi = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"non-numeric angle in {text!r}") from exc
    return QubitSourceAngles(alpha=alpha, beta=beta, phi=phi)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _thread_limit() -> int | None:
    raw = os.environ.get("QKDLAB_THREADS")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"QKDLAB_THREADS={raw!r} is not an integer") from exc
    if value < 1:
        raise ValidationError(f"QKDLAB_THREADS must be >= 1, got {value}")
    return value


def _resolve_theta(args, src) -> float:
    if getattr(args, "theta", None) is not None:
        return args.theta
    if src is not None:
        return compute_theta(src).require_theta()
    raise ValidationError("this variant needs --theta or --source")


def _resolve_angles(args, src) -> QubitSourceAngles:
    if getattr(args, "angles", None) is not None:
        return args.angles
    if src is not None:
        return extract_qubit_angles(src)
    raise ValidationError("this variant needs --angles or a d=2 --source")


def _resolve_bias(args, src) -> float:
    if args.bias is not None:
        return args.bias
    if src is not None:
        return src.bias
    return 0.0


def _minentropy_report(args, src, stats: ObservedStats) -> KeyrateReport:
    """Min-entropy rate from the best available fidelity bound.

    Angles take precedence over a bare theta because the composed qubit
    bound is what they certify; the reported rate carries no error
    correction term, matching the one-shot quantity it lower-bounds.
    """
    x_lower = abs(1.0 - 2.0 * stats.delta_x)
    inputs = {"deltaZ": stats.delta_z, "deltaX": stats.delta_x}
    angles = getattr(args, "angles", None)
    if angles is None and src is not None and src.dim == 2:
        try:
            angles = extract_qubit_angles(src)
        except QkdLabError:
            angles = None
    if angles is not None:
        fid = fidelity_bound_qubit(angles, x_lower)
        inputs.update(alpha=angles.alpha, beta=angles.beta, phi=angles.phi)
    else:
        theta = _resolve_theta(args, src)
        fid = f_theta(theta, x_lower)
        inputs["theta"] = theta
    d_upper = math.sqrt(max(0.0, 1.0 - fid * fid))
    inputs["dEUpper"] = d_upper
    return KeyrateReport(
        variant=VARIANT_MINENTROPY,
        rate=minentropy_rate(d_upper),
        fidelity_bound=fid,
        inputs=inputs,
    )


def _keyrate_report(args, src, stats: ObservedStats) -> KeyrateReport:
    variant = args.variant
    bias = _resolve_bias(args, src)
    if variant == VARIANT_ARBITRARY:
        char = OverlapCharacterization.from_theta(_resolve_theta(args, src))
        return keyrate_arbitrary(char, stats, bias)
    if variant == VARIANT_QUBIT:
        return keyrate_qubit(_resolve_angles(args, src), stats, bias)
    if variant == VARIANT_QUBIT_DIM2:
        return keyrate_qubit_dim2(_resolve_angles(args, src), stats, bias)
    if variant == VARIANT_UNCERTAINTY:
        return keyrate_uncertainty_comparison(_resolve_theta(args, src), stats)
    return _minentropy_report(args, src, stats)


def cmd_theta(args) -> int:
    src = load_source(args.source)
    char = compute_theta(src)
    payload = {
        "delta": char.delta,
        "applicable": char.applicable,
        "theta": char.theta,
    }
    payload["qubitAngles"] = None
    if src.dim == 2:
        try:
            angles = extract_qubit_angles(src)
        except QkdLabError:
            pass
        else:
            payload["qubitAngles"] = {
                "alpha": angles.alpha,
                "beta": angles.beta,
                "phi": angles.phi,
            }
    _emit_json(payload)
    return 0


def cmd_keyrate(args) -> int:
    src = load_source(args.source) if args.source else None
    stats = ObservedStats(delta_z=args.dz, delta_x=args.dx)
    _emit_json(_keyrate_report(args, src, stats).to_dict())
    return 0


def cmd_sweep(args) -> int:
    src = load_source(args.source) if args.source else None
    if args.param == "dx" and args.dx is not None:
        raise ValidationError("--dx conflicts with --param dx; set --dz instead")
    if args.param == "dz" and args.dz is not None:
        raise ValidationError("--dz conflicts with --param dz; set --dx instead")
    fixed = (args.dz if args.param == "dx" else args.dx) or 0.0
    grid = np.linspace(args.sweep_from, args.sweep_to, args.steps + 1)
    rows = []
    for value in grid:
        value = float(value)
        if args.param == "dx":
            stats = ObservedStats(delta_z=fixed, delta_x=value)
        else:
            stats = ObservedStats(delta_z=value, delta_x=fixed)
        report = _keyrate_report(args, src, stats)
        fid = "" if report.fidelity_bound is None else _sig12(report.fidelity_bound)
        rows.append((_sig12(value), _sig12(report.rate), fid))
    header = "deltaX" if args.param == "dx" else "deltaZ"
    print(f"{header},rate,fidelityBound")
    for row in rows:
        print(",".join(row))
    return 0


def cmd_attack_eval(args) -> int:
    src = load_source(args.source)
    attack = load_attack(args.attack)
    diag = diagnostics(src, attack)
    checks = verify_bounds(src, attack, diag=diag)
    valid = all(
        check.slack >= -1e-9
        for check in checks
        if check.applicable and check.certified
    )
    _emit_json(
        {
            "diagnostics": diag.to_dict(),
            "checks": [check.to_dict() for check in checks],
            "allCertifiedValid": valid,
        }
    )
    return 0


def cmd_optimize(args) -> int:
    src = load_source(args.source)
    search = minimize_fidelity if args.kind == "fidelity" else minimize_conditional_entropy
    result = search(
        src,
        args.target,
        dim_e=args.dim_e,
        budget=args.budget,
        seed=args.seed,
        restarts=args.restarts,
    )
    print(
        f"optimize: {result.evaluations} evaluations across "
        f"{result.restarts} restarts, feasible={result.feasible}",
        file=sys.stderr,
    )
    payload = result.to_dict()
    payload["timestamp"] = _utc_timestamp()
    _emit_json(payload)
    return 0


def cmd_break_zvx(args) -> int:
    finding = break_zvx_search(
        args.phi,
        args.dim_b,
        budget=args.budget,
        seed=args.seed,
        dim_e=args.dim_e,
        refine_top=args.refine_top,
    )
    note = "violation found" if finding.violated else "no violation found"
    print(f"break-zvx: {note} (margin {finding.margin:.3e})", file=sys.stderr)
    payload = finding.to_dict()
    payload["timestamp"] = _utc_timestamp()
    _emit_json(payload)
    return 0


def cmd_simulate(args) -> int:
    src = load_source(args.source)
    attack = load_attack(args.attack) if args.attack else identity_attack(src.dim)
    if args.detector == "ideal":
        det = ideal_qubit_detector()
    else:
        det = helstrom_detector(src, attack)
    cfg = RunConfig(rounds=args.rounds, seed=args.seed, basis_prob_z=args.basis_prob_z)
    result = simulate(src, attack, det, cfg, variant=args.variant)
    payload = result.to_dict()
    payload["timestamp"] = _utc_timestamp()
    _emit_json(payload)
    return 0


def _add_source_flags(sub, characterization: bool) -> None:
    sub.add_argument("--source", help="source description JSON file")
    if characterization:
        sub.add_argument("--theta", type=float, help="conjugacy angle in radians")
        sub.add_argument(
            "--angles",
            type=_angles_type,
            help="qubit angles alpha,beta,phi in radians",
        )
        sub.add_argument("--bias", type=float, help="key-bit bias (defaults to the source's)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdlab",
        description="Certified BB84 keyrates from imperfect sources, with an attack laboratory.",
    )
    parser.add_argument("--version", action="version", version=f"qkdlab {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("theta", help="characterize a stored source")
    sub.add_argument("--source", required=True, help="source description JSON file")
    sub.set_defaults(func=cmd_theta)

    sub = subs.add_parser("keyrate", help="evaluate one keyrate variant")
    sub.add_argument("--variant", choices=ALL_VARIANTS, default=VARIANT_ARBITRARY)
    _add_source_flags(sub, characterization=True)
    sub.add_argument("--dz", type=float, required=True, help="z-basis error rate")
    sub.add_argument("--dx", type=float, required=True, help="x-basis error rate")
    sub.set_defaults(func=cmd_keyrate)

    sub = subs.add_parser("sweep", help="CSV keyrate curve over an error-rate interval")
    sub.add_argument("--variant", choices=ALL_VARIANTS, default=VARIANT_ARBITRARY)
    _add_source_flags(sub, characterization=True)
    sub.add_argument("--param", choices=("dx", "dz"), required=True)
    sub.add_argument("--from", dest="sweep_from", type=float, required=True)
    sub.add_argument("--to", dest="sweep_to", type=float, required=True)
    sub.add_argument("--steps", type=_positive_int, required=True)
    sub.add_argument("--dz", type=float, help="fixed z error rate when sweeping dx")
    sub.add_argument("--dx", type=float, help="fixed x error rate when sweeping dz")
    sub.set_defaults(func=cmd_sweep)

    sub = subs.add_parser("attack-eval", help="diagnostics and bound checks for an attack")
    sub.add_argument("--source", required=True)
    sub.add_argument("--attack", required=True, help="attack isometry JSON file")
    sub.set_defaults(func=cmd_attack_eval)

    sub = subs.add_parser("optimize", help="constrained attack search")
    sub.add_argument("--kind", choices=("fidelity", "entropy"), required=True)
    sub.add_argument("--source", required=True)
    sub.add_argument("--target", type=float, required=True, help="pinned test disturbance")
    sub.add_argument("--dim-e", type=_positive_int, default=2)
    sub.add_argument("--budget", type=_positive_int, default=40000)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--restarts", type=_positive_int, default=20)
    sub.set_defaults(func=cmd_optimize)

    sub = subs.add_parser("break-zvx", help="search for norm-inequality violations")
    sub.add_argument("--phi", type=float, required=True, help="frame angle in radians")
    sub.add_argument("--dim-b", type=_positive_int, required=True)
    sub.add_argument("--dim-e", type=_positive_int, default=2)
    sub.add_argument("--budget", type=_positive_int, default=20000)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--refine-top", type=int, default=5)
    sub.set_defaults(func=cmd_break_zvx)

    sub = subs.add_parser("simulate", help="seeded Monte Carlo protocol run")
    sub.add_argument("--source", required=True)
    sub.add_argument("--attack", help="attack isometry JSON file (default: identity channel)")
    sub.add_argument("--detector", choices=("helstrom", "ideal"), default="helstrom")
    sub.add_argument("--rounds", type=_positive_int, required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--basis-prob-z", type=float, default=0.5)
    sub.add_argument("--variant", choices=_SIMULATABLE, default=VARIANT_ARBITRARY)
    sub.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        limit = _thread_limit()
        if limit is not None:
            with threadpoolctl.threadpool_limits(limits=limit):
                return args.func(args)
        return args.func(args)
    except QkdLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
