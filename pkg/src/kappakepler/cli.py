"""Command line interface.

Four subcommands:

    verify    run a named report suite; JSON reports on stdout (or --out),
              human-readable PASS/FAIL lines on stderr
    simulate  integrate one of the model systems and emit the trajectory
    map       apply a single chart transform to one point; JSON point on
              stdout, composable through pipes
    pipeline  regularized sphere-side run from a Kepler initial state

Configuration precedence is flags over config file over defaults; the
effective configuration is echoed into report files. Exit codes: 0 success,
1 at least one check failed, 2 usage or domain error, 3 I/O error. Standard
output carries data, standard error carries diagnostics.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import _core
from .brackets import bracket_audit
from .errors import InvalidParams, KappaKeplerError
from .integrators import IntegratorConfig, Trajectory
from .kepler import KeplerSystem, integrate_kepler, so4_audit
from .ligon_schaaf import (
    DelaunayState,
    conjugacy_battery,
    constraint_battery,
    integrate_delaunay,
    intertwine_battery,
    ls_forward,
    ls_inverse,
    roundtrip_battery,
)
from .moser import (
    MoserChain,
    great_circle_report,
    integrate_geodesic,
    moser_pipeline,
    pipeline_energy_report,
    pipeline_vs_direct_report,
    regularization_demo_report,
    role_swap,
)
from .realization import Chart, KappaParams, PhasePoint, realize_spatial
from .reporting import all_passed, dumps_precise, reports_to_json
from .stereo import (
    SphereState,
    kappa_stereo_forward,
    kappa_stereo_inverse,
    stereo_forward,
    stereo_inverse,
    stereo_symplectic_suite,
)

DEFAULTS = {
    "a": 0.0, "alpha": -1.0, "beta": 0.0, "p0": None, "m": 1.0, "C": 1.0,
    "seed": 42, "step": 1e-3, "duration": 10.0, "format": None, "out": None,
}
_CONFIG_TYPES = {
    "a": float, "alpha": float, "beta": float, "p0": float, "m": float,
    "C": float, "seed": int, "step": float, "duration": float,
    "format": str, "out": str,
}

SUITES = ("brackets", "stereo", "moser", "so4", "ls", "all")
TRANSFORMS = ("realize", "stereo-fwd", "stereo-inv", "kappa-stereo-fwd",
              "kappa-stereo-inv", "role-swap", "ls-forward", "ls-inverse")


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--a", type=float, default=None, help="deformation scale")
    sp.add_argument("--alpha", type=float, default=None,
                    help="realization parameter (default -1)")
    sp.add_argument("--beta", type=float, default=None,
                    help="realization parameter (default 0)")
    sp.add_argument("--p0", type=float, default=None,
                    help="frozen time-momentum for the spatial chart (default m)")
    sp.add_argument("--m", type=float, default=None, help="particle mass")
    sp.add_argument("--C", type=float, default=None, help="force constant")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed for sampled batteries (default 42)")
    sp.add_argument("--step", type=float, default=None,
                    help="integrator step (default 1e-3)")
    sp.add_argument("--duration", type=float, default=None,
                    help="integration span (default 10)")
    sp.add_argument("--format", choices=("csv", "json"), default=None,
                    help="output format (trajectories default to csv)")
    sp.add_argument("--out", default=None, help="write output to this file")
    sp.add_argument("--config", default=None,
                    help="JSON file with default-overriding settings")


def _add_state_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--q", default=None, help="position, comma separated")
    sp.add_argument("--p", default=None, help="momentum, comma separated")
    sp.add_argument("--u", default=None, help="sphere base point, comma separated")
    sp.add_argument("--v", default=None, help="sphere cotangent vector, comma separated")
    sp.add_argument("--x", default=None, help="regularized base point, comma separated")
    sp.add_argument("--y", default=None, help="regularized fiber vector, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kappakepler",
        description="Deformed Kepler dynamics and regularization checks")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", choices=SUITES, required=True)
    _add_common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="integrate a model system")
    sp.add_argument("--system", choices=("kepler", "sphere", "delaunay"),
                    required=True)
    sp.add_argument("--method", choices=("verlet", "rk4", "midpoint"),
                    default=None, help="integrator (kepler only; others are fixed)")
    sp.add_argument("--adaptive", action="store_true",
                    help="adaptive step control (kepler verlet only)")
    sp.add_argument("--direction", type=float, default=1.0,
                    help="geodesic parameter direction (sphere only)")
    _add_state_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("map", help="apply one chart transform to a point")
    sp.add_argument("--transform", choices=TRANSFORMS, required=True)
    _add_state_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("pipeline",
                        help="regularized sphere-side run of a Kepler state")
    _add_state_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_pipeline)
    return parser


def _load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise InvalidParams(f"config file {path} must hold a JSON object")
    out = {}
    for key, val in raw.items():
        if key not in _CONFIG_TYPES:
            raise InvalidParams(f"unknown config key {key!r}")
        out[key] = None if val is None else _CONFIG_TYPES[key](val)
    return out


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(_load_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _params(cfg: dict) -> KappaParams:
    return KappaParams(a=cfg["a"], alpha=cfg["alpha"], beta=cfg["beta"],
                       p0=cfg["p0"], m=cfg["m"], C=cfg["C"])


def _echo(cfg: dict, params: KappaParams, **extra) -> dict:
    eff = {"a": params.a, "alpha": params.alpha, "beta": params.beta,
           "p0": params.p0, "m": params.m, "C": params.C,
           "seed": cfg["seed"], "step": cfg["step"],
           "duration": cfg["duration"], "backend": _core.BACKEND}
    eff.update(extra)
    return eff


def _vec(text: str, name: str, size: int | None = None) -> np.ndarray:
    try:
        arr = np.array([float(tok) for tok in text.replace(",", " ").split()])
    except ValueError:
        raise InvalidParams(f"could not parse --{name} {text!r} as a vector")
    if arr.size == 0:
        raise InvalidParams(f"--{name} is empty")
    if size is not None and arr.size != size:
        raise InvalidParams(f"--{name} needs {size} components, got {arr.size}")
    return arr


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# verification suites -------------------------------------------------------

def _suite_brackets(params, cfg):
    return bracket_audit(params, n_points=50, seed=cfg["seed"])


def _suite_stereo(params, cfg):
    return stereo_symplectic_suite(params, n_points=50, seed=cfg["seed"])


def _suite_moser(params, cfg):
    step, duration = cfg["step"], cfg["duration"]
    reports = [great_circle_report(step=step)]
    q = np.array([0.7, 0.0, 0.0])
    p = np.array([0.0, np.sqrt(13.0 / 7.0), 0.0])  # e = 0.3 at H = -1/2
    chain = MoserChain.from_kepler(q, p)
    traj = moser_pipeline(chain.sphere, duration, step)
    reports.append(pipeline_energy_report(traj))
    reports.append(pipeline_vs_direct_report(traj))
    reports.append(regularization_demo_report(duration=duration, step=step))
    return reports


def _suite_so4(params, cfg):
    sys_ = KeplerSystem.from_params(params)
    return so4_audit(sys_, n_points=50, seed=cfg["seed"])


def _suite_ls(params, cfg):
    sys_ = KeplerSystem.from_params(params)
    reports = intertwine_battery(sys_, n_points=200, seed=cfg["seed"])
    reports += constraint_battery(sys_, n_points=200, seed=cfg["seed"] + 1)
    reports += conjugacy_battery(sys_)
    reports.append(roundtrip_battery(sys_, n_points=50, seed=cfg["seed"] + 2))
    return reports


_SUITE_FNS = {
    "brackets": _suite_brackets,
    "stereo": _suite_stereo,
    "moser": _suite_moser,
    "so4": _suite_so4,
    "ls": _suite_ls,
}


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    params = _params(cfg)
    names = list(_SUITE_FNS) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        reports.extend(_SUITE_FNS[name](params, cfg))
    for rep in reports:
        print(str(rep), file=sys.stderr)
    payload = reports_to_json(reports, config=_echo(cfg, params, suite=args.suite))
    _write_output(payload, cfg["out"])
    return 0 if all_passed(reports) else 1


# simulate ------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    params = _params(cfg)
    step, duration = cfg["step"], cfg["duration"]
    if args.system == "kepler":
        q = _vec(args.q or "1,0,0", "q", 3)
        p = _vec(args.p or "0,1,0", "p", 3)
        method = args.method or "rk4"
        config = IntegratorConfig(method=method, step=step,
                                  adaptive=args.adaptive)
        traj = integrate_kepler(q, p, KeplerSystem.from_params(params),
                                duration, config)
    elif args.system == "sphere":
        u = _vec(args.u or "1,0,0,0", "u")
        v = _vec(args.v or "0,1,0,0", "v")
        config = IntegratorConfig(method=args.method or "midpoint", step=step)
        traj = integrate_geodesic(SphereState(u, v), duration, config,
                                  direction=args.direction)
    else:
        x = _vec(args.x or "1,0,0,0", "x", 4)
        y = _vec(args.y or "0,1,0,0", "y", 4)
        sys_ = KeplerSystem.from_params(params)
        config = IntegratorConfig(method=args.method or "rk4", step=step)
        traj = integrate_delaunay(DelaunayState(x, y), sys_.mu_tilde,
                                  duration, config)
    return _emit_trajectory(traj, cfg, params, args.system)


def _emit_trajectory(traj: Trajectory, cfg: dict, params: KappaParams,
                     label: str) -> int:
    traj.metadata["run_config"] = _echo(cfg, params, system=label)
    fmt = cfg["format"] or "csv"
    text = traj.to_csv() if fmt == "csv" else traj.to_json()
    print(f"{label}: termination={traj.termination_name} "
          f"samples={traj.n_samples}", file=sys.stderr)
    _write_output(text, cfg["out"])
    return 0


# map -----------------------------------------------------------------------

def _stdin_point() -> dict:
    if sys.stdin.isatty():
        raise InvalidParams("no input point: pass flags or pipe a JSON point")
    text = sys.stdin.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParams(f"stdin is not a JSON point: {exc}")
    if not isinstance(raw, dict):
        raise InvalidParams("stdin JSON must be an object")
    return raw


def _pair(args, f1: str, f2: str, alt1: tuple = (), alt2: tuple = ()):
    v1, v2 = getattr(args, f1), getattr(args, f2)
    if v1 is not None and v2 is not None:
        return _vec(v1, f1), _vec(v2, f2)
    raw = _stdin_point()
    for k1 in (f1,) + alt1:
        for k2 in (f2,) + alt2:
            if k1 in raw and k2 in raw:
                return (np.asarray(raw[k1], dtype=float),
                        np.asarray(raw[k2], dtype=float))
    raise InvalidParams(f"point needs --{f1}/--{f2} flags or matching JSON keys")


def _point_json(**fields) -> str:
    return dumps_precise({k: (v.tolist() if isinstance(v, np.ndarray) else v)
                          for k, v in fields.items()})


def cmd_map(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    params = _params(cfg)
    t = args.transform
    if t == "realize":
        q, p = _pair(args, "q", "p", ("position",), ("momentum",))
        im = realize_spatial(PhasePoint(q, p, Chart.COMMUTATIVE), params)
        out = _point_json(chart=im.chart.value, position=im.position,
                          momentum=im.momentum)
    elif t in ("stereo-fwd", "kappa-stereo-fwd"):
        u, v = _pair(args, "u", "v")
        s = SphereState(u, v)
        im = (stereo_forward(s) if t == "stereo-fwd"
              else kappa_stereo_forward(s, params))
        out = _point_json(chart=im.chart.value, position=im.position,
                          momentum=im.momentum)
    elif t in ("stereo-inv", "kappa-stereo-inv"):
        q, p = _pair(args, "q", "p", ("position",), ("momentum",))
        if t == "stereo-inv":
            s = stereo_inverse(PhasePoint(q, p, Chart.COMMUTATIVE))
        else:
            s = kappa_stereo_inverse(PhasePoint(q, p, Chart.KAPPA), params)
        out = _point_json(chart="sphere", u=s.u, v=s.v)
    elif t == "role-swap":
        q, p = _pair(args, "q", "p", ("position",), ("momentum",))
        chart = Chart.KAPPA if params.a != 0.0 else Chart.COMMUTATIVE
        im = role_swap(PhasePoint(q, p, chart))
        out = _point_json(chart=im.chart.value, position=im.position,
                          momentum=im.momentum)
    elif t == "ls-forward":
        q, p = _pair(args, "q", "p", ("position",), ("momentum",))
        state, frame = ls_forward(q, p, KeplerSystem.from_params(params))
        out = _point_json(chart="delaunay", x=state.x, y=state.y,
                          nu=frame.nu, theta=frame.theta)
    else:  # ls-inverse
        x, y = _pair(args, "x", "y")
        q, p = ls_inverse(DelaunayState(x, y), KeplerSystem.from_params(params))
        out = _point_json(chart="kepler", position=q, momentum=p)
    _write_output(out, cfg["out"])
    return 0


# pipeline ------------------------------------------------------------------

def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    params = _params(cfg)
    if args.u is not None and args.v is not None:
        s0 = SphereState(_vec(args.u, "u"), _vec(args.v, "v"))
        chain = MoserChain.from_sphere(s0)
    else:
        q = _vec(args.q or "2,0,0", "q", 3)
        p = _vec(args.p or "0,0,0", "p", 3)
        chain = MoserChain.from_kepler(q, p)
    if abs(chain.kepler_energy + 0.5) > 1e-9:
        print(f"warning: initial energy {chain.kepler_energy:.6g} is off the "
              "calibrated level -1/2; snapshots will not sit on one Kepler "
              "energy", file=sys.stderr)
    traj = moser_pipeline(chain.sphere, cfg["duration"], cfg["step"])
    return _emit_trajectory(traj, cfg, params, "pipeline")


def _error_exit(exc: Exception, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)
    return code


_STATE_FLAGS = {"--q", "--p", "--u", "--v", "--x", "--y"}


def _glue_negative_vectors(argv: list[str]) -> list[str]:
    """Join `--q -1,0,0` into `--q=-1,0,0` so argparse does not read the
    negative vector as an option string."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _STATE_FLAGS and i + 1 < len(argv)
                and len(argv[i + 1]) > 1 and argv[i + 1][0] == "-"
                and (argv[i + 1][1].isdigit() or argv[i + 1][1] == ".")):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_glue_negative_vectors(list(argv)))
    try:
        return args.func(args)
    except KappaKeplerError as exc:
        return _error_exit(exc, 2)
    except OSError as exc:
        return _error_exit(exc, 3)


if __name__ == "__main__":
    raise SystemExit(main())
