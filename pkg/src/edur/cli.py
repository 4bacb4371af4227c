"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numeric or I/O failure,
3 a ``check``/``model-eval`` run found a violated required inequality.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from . import ineq, measmodel, qlogic, spinlab
from .errors import EdurError, InvalidInput
from .qstate import Observable, QuantumState, basis_state, commutator_expectation_abs

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VIOLATION = 0, 1, 2, 3
SUBCOMMANDS = ("sweep", "check", "lattice", "minimize", "model-eval")
TOLERANCE_KEYS = ("slack",)
DEFAULT_REQUIRED = ("robertson", "ozawa")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    theta_min: float = 0.0
    theta_max: float = spinlab.HALF_PI
    theta_steps: int = spinlab.DEFAULT_STEPS
    mode: str = "both"
    model_file: str | None = None
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)
    theta: float | None = None
    phi: float = spinlab.HALF_PI
    constraint: str = "both"
    commutator: float = 1.0
    resolution: float = 1e-3
    require: tuple[str, ...] = DEFAULT_REQUIRED
    random_model: bool = False
    system_dim: int = 2
    probe_dim: int = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _tol_item(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep or key not in TOLERANCE_KEYS:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE with KEY in {TOLERANCE_KEYS}")
    return key, float(val)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-o", "--output")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=_tol_item, action="append", default=[], metavar="KEY=VALUE")

    parser = _Parser(prog="edur", description="Error-disturbance uncertainty toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", parents=[common], help="theta sweep of the spin-1/2 example")
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=spinlab.HALF_PI)
    p.add_argument("--theta-steps", type=int, default=spinlab.DEFAULT_STEPS)
    p.add_argument("--mode", choices=("paper", "model", "both"), default="both")

    p = sub.add_parser("check", parents=[common], help="evaluate inequalities at one theta")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--mode", choices=("paper", "model", "both"), default="both")
    p.add_argument("--require", default=",".join(DEFAULT_REQUIRED),
                   help="comma-separated inequalities whose violation gives exit 3")

    p = sub.add_parser("lattice", parents=[common], help="P_x+ vs P_phi+ lattice test")
    p.add_argument("--phi", type=float, default=spinlab.HALF_PI)

    p = sub.add_parser("minimize", parents=[common], help="numerically verify bound constants")
    p.add_argument("--constraint", choices=("ozawa", "heisenberg_product", "both"), default="both")
    p.add_argument("--commutator", type=float, default=1.0, help="|<[A,B]>|")
    p.add_argument("--resolution", type=float, default=1e-3)

    p = sub.add_parser("model-eval", parents=[common], help="evaluate a measurement model")
    p.add_argument("--model-file")
    p.add_argument("--random", action="store_true", help="random model drawn from --seed")
    p.add_argument("--system-dim", type=int, default=2)
    p.add_argument("--probe-dim", type=int, default=2)
    p.add_argument("--require", default=",".join(DEFAULT_REQUIRED))
    return parser


def parse_args(argv) -> RunConfig:
    ns = _build_parser().parse_args(list(argv))
    cfg = RunConfig(subcommand=ns.subcommand, output=ns.output, format=ns.format,
                    seed=ns.seed, tolerances=dict(ns.tol))
    if cfg.seed < 0:
        raise UsageError("--seed must be non-negative")
    cmd = ns.subcommand
    if cmd == "sweep":
        cfg.theta_min, cfg.theta_max, cfg.theta_steps = ns.theta_min, ns.theta_max, ns.theta_steps
        cfg.mode = ns.mode
        if not 0.0 <= cfg.theta_min <= cfg.theta_max <= spinlab.HALF_PI:
            raise UsageError("need 0 <= theta-min <= theta-max <= pi/2")
        if cfg.theta_steps < 1:
            raise UsageError("--theta-steps must be >= 1")
        if not cfg.output:
            raise UsageError("sweep requires -o/--output")
    elif cmd == "check":
        cfg.theta, cfg.mode = ns.theta, ns.mode
        if not 0.0 <= cfg.theta <= spinlab.HALF_PI:
            raise UsageError("--theta must lie in [0, pi/2]")
        cfg.require = _names(ns.require)
    elif cmd == "lattice":
        cfg.phi = ns.phi
    elif cmd == "minimize":
        cfg.constraint, cfg.commutator, cfg.resolution = ns.constraint, ns.commutator, ns.resolution
        if not cfg.commutator > 0 or not cfg.resolution > 0:
            raise UsageError("--commutator and --resolution must be positive")
    elif cmd == "model-eval":
        cfg.model_file, cfg.random_model = ns.model_file, ns.random
        cfg.system_dim, cfg.probe_dim = ns.system_dim, ns.probe_dim
        cfg.require = _names(ns.require)
        if bool(cfg.model_file) == cfg.random_model:
            raise UsageError("model-eval needs exactly one of --model-file or --random")
        if cfg.system_dim < 1 or cfg.probe_dim < 1:
            raise UsageError("dimensions must be positive")
    for v in (cfg.theta_min, cfg.theta_max, cfg.phi, cfg.commutator, cfg.resolution,
              *cfg.tolerances.values()):
        if not math.isfinite(v):
            raise UsageError("numeric arguments must be finite")
    return cfg


def _names(text: str) -> tuple[str, ...]:
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    bad = [n for n in names if n not in ineq.NAMES]
    if bad:
        raise UsageError(f"unknown inequality names {bad}; choose from {ineq.NAMES}")
    return names


# -- output ----------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "NA"
        return f"{v:.12g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def render_records(rows: list[dict], columns, fmt: str) -> str:
    if fmt == "json":
        data = [{c: _jsonable(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(records: list[spinlab.SweepRecord], fmt: str, path: str) -> None:
    """Write sweep records as CSV or JSON, atomically."""
    if not records:
        raise InvalidInput("no records to emit")
    rows = [{c: getattr(r, c) for c in spinlab.COLUMNS} for r in records]
    write_atomic(path, render_records(rows, spinlab.COLUMNS, fmt))


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".edur-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- model files -----------------------------------------------------------

def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InvalidInput(f"complex numbers are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def _matrix(data, n: int, what: str) -> np.ndarray:
    # flat row-major has n*n entries; nested has n rows of n entries
    nested = len(data) == n and all(isinstance(r, list) and len(r) == n for r in data)
    if n == 1:
        nested = isinstance(data[0], list) and len(data[0]) == 1
    if nested:
        rows = data
    elif len(data) == n * n:
        rows = [data[i * n:(i + 1) * n] for i in range(n)]
    else:
        raise InvalidInput(f"{what}: expected a {n}x{n} matrix")
    return np.array([[_complex(e) for e in row] for row in rows], dtype=complex)


def _vector(data, n: int, what: str) -> np.ndarray:
    if len(data) != n:
        raise InvalidInput(f"{what}: expected {n} amplitudes, got {len(data)}")
    return np.array([_complex(e) for e in data], dtype=complex)


def load_model(obj: dict) -> tuple[measmodel.MeasurementModel, QuantumState]:
    """Build a model (and system state) from the JSON model-file schema.

    Complex numbers are ``[re, im]`` pairs (plain reals allowed); matrices
    are row-major, either nested rows or a flat list. ``system_state``
    defaults to the first basis vector.
    """
    try:
        ds, dp = int(obj["system_dim"]), int(obj["probe_dim"])
        model = measmodel.MeasurementModel(
            probe_state=QuantumState.pure(_vector(obj["probe_state"], dp, "probe_state")),
            interaction=_matrix(obj["interaction"], ds * dp, "interaction"),
            meter=Observable(_matrix(obj["meter"], dp, "meter"), "M"),
            measured=Observable(_matrix(obj["measured"], ds, "measured"), "A"),
            disturbed=Observable(_matrix(obj["disturbed"], ds, "disturbed"), "B"),
            noise_term=(Observable(_matrix(obj["noise"], dp, "noise"), "δM")
                        if obj.get("noise") is not None else None),
        )
    except KeyError as exc:
        raise InvalidInput(f"model file lacks required key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed model file: {exc}") from None
    if obj.get("system_state") is not None:
        psi = QuantumState.pure(_vector(obj["system_state"], ds, "system_state"))
    else:
        psi = basis_state(ds, 0)
    return model, psi


def _pairs(a) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a).reshape(-1)]


def dump_model(model: measmodel.MeasurementModel, psi: QuantumState | None = None) -> dict:
    """Inverse of :func:`load_model` (flat row-major matrices)."""
    out = {
        "system_dim": model.system_dim,
        "probe_dim": model.probe_dim,
        "probe_state": _pairs(model.probe_state.vector),
        "interaction": _pairs(model.interaction),
        "meter": _pairs(model.meter.op),
        "measured": _pairs(model.measured.op),
        "disturbed": _pairs(model.disturbed.op),
        "noise": _pairs(model.noise_term.op) if model.noise_term is not None else None,
    }
    if psi is not None:
        out["system_state"] = _pairs(psi.vector)
    return out


# -- subcommands -----------------------------------------------------------

REPORT_COLUMNS = ("mode", "name", "lhs", "rhs", "slack", "satisfied")


def _report_rows(mode: str, reports) -> list[dict]:
    return [dict(mode=mode, **asdict(r)) for r in reports]


def _print_reports(rows, out) -> None:
    for r in rows:
        flag = "ok" if r["satisfied"] else "VIOLATED"
        print(f"{r['mode']:>5} {r['name']:<18} lhs={r['lhs']:.12g} rhs={r['rhs']:.12g} "
              f"slack={r['slack']:.6g} {flag}", file=out)


def _finish(cfg: RunConfig, rows, columns) -> None:
    if cfg.output:
        write_atomic(cfg.output, render_records(rows, columns, cfg.format))


def _gate(rows, required) -> int:
    bad = [r for r in rows if r["name"] in required and not r["satisfied"]]
    return EXIT_VIOLATION if bad else EXIT_OK


def _run_sweep(cfg: RunConfig, out) -> int:
    grid = spinlab.default_grid(cfg.theta_steps, cfg.theta_min, cfg.theta_max)
    records = spinlab.sweep(grid, cfg.mode)
    emit(records, cfg.format, cfg.output)
    failed = [r for r in records if r.error]
    for r in failed:
        print(f"theta={r.theta:.12g}: {r.error}", file=sys.stderr)
    if cfg.mode != "paper":
        for k, v in spinlab.testability(records).items():
            print(f"{k}: {_cell(v)}", file=out)
    print(f"wrote {len(records)} records to {cfg.output}", file=out)
    return EXIT_NUMERIC if failed else EXIT_OK


def _run_check(cfg: RunConfig, out) -> int:
    tol = cfg.tolerances.get("slack", ineq.SLACK_TOL)
    rows = []
    if cfg.mode in ("paper", "both"):
        rec = spinlab.paper_mode(cfg.theta)
        q = ineq.summary_from_values(rec.epsilon_paper, rec.eta_paper, rec.sigma_a, rec.sigma_b)
        rows += _report_rows("paper", ineq.evaluate_all(q, rec.commutator_abs, tol=tol))
    if cfg.mode in ("model", "both"):
        st = spinlab.spin_setting(cfg.theta)
        model = measmodel.make_projective_model(st.A, probe_dim=2, disturbed=st.B)
        q = measmodel.summarize(model, st.psi)
        c = commutator_expectation_abs(st.A, st.B, st.psi)
        rows += _report_rows("model", ineq.evaluate_all(q, c, tol=tol))
    _print_reports(rows, out)
    _finish(cfg, rows, REPORT_COLUMNS)
    return _gate(rows, cfg.require)


def _run_lattice(cfg: RunConfig, out) -> int:
    u, v = qlogic.p_x_plus(), qlogic.p_phi_plus(cfg.phi)
    rep = qlogic.distributivity_holds(u, v)
    thm = qlogic.theorem_brute_force(
        [qlogic.p_x_plus(), qlogic.p_x_minus()], v)
    row = dict(phi=cfg.phi, meet_rank=rep.meet_rank, distributive=rep.distributive,
               commutes=rep.commutes, max_residual=rep.max_residual,
               theorem_pass=thm.passed, axioms_hold=thm.axioms_hold)
    for k, val in row.items():
        print(f"{k}: {_cell(val)}", file=out)
    _finish(cfg, [row], tuple(row))
    return EXIT_OK


def _run_minimize(cfg: RunConfig, out) -> int:
    names = ("heisenberg_product", "ozawa") if cfg.constraint == "both" else (cfg.constraint,)
    rows = []
    for name in names:
        r = ineq.verify_bound_constant(name, cfg.commutator, cfg.resolution)
        row = dict(constraint=name, minimum_ratio=r.minimum_ratio, grid_ratio=r.grid_ratio,
                   grid_resolution=r.grid_resolution,
                   epsilon=r.argmin[0], eta=r.argmin[1], sigma_a=r.argmin[2], sigma_b=r.argmin[3])
        rows.append(row)
        print(f"{name}: minimum_ratio={r.minimum_ratio:.12g} (grid {r.grid_ratio:.12g})", file=out)
    _finish(cfg, rows, tuple(rows[0]))
    return EXIT_OK


def _run_model_eval(cfg: RunConfig, out) -> int:
    if cfg.random_model:
        rng = np.random.default_rng(cfg.seed)
        model, psi = measmodel.random_model(rng, cfg.system_dim, cfg.probe_dim)
    else:
        try:
            with open(cfg.model_file) as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"model file is not valid JSON: {exc}") from None
        model, psi = load_model(obj)
    q = measmodel.summarize(model, psi)
    c = commutator_expectation_abs(model.measured, model.disturbed, psi)
    tol = cfg.tolerances.get("slack", ineq.SLACK_TOL)
    rows = _report_rows("model", ineq.evaluate_all(q, c, tol=tol))
    print(f"epsilon={q.epsilon:.12g} eta={q.eta:.12g} sigma_a={q.sigma_a:.12g} "
          f"sigma_b={q.sigma_b:.12g} commutator_abs={c:.12g}", file=out)
    print(f"product_raw={q.product_raw:.12g} product_factored={q.product_factored:.12g} "
          f"residuals=({q.assumption_residuals[0]:.6g}, {q.assumption_residuals[1]:.6g})", file=out)
    _print_reports(rows, out)
    _finish(cfg, rows, REPORT_COLUMNS)
    return _gate(rows, cfg.require)


_RUNNERS = {
    "sweep": _run_sweep,
    "check": _run_check,
    "lattice": _run_lattice,
    "minimize": _run_minimize,
    "model-eval": _run_model_eval,
}


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        return _RUNNERS[cfg.subcommand](cfg, out)
    except (EdurError, ArithmeticError, OSError) as exc:
        print(f"edur: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"edur: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
