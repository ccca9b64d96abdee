"""Command-line front end: ``infodyn {divergence,project,trajectory,geometry,verify}``.

Configs are JSON.  Matrices are row-major nested arrays whose entries are
numbers or ``[re, im]`` pairs; the strings ``"identity"``, ``"pauli_x"``,
``"pauli_y"`` and ``"pauli_z"`` are accepted as shorthands, as are
``{"diag": [...]}`` and ``{"random": {"seed": s, "faithful": true, "rank": r}}``.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 invariant breach.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import geometry
from .constraints import BlockDiagonal, Composite, Expectation, Support
from .divergence import d_gamma_continuous
from .dynamics import ConstraintSchedule, Trajectory, TrajectoryStep, evolve, trajectory_summary
from .exceptions import InfeasibleError, InfodynError, NotConvergedError
from .matkernel import PAULI_X, PAULI_Y, PAULI_Z, random_hermitian, random_state
from .projection import ArgumentOrder, project
from .states import ProjectorFamily, StateOperator
from .verify import SUITES, format_report, run_suite

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_INVARIANT = 0, 1, 2, 3
DEFAULT_SEED = 0


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class InvariantError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parsing


def _entry(v, field):
    if isinstance(v, bool):
        raise ConfigError(f"{field}: booleans are not matrix entries")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{field}: expected a number or [re, im], got {v!r}")


_NAMED = {"pauli_x": PAULI_X, "pauli_y": PAULI_Y, "pauli_z": PAULI_Z}


def parse_matrix(value, field, dim=None, seed=DEFAULT_SEED):
    """Parse a matrix literal or shorthand; ``field`` is used in error messages."""
    if isinstance(value, str):
        if value == "identity":
            if dim is None:
                raise ConfigError(f"{field}: 'identity' needs a dimension")
            m = np.eye(dim, dtype=complex)
        elif value in _NAMED:
            m = _NAMED[value]
        else:
            raise ConfigError(f"{field}: unknown matrix name {value!r}")
    elif isinstance(value, dict) and "diag" in value:
        m = np.diag([_entry(v, f"{field}.diag[{i}]") for i, v in enumerate(value["diag"])])
    elif isinstance(value, dict) and "random" in value:
        spec = value["random"] or {}
        n = int(spec.get("dim", dim or 0))
        if n < 1:
            raise ConfigError(f"{field}.random: dimension missing")
        rng = np.random.default_rng(int(spec.get("seed", seed)))
        kind = spec.get("kind", "state")
        if kind == "state":
            m = random_state(n, rng, faithful=bool(spec.get("faithful", True)), rank=spec.get("rank"))
        elif kind == "hermitian":
            m = random_hermitian(n, rng)
        else:
            raise ConfigError(f"{field}.random.kind: expected 'state' or 'hermitian'")
    elif isinstance(value, list) and value and all(isinstance(r, list) for r in value):
        rows = [[_entry(v, f"{field}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(value)]
        if any(len(r) != len(rows) for r in rows):
            raise ConfigError(f"{field}: matrix must be square")
        m = np.array(rows, dtype=complex)
    else:
        raise ConfigError(f"{field}: expected a matrix literal, got {value!r}")
    if dim is not None and m.shape != (dim, dim):
        raise ConfigError(f"{field}: expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def parse_state(value, field, dim=None, seed=DEFAULT_SEED):
    m = parse_matrix(value, field, dim, seed)
    try:
        return StateOperator(m)
    except (ValueError, InfodynError) as exc:
        raise ConfigError(f"{field}: {exc}") from None


def parse_constraints(value, field, dim, seed=DEFAULT_SEED):
    """List of ``{"type": ...}`` objects -> Composite (``None`` for an empty list)."""
    if value is None:
        return None
    if not isinstance(value, list):
        raise ConfigError(f"{field}: expected a list of constraint objects")
    parts = []
    for i, item in enumerate(value):
        f = f"{field}[{i}]"
        if not isinstance(item, dict) or "type" not in item:
            raise ConfigError(f"{f}: expected an object with a 'type'")
        kind = item["type"]
        try:
            if kind == "normalize":
                parts.append(Expectation(normalize=True))
            elif kind == "expectation":
                x = parse_matrix(item.get("observable"), f"{f}.observable", dim, seed)
                parts.append(Expectation((x,), (float(item["target"]),)))
            elif kind == "block_diagonal":
                if "blocks" in item:
                    fam = ProjectorFamily.from_blocks([int(b) for b in item["blocks"]])
                else:
                    fam = ProjectorFamily(
                        [parse_matrix(p, f"{f}.projectors[{j}]", dim) for j, p in enumerate(item["projectors"])]
                    )
                parts.append(BlockDiagonal(fam))
            elif kind == "support":
                parts.append(Support(parse_matrix(item.get("projector"), f"{f}.projector", dim)))
            else:
                raise ConfigError(f"{f}.type: unknown constraint type {kind!r}")
        except KeyError as exc:
            raise ConfigError(f"{f}: missing field {exc.args[0]!r}") from None
        except ConfigError:
            raise
        except (ValueError, TypeError, InfodynError) as exc:
            raise ConfigError(f"{f}: {exc}") from None
    if parts and any(p.family.dim != dim for p in parts if isinstance(p, BlockDiagonal)):
        raise ConfigError(f"{field}: block structure does not match dimension {dim}")
    return Composite(tuple(parts)) if parts else None


def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


class Settings:
    """Config fields with command-line overrides applied."""

    def __init__(self, cfg, args):
        self.cfg = cfg
        self.seed = args.seed if args.seed is not None else int(cfg.get("seed", DEFAULT_SEED))
        solver = cfg.get("solver", {}) or {}
        self.tol = args.tol if args.tol is not None else solver.get("tol")
        self.max_iter = args.max_iter if args.max_iter is not None else solver.get("max_iter")
        order = args.order or cfg.get("argument_order", "paper")
        try:
            self.order = ArgumentOrder(order)
        except ValueError:
            raise ConfigError(f"argument_order: expected 'paper' or 'reverse', got {order!r}") from None
        self.output = args.output or cfg.get("output")
        self.dim = cfg.get("dimension")
        if self.dim is not None and (not isinstance(self.dim, int) or self.dim < 1):
            raise ConfigError(f"dimension: expected a positive integer, got {self.dim!r}")

    def require(self, key):
        if key not in self.cfg:
            raise ConfigError(f"{key}: missing required field")
        return self.cfg[key]

    def state(self, key):
        st = parse_state(self.require(key), key, self.dim, self.seed)
        if self.dim is None:
            self.dim = st.dim
        return st

    def gamma(self):
        g = self.require("gamma")
        gammas = g if isinstance(g, list) else [g]
        out = []
        for i, v in enumerate(gammas):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 <= v <= 1:
                raise ConfigError(f"gamma[{i}]: expected a number in [0, 1], got {v!r}")
            out.append(float(v))
        return out, isinstance(g, list)


# ---------------------------------------------------------------------------
# serialization


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def matrix_to_json(m):
    m = np.asarray(m)
    return [[[_num(v.real), _num(v.imag)] for v in row] for row in m]


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(text, output):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _check_emitted(state, field):
    """Re-ingest an emitted matrix; a failure is an internal invariant breach."""
    try:
        StateOperator(parse_matrix(matrix_to_json(state.matrix), field))
    except (ValueError, InfodynError) as exc:
        raise InvariantError(f"emitted {field} is not a valid state: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_divergence(st):
    omega = st.state("omega")
    phi = st.state("phi")
    if phi.dim != omega.dim:
        raise ConfigError(f"phi: dimension {phi.dim} differs from omega's {omega.dim}")
    gammas, many = st.gamma()
    results = []
    for g in gammas:
        value = d_gamma_continuous(omega, phi, g)
        results.append({"gamma": g, "value": _num(value), "support_violation": bool(math.isinf(value))})
    return _dump({"results": results} if many else results[0])


def _solver_kwargs(st):
    return {"tol": st.tol, "max_iter": st.max_iter}


def cmd_project(st):
    omega = st.state("initial_state")
    gammas, many = st.gamma()
    q = parse_constraints(st.cfg.get("constraints"), "constraints", omega.dim, st.seed)
    results = []
    for g in gammas:
        res = project(omega, g, q, st.order, **_solver_kwargs(st))
        _check_emitted(res.state, "state")
        results.append(
            {
                "gamma": g,
                "order": st.order.value,
                "state": matrix_to_json(res.state.matrix),
                "multipliers": [_num(v) for v in res.multipliers],
                "iterations": int(res.iterations),
                "residual": _num(res.residual),
                "constraint_residual": _num(res.constraint_residual),
                "divergence": _num(res.divergence_at_solution),
                "method": res.method,
            }
        )
    return _dump({"results": results} if many else results[0])


def _parse_schedule(st, dim):
    raw = st.cfg.get("schedule", {}) or {}
    if not isinstance(raw, dict):
        raise ConfigError("schedule: expected an object with 'mode' and 'steps'")
    t0 = float(raw.get("t0", 0.0))
    entries = []
    for i, step in enumerate(raw.get("steps", [])):
        if not isinstance(step, dict) or "t" not in step:
            raise ConfigError(f"schedule.steps[{i}]: expected an object with a 't'")
        q = parse_constraints(step.get("constraints", []), f"schedule.steps[{i}].constraints", dim, st.seed)
        entries.append((float(step["t"]), q))
    if entries and entries[0][0] <= t0:
        raise ConfigError(f"schedule.steps[0].t: must exceed t0 = {t0:g}")
    try:
        return t0, ConstraintSchedule(entries, raw.get("mode", "from-initial"))
    except ValueError as exc:
        raise ConfigError(f"schedule: {exc}") from None


def cmd_trajectory(st):
    omega = st.state("initial_state")
    gammas, many = st.gamma()
    if many:
        raise ConfigError("gamma: trajectory takes a single value")
    t0, schedule = _parse_schedule(st, omega.dim)
    observables = [
        parse_matrix(x, f"observables[{i}]", omega.dim, st.seed) for i, x in enumerate(st.cfg.get("observables", []))
    ]
    traj = evolve(omega, gammas[0], schedule, st.order, **_solver_kwargs(st))
    for step in traj:
        _check_emitted(step.state, f"state at t={step.t:g}")
    initial = Trajectory([TrajectoryStep(t0, omega, 0.0, 0.0)] + list(traj.steps))
    rows = trajectory_summary(initial, observables)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    n = omega.dim
    writer.writerow(
        ["t", *[f"eig{i + 1}" for i in range(n)], "entropy", *[f"expectation{i + 1}" for i in range(len(observables))]]
    )
    for row in rows:
        values = [row["t"], *row["eigenvalues"], row["entropy"], *row["expectations"]]
        writer.writerow([f"{v:.17g}" for v in values])
    return buf.getvalue()


def cmd_geometry(st):
    phi = st.state("initial_state")
    gammas, _ = st.gamma()
    raw = st.cfg.get("directions", {"random": {"count": 2}})
    if isinstance(raw, dict) and "random" in raw:
        spec = raw["random"] or {}
        rng = np.random.default_rng(int(spec.get("seed", st.seed)))
        dirs = []
        for _ in range(int(spec.get("count", 2))):
            h = random_hermitian(phi.dim, rng)
            dirs.append(h / np.linalg.norm(h))
    elif isinstance(raw, list):
        dirs = [parse_matrix(d, f"directions[{i}]", phi.dim, st.seed) for i, d in enumerate(raw)]
    else:
        raise ConfigError("directions: expected a list of matrices or {'random': {...}}")
    k = len(dirs)
    out = []
    for g in gammas:
        metric = [[geometry.metric(g, phi, u, v) for v in dirs] for u in dirs]
        closed = [[geometry.closed_form_metric(g, phi, u, v) for v in dirs] for u in dirs]
        idx = [(a, b, c) for a in range(k) for b in range(k) for c in range(k)]
        conn = {f"{a},{b},{c}": geometry.connection(g, phi, dirs[a], dirs[b], dirs[c]) for a, b, c in idx}
        dual = {f"{a},{b},{c}": geometry.connection(g, phi, dirs[a], dirs[b], dirs[c], dual=True) for a, b, c in idx}
        dres = {
            f"{a},{b},{c}": geometry.norden_sen_residual(g, phi, dirs[a], dirs[b], dirs[c]) for a, b, c in idx
        }
        out.append(
            {
                "gamma": g,
                "metric": metric,
                "closed_form_metric": closed,
                "connection": conn,
                "dual_connection": dual,
                "duality_residual": dres,
                "max_duality_residual": max(dres.values()) if dres else 0.0,
            }
        )
    return _dump({"directions": [matrix_to_json(d) for d in dirs], "results": out})


COMMANDS = {
    "divergence": cmd_divergence,
    "project": cmd_project,
    "trajectory": cmd_trajectory,
    "geometry": cmd_geometry,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="infodyn", description="Entropic projection and information geometry toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="seed for generated instances (overrides config)")
    common.add_argument("--tol", type=float, help="solver tolerance (overrides config)")
    common.add_argument("--max-iter", type=int, dest="max_iter", help="solver iteration cap (overrides config)")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--order", choices=[o.value for o in ArgumentOrder], help="argument order")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {name} command")
    ver = sub.add_parser("verify", parents=[common], help="run seeded property suites")
    ver.add_argument("suite", nargs="?", default="all", choices=[*SUITES, "all"])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            seed = DEFAULT_SEED if args.seed is None else args.seed
            reports = run_suite(args.suite, seed)
            _write(format_report(reports, seed, args.suite), args.output)
            return EXIT_OK if all(r.passed for r in reports) else EXIT_INVARIANT
        st = Settings(load_config(args.config), args)
        text = COMMANDS[args.command](st)
        _write(text, st.output)
        return EXIT_OK
    except (NotConvergedError, InfeasibleError) as exc:
        diag = ", ".join(
            f"{k}={getattr(exc, k)}" for k in ("residual", "iterations", "t") if getattr(exc, k, None) is not None
        )
        print(f"infodyn: solver failure: {exc}" + (f" ({diag})" if diag else ""), file=sys.stderr)
        return EXIT_SOLVER
    except InvariantError as exc:
        print(f"infodyn: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, ValueError, TypeError, InfodynError) as exc:
        print(f"infodyn: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
