"""Command-line front end.

Subcommands
-----------
verify       random-state batch for a registered relation
koashi       three-qubit sweep of the four-term CCR built on Koashi-Winter
decohere     measurement-model trajectory as CSV (or JSON)
quantifiers  every applicable quantifier of a state read from a JSON file

Exit codes: 0 pass, 1 usage or input error, 2 verification failure.
Reports embed the tool version, the resolved configuration and the seed;
identical configurations give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .correlations import (
    OptimizerConfig,
    classical_correlation,
    concurrence,
    entanglement_entropy,
    eof_from_concurrence,
    jaeger_measure,
)
from .dynamics import CSV_COLUMNS, measurement_model, pointer_basis_detect
from .errors import CcrError, GridTooCoarse, ParseError
from .measures import (
    coherence,
    coherent_information,
    conditional_entropy,
    conditional_information,
    gy_predictability,
    gy_visibility,
    linear_entropy,
    mutual_information,
    predictability,
    reality,
    state_information,
    von_neumann_entropy,
)
from .qstate import (
    DensityMatrix,
    PureState,
    basis_state,
    normalized,
    parse_dims,
    partial_trace,
    plus_state,
    random_pure,
)
from .relations import GeneratorSpec, ccr_koashi, get_relation, trial_seed, verify_batch

SIG_DIGITS = 12
ZERO_SNAP = 1e-13

INPUT_STATES = {
    "zero": lambda: basis_state(0, (2,)),
    "one": lambda: basis_state(1, (2,)),
    "plus": plus_state,
    "minus": lambda: normalized([1, -1]),
    "plus-i": lambda: normalized([1, 1j]),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- formatting and output ----------------------------------------------------------


def fmt(x) -> str:
    """Decimal rendering with 12 significant digits; ``-0`` prints as ``0``."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(0.0 if x == 0 else x, f".{SIG_DIGITS}g")
    return str(x)


def rounded(obj):
    """Round every float in a JSON-like tree to 12 significant digits."""
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    return obj


def dump_json(obj) -> str:
    return json.dumps(rounded(obj), indent=2, sort_keys=False) + "\n"


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def write_atomic(files: dict[Path, str]) -> None:
    """Write all files or none: stage every temp file before renaming any."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def meta(command: str, config: dict, seed) -> dict:
    return {"tool": "ccrkit", "version": __version__, "command": command, "seed": seed, "config": config}


def emit(args, header: dict, columns, rows, extra: dict | None = None) -> None:
    """Send a tabular result to ``--out`` (CSV + JSON sidecar, or one JSON) or stdout."""
    body = dict(header)
    body.update(extra or {})
    if args.format == "json":
        text = dump_json({**body, "rows": [{c: r.get(c) for c in columns} for r in rows]})
        files = {Path(args.out): text} if args.out else None
    else:
        text = render_csv(columns, rows)
        files = {Path(args.out): text, Path(f"{args.out}.json"): dump_json(body)} if args.out else None
    if files:
        write_atomic(files)
    else:
        sys.stdout.write(text)


def resolve_seed(seed):
    if seed is not None:
        return seed
    seed = int(np.random.SeedSequence().entropy % 2**32)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts,
        max_iterations=args.max_iter,
        tolerance=args.opt_tol,
        seed=args.seed,
    )


def _cfg_dict(cfg: OptimizerConfig) -> dict:
    return {
        "restarts": cfg.restarts,
        "max_iterations": cfg.max_iterations,
        "tolerance": cfg.tolerance,
        "seed": cfg.seed,
        "ensemble_size": cfg.ensemble_size,
    }


# -- commands ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    rel = get_relation(args.relation)
    dims = parse_dims(args.dims) if args.dims else rel.default_dims
    spec = GeneratorSpec(tuple(dims), args.rank)
    rel.validate(spec)
    cfg = optimizer_config(args)
    summary = verify_batch(args.relation, spec, args.trials, args.tol, args.seed, cfg, args.workers)
    config = {
        "relation": args.relation,
        "dims": list(spec.dims),
        "rank": spec.rank,
        "trials": args.trials,
        "tolerance": args.tol,
        "optimizer": _cfg_dict(cfg),
    }
    columns = list(summary.records[0])
    emit(args, meta("verify", config, args.seed), columns, summary.records, {"summary": summary.to_dict(False)})
    return 0 if summary.failures == 0 else 2


def cmd_koashi(args) -> int:
    cfg = optimizer_config(args)
    rows = []
    for i in range(args.trials):
        rng = np.random.default_rng(trial_seed(args.seed, i))
        psi = random_pure((2, 2, 2), rng)
        mode = "projective" if args.mode == "auto" else args.mode
        rep = ccr_koashi(psi, cfg, mode=mode)
        first = rep.checks["koashi_winter"]
        if args.mode == "auto" and rep.max_residual > args.tol:
            rep = ccr_koashi(psi, cfg, mode="povm")
        row = {"trial": i, "residual": rep.max_residual, "koashi_winter": rep.checks["koashi_winter"]}
        row.update(rep.terms)
        row.update(
            j_mode=rep.info["j_mode"],
            ef_method=rep.info["ef_method"],
            spread=rep.info["spread"],
            converged=rep.info["converged"],
            projective_residual=first,
            input_digest=rep.input_digest,
        )
        rows.append(row)
    res = np.array([r["residual"] for r in rows])
    summary = {
        "trials": args.trials,
        "failures": int(np.sum(res > args.tol)),
        "max_residual": float(res.max()),
        "median_residual": float(np.median(res)),
        "povm_trials": sum(r["j_mode"] == "povm" for r in rows),
    }
    config = {"dims": [2, 2, 2], "trials": args.trials, "tolerance": args.tol, "mode": args.mode,
              "optimizer": _cfg_dict(cfg)}
    emit(args, meta("koashi", config, args.seed), list(rows[0]), rows, {"summary": summary})
    return 0 if summary["failures"] == 0 else 2


def cmd_decohere(args) -> int:
    if args.steps < 3:
        raise GridTooCoarse(f"need at least 3 time steps, got {args.steps}")
    if args.gamma < 0 or args.tmax <= 0:
        raise CcrError("gamma must be >= 0 and tmax > 0")
    times = np.linspace(0.0, args.tmax, args.steps)
    cfg = optimizer_config(args)
    traj = measurement_model(INPUT_STATES[args.input](), args.gamma, times, cfg, args.coupling)
    detect = pointer_basis_detect(traj, args.window, args.epsilon)
    worst = float(np.max(traj["ccr_residual"]))
    config = {
        "experiment": "measurement-model",
        "input": args.input,
        "gamma": args.gamma,
        "coupling": 2.0 * args.gamma if args.coupling is None else args.coupling,
        "tmax": args.tmax,
        "steps": args.steps,
        "window": args.window,
        "epsilon": args.epsilon,
        "tolerance": args.tol,
        "optimizer": _cfg_dict(cfg),
    }
    extra = {
        "pointer_basis_time": detect,
        "max_ccr_residual": worst,
        "max_kw_residual": float(np.max(traj["kw_residual"])),
    }
    columns = ["time", *CSV_COLUMNS]
    emit(args, meta("decohere", config, args.seed), columns, list(traj.rows(CSV_COLUMNS)), extra)
    return 0 if worst <= args.tol else 2


# -- state files -------------------------------------------------------------------


def _position(text: str, needle: str) -> tuple[int, int]:
    idx = text.find(needle)
    if idx < 0:
        return 1, 1
    line = text.count("\n", 0, idx) + 1
    return line, idx - (text.rfind("\n", 0, idx) + 1) + 1


def _complex_list(text, key, raw, n):
    line, col = _position(text, f'"{key}"')
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"'{key}' must be a list of [re, im] pairs", line, col) from None
    if arr.shape != (n, 2):
        raise ParseError(f"'{key}' needs {n} [re, im] pairs, got shape {arr.shape}", line, col)
    return arr[:, 0] + 1j * arr[:, 1]


def parse_state(text: str):
    """Read ``{"dims": [...], "matrix" | "vector": [[re, im], ...]}``."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(obj, dict) or "dims" not in obj:
        raise ParseError("state file needs an object with 'dims'", *_position(text, "{"))
    try:
        dims = tuple(int(d) for d in obj["dims"])
    except (TypeError, ValueError):
        raise ParseError("'dims' must be a list of integers", *_position(text, '"dims"')) from None
    d = int(np.prod(dims)) if dims else 0
    if not dims or d < 1:
        raise ParseError("'dims' must be non-empty and positive", *_position(text, '"dims"'))
    has_m, has_v = "matrix" in obj, "vector" in obj
    if has_m == has_v:
        raise ParseError("give exactly one of 'matrix' or 'vector'", *_position(text, "{"))
    try:
        if has_v:
            return PureState(_complex_list(text, "vector", obj["vector"], d), dims)
        mat = _complex_list(text, "matrix", obj["matrix"], d * d).reshape(d, d)
        return DensityMatrix(mat, dims)
    except ParseError:
        raise
    except CcrError as exc:
        key = '"vector"' if has_v else '"matrix"'
        raise ParseError(str(exc), *_position(text, key)) from None


def quantifiers(state, cfg: OptimizerConfig | None = None) -> dict[str, float]:
    """Every quantifier that applies to the state's shape, keyed by symbol."""
    rho = state.dm() if isinstance(state, PureState) else state
    out = {
        "S_vn": von_neumann_entropy(rho),
        "S_l": linear_entropy(rho),
        "I(rho)": state_information(rho),
        "C_re": coherence(rho),
        "P_vn": predictability(rho),
        "R": reality(rho),
    }
    if rho.dim == 2:
        out["V"] = gy_visibility(rho)
        out["P"] = gy_predictability(rho)
    if rho.n_sub == 2:
        rho_a = partial_trace(rho, 0)
        out.update(
            {
                "S_vn(A)": von_neumann_entropy(rho_a),
                "C_re(A)": coherence(rho_a),
                "P_vn(A)": predictability(rho_a),
                "I_{A:B}": mutual_information(rho),
                "S_{A|B}": conditional_entropy(rho),
                "S_{A>B}": coherent_information(rho),
                "I_{A|B}": conditional_information(rho),
            }
        )
        if rho.dims[1] <= 4:
            out["J_{A|B}"] = classical_correlation(rho, 1, cfg).value
        if rho.dims == (2, 2):
            c = concurrence(rho)
            out["C"] = c
            out["E_f"] = eof_from_concurrence(c)
            out["Tr(rho rho~)"] = jaeger_measure(rho)
        if isinstance(state, PureState):
            out["E_E"] = entanglement_entropy(state)
    return out


def cmd_quantifiers(args) -> int:
    path = Path(args.state)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CcrError(f"cannot read {path}: {exc.strerror}") from None
    state = parse_state(text)
    cfg = optimizer_config(args)
    # round-off residue such as -3e-16 for a pure state's entropy is shown as 0
    values = {k: 0.0 if abs(v) < ZERO_SNAP else v for k, v in quantifiers(state, cfg).items()}
    rows = [{"quantity": k, "value": v} for k, v in values.items()]
    config = {"state": path.name, "dims": list(state.dims), "optimizer": _cfg_dict(cfg)}
    if args.out:
        emit(args, meta("quantifiers", config, args.seed), ["quantity", "value"], rows)
    else:
        width = max(len(k) for k in values)
        for k, v in values.items():
            print(f"{k:<{width}}  {fmt(v)}")
    return 0


# -- argument parsing ----------------------------------------------------------------


def _common(p, restarts=20):
    p.add_argument("--seed", type=int, default=None, help="RNG seed (generated and reported if absent)")
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--opt-tol", type=float, default=1e-9)
    p.add_argument("--out", default=None, help="output file; stdout if absent")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccrkit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"ccrkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="verify a relation on random states")
    p.add_argument("--relation", required=True)
    p.add_argument("--dims", default=None, help="e.g. 2x3")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--workers", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("koashi", help="Koashi-Winter sweep over random three-qubit states")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--mode", choices=("projective", "povm", "auto"), default="auto",
                   help="auto retries states above --tol with POVMs")
    _common(p)
    p.set_defaults(func=cmd_koashi)

    p = sub.add_parser("decohere", help="system-apparatus-environment trajectory")
    p.add_argument("--input", choices=sorted(INPUT_STATES), default="plus")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--coupling", type=float, default=None)
    p.add_argument("--tmax", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-10)
    _common(p, restarts=1)
    p.set_defaults(func=cmd_decohere)

    p = sub.add_parser("quantifiers", help="quantifiers of a state read from JSON")
    p.add_argument("state")
    _common(p)
    p.set_defaults(func=cmd_quantifiers)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command != "quantifiers" or args.out:
            args.seed = resolve_seed(args.seed)
        elif args.seed is None:
            args.seed = 0
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except (CcrError, ValueError) as exc:
        msg = exc.args[0] if exc.args else ""
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
