"""Command-line front end.

Subcommands expose the library over text streams: ``basis`` enumerates
base operators, ``dims`` prints dimension tables, ``evolve`` runs
magnetization-transfer experiments, ``cascade`` block-diagonalizes a
Hermitian operator in three stages, ``perm`` reports the
magnetization-sorted encoding and ``verify`` runs the property suites.

Every subcommand accepts inline flags or a JSON config file; on
conflict the config file wins and a warning goes to the error stream.
Floating point values are rendered with 17 significant digits in both
CSV and JSON so output round-trips doubles exactly; identical inputs
produce byte-identical output. Exit codes: 0 success, 2 configuration
or parse error, 3 numerical tolerance failure, 4 invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

import numpy as np

from .errors import ConfigurationError, InvariantError, ToleranceError
from .operators import (
    CARTESIAN,
    SHIFT,
    BaseOperatorSpec,
    SpinSystem,
    build_operator,
    enumerate_basis,
    max_spins,
    random_operator,
)
from .subspaces import (
    MEMBERSHIP_TOL,
    SubspaceTag,
    block_dimension,
    subspace_dims,
    verify_closure,
)
from .dynamics import HAMILTONIAN_MODELS, HamiltonianSpec
from .diffusion import (
    DiffusionConfig,
    channel_discrepancy,
    linear_times,
    run_blockwise,
    run_diffusion,
)
from .cascade import cascade
from .encodings import iz_sorted_encoding, synthesize_permutation
from .dynamics import build_hamiltonian
from .properties import verify_extreme_states, verify_order_preservation

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4

GENERATOR_EMIT_MAX_N = 6

_COMMON_KEYS = {"n", "seed", "format", "out"}
_CONFIG_KEYS = {
    "basis": _COMMON_KEYS | {"kind"},
    "dims": _COMMON_KEYS,
    "evolve": _COMMON_KEYS
    | {"hamiltonian", "initial", "times", "purge", "track", "engine"},
    "cascade": _COMMON_KEYS | {"hamiltonian"},
    "perm": _COMMON_KEYS | {"generators"},
    "verify": _COMMON_KEYS | {"trials", "combos", "tolerances"},
}
_HAMILTONIAN_KEYS = {"model", "couplings", "offsets"}
_TOLERANCE_KEYS = {"membership"}


def _fmt(x: float) -> str:
    """17 significant digits, enough to reproduce any double exactly."""
    return format(float(x), ".17g")


def _json_text(value: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_json_text(v, indent + 1)}'
            for k, v in value.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        seq = list(value)
        if not seq:
            return "[]"
        flat = all(not isinstance(v, (dict, list, tuple)) for v in seq)
        if flat:
            return "[" + ", ".join(_json_text(v) for v in seq) + "]"
        inner = ",\n".join(f"{pad}  {_json_text(v, indent + 1)}" for v in seq)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    if isinstance(value, (complex, np.complexfloating)):
        return "[" + _fmt(value.real) + ", " + _fmt(value.imag) + "]"
    if isinstance(value, str):
        return json.dumps(value)
    raise InvariantError(f"cannot serialize {type(value).__name__} to JSON")


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"config {path!r} must hold a JSON object")
    return doc


def _check_keys(doc: dict, allowed: set[str], context: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigurationError(
            f"unknown {context} keys: {', '.join(unknown)}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


def _merge(args: argparse.Namespace, command: str) -> dict:
    """Resolve flag and config values; the config file wins conflicts."""
    resolved: dict[str, Any] = {}
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        resolved[key] = value

    if args.config is None:
        return resolved

    doc = _load_config(args.config)
    _check_keys(doc, _CONFIG_KEYS[command], f"{command} config")
    if "hamiltonian" in doc:
        ham = doc["hamiltonian"]
        if not isinstance(ham, dict):
            raise ConfigurationError("config key 'hamiltonian' must be an object")
        _check_keys(ham, _HAMILTONIAN_KEYS, "hamiltonian")
    if "tolerances" in doc:
        tols = doc["tolerances"]
        if not isinstance(tols, dict):
            raise ConfigurationError("config key 'tolerances' must be an object")
        _check_keys(tols, _TOLERANCE_KEYS, "tolerances")

    for key, value in doc.items():
        flag_value = resolved.get(key)
        if flag_value is not None and flag_value != value:
            sys.stderr.write(
                f"warning: config overrides --{key}={flag_value!r} with {value!r}\n"
            )
        resolved[key] = value
    return resolved


def _require_n(resolved: dict) -> SpinSystem:
    n = resolved.get("n")
    if n is None:
        raise ConfigurationError("spin count is required; pass --n or config key 'n'")
    if not isinstance(n, int) or isinstance(n, bool):
        raise ConfigurationError(f"spin count must be an integer, got {n!r}")
    return SpinSystem(n)


def _seed_of(resolved: dict) -> int:
    seed = resolved.get("seed")
    if seed is None:
        return 0
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    return seed


def _format_of(resolved: dict) -> str:
    fmt = resolved.get("format") or "json"
    if fmt not in ("csv", "json"):
        raise ConfigurationError(f"format must be csv or json, got {fmt!r}")
    return fmt


def _parse_coupling_flag(text: str) -> tuple[int, int, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigurationError(
            f"coupling {text!r} must look like k,l,J (e.g. 1,2,0.5)"
        )
    try:
        return int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ConfigurationError(f"coupling {text!r}: {exc}") from exc


def _parse_offset_flag(text: str) -> tuple[int, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigurationError(f"offset {text!r} must look like k,value")
    try:
        return int(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigurationError(f"offset {text!r}: {exc}") from exc


def _hamiltonian_spec(resolved: dict) -> HamiltonianSpec:
    ham = resolved.get("hamiltonian")
    if isinstance(ham, dict):
        model = ham.get("model")
        couplings = ham.get("couplings", [])
        offsets = ham.get("offsets", [])
    else:
        model = resolved.get("model")
        couplings = resolved.get("coupling") or []
        offsets = resolved.get("offset") or []
    if model is None:
        raise ConfigurationError(
            "hamiltonian model is required; pass --model or config "
            "key hamiltonian.model"
        )
    if model not in HAMILTONIAN_MODELS or model == "custom":
        usable = [m for m in HAMILTONIAN_MODELS if m != "custom"]
        raise ConfigurationError(
            f"model {model!r} is not usable here; choose one of {', '.join(usable)}"
        )
    try:
        couplings = tuple(
            (int(k), int(l), float(j)) for (k, l, j) in couplings
        )
        offsets = tuple((int(k), float(w)) for (k, w) in offsets)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed hamiltonian terms: {exc}") from exc
    return HamiltonianSpec(model=model, couplings=couplings, offsets=offsets)


def _parse_times(resolved: dict) -> tuple[float, ...]:
    times = resolved.get("times")
    if times is None:
        raise ConfigurationError("a time grid is required; pass --times or config")
    if isinstance(times, str):
        if ":" in times:
            parts = times.split(":")
            if len(parts) != 3:
                raise ConfigurationError(
                    f"times {times!r} must be t1,t2,... or start:end:points"
                )
            try:
                return linear_times(float(parts[0]), float(parts[1]), int(parts[2]))
            except ValueError as exc:
                raise ConfigurationError(f"times {times!r}: {exc}") from exc
        try:
            return tuple(float(p) for p in times.split(","))
        except ValueError as exc:
            raise ConfigurationError(f"times {times!r}: {exc}") from exc
    if isinstance(times, dict):
        _check_keys(times, {"start", "end", "points"}, "times")
        try:
            return linear_times(
                float(times["start"]), float(times["end"]), int(times["points"])
            )
        except KeyError as exc:
            raise ConfigurationError(f"times object misses key {exc}") from exc
    if isinstance(times, (list, tuple)):
        try:
            return tuple(float(t) for t in times)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed times list: {exc}") from exc
    raise ConfigurationError(f"cannot interpret times {times!r}")


def _parse_track(resolved: dict) -> Any:
    track = resolved.get("track")
    if track is None or track == "all":
        return "all"
    if isinstance(track, str):
        return tuple(p for p in track.split(",") if p)
    if isinstance(track, (list, tuple)):
        return tuple(str(p) for p in track)
    raise ConfigurationError(f"cannot interpret track {track!r}")


# ---------------------------------------------------------------- basis


def _structural_orders(spec: BaseOperatorSpec) -> list[int]:
    if spec.kind == SHIFT:
        return [spec.shift_order]
    transverse = sum(1 for f in spec.factors if f in ("x", "y"))
    if transverse == 0:
        return [0]
    return list(range(-transverse, transverse + 1, 2))


def _structural_tags(spec: BaseOperatorSpec) -> list[str]:
    orders = _structural_orders(spec)
    tags = []
    if spec.kind == CARTESIAN:
        diagonal = all(f in ("e", "z") for f in spec.factors)
    else:
        diagonal = all(f in ("a", "b") for f in spec.factors)
    if diagonal:
        tags.append(SubspaceTag.LOMSO.value)
    if orders == [0]:
        tags.append(SubspaceTag.ZERO_QUANTUM.value)
    if all(p % 2 == 0 for p in orders):
        tags.append(SubspaceTag.EVEN_MQ.value)
    tags.append(SubspaceTag.FULL.value)
    return tags


def _cmd_basis(resolved: dict) -> int:
    system = _require_n(resolved)
    kind = resolved.get("kind") or CARTESIAN
    if kind not in (CARTESIAN, SHIFT):
        raise ConfigurationError(f"kind must be cartesian or shift, got {kind!r}")
    records = []
    for spec in enumerate_basis(system, kind):
        records.append(
            {
                "label": spec.label,
                "kind": spec.kind,
                "orders": _structural_orders(spec),
                "tags": _structural_tags(spec),
            }
        )
    if _format_of(resolved) == "json":
        text = _json_text({"n": system.n, "kind": kind, "operators": records}) + "\n"
    else:
        rows = [
            [
                r["label"],
                r["kind"],
                ";".join(str(p) for p in r["orders"]),
                ";".join(r["tags"]),
            ]
            for r in records
        ]
        text = _csv_text(["label", "kind", "orders", "tags"], rows)
    _emit(text, resolved.get("out"))
    return EXIT_OK


# ----------------------------------------------------------------- dims


def _cmd_dims(resolved: dict) -> int:
    system = _require_n(resolved)
    n = system.n
    dims = subspace_dims(n)
    block_dims = [block_dimension(n, k) for k in range(n + 1)]
    block_cells = [d * d for d in block_dims]
    total = sum(block_cells)
    full = 4**n
    doc = {
        "n": n,
        "subspace_dims": {tag.value: dims[tag] for tag in SubspaceTag},
        "block_dims": block_dims,
        "block_cells": block_cells,
        "block_cells_total": total,
        "full_cells": full,
        "block_cost_ratio": total / full,
    }
    if _format_of(resolved) == "json":
        text = _json_text(doc) + "\n"
    else:
        header = ["quantity", "value"]
        rows = [
            ["n", str(n)],
            *[
                [f"dim_{tag.value}", str(dims[tag])]
                for tag in SubspaceTag
            ],
            ["block_dims", ";".join(str(d) for d in block_dims)],
            ["block_cells", ";".join(str(c) for c in block_cells)],
            ["block_cells_total", str(total)],
            ["full_cells", str(full)],
            ["block_cost_ratio", _fmt(total / full)],
        ]
        text = _csv_text(header, rows)
    _emit(text, resolved.get("out"))
    return EXIT_OK


# --------------------------------------------------------------- evolve


def _cmd_evolve(resolved: dict) -> int:
    system = _require_n(resolved)
    spec = _hamiltonian_spec(resolved)
    config = DiffusionConfig(
        system=system,
        hamiltonian=spec,
        times=_parse_times(resolved),
        initial=resolved.get("initial") or "I1z",
        purge=bool(resolved.get("purge") or False),
        track=_parse_track(resolved),
    )
    engine = resolved.get("engine") or "full"
    if engine not in ("full", "blockwise", "both"):
        raise ConfigurationError(
            f"engine must be full, blockwise or both, got {engine!r}"
        )

    discrepancy = None
    if engine == "full":
        trace = run_diffusion(config)
    elif engine == "blockwise":
        trace = run_blockwise(config)
    else:
        trace = run_diffusion(config)
        other = run_blockwise(config)
        discrepancy = channel_discrepancy(trace, other)

    labels = config.tracked_labels()
    if _format_of(resolved) == "csv":
        header = ["t"] + list(labels)
        if discrepancy is not None:
            header.append("max_channel_discrepancy")
        rows = []
        for i, t in enumerate(trace.times):
            row = [_fmt(t)] + [_fmt(trace.channels[lab][i]) for lab in labels]
            if discrepancy is not None:
                row.append(_fmt(discrepancy[i]))
            rows.append(row)
        text = _csv_text(header, rows)
    else:
        doc = {
            "n": system.n,
            "engine": engine,
            "initial": config.initial,
            "purge": config.purge,
            "times": list(trace.times),
            "channels": {lab: list(trace.channels[lab]) for lab in labels},
            "conserved": list(trace.conserved),
            "undesired": list(trace.undesired),
            "block_sizes": (
                None
                if trace.block_sizes is None
                else {str(k): v for k, v in sorted(trace.block_sizes.items())}
            ),
        }
        if discrepancy is not None:
            doc["max_channel_discrepancy"] = list(discrepancy)
        text = _json_text(doc) + "\n"
    _emit(text, resolved.get("out"))
    return EXIT_OK


# -------------------------------------------------------------- cascade


def _cmd_cascade(resolved: dict) -> int:
    system = _require_n(resolved)
    has_model = isinstance(resolved.get("hamiltonian"), dict) or resolved.get("model")
    if has_model:
        target = build_hamiltonian(system, _hamiltonian_spec(resolved))
        source = "hamiltonian"
    else:
        rng = np.random.default_rng(_seed_of(resolved))
        target = random_operator(system, rng, hermitian=True)
        source = "random"
    result = cascade(target)
    doc = {
        "n": system.n,
        "source": source,
        "seed": _seed_of(resolved),
        "residuals": dict(result.residuals),
        "stage_memberships": {
            key: bool(member) for key, member in result.stage_classes.items()
        },
        "fallbacks": list(result.fallbacks),
        "spectrum_error": result.spectrum_error,
    }
    if _format_of(resolved) == "json":
        text = _json_text(doc) + "\n"
    else:
        rows = [["n", str(system.n)], ["source", source]]
        rows += [[f"residual_{k}", _fmt(v)] for k, v in result.residuals.items()]
        rows += [
            [key, str(bool(member)).lower()]
            for key, member in result.stage_classes.items()
        ]
        rows.append(["fallbacks", ";".join(str(f).lower() for f in result.fallbacks)])
        rows.append(["spectrum_error", _fmt(result.spectrum_error)])
        text = _csv_text(["quantity", "value"], rows)
    _emit(text, resolved.get("out"))
    return EXIT_OK


# ----------------------------------------------------------------- perm


def _cmd_perm(resolved: dict) -> int:
    system = _require_n(resolved)
    enc = iz_sorted_encoding(system)
    want_generators = bool(resolved.get("generators") or False)
    doc: dict[str, Any] = {
        "n": system.n,
        "permutation": list(enc.permutation),
        "cycles": [list(c) for c in enc.cycles()],
    }
    if want_generators:
        if system.n > GENERATOR_EMIT_MAX_N:
            raise ConfigurationError(
                f"generator matrices are emitted only for n <= "
                f"{GENERATOR_EMIT_MAX_N}; n={system.n} would be enormous"
            )
        generators = []
        for gen, angle in synthesize_permutation(enc, system):
            generators.append(
                {
                    "angle": angle,
                    "matrix": [[float(x) for x in row] for row in gen.entries.real],
                }
            )
        doc["generators"] = generators
    if _format_of(resolved) == "json":
        text = _json_text(doc) + "\n"
    else:
        if want_generators:
            raise ConfigurationError("generator matrices are JSON-only output")
        rows = [
            [str(pos), str(idx)] for pos, idx in enumerate(enc.permutation)
        ]
        text = _csv_text(["position", "computational_index"], rows)
    _emit(text, resolved.get("out"))
    return EXIT_OK


# --------------------------------------------------------------- verify


def _cmd_verify(resolved: dict) -> int:
    system = _require_n(resolved)
    seed = _seed_of(resolved)
    trials = resolved.get("trials")
    trials = 100 if trials is None else int(trials)
    combos = resolved.get("combos")
    combos = 50 if combos is None else int(combos)
    tolerances = resolved.get("tolerances") or {}
    membership_tol = float(tolerances.get("membership", MEMBERSHIP_TOL))

    order = verify_order_preservation(system, trials=trials, seed=seed)
    extreme = verify_extreme_states(system, combos=combos, seed=seed)
    closures = [
        verify_closure(tag, system, trials=trials, seed=seed, tol=membership_tol)
        for tag in (SubspaceTag.LOMSO, SubspaceTag.ZERO_QUANTUM, SubspaceTag.EVEN_MQ)
    ]

    checks = []
    for rep in (order, extreme):
        checks.append(
            {
                "check": rep.name,
                "passed": rep.passed,
                "checks_run": rep.checks,
                "max_residuals": dict(rep.max_residuals),
                "violations": list(rep.violations),
            }
        )
    for rep in closures:
        checks.append(
            {
                "check": f"closure_{rep.tag.value}",
                "passed": rep.passed,
                "checks_run": rep.checks,
                "max_residuals": {"membership": rep.max_residual},
                "violations": list(rep.violations),
            }
        )
    all_passed = all(c["passed"] for c in checks)
    doc = {
        "n": system.n,
        "seed": seed,
        "trials": trials,
        "combos": combos,
        "passed": all_passed,
        "checks": checks,
    }
    if _format_of(resolved) == "json":
        text = _json_text(doc) + "\n"
    else:
        rows = [
            [
                c["check"],
                str(c["passed"]).lower(),
                str(c["checks_run"]),
                _fmt(max(c["max_residuals"].values(), default=0.0)),
            ]
            for c in checks
        ]
        text = _csv_text(["check", "passed", "checks_run", "max_residual"], rows)
    _emit(text, resolved.get("out"))
    return EXIT_OK if all_passed else EXIT_NUMERICAL


# ------------------------------------------------------------- dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mqspace",
        description="Operator-space toolkit for coupled spin-1/2 registers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--n", type=int, default=None, help="number of spins")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("basis", help="enumerate base operators")
    common(p)
    p.add_argument("--kind", choices=(CARTESIAN, SHIFT), default=None)

    p = sub.add_parser("dims", help="subspace and block dimension tables")
    common(p)

    p = sub.add_parser("evolve", help="run a magnetization transfer experiment")
    common(p)
    p.add_argument("--model", choices=[m for m in HAMILTONIAN_MODELS if m != "custom"])
    p.add_argument(
        "--coupling",
        action="append",
        type=_parse_coupling_flag,
        metavar="k,l,J",
        help="pairwise coupling, repeatable",
    )
    p.add_argument(
        "--offset",
        action="append",
        type=_parse_offset_flag,
        metavar="k,value",
        help="longitudinal offset, repeatable",
    )
    p.add_argument("--initial", default=None, help="diagonal base operator label")
    p.add_argument("--times", default=None, help="t1,t2,... or start:end:points")
    p.add_argument("--purge", action="store_true", default=None)
    p.add_argument("--track", default=None, help="'all' or comma-joined labels")
    p.add_argument("--engine", choices=("full", "blockwise", "both"), default=None)

    p = sub.add_parser("cascade", help="three-stage block diagonalization")
    common(p)
    p.add_argument("--model", choices=[m for m in HAMILTONIAN_MODELS if m != "custom"])
    p.add_argument("--coupling", action="append", type=_parse_coupling_flag)
    p.add_argument("--offset", action="append", type=_parse_offset_flag)

    p = sub.add_parser("perm", help="magnetization-sorted encoding report")
    common(p)
    p.add_argument("--generators", action="store_true", default=None)

    p = sub.add_parser("verify", help="run the property verification suites")
    common(p)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--combos", type=int, default=None)

    return parser


_HANDLERS = {
    "basis": _cmd_basis,
    "dims": _cmd_dims,
    "evolve": _cmd_evolve,
    "cascade": _cmd_cascade,
    "perm": _cmd_perm,
    "verify": _cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        resolved = _merge(args, args.command)
        return _HANDLERS[args.command](resolved)
    except ConfigurationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except ToleranceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    except InvariantError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVARIANT


def run() -> None:
    sys.exit(main())
