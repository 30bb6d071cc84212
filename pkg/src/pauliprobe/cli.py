"""Command-line front end.

Subcommands::

    pauliprobe reconstruct SPEC   # Pauli partners of one generator -> JSON
    pauliprobe bifurcate SPEC     # partner count along a generator path -> CSV + JSON
    pauliprobe probe SPEC         # informational-completeness probe -> JSON
    pauliprobe trajectory SPEC    # iterates of one seed -> CSV
    pauliprobe bound D [D ...]    # rank-one POVM lower bound -> JSON

Global flags: --seed, --threads, --out, --config.

Exit codes: 0 success, 2 no physical fixed point found (anomaly), 64 malformed
spec or command line, 65 dimension mismatch.

Spec files are JSON objects::

    {
      "schema_version": 1,
      "bases": "pauli" | {"family": "pauli", "select": ["B_x", "B_z"]}
               | [{"label": "A", "vectors": [[[re, im], ...], ...]}, "fourier:3", ...],
      "generator": "random" | [[re, im], ...] | {"family": "pauli", "basis": "B_y", "index": 0},
      "solver": {"n_seeds": 64, "lambda": 1.0, "composition_order": "paper_sec4", ...},

      "path": {"start": <state>, "end": <state>, "points": 101},   # bifurcate
      "t_grid": [0.0, 0.5, 1.0],                                     # bifurcate, optional
      "n_generators": 200, "perturbation": 0.001,                    # probe
      "seed": "random" | <state>, "max_steps": 100                   # trajectory
    }

``--config`` names a JSON object of solver overrides applied on top of the
spec's ``"solver"`` block; ``--seed`` and ``--threads`` win over both.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .hilbert import DimensionMismatch, PureState, random_state, stream_rng
from .metrics import bures
from .serialization import (
    SCHEMA_VERSION,
    SpecError,
    atomic_write,
    bracket_to_dict,
    decode_basis,
    decode_state,
    dumps,
    encode_basis,
    encode_state,
    solution_set_to_dict,
    sweep_csv,
    table_csv,
)
from .solver import (
    SolverConfig,
    bifurcation_sweep,
    completeness_probe,
    enumerate_partners,
    first_acting_basis,
    generator_rng,
    geodesic,
    make_seed,
    nearest_eigenvector,
    perturbation_probe,
    synthesize_problem,
)
from .imposition import relaxed_rows

EXIT_OK = 0
EXIT_ANOMALY = 2
EXIT_SPEC = 64
EXIT_DIM = 65

log = logging.getLogger("pauliprobe")

_CONFIG_KEYS = {"max_iters", "conv_tol", "physical_tol", "dedup_tol", "n_seeds", "lam", "composition_order", "master_seed", "threads"}


# -- spec handling -----------------------------------------------------------


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError(f"{path} must contain a JSON object")
    return doc


def load_spec(path) -> dict:
    spec = load_json(path)
    version = spec.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SpecError(f"unsupported schema_version {version!r}")
    return spec


def _family(name) -> catalog.BasisFamily:
    if not isinstance(name, str):
        raise SpecError(f"family reference must be a string, got {name!r}")
    try:
        return catalog.resolve_family(name)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def resolve_bases(spec: dict) -> tuple:
    if "bases" not in spec:
        raise SpecError("spec has no 'bases' entry")
    ref = spec["bases"]
    if isinstance(ref, str):
        return _family(ref).bases
    if isinstance(ref, dict) and "family" in ref:
        fam = _family(ref["family"])
        if "select" in ref:
            try:
                return fam.select(list(ref["select"])).bases
            except KeyError as exc:
                raise SpecError(str(exc)) from exc
        return fam.bases
    if isinstance(ref, list) and ref:
        out = []
        for j, item in enumerate(ref):
            if isinstance(item, str):
                out.extend(_family(item).bases)
            else:
                out.append(decode_basis(item, f"A{j + 1}"))
        dims = {B.dim for B in out}
        if len(dims) != 1:
            raise DimensionMismatch(f"bases of different dimensions: {sorted(dims)}")
        return tuple(out)
    raise SpecError("'bases' must be a family name, a family object or a list of bases")


def resolve_state(ref, bases: tuple, rng_factory, what: str) -> PureState:
    d = bases[0].dim
    if ref == "random":
        state = random_state(d, rng_factory())
    elif isinstance(ref, list):
        state = decode_state(ref)
    elif isinstance(ref, dict) and "basis" in ref:
        pool = _family(ref["family"]).bases if "family" in ref else bases
        match = [B for B in pool if B.label == ref["basis"]]
        if not match:
            raise SpecError(f"{what}: no basis labelled {ref['basis']!r}")
        B = match[0]
        k = ref.get("index", 0)
        if not isinstance(k, int) or not 0 <= k < B.dim:
            raise SpecError(f"{what}: basis index {k!r} out of range")
        state = B.state(k)
    else:
        raise SpecError(f"{what} must be 'random', a vector, or a basis reference")
    if state.dim != d:
        raise DimensionMismatch(f"{what} has dimension {state.dim} but the bases have dimension {d}")
    return state


def _config_overrides(block, where: str) -> dict:
    if block is None:
        return {}
    if not isinstance(block, dict):
        raise SpecError(f"{where} must be a JSON object")
    out = {}
    for key, val in block.items():
        key = "lam" if key == "lambda" else key
        if key not in _CONFIG_KEYS:
            raise SpecError(f"{where}: unknown solver option {key!r}")
        out[key] = val
    return out


def build_config(spec: dict, args) -> SolverConfig:
    overrides = _config_overrides(spec.get("solver"), "spec 'solver' block")
    if getattr(args, "config", None):
        overrides.update(_config_overrides(load_json(args.config), f"--config {args.config}"))
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    try:
        return SolverConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"invalid solver configuration: {exc}") from exc


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _header(command: str, bases: tuple, config: SolverConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "dim": bases[0].dim,
        "bases": [encode_basis(B) for B in bases],
        # thread count does not affect results, keep it out of the output
        "config": {k: v for k, v in config.to_dict().items() if k != "threads"},
    }


# -- commands ----------------------------------------------------------------


def cmd_reconstruct(args) -> int:
    spec = load_spec(args.spec)
    bases = resolve_bases(spec)
    config = build_config(spec, args)
    gen = resolve_state(spec.get("generator", "random"), bases, lambda: generator_rng(config.master_seed, 0), "generator")
    sol = enumerate_partners(synthesize_problem(gen, bases), config)
    doc = _header("reconstruct", bases, config)
    doc["generator"] = encode_state(gen)
    doc["result"] = solution_set_to_dict(sol)
    _emit(args, dumps(doc))
    if sol.anomaly:
        print("error: no physical fixed point found", file=sys.stderr)
        return EXIT_ANOMALY
    return EXIT_OK


def _t_grid(spec: dict) -> list:
    if "t_grid" in spec:
        grid = spec["t_grid"]
        if not isinstance(grid, list) or not grid or not all(isinstance(t, (int, float)) for t in grid):
            raise SpecError("'t_grid' must be a non-empty list of numbers")
        return [float(t) for t in grid]
    points = spec["path"].get("points", 101)
    if not isinstance(points, int) or points < 1:
        raise SpecError("path 'points' must be a positive integer")
    if points == 1:
        return [0.0]
    return [float(t) for t in np.linspace(0.0, 1.0, points)]


def cmd_bifurcate(args) -> int:
    spec = load_spec(args.spec)
    bases = resolve_bases(spec)
    config = build_config(spec, args)
    path_spec = spec.get("path")
    if not isinstance(path_spec, dict) or "start" not in path_spec or "end" not in path_spec:
        raise SpecError("bifurcate needs a 'path' object with 'start' and 'end'")
    start = resolve_state(path_spec["start"], bases, lambda: generator_rng(config.master_seed, 0), "path start")
    end = resolve_state(path_spec["end"], bases, lambda: generator_rng(config.master_seed, 1), "path end")
    sweep = bifurcation_sweep(bases, geodesic(start, end), _t_grid(spec), config)
    _emit(args, sweep_csv(sweep))
    if args.out:
        doc = _header("bifurcate", bases, config)
        doc["path"] = {"start": encode_state(start), "end": encode_state(end), "kind": "geodesic"}
        doc["n_points"] = len(sweep.points)
        doc["brackets"] = [bracket_to_dict(b) for b in sweep.brackets]
        atomic_write(sidecar_path(args.out), dumps(doc))
    if any(p.anomaly for p in sweep.points):
        print("error: some grid points produced no physical fixed point", file=sys.stderr)
        return EXIT_ANOMALY
    return EXIT_OK


def sidecar_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".brackets.json")


def _probe_dict(report, bases) -> dict:
    doc = {
        "complete": report.complete,
        "n_tested": report.n_tested,
        "cluster_counts": report.cluster_counts,
        "anomalies": report.anomalies,
        "counterexample": None,
    }
    if report.counterexample is not None:
        dist, label, k = nearest_eigenvector(bases, report.counterexample)
        doc["counterexample"] = {
            "generator": encode_state(report.counterexample),
            "partners": [encode_state(s) for s in report.counterexample_partners],
            "nearest_eigenvector": {"basis": label, "index": k, "distance": dist},
        }
    return doc


def cmd_probe(args) -> int:
    spec = load_spec(args.spec)
    bases = resolve_bases(spec)
    config = build_config(spec, args)
    n_gen = spec.get("n_generators", 20)
    if not isinstance(n_gen, int) or isinstance(n_gen, bool) or n_gen < 1:
        raise SpecError(f"'n_generators' must be a positive integer, got {n_gen!r}")
    doc = _header("probe", bases, config)
    eps = spec.get("perturbation")
    if eps is None:
        report = completeness_probe(bases, n_gen, config)
        doc["probe"] = _probe_dict(report, bases)
        anomalies = report.anomalies
    else:
        if not isinstance(eps, (int, float)):
            raise SpecError("'perturbation' must be a number")
        try:
            pr = perturbation_probe(bases, float(eps), config, n_gen)
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
        doc["probe"] = _probe_dict(pr.baseline, bases)
        doc["perturbation"] = {
            "epsilon": pr.epsilon,
            "bases": [encode_basis(B) for B in pr.perturbed_bases],
            "probe": _probe_dict(pr.perturbed, pr.perturbed_bases),
            "incompleteness_persisted": pr.incompleteness_persisted,
            "verdict_unchanged": pr.verdict_unchanged,
        }
        anomalies = pr.baseline.anomalies + pr.perturbed.anomalies
    _emit(args, dumps(doc))
    return EXIT_ANOMALY if anomalies else EXIT_OK


def bloch_vector(vec: np.ndarray) -> tuple:
    """(x, y, z) = (2 Re(a* b), 2 Im(a* b), |a|^2 - |b|^2) for (a, b)."""
    a, b = vec[0], vec[1]
    c = np.conj(a) * b
    return 2.0 * float(c.real), 2.0 * float(c.imag), float(abs(a) ** 2 - abs(b) ** 2)


def trajectory_rows(problem, seed: PureState, config: SolverConfig, max_steps: int) -> tuple:
    d = problem.dim
    header = ["n"] + [f"{part}_{k}" for k in range(d) for part in ("re", "im")] + ["bures_step", "residual"]
    if d == 2:
        header += ["bloch_x", "bloch_y", "bloch_z"]

    def row(n, vec, step):
        out = [n]
        for z in vec:
            out += [float(z.real), float(z.imag)]
        out += [float(step), problem.residual(vec)]
        if d == 2:
            out += list(bloch_vector(vec))
        return out

    psi = seed.amplitudes
    rows = [row(0, psi, 0.0)]
    for n in range(1, max_steps + 1):
        new = relaxed_rows(problem, psi[None, :], config.lam, config.composition_order)[0]
        step = bures(new, psi)
        if step < config.conv_tol:
            break
        psi = new
        rows.append(row(n, psi, step))
    return header, rows


def cmd_trajectory(args) -> int:
    spec = load_spec(args.spec)
    bases = resolve_bases(spec)
    config = build_config(spec, args)
    gen = resolve_state(spec.get("generator", "random"), bases, lambda: generator_rng(config.master_seed, 0), "generator")
    problem = synthesize_problem(gen, bases)
    first = first_acting_basis(problem, config.composition_order)
    seed_ref = spec.get("seed", "random")
    if seed_ref == "random":
        seed = make_seed(problem.dim, first, stream_rng(config.master_seed, 0, 0))
    else:
        seed = resolve_state(seed_ref, bases, None, "seed")
    max_steps = spec.get("max_steps", config.max_iters)
    if not isinstance(max_steps, int) or max_steps < 0:
        raise SpecError("'max_steps' must be a non-negative integer")
    header, rows = trajectory_rows(problem, seed, config, max_steps)
    _emit(args, table_csv(header, rows))
    return EXIT_OK


def cmd_bound(args) -> int:
    entries = []
    for d in args.dims:
        if d <= 1:
            raise SpecError(f"dimension must exceed 1, got {d}")
        entries.append({"dim": d, "alpha": bin(d - 1).count("1"), "bound": catalog.povm_lower_bound(d)})
    _emit(args, dumps({"schema_version": SCHEMA_VERSION, "command": "bound", "bounds": entries}))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is the anomaly code here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_SPEC, f"{self.prog}: error: {message}\n")


def _global_flags(parser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="master seed for all random draws")
    parser.add_argument("--threads", type=int, default=default, help="worker threads for seed runs")
    parser.add_argument("--out", default=default, help="output file (default: standard output)")
    parser.add_argument("--config", default=default, help="JSON file of solver overrides")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pauliprobe", description="Pure-state reconstruction by iterated physical imposition.")
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    commands = {
        "reconstruct": (cmd_reconstruct, "enumerate Pauli partners of a generator state"),
        "bifurcate": (cmd_bifurcate, "count partners along a path of generator states"),
        "probe": (cmd_probe, "probe informational completeness of a set of bases"),
        "trajectory": (cmd_trajectory, "record the iterates of one seed"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("spec", help="JSON experiment spec")
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
    p = sub.add_parser("bound", help="rank-one POVM lower bound for informational completeness")
    p.add_argument("dims", type=int, nargs="+")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except DimensionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except (SpecError, ValueError, KeyError, TypeError) as exc:
        print(f"error: malformed spec: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
