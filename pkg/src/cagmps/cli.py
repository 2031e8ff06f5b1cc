"""Benchmark command line for chain ground-state experiments.

Subcommands
-----------
``run``
    Optimize ground states for a chain model and emit one CSV row per
    (chi, method) pair, where method is ``gmps`` (plain sweeps) or
    ``cagmps`` (sweeps with the Clifford disentangling step).
``fit-c``
    Least-squares fit of S = (c/6) ln L + a + b/L to mid-bond entropies
    collected from ``run`` output, one fit per method.
``gates``
    Export the disentangling gate set: the enumeration counts followed
    by each gate's word, matrix, and conjugation table.
``ed``
    Exact-diagonalization reference: ground energy and up to the 16
    lowest eigenvalues of a small chain.

The ``run`` CSV columns, in this frozen order::

    model, L, t, V, chi, sweeps, clifford, seed, method, energy,
    reference_energy, energy_error, mid_bond_entropy, wall_time_s,
    S_1, ..., S_{L-1}

``S_b`` is the entanglement entropy across the cut after site b
(1-based), ``mid_bond_entropy`` equals ``S_{(L+1)//2}``, and
``energy_error = energy - reference_energy``.  All floats are printed
with 17 significant digits.  Every column except ``wall_time_s`` is a
deterministic function of the configuration and seed.

Configuration may come from ``--config FILE`` holding ``key = value``
lines (keys are the long flag names); explicit flags override the file.
Output files are written atomically (temp file, then rename).

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 self-check failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import os
import sys
import tempfile
import time

import numpy as np

from . import clifford, ed, models, store
from .dmrg import SweepConfig, run_dmrg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SELFCHECK = 4

_LABELS = "IXYZ"
_PHASE_TOKEN = {(1, 0): "+1", (-1, 0): "-1", (0, 1): "+i", (0, -1): "-i"}


class ConfigError(Exception):
    pass


class SelfCheckError(Exception):
    pass


class NumericalError(Exception):
    pass


@dataclasses.dataclass
class ExperimentConfig:
    model: str
    L: int
    t: float
    V: float
    chis: list[int]
    sweeps: int
    clifford: str  # "on", "off", or "both"
    seed: int
    reference: str  # "ed" or "high-chi"
    out: str | None
    checkpoint: str | None

    def methods(self) -> list[str]:
        return {"off": ["gmps"], "on": ["cagmps"], "both": ["gmps", "cagmps"]}[self.clifford]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".out-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _read_config_file(path: str) -> dict[str, str]:
    table: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                table[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return table


def _parse_chis(text: str) -> list[int]:
    try:
        chis = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad chi list {text!r}") from exc
    if not chis or any(c <= 0 for c in chis):
        raise ConfigError(f"bad chi list {text!r}")
    return chis


def _merge_run_config(args: argparse.Namespace) -> ExperimentConfig:
    table = _read_config_file(args.config) if args.config else {}

    def pick(flag, key, conv, default=None):
        if flag is not None:
            return flag
        if key in table:
            try:
                return conv(table[key])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad config value for {key}: {table[key]!r}") from exc
        return default

    model = pick(args.model, "model", str, "tv")
    if model not in ("tv", "tight-binding"):
        raise ConfigError(f"unknown model {model!r}")
    L = pick(args.L, "L", int)
    if L is None:
        raise ConfigError("L is required")
    if L < 2:
        raise ConfigError("L must be at least 2")
    t = pick(args.t, "t", float, 1.0)
    if t <= 0:
        raise ConfigError("t must be positive")
    V = pick(args.V, "V", float)
    if model == "tight-binding":
        if V not in (None, 0.0):
            raise ConfigError("tight-binding takes no V")
        V = 0.0
    elif V is None:
        V = 2.0
    if V < 0:
        raise ConfigError("V must be non-negative")
    chis = pick(args.chi, "chi", str)
    if chis is None:
        raise ConfigError("chi is required")
    chis = _parse_chis(chis)
    sweeps = pick(args.sweeps, "sweeps", int, 10)
    if sweeps <= 0:
        raise ConfigError("sweeps must be positive")
    cliff = pick(args.clifford, "clifford", str, "both")
    if cliff not in ("on", "off", "both"):
        raise ConfigError(f"--clifford must be on, off, or both, not {cliff!r}")
    seed = pick(args.seed, "seed", int, 0)
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    reference = pick(args.reference, "reference", str, "ed")
    if reference not in ("ed", "high-chi"):
        raise ConfigError(f"--reference must be ed or high-chi, not {reference!r}")
    if reference == "ed" and L > 12:
        raise ConfigError("ed reference is limited to L <= 12; use --reference high-chi")
    out = pick(args.out, "out", str)
    checkpoint = pick(args.checkpoint, "checkpoint", str)
    return ExperimentConfig(
        model, L, t, V, chis, sweeps, cliff, seed, reference, out, checkpoint
    )


def _build_hamiltonian(model: str, L: int, t: float, V: float):
    if model == "tv":
        return models.build_tv(L, t, V)
    return models.build_tight_binding(L, t)


def _reference_energy(config: ExperimentConfig) -> float:
    if config.reference == "ed":
        return ed.ground_energy(config.L, config.t, config.V)
    # high-chi: a plain run at twice the largest requested bond dimension
    ham = _build_hamiltonian(config.model, config.L, config.t, config.V)
    cfg = SweepConfig(chi_max=2 * max(config.chis), n_sweeps=config.sweeps)
    return run_dmrg(ham, cfg).energy


def cmd_run(args: argparse.Namespace) -> int:
    config = _merge_run_config(args)
    ham = _build_hamiltonian(config.model, config.L, config.t, config.V)
    reference = _reference_energy(config)
    mid = (config.L - 1) // 2

    header = [
        "model", "L", "t", "V", "chi", "sweeps", "clifford", "seed", "method",
        "energy", "reference_energy", "energy_error", "mid_bond_entropy",
        "wall_time_s",
    ] + [f"S_{b}" for b in range(1, config.L)]
    rows = []
    for chi in config.chis:
        for method in config.methods():
            cfg = SweepConfig(
                chi_max=chi,
                n_sweeps=config.sweeps,
                use_clifford=(method == "cagmps"),
            )
            start = time.perf_counter()
            result = run_dmrg(ham, cfg)
            wall = time.perf_counter() - start
            if not np.isfinite(result.energy):
                raise NumericalError(f"{method} run at chi={chi} diverged")
            entropies = result.state.bond_entropies()
            if config.checkpoint:
                path = f"{config.checkpoint}.{method}.chi{chi}"
                store.save_checkpoint(path, result.state, result.hamiltonian, result.gate_log)
            rows.append(
                [
                    config.model, str(config.L), _fmt(config.t), _fmt(config.V),
                    str(chi), str(config.sweeps),
                    "on" if method == "cagmps" else "off",
                    str(config.seed), method,
                    _fmt(result.energy), _fmt(reference),
                    _fmt(result.energy - reference),
                    _fmt(entropies[mid]), _fmt(wall),
                ]
                + [_fmt(s) for s in entropies]
            )
    _atomic_write(config.out, _csv_text(header, rows))
    return EXIT_OK


def fit_entropy_scaling(lengths, entropies) -> tuple[float, float, float, float]:
    """Fit S(L) = (c/6) ln L + a + b/L; returns (c, a, b, rms residual)."""
    L = np.asarray(lengths, dtype=float)
    S = np.asarray(entropies, dtype=float)
    if np.unique(L).size < 3:
        raise ConfigError("need at least three distinct L values to fit")
    design = np.column_stack([np.log(L) / 6.0, np.ones_like(L), 1.0 / L])
    coef, *_ = np.linalg.lstsq(design, S, rcond=None)
    rms = float(np.sqrt(np.mean((design @ coef - S) ** 2)))
    return float(coef[0]), float(coef[1]), float(coef[2]), rms


def cmd_fit_c(args: argparse.Namespace) -> int:
    try:
        with open(args.data, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "L" not in reader.fieldnames:
                raise ConfigError(f"{args.data}: missing L column")
            if "mid_bond_entropy" not in reader.fieldnames:
                raise ConfigError(f"{args.data}: missing mid_bond_entropy column")
            groups: dict[str, tuple[list, list]] = {}
            for rec in reader:
                method = rec.get("method") or "all"
                ls, ss = groups.setdefault(method, ([], []))
                try:
                    ls.append(int(rec["L"]))
                    ss.append(float(rec["mid_bond_entropy"]))
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"{args.data}: bad row {rec!r}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read data file: {exc}") from exc
    if not groups:
        raise ConfigError(f"{args.data}: no data rows")

    rows = []
    for method in sorted(groups):
        ls, ss = groups[method]
        c, a, b, rms = fit_entropy_scaling(ls, ss)
        rows.append([method, _fmt(c), _fmt(a), _fmt(b), _fmt(rms)])
    _atomic_write(args.out, _csv_text(["method", "c", "a", "b", "rms"], rows))
    return EXIT_OK


def _tableau_tokens(gate: clifford.CliffordGate) -> list[str]:
    tokens = []
    for k in range(16):
        pin = _LABELS[k // 4] + _LABELS[k % 4]
        tgt = int(gate.tableau.target[k])
        ph = complex(gate.tableau.phase[k])
        token = _PHASE_TOKEN[(round(ph.real), round(ph.imag))]
        tokens.append(f"{pin}->{token},{_LABELS[tgt // 4]}{_LABELS[tgt % 4]}")
    return tokens


def cmd_gates(args: argparse.Namespace) -> int:
    result = clifford.gate_set()
    if result.counts != (11520, 720, 32, 12):
        raise SelfCheckError(f"gate enumeration produced counts {result.counts}")
    lines = [",".join(str(c) for c in result.counts)]
    for gate in result.gates:
        word = " ".join(clifford.GATE_NAMES[i] for i in gate.word) if gate.word else "-"
        lines.append(f"gate {gate.gate_id}")
        lines.append(f"word {word}")
        lines.append("matrix_re " + " ".join(_fmt(v) for v in gate.matrix.real.reshape(-1)))
        lines.append("matrix_im " + " ".join(_fmt(v) for v in gate.matrix.imag.reshape(-1)))
        lines.append("tableau " + " ".join(_tableau_tokens(gate)))
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_ed(args: argparse.Namespace) -> int:
    model = args.model or "tv"
    if model not in ("tv", "tight-binding"):
        raise ConfigError(f"unknown model {model!r}")
    if args.L is None:
        raise ConfigError("L is required")
    if args.L < 2:
        raise ConfigError("L must be at least 2")
    if args.L > 12:
        raise ConfigError("exact diagonalization is limited to L <= 12")
    t = 1.0 if args.t is None else args.t
    V = 0.0 if model == "tight-binding" else (2.0 if args.V is None else args.V)
    H = ed.dense_hamiltonian(args.L, t, V)
    values = np.linalg.eigvalsh(H)
    rows = [[str(i), _fmt(values[i])] for i in range(min(16, values.size))]
    _atomic_write(args.out, _csv_text(["index", "eigenvalue"], rows))
    if args.out not in (None, "-"):
        print(f"ground_energy {_fmt(values[0])}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cagmps",
        description="Chain ground-state benchmarks with and without Clifford disentangling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="optimize ground states, write a CSV of measurements")
    run.add_argument("--config", help="key = value file; flags override it")
    run.add_argument("--model", choices=["tv", "tight-binding"])
    run.add_argument("--L", type=int, help="number of sites")
    run.add_argument("--t", type=float, help="hopping amplitude (default 1)")
    run.add_argument("--V", type=float, help="nearest-neighbor repulsion (tv only, default 2)")
    run.add_argument("--chi", help="comma-separated bond dimension caps, e.g. 8,16,32")
    run.add_argument("--sweeps", type=int, help="full sweeps per run (default 10)")
    run.add_argument("--clifford", choices=["on", "off", "both"],
                     help="method selection; both runs gmps and cagmps (default)")
    run.add_argument("--seed", type=int, help="recorded in the output; runs are deterministic")
    run.add_argument("--reference", choices=["ed", "high-chi"],
                     help="reference energy: exact diagonalization (L <= 12) or a plain "
                          "run at twice the largest chi")
    run.add_argument("--out", help="output CSV path ('-' or omitted: stdout)")
    run.add_argument("--checkpoint", help="path prefix for per-run checkpoint files")
    run.set_defaults(func=cmd_run)

    fit = sub.add_parser("fit-c", help="fit S = (c/6) ln L + a + b/L to run output")
    fit.add_argument("--data", required=True, help="CSV with L and mid_bond_entropy columns")
    fit.add_argument("--out", help="output CSV path ('-' or omitted: stdout)")
    fit.set_defaults(func=cmd_fit_c)

    gates = sub.add_parser("gates", help="export the disentangling gate set")
    gates.add_argument("--out", help="output path ('-' or omitted: stdout)")
    gates.set_defaults(func=cmd_gates)

    edp = sub.add_parser("ed", help="exact reference spectrum for a small chain")
    edp.add_argument("--model", choices=["tv", "tight-binding"])
    edp.add_argument("--L", type=int, help="number of sites (at most 12)")
    edp.add_argument("--t", type=float, help="hopping amplitude (default 1)")
    edp.add_argument("--V", type=float, help="nearest-neighbor repulsion (default 2)")
    edp.add_argument("--out", help="output CSV path ('-' or omitted: stdout)")
    edp.set_defaults(func=cmd_ed)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SelfCheckError as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
