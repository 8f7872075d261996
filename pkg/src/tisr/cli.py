"""Command-line front end.

Every subcommand writes ``<out>/<name>.csv`` plus ``<out>/<name>.manifest.json``
recording the full argument vector, so ``tisr --replay <manifest>`` reproduces
the CSV byte for byte.  Exit codes: 0 success, 1 numerical failure (or an
unconverged basis under ``--strict``), 2 bad arguments.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, io
from .basis import BasisSpec, busch_states, inverse_length
from .numerics import NumericsError
from .oracle import OracleCutoffs, oracle_sweep
from .scattering import StepWell, aeff_table
from .selfconsistent import sweep_self_consistent
from .spectrum import SeparationGrid, SpectrumResult, spectrum_sweep
from .units import ATOMIC_MASS_UNIT, TrapUnits

log = logging.getLogger("tisr")

FIG3_WELL = (36.79, 0.2)


class UsageError(ValueError):
    pass


def _grid(text: str) -> SeparationGrid:
    try:
        return SeparationGrid.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _energies(text: str) -> np.ndarray:
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            n = int(math.floor((stop - start) / step + 1e-9))
            return np.round(start + step * np.arange(n + 1), 12)
        return np.array([float(p) for p in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad energy list {text!r}: {exc}") from exc


def _length(text: str) -> float:
    x = float(text)
    if math.isnan(x):
        raise argparse.ArgumentTypeError("scattering length must be a number or inf")
    return x


def _add_basis(p: argparse.ArgumentParser) -> None:
    d = BasisSpec()
    p.add_argument("--n-s", type=int, default=d.n_s, help="interacting s-wave states")
    p.add_argument("--l-max", type=int, default=d.l_max, help="highest partial wave")
    p.add_argument("--n-max", type=int, default=d.n_max, help="radial cutoff for l >= 1")


def _add_well(p: argparse.ArgumentParser) -> None:
    p.add_argument("--V0", type=float, default=FIG3_WELL[0], help="well depth, hbar*omega")
    p.add_argument("--R", type=float, default=FIG3_WELL[1], help="well radius, z0")


def _add_oracle(p: argparse.ArgumentParser) -> None:
    d = OracleCutoffs()
    p.add_argument("--oracle-n-max", type=int, default=d.n_max)
    p.add_argument("--oracle-l-max", type=int, default=d.l_max)
    p.add_argument("--oracle-length", type=float, default=None,
                   help="oscillator length of the reference basis (default: automatic)")


def _spec(args) -> BasisSpec:
    return BasisSpec(args.n_s, args.l_max, args.n_max)


def _physical_units(args) -> TrapUnits | None:
    if getattr(args, "mass_amu", None) is None or getattr(args, "omega", None) is None:
        return None
    return TrapUnits.for_atoms(args.mass_amu * ATOMIC_MASS_UNIT, args.omega)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tisr", description=__doc__.splitlines()[0])
    p.add_argument("--out", default="tisr_out", help="output directory")
    p.add_argument("--name", default=None, help="file stem (default: subcommand name)")
    p.add_argument("--replay", metavar="MANIFEST", help="rerun the command recorded in a manifest")
    p.add_argument("--strict", action="store_true", help="exit 1 when a convergence check fails")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("aeff", help="effective scattering length of a step well")
    _add_well(s)
    s.add_argument("--E", type=_energies, default=_energies("-5:5:0.25"), help="E_K list or start:stop:step")

    s = sub.add_parser("busch", help="s-wave levels at fixed scattering length")
    s.add_argument("--a", type=_length, required=True)
    s.add_argument("--count", type=int, default=8)

    s = sub.add_parser("spectrum", help="fixed-a spectrum versus separation")
    s.add_argument("--a", type=_length, required=True)
    s.add_argument("--dz", type=_grid, default=_grid("0:4:0.05"))
    s.add_argument("--branches", type=int, default=6)
    s.add_argument("--refine", action="store_true", help="refine gap minima by re-diagonalisation")
    s.add_argument("--check", choices=("none", "last", "all"), default="last")
    _add_basis(s)

    s = sub.add_parser("selfconsistent", help="energy-dependent scattering length, solved self-consistently")
    _add_well(s)
    s.add_argument("--dz", type=_grid, default=_grid("0:4:0.1"))
    s.add_argument("--branches", type=int, default=2)
    s.add_argument("--window", type=float, default=2.0)
    s.add_argument("--step", type=float, default=0.05)
    _add_basis(s)

    s = sub.add_parser("oracle", help="reference spectrum with the true step potential")
    _add_well(s)
    s.add_argument("--dz", type=_grid, default=_grid("0:4:0.1"))
    s.add_argument("--branches", type=int, default=2)
    _add_oracle(s)

    s = sub.add_parser("crossing", help="lowest avoided crossing for one or more a > 0")
    s.add_argument("--a", type=_length, nargs="+", required=True)
    _add_basis(s)

    s = sub.add_parser("variational", help="two-state variational levels")
    s.add_argument("--a", type=_length, required=True)
    s.add_argument("--dz", type=_grid, default=_grid("0:4:0.05"))

    s = sub.add_parser("perturbation", help="first-order shell shifts")
    s.add_argument("--a", type=_length, required=True)
    s.add_argument("--dz", type=_grid, default=_grid("0:4:0.05"))
    s.add_argument("--shells", type=int, default=3)

    s = sub.add_parser("gate", help="Rabi-cycle duration and conditional phase")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--gap", type=float, help="level splitting, hbar*omega")
    g.add_argument("--a", type=_length, help="locate the crossing at this a and use its gap")
    s.add_argument("--omega", type=float, help="trap angular frequency, rad/s")
    s.add_argument("--mass-amu", type=float, help="atomic mass, u")
    _add_basis(s)

    s = sub.add_parser("fig2", help="fixed-a spectra for a = -0.5 or +0.5 with first-order curves")
    s.add_argument("--sign", choices=("negative", "positive"), required=True)
    s.add_argument("--dz", type=_grid, default=_grid("0:4:0.02"))
    s.add_argument("--branches", type=int, default=6)
    _add_basis(s)

    s = sub.add_parser("fig3", help="oracle, self-consistent and constant-a spectra for the step well")
    _add_well(s)
    s.add_argument("--dz", type=_grid, default=_grid("0:4:0.1"))
    s.add_argument("--branches", type=int, default=2)
    _add_basis(s)
    _add_oracle(s)
    return p


# --------------------------------------------------------------------------
# Commands: each returns (header, rows, document, converged)
# --------------------------------------------------------------------------

def _spectrum_output(results: list[SpectrumResult]):
    rows = []
    for res in results:
        rows.extend(res.rows())
    doc = {"results": [r.as_dict() for r in results]}
    ok = all(bool(np.all(r.converged)) for r in results)
    return io.SPECTRUM_HEADER, rows, doc, ok


def cmd_aeff(args):
    well = StepWell(args.V0, args.R)
    table = aeff_table(well, args.E)
    rows = [(t.E_K, t.a_eff, t.pole_flag) for t in table]
    doc = {"well": well.describe(), "valid": well.valid, "a0": well.zero_energy_length(),
           "bound_states": [{"E_b": b.E_b, "kappa_b": b.kappa_b,
                             "pole_identity": well.aeff(b.E_b) * b.kappa_b - 1.0}
                            for b in well.bound_states()]}
    return ("E_K", "a_eff", "pole_flag"), rows, doc, True


def cmd_busch(args):
    states = busch_states(inverse_length(args.a), args.count)
    rows = [(s.index, 0, s.E, s.kind) for s in states]
    return ("index", "l", "E", "kind"), rows, {"a": args.a, "c": inverse_length(args.a)}, True


def cmd_spectrum(args):
    res = spectrum_sweep(args.a, args.dz, _spec(args), args.branches, refine=args.refine, check=args.check)
    return _spectrum_output([res])


def cmd_selfconsistent(args):
    res = sweep_self_consistent(StepWell(args.V0, args.R), args.dz, _spec(args), args.branches,
                                window=args.window, step=args.step)
    if np.any(np.isnan(res.energies)):
        raise NumericsError(f"self-consistent roots missing: {res.flags}")
    return _spectrum_output([res])


def _cutoffs(args) -> OracleCutoffs:
    return OracleCutoffs(args.oracle_n_max, args.oracle_l_max, args.oracle_length)


def cmd_oracle(args):
    res = oracle_sweep(StepWell(args.V0, args.R), args.dz, _cutoffs(args), args.branches)
    return _spectrum_output([res])


def cmd_crossing(args):
    if any(not a > 0 for a in args.a):
        raise UsageError("crossing needs a > 0")
    rows = [r.as_tuple() for r in analysis.resonance_table(args.a, _spec(args))]
    return ("a", "dz_res_estimate", "dz_res_located", "gap", "gap_variational"), rows, {}, True


def cmd_variational(args):
    rows = []
    for z in args.dz.values:
        v = analysis.variational_gap(args.a, z)
        rows.append((z, v.levels[0], v.levels[1], v.gap, v.overlap, v.singular))
    return ("dz", "E_lower", "E_upper", "gap", "overlap", "singular"), rows, {}, True


def cmd_perturbation(args):
    rows = []
    for z in args.dz.values:
        for N in range(args.shells):
            shift = analysis.shell_shift(args.a, z, N)
            rows.append((z, N, shift, N + 1.5 + shift))
    return ("dz", "N", "shift", "energy"), rows, {}, True


def cmd_gate(args):
    doc = {}
    gap = args.gap
    if gap is None:
        if not args.a > 0:
            raise UsageError("gate --a needs a > 0")
        info = analysis.find_crossing(args.a, _spec(args))
        if info is None:
            raise NumericsError(f"no avoided crossing found for a={args.a}")
        gap = info.gap
        doc["crossing"] = info.as_dict()
    T, phase = analysis.gate_phase_time(gap)
    header = ["gap", "T", "phase"]
    row = [gap, T, phase]
    units = _physical_units(args)
    if units is not None:
        doc["units"] = units.as_dict()
        header += ["T_seconds", "gap_joules"]
        row += [units.time_from_natural(T), units.energy_from_natural(gap)]
    return tuple(header), [tuple(row)], doc, True


def cmd_fig2(args):
    a = -0.5 if args.sign == "negative" else 0.5
    res = spectrum_sweep(a, args.dz, _spec(args), args.branches, refine=True)
    pert = np.array([analysis.perturbative_branches(a, z, args.branches) for z in res.dz])
    rows = [r + (float(pert[j // res.n_branches, r[1]]),) for j, r in enumerate(res.rows())]
    doc = {"results": [res.as_dict()], "perturbative": pert}
    return io.SPECTRUM_HEADER + ("perturbative",), rows, doc, bool(np.all(res.converged))


def cmd_fig3(args):
    well = StepWell(args.V0, args.R)
    spec = _spec(args)
    oracle = oracle_sweep(well, args.dz, _cutoffs(args), args.branches)
    sc = sweep_self_consistent(well, args.dz, spec, args.branches)
    const = spectrum_sweep(well.zero_energy_length(), args.dz, spec, args.branches, check="none",
                           model="constant-a")
    if np.any(np.isnan(sc.energies)):
        raise NumericsError(f"self-consistent roots missing: {sc.flags}")
    header, rows, doc, ok = _spectrum_output([oracle, sc, const])
    doc["bound_states"] = [{"E_b": b.E_b, "kappa_b": b.kappa_b} for b in well.bound_states()]
    doc["a0"] = well.zero_energy_length()
    return header, rows, doc, ok


COMMANDS = {
    "aeff": cmd_aeff, "busch": cmd_busch, "spectrum": cmd_spectrum,
    "selfconsistent": cmd_selfconsistent, "oracle": cmd_oracle, "crossing": cmd_crossing,
    "variational": cmd_variational, "perturbation": cmd_perturbation, "gate": cmd_gate,
    "fig2": cmd_fig2, "fig3": cmd_fig3,
}

# options that only affect where output goes; stripped from the recorded argv
_OUTPUT_OPTIONS = {"--out": 1, "--name": 1, "--replay": 1, "-v": 0, "--verbose": 0}


def _recorded_argv(argv: list[str]) -> list[str]:
    out, skip = [], 0
    for tok in argv:
        if skip:
            skip -= 1
            continue
        key = tok.split("=", 1)[0]
        if key in _OUTPUT_OPTIONS:
            skip = _OUTPUT_OPTIONS[key] if "=" not in tok else 0
            continue
        out.append(tok)
    return out


def _replay_argv(path: str) -> list[str]:
    manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    if "argv" not in manifest:
        raise UsageError(f"{path} is not a tisr manifest")
    return list(manifest["argv"])


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.replay:
        try:
            recorded = _replay_argv(args.replay)
        except (OSError, ValueError) as exc:
            parser.print_usage(sys.stderr)
            print(f"tisr: error: {exc}", file=sys.stderr)
            return 2
        prefix = ["--out", args.out] + (["--name", args.name] if args.name else [])
        return main(prefix + recorded)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("tisr: error: a subcommand is required", file=sys.stderr)
        return 2
    try:
        header, rows, doc, converged = COMMANDS[args.command](args)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"tisr: error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"tisr: numerical failure: {exc}", file=sys.stderr)
        return 1
    name = args.name or args.command
    out = Path(args.out)
    csv_path = io.write_csv(out / f"{name}.csv", header, rows)
    doc_path = io.write_json(out / f"{name}.json", doc) if doc else None
    manifest = {
        "command": args.command,
        "argv": _recorded_argv(argv),
        "parameters": {k: (v.values if isinstance(v, SeparationGrid) else v)
                       for k, v in vars(args).items() if k not in ("out", "name", "replay", "verbose")},
        "outputs": [csv_path.name] + ([doc_path.name] if doc_path else []),
        "converged": converged,
        "threads": os.environ.get("TISR_THREADS", "all"),
        "environment": io.environment(),
    }
    io.write_json(out / f"{name}.manifest.json", manifest)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    if not converged:
        print("tisr: warning: convergence check failed (see manifest)", file=sys.stderr)
        if args.strict:
            return 1
    return 0


def run(argv: list[str]) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
