"""Truncation studies for the zero-range basis and the finite-range reference.

Writes two CSV tables into ``--out``: level shifts under basis enlargement
for the fixed-a model, and the oscillator-basis reference for the step well
against its radial cutoff.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tisr.basis import BasisSpec, inverse_length
from tisr.io import write_csv
from tisr.oracle import OracleCutoffs, exact_spectrum
from tisr.scattering import StepWell
from tisr.spectrum import levels


@dataclass
class Config:
    a_values: tuple[float, ...] = (-0.5, 0.5, 2.0, 5.0)
    separations: tuple[float, ...] = (1.0, 2.5, 4.0, 6.0)
    bases: tuple[BasisSpec, ...] = (BasisSpec(12, 12, 12), BasisSpec(16, 16, 16), BasisSpec(20, 20, 20),
                                    BasisSpec(24, 28, 24), BasisSpec(32, 36, 32))
    well: StepWell = field(default_factory=lambda: StepWell(36.79, 0.2))
    oracle_separations: tuple[float, ...] = (0.0, 2.0, 3.0, 4.0)
    oracle_cutoffs: tuple[OracleCutoffs, ...] = (OracleCutoffs(60, 20), OracleCutoffs(100, 20),
                                                 OracleCutoffs(160, 24))
    n_levels: int = 3
    out: Path = Path("results")


def basis_table(cfg: Config) -> list[tuple]:
    rows = []
    for a in cfg.a_values:
        for dz in cfg.separations:
            ref = levels(inverse_length(a), dz, cfg.bases[-1], cfg.n_levels)
            for spec in cfg.bases:
                e = levels(inverse_length(a), dz, spec, cfg.n_levels)
                rows.append((a, dz, spec.n_s, spec.l_max, spec.n_max, spec.dimension,
                             *e, float(np.max(np.abs(e - ref)))))
    return rows


def oracle_table(cfg: Config) -> list[tuple]:
    rows = []
    for dz in cfg.oracle_separations:
        for cut in cfg.oracle_cutoffs:
            t0 = time.perf_counter()
            e = exact_spectrum(cfg.well, dz, cut, cfg.n_levels)
            rows.append((dz, cut.n_max, cut.l_max, cut.oscillator_length(dz), *e, time.perf_counter() - t0))
    return rows


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--skip-oracle", action="store_true")
    args = p.parse_args()
    cfg = Config(out=args.out)
    levels_cols = tuple(f"E{i}" for i in range(cfg.n_levels))
    path = write_csv(cfg.out / "basis_convergence.csv",
                     ("a", "dz", "n_s", "l_max", "n_max", "dim") + levels_cols + ("max_dev_from_largest",),
                     basis_table(cfg))
    print(f"wrote {path}")
    if not args.skip_oracle:
        path = write_csv(cfg.out / "oracle_convergence.csv",
                         ("dz", "n_max", "l_max", "length") + levels_cols + ("seconds",), oracle_table(cfg))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
