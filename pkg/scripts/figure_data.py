"""Spectrum data sets: fixed a = -0.5 / +0.5 with first-order curves, and the
step well by three methods (reference, self-consistent, constant a)."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from tisr import cli


@dataclass
class Config:
    out: Path = Path("results")
    fixed_a_grid: str = "0:4:0.02"
    well_grid: str = "0:4:0.1"
    branches_fixed_a: int = 6
    branches_well: int = 2


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    cfg = Config(out=p.parse_args().out)
    runs = [
        ["--name", "fig2_negative", "fig2", "--sign", "negative", "--dz", cfg.fixed_a_grid,
         "--branches", str(cfg.branches_fixed_a)],
        ["--name", "fig2_positive", "fig2", "--sign", "positive", "--dz", cfg.fixed_a_grid,
         "--branches", str(cfg.branches_fixed_a)],
        ["--name", "fig3", "fig3", "--dz", cfg.well_grid, "--branches", str(cfg.branches_well)],
    ]
    for argv in runs:
        code = cli.main(["--out", str(cfg.out)] + argv)
        if code:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
