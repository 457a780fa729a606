#!/usr/bin/env python3
"""Regenerate the bundled example data under data/.

The synthetic panel is produced by the package's own simulator from the
built-in coefficient preset, so every CLI command is demonstrable without
any confidential source data. Regeneration is deterministic: the seed below
is the one documented in data/README.md.
"""

from __future__ import annotations

import os

from baselcost import PAPER_PRESET, simulate_panel, write_panel

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, os.pardir, "data")

PANEL_SEED = 20140622
N_BANKS = 22
N_YEARS = 5
NOISE_SD = 0.05


def main() -> None:
    ds = simulate_panel(PAPER_PRESET, N_BANKS, N_YEARS, NOISE_SD, seed=PANEL_SEED)
    out = os.path.join(DATA, "synthetic_panel.csv")
    write_panel(ds, out)
    print(f"wrote {out} ({ds.n_entities} banks x {ds.n_periods} years, seed {PANEL_SEED})")


if __name__ == "__main__":
    main()
