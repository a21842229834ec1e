"""Run every shipped scenario and write its CSV into one directory.

    python scripts/reproduce_figures.py [outdir]

Plotting is left to the reader; each CSV starts with the configuration that
produced it.
"""

import sys
from pathlib import Path

from ringqfc.config import parse_config
from ringqfc.regress import scenario_dir
from ringqfc.scenarios import run_scenario


def main(outdir="figures"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for conf in sorted(scenario_dir().glob("*.conf")):
        cfg = parse_config(conf.read_text(encoding="utf-8"))
        table = run_scenario(cfg, str(out / f"{cfg.scenario}.csv"))
        summary = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                            for k, v in table.results.items())
        print(f"{cfg.scenario:18s} {len(table.rows):5d} rows  {summary}")


if __name__ == "__main__":
    main(*sys.argv[1:])
