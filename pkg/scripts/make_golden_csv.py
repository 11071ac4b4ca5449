"""Regenerate the per-figure regression CSVs under tests/golden/."""
import json
import sys
from pathlib import Path

from uwoc import cli
from uwoc.config import FIGURES

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"

SNR = {"start": 10, "stop": 50, "points": 3, "scale": "lin"}
SMALL = {"start": 1, "stop": 8, "points": 3, "scale": "lin"}
AXES = {
    "ber_vs_length": {"start": 20, "stop": 80, "points": 3, "scale": "lin"},
    "ber_vs_placement": {"start": 0.2, "stop": 0.8, "points": 3, "scale": "lin"},
    "surface_3d": {"start": 20, "stop": 80, "points": 3, "scale": "lin"},
    "pon_delay_throughput": {"start": 1, "stop": 16, "points": 4, "scale": "lin"},
    "op_combining": {"start": 10, "stop": 30, "points": 2, "scale": "lin"},
}


def config_for(fig):
    sweep = {"figure": fig, "axis": AXES.get(fig, SNR), "axis2": SMALL}
    if fig == "op_combining":
        sweep["N_values"] = [4]
    return {"seed": 5, "mc": {"trials": 20000}, "sweep": sweep}


def main():
    GOLDEN.mkdir(exist_ok=True)
    for fig in FIGURES:
        cfg_path = GOLDEN / f"{fig}.json"
        cfg_path.write_text(json.dumps(config_for(fig), indent=1) + "\n")
        code = cli.main(["sweep", str(cfg_path), "--out", str(GOLDEN / f"{fig}.csv")])
        (GOLDEN / f"{fig}.manifest.json").unlink()
        print(fig, code)
        if code:
            sys.exit(code)


if __name__ == "__main__":
    main()
