"""Recompute the published outage anchors and write a JSON manifest of deviations.

    python scripts/reproduce_paper_numbers.py [out.json]
"""
import json
import math
import sys
import time

import numpy as np
from scipy import optimize

from uwoc import __version__
from uwoc import config as cfgmod
from uwoc import metrics as mt
from uwoc.metrics import DirectParams, OrisParams

CASES = {
    "otops_40dB": {
        "config": {"turbulence": {"model": "otops"}, "link": {"L_sr": 60.0, "L_rd": 40.0, "L_D": 90.0}},
        "gamma_bar_db": 40.0,
        "published": {"direct": 2.43e-2, "N4": 8.36e-4, "N16": 2.73e-5},
    },
    "default_100dB": {
        "config": {},
        "gamma_bar_db": 100.0,
        "published": {"direct": 1.93e-3, "N4": 9.63e-4, "N64": 1.304e-4},
    },
}
TOLERANCE = 0.25


def _ops(sc, xi_d, a0_d, xi_o, a0_o, gb, gth, labels):
    out = {}
    for lab in labels:
        if lab == "direct":
            out[lab] = mt.cdf(DirectParams(sc.direct.alpha, xi_d, a0_d), gb, gth)
        else:
            out[lab] = mt.cdf(OrisParams.from_hops(sc.alpha_hop, sc.beta_hop, int(lab[1:]), xi_o, a0_o), gb, gth)
    return out


def pointing_fit(sc, gb, gth, published):
    """Shared (xi^2, A0) minimizing log-OP misfit, turbulence shapes held fixed."""
    labels = list(published)
    target = np.log([published[k] for k in labels])

    def resid(x):
        xi, a0 = math.exp(x[0]), 1 / (1 + math.exp(-x[1]))
        ops = _ops(sc, xi, a0, xi, a0, gb, gth, labels)
        return np.log([max(ops[k], 1e-300) for k in labels]) - target

    best = None
    for x0 in ([0.0, 0.0], [1.0, 1.0], [-1.0, 2.0]):
        try:
            r = optimize.least_squares(resid, x0, x_scale=1.0)
        except (ArithmeticError, ValueError):
            continue
        if best is None or r.cost < best.cost:
            best = r
    xi, a0 = math.exp(best.x[0]), 1 / (1 + math.exp(-best.x[1]))
    ops = _ops(sc, xi, a0, xi, a0, gb, gth, labels)
    return {"xi_sq": xi, "A0": a0, "fitted_op": ops,
            "log_residuals": dict(zip(labels, map(float, resid(best.x))))}


def run_case(name, case):
    t0 = time.perf_counter()
    cfg = cfgmod.normalize(case["config"])
    sc = cfgmod.scenario(cfg)
    gth = 10 ** (cfg["link"]["gamma_th_db"] / 10)
    gb = 10 ** (case["gamma_bar_db"] / 10)
    pub = case["published"]
    ours = _ops(sc, sc.direct.xi_sq, sc.direct.A0, sc.xi_sq_oris, sc.A0_oris, gb, gth, list(pub))
    dev = {k: ours[k] / pub[k] - 1 for k in pub}
    return {
        "case": name,
        "gamma_bar_db": case["gamma_bar_db"],
        "gamma_th_db": cfg["link"]["gamma_th_db"],
        "config_hash": cfgmod.config_hash(cfg),
        "link": {"alpha_direct": sc.direct.alpha, "xi_sq_direct": sc.direct.xi_sq, "A0_direct": sc.direct.A0,
                 "alpha_hop": sc.alpha_hop, "beta_hop": sc.beta_hop, "xi_sq_oris": sc.xi_sq_oris,
                 "A0_oris": sc.A0_oris},
        "computed": ours,
        "published": pub,
        "relative_deviation": dev,
        "within_tolerance": all(abs(v) <= TOLERANCE for v in dev.values()),
        "pointing_fit": pointing_fit(sc, gb, gth, pub),
        "wall_time_s": time.perf_counter() - t0,
    }


def main(argv):
    out = argv[1] if len(argv) > 1 else "anchor_numbers.json"
    results = [run_case(k, v) for k, v in CASES.items()]
    manifest = {
        "tool_version": __version__,
        "tolerance": TOLERANCE,
        "results": results,
        "explanation": (
            "Turbulence shapes and pointing parameters follow the documented pipelines with the default "
            "inputs. The published values are far above ours at every anchor. The pointing_fit block gives "
            "the shared (xi^2, A0) that would best match the published numbers if the turbulence shapes are "
            "held fixed. A large remaining residual means no single pointing setting can explain the gap."
        ),
    }
    with open(out, "w") as fh:
        json.dump(manifest, fh, indent=2)
    for r in results:
        flag = "ok" if r["within_tolerance"] else "DEVIATES"
        rows = ", ".join(f"{k} {r['computed'][k]:.3g}/{r['published'][k]:.3g}" for k in r["published"])
        print(f"{r['case']:<18} {flag:<9} {rows}")
    print(f"wrote {out}")
    return 0 if all(r["within_tolerance"] for r in results) else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
