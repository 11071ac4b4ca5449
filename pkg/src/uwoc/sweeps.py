"""Figure-family sweeps producing deterministic CSV tables."""
from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import backhaul, channel, metrics, montecarlo
from .config import pon_config, scenario
from .specfun import SpecfunError

log = logging.getLogger(__name__)

NAN = float("nan")


@dataclass
class Table:
    header: list[str]
    rows: list[list] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def axis_values(ax: dict) -> list[float]:
    if ax["scale"] == "log":
        v = np.geomspace(ax["start"], ax["stop"], int(ax["points"]))
    else:
        v = np.linspace(ax["start"], ax["stop"], int(ax["points"]))
    return [float(x) for x in v]


@dataclass(frozen=True)
class _Task:
    prefix: tuple
    fn: Callable[[], object]


def _run(tasks: list[_Task], header: list[str], threads: int) -> Table:
    """Evaluate tasks in a pool; rows keep input order, failures become NaN."""
    table = Table(header)
    width = len(header) - len(tasks[0].prefix) if tasks else 0

    def call(t: _Task):
        try:
            out = t.fn()
            vals = list(out) if isinstance(out, (list, tuple)) else [out]
            return vals, None
        except (ArithmeticError, ValueError, SpecfunError) as exc:
            return [NAN] * width, f"{t.prefix}: {type(exc).__name__}: {exc}"

    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(call, tasks))
    else:
        results = [call(t) for t in tasks]
    for t, (vals, err) in zip(tasks, results):
        table.rows.append(list(t.prefix) + vals)
        if err:
            log.error(err)
            table.errors.append(err)
    return table


def _pivot(long: Table) -> Table:
    """(x, series, value) rows -> one row per x with one column per series."""
    xs, series, cells = [], [], {}
    for x, name, val in long.rows:
        if x not in cells:
            xs.append(x)
            cells[x] = {}
        if name not in series:
            series.append(name)
        cells[x][name] = val
    wide = Table([long.header[0]] + series, errors=long.errors)
    wide.rows = [[x] + [cells[x].get(name, NAN) for name in series] for x in xs]
    return wide


def _gth(cfg) -> float:
    return 10 ** (cfg["link"]["gamma_th_db"] / 10)


def _g(db: float) -> float:
    return 10 ** (db / 10)


# ---------------------------------------------------------------- figures


def op_vs_snr(cfg, threads):
    sw = cfg["sweep"]
    sc = scenario(cfg)
    gth = _gth(cfg)
    m = cfg["megg"]
    pe = channel.PointingError(sc.xi_sq_oris, sc.A0_oris)
    tasks = []
    for x in axis_values(sw["axis"]):
        tasks.append(_Task((x, "direct"), lambda x=x: metrics.cdf(sc.direct, _g(x), gth)))
        for n in sw["N_values"]:
            tasks.append(_Task((x, f"oris_N{n}"), lambda x=x, n=n: metrics.cdf(sc.oris(n), _g(x), gth)))
        for n in sw["N_values"]:
            model = channel.megg_lookup(m["bubble_level"], m["gradient"], n)
            tasks.append(_Task((x, f"megg_oris_N{n}"),
                               lambda x=x, model=model: metrics.op_megg(gth, model, m["r"], _g(x), pe)))
    return _pivot(_run(tasks, ["gamma_bar_db", "series", "op"], threads))


def op_combining(cfg, threads):
    sw = cfg["sweep"]
    sc = scenario(cfg)
    gth = _gth(cfg)
    tasks = []
    for x in axis_values(sw["axis"]):
        tasks.append(_Task((x, "direct"), lambda x=x: metrics.cdf(sc.direct, _g(x), gth)))
        for n in sw["N_values"]:
            o = sc.oris(n)
            tasks.append(_Task((x, f"oris_N{n}"), lambda x=x, o=o: metrics.cdf(o, _g(x), gth)))
            tasks.append(_Task((x, f"sc_N{n}"), lambda x=x, o=o: metrics.op_sc(
                metrics._clamp(metrics.cdf(sc.direct, _g(x), gth), "OP"),
                metrics._clamp(metrics.cdf(o, _g(x), gth), "OP"))))
            tasks.append(_Task((x, f"mrc_N{n}"), lambda x=x, o=o: metrics.op_mrc(_g(x), gth, sc.direct, o)))
    return _pivot(_run(tasks, ["gamma_bar_db", "series", "op"], threads))


def _mc_config(name: str, cfg) -> montecarlo.OrisConfig:
    if name == "passive_random":
        return montecarlo.PassiveRandom()
    if name == "passive_ideal":
        return montecarlo.PassiveIdeal()
    if name == "passive_controlled":
        return montecarlo.PassiveControlled(cfg["mc"]["sigma_phase"])
    if name == "passive_quantized":
        return montecarlo.PassiveQuantized(int(cfg["mc"]["bits"]))
    a = cfg["active"]
    return montecarlo.ActiveControlled(a["gain_db"], a["sigma_phase"], a["p_noise_dbw"])


def op_configs_mc(cfg, threads):
    sw = cfg["sweep"]
    sc = scenario(cfg)
    gth = _gth(cfg)
    grid = tuple(axis_values(sw["axis"]))
    table = Table(["gamma_bar_db", "config", "N", "trials", "op_hat", "op_lo", "op_hi"])
    for name in sw["mc_configs"]:
        conf = _mc_config(name, cfg)
        for n in sw["N_values"]:
            plan = montecarlo.SimPlan(int(cfg["mc"]["trials"]), int(cfg["seed"]), n, sc.alpha_hop, sc.beta_hop,
                                      sc.xi_sq_oris, sc.A0_oris, grid)
            for x, est in zip(grid, montecarlo.op_curve(conf, plan, gth, threads)):
                table.rows.append([x, name, n, plan.trials, est.value, est.lo, est.hi])
    return table


def ber_vs_snr(cfg, threads):
    sw = cfg["sweep"]
    sc = scenario(cfg)
    tasks = []
    for x in axis_values(sw["axis"]):
        for name in sw["modulations"]:
            mod = metrics.ModulationSpec.by_name(name)
            tasks.append(_Task((x, f"{mod.name}_direct"), lambda x=x, mod=mod: metrics.ber(mod, sc.direct, _g(x))))
            for n in sw["N_values"]:
                tasks.append(_Task((x, f"{mod.name}_oris_N{n}"),
                                   lambda x=x, mod=mod, n=n: metrics.ber(mod, sc.oris(n), _g(x))))
    return _pivot(_run(tasks, ["gamma_bar_db", "series", "ber"], threads))


def _length_metric(cfg, metric: str, L_sd: float, n: int | None, gb: float):
    """Metric for the direct link (n None) or an O-RIS link with L_sr = L_rd = L_sd / 2."""
    sc = scenario(cfg, L_sr=L_sd / 2, L_rd=L_sd / 2, L_D=L_sd)
    p = sc.direct if n is None else sc.oris(n)
    if metric == "ber":
        return metrics.ber(metrics.ModulationSpec.bpsk(), p, gb)
    if metric == "capacity":
        return metrics.capacity(p, gb, metrics.DetectionMode(cfg["sweep"]["detection"][0]))
    return metrics.cdf(p, gb, _gth(cfg))


def ber_vs_length(cfg, threads):
    sw = cfg["sweep"]
    gb = _g(sw["gamma_bar_db"])
    tasks = []
    for x in axis_values(sw["axis"]):
        tasks.append(_Task((x, "direct"), lambda x=x: _length_metric(cfg, "ber", x, None, gb)))
        for n in sw["N_values"]:
            tasks.append(_Task((x, f"oris_N{n}"), lambda x=x, n=n: _length_metric(cfg, "ber", x, n, gb)))
    return _pivot(_run(tasks, ["L_sd", "series", "ber"], threads))


def _jitters(cfg, count: int) -> list[tuple[float, float]]:
    js = cfg["sweep"]["jitter_series"]
    if js is None:
        return [(cfg["link"]["sigma_theta"], cfg["link"]["sigma_phi"])] * count
    if len(js) == 1:
        return [tuple(js[0])] * count
    if len(js) != count:
        raise ValueError(f"sweep.jitter_series has {len(js)} entries, expected 1 or {count}")
    return [tuple(p) for p in js]


def ber_vs_placement(cfg, threads):
    sw = cfg["sweep"]
    link = cfg["link"]
    xs = axis_values(sw["axis"])
    jit = _jitters(cfg, len(xs))
    L_sd = sw["L_sd"]
    bpsk = metrics.ModulationSpec.bpsk()
    tasks = []
    for water in sw["water_types"]:
        c = channel.WATER_TYPES[water]
        for x, (st, sp) in zip(xs, jit):
            def point(x=x, st=st, sp=sp, c=c, n=None):
                L_sr = x * L_sd
                if not 0 < L_sr < L_sd:
                    raise ValueError(f"placement ratio {x!r} must lie in (0, 1)")
                sc = scenario(cfg, L_sr=L_sr, L_rd=L_sd - L_sr, L_D=L_sd, sigma_theta=st, sigma_phi=sp)
                geom = channel.LinkGeometry(L_sr, L_sd - L_sr, L_sd, c)
                if n is None:
                    snr = channel.SnrContext(link["P_t_db"], link["sigma_n2_direct_dbm"], channel.path_loss(geom, "direct"))
                    return metrics.ber(bpsk, sc.direct, snr.gamma_bar)
                snr = channel.SnrContext(link["P_t_db"], link["sigma_n2_oris_dbm"], channel.path_loss(geom, "cascaded"))
                return metrics.ber(bpsk, sc.oris(n), snr.gamma_bar)

            tasks.append(_Task((x, f"{water}_direct"), point))
            for n in sw["N_values"]:
                tasks.append(_Task((x, f"{water}_oris_N{n}"), lambda point=point, n=n: point(n=n)))
    return _pivot(_run(tasks, ["ratio_sr_sd", "series", "ber"], threads))


def _jitter_sets(cfg) -> list[tuple[float, float]]:
    js = cfg["sweep"]["jitter_series"]
    if js is None:
        return [(cfg["link"]["sigma_theta"], cfg["link"]["sigma_phi"])]
    return [tuple(p) for p in js]


def soc_vs_snr(cfg, threads):
    sw = cfg["sweep"]
    gth = _gth(cfg)
    tasks = []
    sets = [(j, scenario(cfg, sigma_theta=st, sigma_phi=sp)) for j, (st, sp) in enumerate(_jitter_sets(cfg))]
    for x in axis_values(sw["axis"]):
        for j, sc in sets:
            for n in sw["N_values"]:
                tasks.append(_Task((x, f"N{n}_jitter{j}"), lambda x=x, sc=sc, n=n: metrics.soc(_g(x), sc.oris(n), gth)))
    return _pivot(_run(tasks, ["gamma_bar_db", "series", "soc"], threads))


def do_vs_snr(cfg, threads):
    sw = cfg["sweep"]
    gth = _gth(cfg)
    sets = [(j, scenario(cfg, sigma_theta=st, sigma_phi=sp)) for j, (st, sp) in enumerate(_jitter_sets(cfg))]
    tasks = []
    for x in axis_values(sw["axis"]):
        for j, sc in sets:
            for n in sw["N_values"]:
                o = sc.oris(n)
                tasks.append(_Task((x, f"N{n}_jitter{j}"), lambda x=x, o=o: metrics.diversity_order(_g(x), o, gth)))
                tasks.append(_Task((x, f"ado_N{n}_jitter{j}"), lambda o=o: metrics.ado(o.A, o.B, o.xi_sq)))
    return _pivot(_run(tasks, ["gamma_bar_db", "series", "do"], threads))


def capacity_vs_snr(cfg, threads):
    sw = cfg["sweep"]
    sc = scenario(cfg)
    tasks = []
    for x in axis_values(sw["axis"]):
        for det in sw["detection"]:
            d = metrics.DetectionMode(det)
            tasks.append(_Task((x, f"direct_{det}"), lambda x=x, d=d: metrics.capacity(sc.direct, _g(x), d)))
            for n in sw["N_values"]:
                tasks.append(_Task((x, f"oris_N{n}_{det}"),
                                   lambda x=x, d=d, n=n: metrics.capacity(sc.oris(n), _g(x), d)))
    return _pivot(_run(tasks, ["gamma_bar_db", "series", "capacity"], threads))


def surface_3d(cfg, threads):
    sw = cfg["sweep"]
    metric = sw["metric"]
    Ns = sorted({max(1, int(round(v))) for v in axis_values(sw["axis2"])})
    gth = _gth(cfg)
    tasks = []
    if metric in ("do", "soc"):
        sc = scenario(cfg)
        fn = metrics.diversity_order if metric == "do" else metrics.soc
        for x in axis_values(sw["axis"]):
            for n in Ns:
                tasks.append(_Task((x, n), lambda x=x, n=n: fn(_g(x), sc.oris(n), gth)))
        return _run(tasks, ["gamma_bar_db", "N", metric], threads)
    gb = _g(sw["gamma_bar_db"])
    for x in axis_values(sw["axis"]):
        for n in Ns:
            tasks.append(_Task((x, n), lambda x=x, n=n: _length_metric(cfg, metric, x, n, gb)))
    return _run(tasks, ["L_sd", "N", metric], threads)


def pon_delay_throughput(cfg, threads):
    sw = cfg["sweep"]
    pon = pon_config(cfg)
    Ts = sorted({max(1, int(round(v))) for v in axis_values(sw["axis"])})
    table = Table(list(backhaul.BACKHAUL_COLUMNS))
    table.rows = [list(r) for r in backhaul.backhaul_rows(Ts, pon)]
    return table


def total_capacity_switching(cfg, threads):
    sw = cfg["sweep"]
    u, v, T = cfg["uoap"]["u"], cfg["uoap"]["v"], cfg["uoap"]["T"]
    cth, bw = cfg["uoap"]["c_threshold"], cfg["uoap"]["bandwidth_hz"]
    pon = pon_config(cfg)
    det = metrics.DetectionMode("IMDD" if "IMDD" in sw["detection"] else sw["detection"][0])
    sc = scenario(cfg)
    tasks = []

    def total(per_uoap):
        return metrics.capacity_total(T, per_uoap, pon, bw)

    for x in axis_values(sw["axis"]):
        cd = lambda x=x: metrics.capacity(sc.direct, _g(x), det)
        tasks.append(_Task((x, "direct_only"),
                           lambda cd=cd: total(metrics.capacity_uoap([cd()] * u, []))))
        for n in sw["N_values"]:
            co = lambda x=x, n=n: metrics.capacity(sc.oris(n), _g(x), det)

            def switched(cd=cd, co=co, mode="threshold"):
                c_d, c_o = cd(), co()
                sel = metrics.hard_switch(c_d, c_o, cth, mode)
                return total(metrics.capacity_uoap([sel] * u, [c_o] * v))

            tasks.append(_Task((x, f"hard_switch_N{n}"), switched))
            tasks.append(_Task((x, f"optimal_N{n}"), lambda s=switched: s(mode="optimal")))
    return _pivot(_run(tasks, ["gamma_bar_db", "series", "c_total_gbps"], threads))


FIGURE_FUNCS = {
    "op_vs_snr": op_vs_snr,
    "op_combining": op_combining,
    "op_configs_mc": op_configs_mc,
    "ber_vs_snr": ber_vs_snr,
    "ber_vs_length": ber_vs_length,
    "ber_vs_placement": ber_vs_placement,
    "soc_vs_snr": soc_vs_snr,
    "do_vs_snr": do_vs_snr,
    "capacity_vs_snr": capacity_vs_snr,
    "surface_3d": surface_3d,
    "pon_delay_throughput": pon_delay_throughput,
    "total_capacity_switching": total_capacity_switching,
}


def run_figure(cfg: dict, threads: int = 1) -> Table:
    return FIGURE_FUNCS[cfg["sweep"]["figure"]](cfg, max(1, threads))
