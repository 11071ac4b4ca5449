"""Run configuration: defaults, validation with field paths, and scenario construction."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any

from . import channel, turbulence
from .backhaul import PONConfig
from .metrics import DirectParams, OrisParams

FIGURES = (
    "op_vs_snr", "op_combining", "op_configs_mc", "ber_vs_snr", "ber_vs_length", "ber_vs_placement",
    "soc_vs_snr", "do_vs_snr", "capacity_vs_snr", "surface_3d", "pon_delay_throughput",
    "total_capacity_switching",
)
TURBULENCE_MODELS = ("strong", "otops", "fixed")
SURFACE_METRICS = ("op", "ber", "capacity", "do", "soc")
MC_CONFIGS = ("passive_random", "passive_ideal", "passive_controlled", "passive_quantized", "active_controlled")

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "link": {
        "gamma_th_db": 15.0,
        "L_sr": 95.0,
        "L_rd": 40.0,
        "L_D": 120.0,
        "c_att": 0.15,
        "water_type": None,
        "wavelength": 532e-9,
        "w0": 0.01,
        "D_R": 0.05,
        "sigma_theta": 2e-3,
        "sigma_phi": 1.5e-3,
        "sigma_s": 0.2,
        "P_t_db": 20.0,
        "sigma_n2_oris_dbm": -100.0,
        "sigma_n2_direct_dbm": -95.5,
        "pointing_direct": None,
        "pointing_oris": None,
    },
    "turbulence": {
        "model": "strong",
        "strong": {"epsilon_1": 0.03, "epsilon_2": 0.0005, "chi_T": 1e-5, "omega": -2.5, "nu": 7.5e-5,
                   "A_T": 1.863e-2, "A_S": 1.9e-4, "A_TS": 9.41e-3},
        "otops": {"T_mean": 20.0, "S_A": 30.0, "pressure": 0.0, "H": -0.2, "alpha_T": 2.5e-4,
                  "beta_S": 7.4e-4, "Pr": 7.0, "Sc": 700.0, "beta0": 0.72, "epsilon": 0.03,
                  "chi_T": 1e-5, "nu": 1e-6},
        "fixed": {"alpha_direct": 2.0, "alpha": 2.0, "beta": 2.0},
    },
    "megg": {"bubble_level": 2.4, "gradient": 0.05, "r": 2},
    "active": {"gain_db": 7.0, "p_noise_dbw": -113.0, "sigma_phase": math.pi / 36},
    "mc": {"trials": 100000, "sigma_phase": math.pi / 6, "bits": 3},
    "uoap": {"u": 3, "v": 2, "T": 2, "c_threshold": 2.0, "bandwidth_hz": 100e6},
    "pon": {k: v for k, v in PONConfig().__dict__.items()},
    "sweep": {
        "figure": "op_vs_snr",
        "axis": {"start": 0.0, "stop": 60.0, "points": 13, "scale": "lin"},
        "axis2": {"start": 1.0, "stop": 32.0, "points": 6, "scale": "lin"},
        "N_values": [4, 16],
        "modulations": ["BPSK", "QPSK", "16-QAM", "BFSK"],
        "water_types": ["pure_sea", "clear_ocean", "coastal_ocean"],
        "jitter_series": None,
        "mc_configs": list(MC_CONFIGS),
        "metric": "op",
        "gamma_bar_db": 25.0,
        "detection": ["HD", "IMDD"],
        "L_sd": 100.0,
    },
}


class ConfigError(ValueError):
    """Raised with the list of (field path, message) violations."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{p}: {m}" for p, m in problems))


def _merge(base: dict, over: dict, path: str, problems: list) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        p = f"{path}.{k}" if path else k
        if k not in base:
            problems.append((p, "unknown key"))
            continue
        if isinstance(base[k], dict) and base[k] and k not in ("pointing_direct", "pointing_oris"):
            if not isinstance(v, dict):
                problems.append((p, "expected an object"))
                continue
            out[k] = _merge(base[k], v, p, problems)
        else:
            out[k] = v
    return out


def _num(cfg, path, lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False, integer=False, problems=None):
    node = cfg
    for part in path.split("."):
        node = node[part]
    ok = isinstance(node, (int, float)) and not isinstance(node, bool) and math.isfinite(node)
    if ok and integer:
        ok = float(node).is_integer()
    if ok:
        ok = (node > lo if lo_open else node >= lo) and (node < hi if hi_open else node <= hi)
    if not ok:
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        kind = "integer" if integer else "number"
        problems.append((path, f"expected {kind} in {lb}{lo}, {hi}{rb}, got {node!r}"))


def normalize(raw: dict) -> dict:
    """Fill defaults and check ranges; raises ConfigError listing every violation."""
    problems: list[tuple[str, str]] = []
    if not isinstance(raw, dict):
        raise ConfigError([("", "top level must be an object")])
    cfg = _merge(DEFAULTS, raw, "", problems)
    if problems:
        raise ConfigError(problems)
    P = problems
    _num(cfg, "seed", 0, 2**64 - 1, integer=True, problems=P)
    for key in ("L_sr", "L_rd", "L_D", "wavelength", "w0", "D_R"):
        _num(cfg, f"link.{key}", 0, math.inf, lo_open=True, problems=P)
    _num(cfg, "link.c_att", 0, math.inf, problems=P)
    for key in ("sigma_theta", "sigma_phi", "sigma_s"):
        _num(cfg, f"link.{key}", 0, math.inf, problems=P)
    for key in ("gamma_th_db", "P_t_db", "sigma_n2_oris_dbm", "sigma_n2_direct_dbm"):
        _num(cfg, f"link.{key}", problems=P)
    wt = cfg["link"]["water_type"]
    if wt is not None:
        if wt not in channel.WATER_TYPES:
            P.append(("link.water_type", f"expected one of {sorted(channel.WATER_TYPES)}"))
        else:
            cfg["link"]["c_att"] = channel.WATER_TYPES[wt]
    for which in ("pointing_direct", "pointing_oris"):
        pe = cfg["link"][which]
        if pe is not None:
            if not isinstance(pe, dict) or set(pe) != {"xi_sq", "A0"}:
                P.append((f"link.{which}", "expected {\"xi_sq\": >0, \"A0\": (0, 1]} or null"))
            else:
                _num(cfg, f"link.{which}.xi_sq", 0, math.inf, lo_open=True, problems=P)
                _num(cfg, f"link.{which}.A0", 0, 1, lo_open=True, problems=P)
    t = cfg["turbulence"]
    if t["model"] not in TURBULENCE_MODELS:
        P.append(("turbulence.model", f"expected one of {list(TURBULENCE_MODELS)}"))
    for key in ("epsilon_1", "epsilon_2", "chi_T", "nu", "A_T", "A_S", "A_TS"):
        _num(cfg, f"turbulence.strong.{key}", 0, math.inf, lo_open=True, problems=P)
    _num(cfg, "turbulence.strong.omega", -5, 0, hi_open=True, problems=P)
    for key in ("alpha_T", "beta_S", "Pr", "Sc", "beta0", "epsilon", "nu"):
        _num(cfg, f"turbulence.otops.{key}", 0, math.inf, lo_open=True, problems=P)
    _num(cfg, "turbulence.otops.chi_T", 0, math.inf, problems=P)
    _num(cfg, "turbulence.otops.H", problems=P)
    if cfg["turbulence"]["otops"]["H"] == 0:
        P.append(("turbulence.otops.H", "must be non-zero"))
    for key in ("alpha_direct", "alpha", "beta"):
        _num(cfg, f"turbulence.fixed.{key}", 0, math.inf, lo_open=True, problems=P)
    _num(cfg, "megg.r", 1, 2, integer=True, problems=P)
    try:
        channel.megg_lookup(cfg["megg"]["bubble_level"], cfg["megg"]["gradient"])
    except (KeyError, TypeError):
        P.append(("megg", "no EGG fit for this bubble_level / gradient pair"))
    _num(cfg, "active.gain_db", 0, math.inf, lo_open=True, problems=P)
    _num(cfg, "active.sigma_phase", 0, math.inf, problems=P)
    _num(cfg, "active.p_noise_dbw", problems=P)
    _num(cfg, "mc.trials", 1, math.inf, integer=True, problems=P)
    _num(cfg, "mc.sigma_phase", 0, math.inf, problems=P)
    _num(cfg, "mc.bits", 1, 16, integer=True, problems=P)
    for key in ("u", "v", "T"):
        _num(cfg, f"uoap.{key}", 0 if key != "T" else 1, math.inf, integer=True, problems=P)
    _num(cfg, "uoap.c_threshold", problems=P)
    _num(cfg, "uoap.bandwidth_hz", 0, math.inf, lo_open=True, problems=P)
    u, v = cfg["uoap"]["u"], cfg["uoap"]["v"]
    if isinstance(u, int) and isinstance(v, int) and u + v > 5:
        P.append(("uoap", f"u + v = {u + v} exceeds 5 transceivers"))
    for key, val in cfg["pon"].items():
        _num(cfg, f"pon.{key}", 0, 1 if key == "eta" else math.inf, lo_open=True, problems=P)
    s = cfg["sweep"]
    if s["figure"] not in FIGURES:
        P.append(("sweep.figure", f"expected one of {list(FIGURES)}"))
    for ax in ("axis", "axis2"):
        a = s[ax]
        if not isinstance(a, dict) or set(a) != {"start", "stop", "points", "scale"}:
            P.append((f"sweep.{ax}", "expected start, stop, points, scale"))
            continue
        _num(cfg, f"sweep.{ax}.start", problems=P)
        _num(cfg, f"sweep.{ax}.stop", problems=P)
        _num(cfg, f"sweep.{ax}.points", 2, 100000, integer=True, problems=P)
        if a["scale"] not in ("lin", "log"):
            P.append((f"sweep.{ax}.scale", "expected 'lin' or 'log'"))
        elif a["scale"] == "log" and not (isinstance(a["start"], (int, float)) and isinstance(a["stop"], (int, float))
                                          and a["start"] > 0 and a["stop"] > 0):
            P.append((f"sweep.{ax}", "log scale needs positive start and stop"))
    if not isinstance(s["N_values"], list) or not s["N_values"] or not all(
            isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in s["N_values"]):
        P.append(("sweep.N_values", "expected a non-empty list of integers >= 1"))
    from .metrics import ModulationSpec
    for i, name in enumerate(s["modulations"]):
        try:
            ModulationSpec.by_name(name)
        except (ValueError, TypeError, AttributeError):
            P.append((f"sweep.modulations[{i}]", f"unknown modulation {name!r}"))
    for i, w in enumerate(s["water_types"]):
        if w not in channel.WATER_TYPES:
            P.append((f"sweep.water_types[{i}]", f"expected one of {sorted(channel.WATER_TYPES)}"))
    js = s["jitter_series"]
    if js is not None:
        if not isinstance(js, list) or not all(isinstance(p, list) and len(p) == 2 for p in js):
            P.append(("sweep.jitter_series", "expected a list of [sigma_theta, sigma_phi] pairs"))
        elif any(not isinstance(x, (int, float)) or x < 0 for p in js for x in p):
            P.append(("sweep.jitter_series", "jitters must be non-negative numbers"))
    for i, c in enumerate(s["mc_configs"]):
        if c not in MC_CONFIGS:
            P.append((f"sweep.mc_configs[{i}]", f"expected one of {list(MC_CONFIGS)}"))
    if s["metric"] not in SURFACE_METRICS:
        P.append(("sweep.metric", f"expected one of {list(SURFACE_METRICS)}"))
    for i, d in enumerate(s["detection"]):
        if d not in ("HD", "IMDD"):
            P.append((f"sweep.detection[{i}]", "expected 'HD' or 'IMDD'"))
    _num(cfg, "sweep.gamma_bar_db", problems=P)
    _num(cfg, "sweep.L_sd", 0, math.inf, lo_open=True, problems=P)
    if P:
        raise ConfigError(P)
    return cfg


def load(path) -> dict:
    text = Path(path).read_text()
    if not text.strip():
        return normalize({})
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"invalid JSON: {exc}")]) from exc
    return normalize(raw)


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------- scenario


@lru_cache(maxsize=512)
def _strong_shape(params: tuple, wavelength: float, L1: float, eps1: float, L2: float | None, eps2: float | None):
    chi, omega, nu, A_T, A_S, A_TS = params
    k = 2 * math.pi / wavelength

    def sig(L, eps):
        p = turbulence.OceanSpectrumParams(eps, chi, omega, nu, A_T, A_S, A_TS)
        return turbulence.rytov_plane(turbulence.cn2_strong(p, wavelength, L), k, L)

    s1 = sig(L1, eps1)
    s2 = s1 if L2 is None else sig(L2, eps2)
    return turbulence.gg_from_rytov(s1, s2)


@lru_cache(maxsize=512)
def _otops_shape(env_items: tuple, wavelength: float, W0: float, L: float):
    env = turbulence.OTOPSEnv(**dict(env_items))
    shape, _ = turbulence.otops_pipeline(env, turbulence.BeamGeometry(wavelength, W0, L))
    return shape


@dataclass(frozen=True)
class Scenario:
    """Resolved link parameters for one sweep point."""

    direct: DirectParams
    alpha_hop: float
    beta_hop: float
    xi_sq_oris: float
    A0_oris: float

    def oris(self, N: int) -> OrisParams:
        return OrisParams.from_hops(self.alpha_hop, self.beta_hop, N, self.xi_sq_oris, self.A0_oris)


def turbulence_shapes(cfg: dict, L_sr: float, L_rd: float, L_D: float) -> tuple[float, float, float]:
    """(alpha_direct, alpha_hop, beta_hop)."""
    t = cfg["turbulence"]
    lam = cfg["link"]["wavelength"]
    if t["model"] == "fixed":
        f = t["fixed"]
        return f["alpha_direct"], f["alpha"], f["beta"]
    if t["model"] == "strong":
        s = t["strong"]
        key = (s["chi_T"], s["omega"], s["nu"], s["A_T"], s["A_S"], s["A_TS"])
        d = _strong_shape(key, lam, L_D, s["epsilon_1"], None, None)
        c = _strong_shape(key, lam, L_sr, s["epsilon_1"], L_rd, s["epsilon_2"])
        return d.alpha, c.alpha, c.beta
    env = tuple(sorted(t["otops"].items()))
    w0 = cfg["link"]["w0"]
    return (_otops_shape(env, lam, w0, L_D).alpha, _otops_shape(env, lam, w0, L_sr).alpha,
            _otops_shape(env, lam, w0, L_rd).beta)


def scenario(cfg: dict, **over) -> Scenario:
    """Build link parameters; keyword overrides replace ``link`` entries."""
    link = {**cfg["link"], **over}
    a_d, a_h, b_h = turbulence_shapes(cfg, link["L_sr"], link["L_rd"], link["L_D"])
    if link["pointing_direct"] is not None:
        pd = channel.PointingError(link["pointing_direct"]["xi_sq"], link["pointing_direct"]["A0"])
    else:
        pd = channel.pointing_from_jitter(link["D_R"], link["w0"], link["wavelength"], link["L_D"],
                                          sigma_s=link["sigma_s"])
    if link["pointing_oris"] is not None:
        po = channel.PointingError(link["pointing_oris"]["xi_sq"], link["pointing_oris"]["A0"])
    else:
        po = channel.pointing_from_jitter(link["D_R"], link["w0"], link["wavelength"],
                                          link["L_sr"] + link["L_rd"], sigma_theta=link["sigma_theta"],
                                          sigma_phi=link["sigma_phi"], L_sr=link["L_sr"], L_rd=link["L_rd"])
    return Scenario(DirectParams(a_d, pd.xi_sq, pd.A0), a_h, b_h, po.xi_sq, po.A0)


def pon_config(cfg: dict) -> PONConfig:
    return PONConfig(**cfg["pon"])
