import math

import numpy as np
import pytest
from scipy import integrate, special

from uwoc import channel as ch
from uwoc.metrics import DirectParams, OrisParams, cdf


def log_quad(f, lo=1e-14, hi=1e10, **kw):
    """Integral of f over (lo, hi) with the substitution u = ln(x)."""
    pts = np.linspace(math.log(lo), math.log(hi), 41)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        v, _ = integrate.quad(lambda u: f(math.exp(u)) * math.exp(u), a, b,
                              epsabs=0.0, epsrel=1e-11, limit=200, **kw)
        total += v
    return total


# ---------------------------------------------------------------- geometry / path loss


def test_path_loss_clear_water():
    g = ch.LinkGeometry(c_att=0.0, L_D=500.0)
    assert ch.path_loss(g) == 1.0
    assert ch.path_loss(g, "cascaded") == 1.0


def test_path_loss_table_values():
    g = ch.LinkGeometry(c_att=0.15, L_D=120.0)
    assert ch.path_loss(g) == pytest.approx(1.523e-8, rel=1e-3)
    assert ch.path_loss(g) == pytest.approx(math.exp(-18), rel=1e-15)


def test_path_loss_additive():
    casc = ch.LinkGeometry(L_sr=60.0, L_rd=60.0, L_D=77.0, c_att=0.15)
    direct = ch.LinkGeometry(L_D=120.0, c_att=0.15)
    assert ch.path_loss(casc, "cascaded") == pytest.approx(ch.path_loss(direct), rel=1e-14)


def test_path_loss_bad_path():
    with pytest.raises(ValueError):
        ch.path_loss(ch.LinkGeometry(), "sideways")


def test_water_types():
    assert ch.LinkGeometry.for_water("coastal_ocean").c_att == 0.305
    with pytest.raises(ValueError):
        ch.LinkGeometry(L_D=0.0)


def test_snr_context():
    ctx = ch.SnrContext(P_t_db=0.0, sigma_n2_dbm=-100.0, h_l=1.0)
    assert ctx.gamma_bar == pytest.approx(1e13, rel=1e-12)
    with pytest.raises(ValueError):
        ch.SnrContext(0.0, 0.0, 0.0).gamma_bar


# ---------------------------------------------------------------- aggregation


def test_aggregate_single():
    assert ch.aggregate_gg(2.5, 1.7, 1) == (2.5, 1.7, 1.0)


def test_aggregate_independent():
    A, B, om = ch.aggregate_gg(2.5, 1.7, 16)
    assert (A, B, om) == (16 * 2.5, 16 * 1.7, 16.0)
    A, B, _ = ch.aggregate_gg(2.5, 1.7, 16, np.eye(16))
    assert (A, B) == pytest.approx((40.0, 16 * 1.7), rel=1e-15)


def test_aggregate_fully_correlated():
    A, B, _ = ch.aggregate_gg(2.5, 1.7, 4, np.ones((4, 4)))
    assert (A, B) == pytest.approx((2.5, 1.7), rel=1e-15)


@pytest.mark.parametrize("rho", [np.ones((3, 3)), np.full((4, 4), 1.5), np.triu(np.ones((4, 4)))])
def test_aggregate_bad_matrix(rho):
    with pytest.raises(ValueError):
        ch.aggregate_gg(2.0, 2.0, 4, rho)


# ---------------------------------------------------------------- fading densities


@pytest.mark.parametrize("A,B", [(2.0, 2.0), (4.1, 1.3), (40.0, 29.0), (0.8, 3.3)])
def test_gg_pdf_normalized_unit_mean(A, B):
    f = lambda h: ch.pdf_fading_gg(h, A, B)
    assert log_quad(f) == pytest.approx(1.0, abs=1e-6)
    assert log_quad(lambda h: h * f(h)) == pytest.approx(1.0, abs=1e-6)


def test_gg_pdf_with_scale():
    f = lambda h: ch.pdf_fading_gg(h, 8.0, 6.0, Omega=4.0)
    assert log_quad(f) == pytest.approx(1.0, abs=1e-6)
    assert log_quad(lambda h: h * f(h)) == pytest.approx(4.0, rel=1e-6)


def test_gg_pdf_equal_shapes_is_k0_form():
    a = 3.0
    h = 0.7
    expect = 2 * a ** (2 * a) / special.gamma(a) ** 2 * h ** (a - 1) * special.kv(0, 2 * a * math.sqrt(h))
    assert ch.pdf_fading_gg(h, a, a) == pytest.approx(expect, rel=1e-12)


def test_gg_pdf_equal_shapes_histogram():
    a = 3.0
    rng = np.random.default_rng(11)
    n = 10_000_000
    h = rng.gamma(a, 1 / a, n) * rng.gamma(a, 1 / a, n)
    lo, hi = 0.95, 1.05
    frac = np.count_nonzero((h > lo) & (h <= hi)) / n
    expect, _ = integrate.quad(lambda x: ch.pdf_fading_gg(x, a, a), lo, hi)
    assert frac == pytest.approx(expect, rel=1e-2)


def test_pointing_pdf_normalized():
    pe = ch.PointingError(2.3, 0.6)
    v, _ = integrate.quad(lambda x: ch.pdf_pointing(x, pe), 0, 0.6)
    assert v == pytest.approx(1.0, abs=1e-10)
    assert ch.pdf_pointing(0.61, pe) == 0.0
    assert pe.moment(1) == pytest.approx(integrate.quad(lambda x: x * ch.pdf_pointing(x, pe), 0, 0.6)[0], rel=1e-10)


# ---------------------------------------------------------------- SNR densities

DIRECT = dict(alpha=2.39, xi_sq=2.34, A0=0.45, gamma_bar=10.0)
ORIS = dict(A=8.8, B=7.5, xi_sq=2.17, A0=0.45, N=4, gamma_bar=10.0)


def test_snr_pdf_direct_normalized():
    f = lambda g: ch.pdf_snr_direct(g, **DIRECT)
    assert log_quad(f) == pytest.approx(1.0, abs=1e-6)


def test_snr_pdf_oris_normalized():
    f = lambda g: ch.pdf_snr_oris(g, **ORIS)
    assert log_quad(f) == pytest.approx(1.0, abs=1e-6)


GRID = np.logspace(-3, 1.5, 10)


@pytest.mark.parametrize("gth", GRID)
def test_direct_cdf_matches_pdf_integral(gth):
    params = DirectParams(DIRECT["alpha"], DIRECT["xi_sq"], DIRECT["A0"])
    num = log_quad(lambda g: ch.pdf_snr_direct(g, **DIRECT), lo=1e-16, hi=gth)
    assert cdf(params, DIRECT["gamma_bar"], gth) == pytest.approx(num, rel=1e-5)


@pytest.mark.parametrize("gth", GRID)
def test_oris_cdf_matches_pdf_integral(gth):
    p = ORIS
    params = OrisParams(p["A"], p["B"], p["xi_sq"], p["A0"], p["N"])
    num = log_quad(lambda g: ch.pdf_snr_oris(g, **p), lo=1e-16, hi=gth)
    assert cdf(params, p["gamma_bar"], gth) == pytest.approx(num, rel=1e-5)


def _bin_check(samples, pdf, edges, tol):
    n = samples.size
    counts, _ = np.histogram(samples, edges)
    for (lo, hi), k in zip(zip(edges[:-1], edges[1:]), counts):
        expect, _ = integrate.quad(pdf, lo, hi, epsrel=1e-9)
        assert k / n == pytest.approx(expect, rel=tol), (lo, hi)


def test_snr_pdf_direct_histogram():
    p = DIRECT
    rng = np.random.default_rng(5)
    n = 4_000_000
    ha = rng.gamma(p["alpha"], 1 / p["alpha"], n)
    hp = p["A0"] * rng.random(n) ** (1 / p["xi_sq"])
    gam = p["gamma_bar"] * (ha * hp) ** 2
    _bin_check(gam, lambda g: ch.pdf_snr_direct(g, **p), [0.05, 0.2, 0.5, 1.0, 2.0, 4.0], 2e-2)


def test_snr_pdf_oris_single_cascade_histogram():
    p = dict(ORIS, A=2.2, B=1.9, N=1)
    rng = np.random.default_rng(6)
    n = 4_000_000
    hgg = rng.gamma(p["A"], 1 / p["A"], n) * rng.gamma(p["B"], 1 / p["B"], n)
    hp = p["A0"] * rng.random(n) ** (1 / p["xi_sq"])
    gam = p["gamma_bar"] * (hgg * hp) ** 2
    _bin_check(gam, lambda g: ch.pdf_snr_oris(g, **p), [0.05, 0.2, 0.5, 1.0, 2.0, 4.0], 2e-2)


@pytest.mark.parametrize("params", [
    DirectParams(2.39, 2.34, 0.45),
    OrisParams(8.8, 7.5, 2.17, 0.45, 4),
    OrisParams(35.3, 29.9, 0.9, 0.8, 16),
])
def test_cdf_monotone_and_limits(params):
    # the coherent O-RIS sum scales the SNR by N^2, so the grid reaches far past gamma_bar
    gs = np.logspace(-6, 7, 53)
    vals = np.array([cdf(params, 10.0, g) for g in gs])
    assert vals[0] < 1e-3
    assert vals[-1] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(vals) >= -1e-12)


# ---------------------------------------------------------------- pointing


def pointing_oracle(D_R, w0, lam, L, sigma):
    w_z = w0 * math.sqrt(1 + (lam * L / (math.pi * w0 ** 2)) ** 2)
    v = math.sqrt(math.pi) * D_R / (2 * math.sqrt(2) * w_z)
    weq2 = w_z ** 2 * math.sqrt(math.pi) * special.erf(v) / (2 * v * math.exp(-v ** 2))
    return weq2 / (4 * sigma ** 2), special.erf(v) ** 2


def test_pointing_table_inputs():
    kw = dict(D_R=0.05, w0=0.01, wavelength=532e-9, L=135.0)
    pe = ch.pointing_from_jitter(sigma_theta=2e-3, sigma_phi=1.5e-3, L_sr=95.0, L_rd=40.0, **kw)
    sigma = math.sqrt((2e-3 * 95) ** 2 + (1.5e-3 * 40) ** 2)
    xi_sq, A0 = pointing_oracle(0.05, 0.01, 532e-9, 135.0, sigma)
    assert pe.xi_sq == pytest.approx(xi_sq, rel=1e-12)
    assert pe.A0 == pytest.approx(A0, rel=1e-12)


def test_pointing_direct_jitter():
    pe = ch.pointing_from_jitter(D_R=0.05, w0=0.01, wavelength=532e-9, L=120.0, sigma_s=0.03)
    xi_sq, A0 = pointing_oracle(0.05, 0.01, 532e-9, 120.0, 0.03)
    assert (pe.xi_sq, pe.A0) == pytest.approx((xi_sq, A0), rel=1e-12)


def test_pointing_limits():
    loose = ch.pointing_from_jitter(D_R=0.05, w0=0.01, wavelength=532e-9, L=10.0, sigma_s=1e3)
    assert loose.xi_sq < 1e-6
    with pytest.warns(RuntimeWarning, match="cap"):
        wide = ch.pointing_from_jitter(D_R=5.0, w0=0.01, wavelength=532e-9, L=10.0, sigma_s=0.01)
    assert wide.A0 == pytest.approx(1.0, abs=1e-12)
    assert wide.xi_sq == ch.XI_SQ_CAP


def test_pointing_zero_jitter_warns():
    with pytest.warns(RuntimeWarning):
        pe = ch.pointing_from_jitter(D_R=0.05, w0=0.01, wavelength=532e-9, L=10.0, sigma_s=0.0)
    assert pe.xi_sq == ch.XI_SQ_CAP


def test_pointing_needs_jitter():
    with pytest.raises(ValueError):
        ch.pointing_from_jitter(D_R=0.05, w0=0.01, wavelength=532e-9, L=10.0, sigma_theta=1e-3)
    with pytest.raises(ValueError):
        ch.PointingError(1.0, 1.2)


# ---------------------------------------------------------------- mEGG


def test_megg_table_row_scintillation():
    m = ch.megg_lookup(2.4, 0.05)
    assert (m.omega, m.lam, m.a, m.b, m.c) == (0.2130, 0.3291, 1.4299, 1.1817, 17.1984)
    assert m.scintillation == pytest.approx(0.1484, rel=1e-2)


def test_megg_table_rows():
    rows = ch.load_megg_table()
    assert len(rows) == 8
    for r in rows:
        assert r["model"].scintillation == pytest.approx(r["sigma2_fit"], rel=5e-2)


def test_megg_lookup_missing():
    with pytest.raises(KeyError):
        ch.megg_lookup(9.9, 0.05)


def test_megg_moment_by_quadrature():
    m = ch.megg_lookup(4.7, 0.10)

    def pdf(x):
        expo = math.exp(-x / m.lam) / m.lam
        gg = (m.c / (m.b ** (m.a * m.c) * special.gamma(m.a)) * x ** (m.a * m.c - 1)
              * math.exp(-((x / m.b) ** m.c)))
        return m.omega * expo + (1 - m.omega) * gg

    for k in (1, 2):
        # the generalized-Gamma part is sharply peaked near x = b
        num = sum(integrate.quad(lambda x: x ** k * pdf(x), a, b, limit=200)[0]
                  for a, b in [(0, 1.5), (1.5, 1.9), (1.9, 60)])
        assert m.moment(k) == pytest.approx(num, rel=1e-7)


@pytest.mark.parametrize("r", [1, 2])
def test_megg_cdf_limits_and_monotone(r):
    m = ch.megg_lookup(2.4, 0.05, N=4)
    gs = np.logspace(-8, 4, 37)
    vals = np.array([ch.megg_cdf(g, m, r, 1.0) for g in gs])
    assert vals[0] < 1e-6
    assert vals[-1] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(vals) >= -1e-12)


@pytest.mark.parametrize("r", [1, 2])
def test_megg_pdf_integrates_to_cdf(r):
    m = ch.megg_lookup(4.7, 0.05, N=2)
    for g in (0.3, 1.0, 3.0):
        num = log_quad(lambda x: ch.megg_pdf(x, m, r, 2.0), lo=1e-14, hi=g)
        assert ch.megg_cdf(g, m, r, 2.0) == pytest.approx(num, rel=1e-6)


def test_megg_bad_detection():
    with pytest.raises(ValueError):
        ch.megg_cdf(1.0, ch.megg_lookup(2.4, 0.05), 3, 1.0)


# ---------------------------------------------------------------- sum of G-G moments


@pytest.mark.parametrize("al,be,N", [(2.2, 1.9, 4), (4.7, 3.1, 16)])
def test_sum_moments(al, be, N):
    rng = np.random.default_rng(3)
    n = 400_000
    s = (rng.gamma(al, 1 / al, (n, N)) * rng.gamma(be, 1 / be, (n, N))).sum(axis=1)
    var = (1 / al + 1 / be + 1 / (al * be)) * N
    assert s.mean() == pytest.approx(N, abs=5 * math.sqrt(var / n))
    # sampling sd of the variance estimate is ~ var * sqrt((kurtosis - 1) / n); 3% is generous
    assert s.var() == pytest.approx(var, rel=3e-2)
