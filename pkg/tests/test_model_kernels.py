"""
模型坐标、boxcar 分解与正则化核
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import (
    ConfigurationError,
    InconclusiveDecayError,
    QuadratureBudgetExceededError,
)
from app.schemas.kernels import Cutoff, KernelConfig, KernelFamily, KernelSpec
from app.services import model_kernels as mk
from app.services.sampling import make_rng

X_SAMPLE = (0.5, -0.25, 0.1, 0.0)
ORIGIN = (0.0, 0.0, 0.0)


def spec(family=KernelFamily.E1, **kw):
    return KernelSpec(family=family, epsilon=kw.pop("epsilon", 0.1), **kw)


# -- 坐标 ------------------------------------------------------------------

def test_chart_report():
    report = mk.chart_report(make_rng(1))
    assert report.symplectic and report.involution
    assert report.max_round_trip_error == 0
    assert report.example_x == [1, 1, 0, 0]
    assert report.example_xi == [1, 0, 0, 0]


def test_chart_requires_unimodular_matrix():
    with pytest.raises(ConfigurationError):
        mk.ModelChart(np.diag([2, 1, 1, 1]))


def test_chart_pairing_invariant():
    chart = mk.ModelChart()
    rng = make_rng(3)
    for _ in range(20):
        z, eta = rng.integers(-50, 50, size=4), rng.integers(-50, 50, size=4)
        x, xi = chart.forward(z, eta)
        assert int(x @ xi) == int(z @ eta)
    assert chart.is_symplectic()


# -- boxcar ----------------------------------------------------------------

def test_boxcar_values():
    assert_allclose(mk.boxcar_closed_form(1.0, np.pi), 4j / np.pi, rtol=1e-14)
    assert_allclose(mk.boxcar_factor(1.0, np.pi), 4j / np.pi, rtol=1e-14)
    assert mk.boxcar_closed_form(1.5, 0.0) == 3.0
    assert mk.boxcar_factor(1.5, 0.0) == 3.0


def test_boxcar_split_sums_to_closed_form():
    cutoff = Cutoff()
    x0, xi = np.meshgrid(np.linspace(0.1, 2.0, 20), np.linspace(-20.0, 20.0, 81), indexing="ij")
    osc, const, smooth = mk.boxcar_split(x0, xi, cutoff)
    assert np.max(np.abs(osc + const + smooth - mk.boxcar_closed_form(x0, xi))) < 1e-12


def test_boxcar_split_supports():
    cutoff = Cutoff()
    xi = np.linspace(-3.0, 3.0, 121)
    osc, const, smooth = mk.boxcar_split(1.0, xi, cutoff)
    outer = np.abs(xi) > 1.0
    inner = np.abs(xi) <= 0.5
    assert np.all(smooth[outer] == 0)
    assert np.all(osc[inner] == 0) and np.all(const[inner] == 0)


def test_boxcar_report_with_quadrature():
    report = mk.boxcar_report([0.5, 1.0], [-5.0, 0.0, 5.0], quadrature=True)
    assert report.passed
    assert report.n_points == 6
    assert report.max_quadrature_residual < 1e-8
    assert report.model_dump(by_alias=True)["pass"] is True


def test_cutoff_validation():
    with pytest.raises(ValueError):
        Cutoff(r0=1.0, r1=0.5)
    values = mk.cutoff_value(Cutoff(), [0.0, 0.5, 0.75, 1.0, 2.0])
    assert_allclose(values, [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-15)


# -- 核求值 ----------------------------------------------------------------

def test_e1_matches_gaussian():
    s = spec()
    for d in [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.3, -0.4, 0.5)]:
        x = (1.0, *d)
        assert_allclose(mk.kernel_eval(s, x, ORIGIN).real, mk.gaussian_e1(0.1, x, ORIGIN), rtol=1e-10)
        assert abs(mk.kernel_eval(s, x, ORIGIN).imag) < 1e-10 * mk.gaussian_e1(0.1, x, ORIGIN)


def test_e1_off_diagonal_ratio():
    s = spec()
    on = mk.kernel_eval(s, (1.0, 0.0, 0.0, 0.0), ORIGIN)
    off = mk.kernel_eval(s, (1.0, 1.0, 0.0, 0.0), ORIGIN)
    assert_allclose(abs(off) / abs(on), np.exp(-1.0 / (4 * 0.1)), rtol=1e-9)


def test_e2_is_shifted_e1():
    e1, e2 = spec(KernelFamily.E1), spec(KernelFamily.E2)
    x0, x1 = X_SAMPLE[0], X_SAMPLE[1]
    shifted = (x0, x1 + x0, *X_SAMPLE[2:])
    assert_allclose(mk.kernel_eval(e2, X_SAMPLE, ORIGIN), mk.kernel_eval(e1, shifted, ORIGIN), rtol=1e-12)


def test_e3_terms_sum_to_kernel():
    s = spec(KernelFamily.E3)
    value = mk.kernel_eval(s, X_SAMPLE, ORIGIN)
    terms = mk.e3_terms(s, X_SAMPLE, ORIGIN)
    assert abs(terms.total - value) < 1e-10 * abs(value)


def test_e3_matches_direct_integral():
    s = spec(KernelFamily.E3)
    assert_allclose(mk.e3_direct(s, X_SAMPLE, ORIGIN), mk.kernel_eval(s, X_SAMPLE, ORIGIN), rtol=1e-8)


def test_peak_grows_as_epsilon_shrinks():
    peaks = [abs(mk.kernel_eval(spec(epsilon=eps), (1.0, 0.0, 0.0, 0.0), ORIGIN)) for eps in (0.2, 0.1, 0.05)]
    assert peaks[0] < peaks[1] < peaks[2]


def test_budget_exceeded():
    with pytest.raises(QuadratureBudgetExceededError):
        mk.kernel_eval(spec(n_nodes=200), X_SAMPLE, ORIGIN)


def test_bad_point_shapes():
    with pytest.raises(ConfigurationError):
        mk.kernel_eval(spec(), (1.0, 0.0, 0.0), ORIGIN)


def test_kernel_sweep_rows():
    rows = mk.kernel_sweep(spec(), 1.0, np.linspace(-3.0, 3.0, 61))
    assert len(rows) == 61
    assert all(len(row) == len(mk.KERNEL_SWEEP_HEADER) for row in rows)
    assert rows[30][1] == pytest.approx(0.0, abs=1e-12)


# -- 衰减探测 ---------------------------------------------------------------

@pytest.fixture(scope="module")
def decay_cases():
    return mk.standard_decay_cases(KernelConfig()).cases


@pytest.mark.slow
def test_decay_classification(decay_cases):
    assert decay_cases["E1_diagonal_e1"].classification == "singular"
    assert decay_cases["E1_off_diagonal_e1"].classification == "rapid"
    assert decay_cases["E2_shifted_support"].classification == "singular"
    assert decay_cases["E2_unshifted"].classification == "rapid"
    assert decay_cases["E3_endpoint"].classification == "singular"
    assert decay_cases["E3_midpoint"].classification == "rapid"


@pytest.mark.slow
def test_decay_endpoint_slope_and_cost(decay_cases):
    endpoint = decay_cases["E3_endpoint"]
    assert -1.5 < endpoint.slope < -0.5
    assert endpoint.evaluations == 128_320
    assert all(report.evaluations <= 1_000_000 for report in decay_cases.values())


def test_decay_budget():
    with pytest.raises(InconclusiveDecayError):
        mk.decay_probe(spec(budget=1000), (1.0, 0.0, 0.0, 0.0), ORIGIN, (1.0, 0.0, 0.0), [20.0, 40.0])


def test_decay_zero_direction():
    with pytest.raises(ConfigurationError):
        mk.decay_probe(spec(), (1.0, 0.0, 0.0, 0.0), ORIGIN, (0.0, 0.0, 0.0), [20.0, 40.0])
