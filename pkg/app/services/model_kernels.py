"""
模型坐标下的核函数检验

包含坐标变换 x = A z (及余切映射 ξ = A^{-T} η)、boxcar 的 Fourier 恒等式、
三类核 E1/E2/E3 的 Gauss 正则化求值，以及沿余切方向的衰减探测。
所有符号在桌面尺度下取为 1。
"""

import logging
from functools import lru_cache
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.linalg import null_space

from app.core.exceptions import (
    ConfigurationError,
    InconclusiveDecayError,
    QuadratureBudgetExceededError,
)
from app.schemas.kernels import (
    BoxcarReport,
    ChartReport,
    Cutoff,
    DecayReport,
    DecaySummary,
    KernelConfig,
    KernelFamily,
    KernelSpec,
)

logger = logging.getLogger(__name__)

KERNEL_SWEEP_HEADER = ("x0", "x1", "x2", "x3", "y1", "y2", "y3", "Re", "Im", "epsilon")

# x⁰ = z¹, x¹ = z¹ − z², x² = z³, x³ = z⁴
CHART_MATRIX = np.array([
    [1, 0, 0, 0],
    [1, -1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
], dtype=np.int64)


class ModelChart:
    """整数线性坐标变换及其余切提升"""

    def __init__(self, matrix: Optional[np.ndarray] = None):
        self.matrix = np.array(CHART_MATRIX if matrix is None else matrix, dtype=np.int64)
        self.inverse = np.rint(np.linalg.inv(self.matrix)).astype(np.int64)
        if not np.array_equal(self.matrix @ self.inverse, np.eye(4, dtype=np.int64)):
            raise ConfigurationError("坐标变换矩阵必须是幺模整数矩阵")

    def forward(self, z, eta) -> Tuple[np.ndarray, np.ndarray]:
        """(z, η) ↦ (x, ξ)，x = A z，ξ = A^{-T} η"""
        return self.matrix @ np.asarray(z), self.inverse.T @ np.asarray(eta)

    def backward(self, x, xi) -> Tuple[np.ndarray, np.ndarray]:
        return self.inverse @ np.asarray(x), self.matrix.T @ np.asarray(xi)

    def symplectic_matrix(self) -> np.ndarray:
        m = np.zeros((8, 8), dtype=np.int64)
        m[:4, :4] = self.matrix
        m[4:, 4:] = self.inverse.T
        return m

    def is_symplectic(self) -> bool:
        """MᵀJM = J (整数运算)"""
        j = np.zeros((8, 8), dtype=np.int64)
        j[:4, 4:] = np.eye(4, dtype=np.int64)
        j[4:, :4] = -np.eye(4, dtype=np.int64)
        m = self.symplectic_matrix()
        return bool(np.array_equal(m.T @ j @ m, j))

    def is_involution(self) -> bool:
        return bool(np.array_equal(self.matrix @ self.matrix, np.eye(4, dtype=np.int64)))


def chart_report(rng: np.random.Generator, n_points: int = 100) -> ChartReport:
    chart = ModelChart()
    worst = 0
    for _ in range(n_points):
        z = rng.integers(-1000, 1000, size=4)
        eta = rng.integers(-1000, 1000, size=4)
        z2, eta2 = chart.backward(*chart.forward(z, eta))
        worst = max(worst, int(np.max(np.abs(z2 - z))), int(np.max(np.abs(eta2 - eta))))
    x, xi = chart.forward([1, 0, 0, 0], [1, 0, 0, 0])
    return ChartReport(
        symplectic=chart.is_symplectic(),
        involution=chart.is_involution(),
        max_round_trip_error=worst,
        example_x=[int(v) for v in x],
        example_xi=[int(v) for v in xi],
    )


def cutoff_value(cutoff: Cutoff, xi) -> np.ndarray:
    """χ(ξ)，五次 smoothstep 过渡"""
    t = np.clip((cutoff.r1 - np.abs(np.asarray(xi, dtype=float))) / (cutoff.r1 - cutoff.r0), 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def boxcar_factor(x0, xi1):
    """∫_{−x⁰}^{x⁰} e^{i(r+x⁰)ξ₁/2} dr = 2x⁰ e^{ix⁰ξ₁/2} sinc(x⁰ξ₁/2π)"""
    x0 = np.asarray(x0, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    return 2.0 * x0 * np.exp(0.5j * x0 * xi1) * np.sinc(x0 * xi1 / (2.0 * np.pi))


def boxcar_closed_form(x0, xi1):
    """2(e^{ix⁰ξ₁} − 1)/(iξ₁)，ξ₁ = 0 处取 2x⁰"""
    x0 = np.asarray(x0, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    safe = np.where(xi1 == 0.0, 1.0, xi1)
    return np.where(xi1 == 0.0, 2.0 * x0 + 0j, 2.0 * (np.exp(1j * x0 * safe) - 1.0) / (1j * safe))


def reduced_amplitude(xi1, cutoff: Cutoff):
    """(1 − χ(ξ₁))/(iξ₁)，χ = 1 处为 0"""
    xi1 = np.asarray(xi1, dtype=float)
    chi = cutoff_value(cutoff, xi1)
    safe = np.where(chi == 1.0, 1.0, xi1)
    return np.where(chi == 1.0, 0j, (1.0 - chi) / (1j * safe))


def boxcar_split(x0, xi1, cutoff: Cutoff):
    """
    boxcar 因子的三项分解

    Returns:
        (osc, const, smooth)：
        osc = 2(1−χ)e^{ix⁰ξ₁}/(iξ₁)，const = −2(1−χ)/(iξ₁)，smooth = χ·boxcar_factor
    """
    x0 = np.asarray(x0, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    amp = reduced_amplitude(xi1, cutoff)
    osc = 2.0 * np.exp(1j * x0 * xi1) * amp
    const = -2.0 * amp
    smooth = cutoff_value(cutoff, xi1) * boxcar_factor(x0, xi1)
    return osc, const, smooth


def boxcar_quadrature(x0: float, xi1: float) -> complex:
    """scipy quad 直接积分 (实部、虚部分别计算)"""
    def phase(r):
        return 0.5 * (r + x0) * xi1

    re, _ = quad(lambda r: np.cos(phase(r)), -x0, x0, epsabs=1e-14, epsrel=1e-13, limit=200)
    im, _ = quad(lambda r: np.sin(phase(r)), -x0, x0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return complex(re, im)


def boxcar_report(
    x0_grid: Sequence[float],
    xi_grid: Sequence[float],
    cutoff: Optional[Cutoff] = None,
    quadrature: bool = True,
) -> BoxcarReport:
    """在 (x⁰, ξ₁) 网格上检查分解之和与闭式、与数值积分的残差"""
    cutoff = cutoff or Cutoff()
    x0, xi = np.meshgrid(np.asarray(x0_grid, dtype=float), np.asarray(xi_grid, dtype=float), indexing="ij")
    osc, const, smooth = boxcar_split(x0, xi, cutoff)
    split_res = float(np.max(np.abs(osc + const + smooth - boxcar_closed_form(x0, xi))))
    quad_res = None
    if quadrature:
        values = boxcar_factor(x0, xi)
        quad_res = max(
            abs(values[idx] - boxcar_quadrature(float(x0[idx]), float(xi[idx])))
            for idx in np.ndindex(x0.shape)
        )
    passed = split_res < 1e-12 and (quad_res is None or quad_res < 1e-8)
    logger.info(f"boxcar 检查: 分解残差 {split_res:.3e}, 积分残差 {quad_res}, 通过 = {passed}")
    return BoxcarReport(
        n_points=int(x0.size),
        max_split_residual=split_res,
        max_quadrature_residual=None if quad_res is None else float(quad_res),
        passed=passed,
    )


@lru_cache(maxsize=32)
def _hermite(n: int):
    return hermgauss(n)


@lru_cache(maxsize=32)
def _legendre(n: int):
    return leggauss(n)


def _hermite_nodes(spec: KernelSpec):
    if spec.n_nodes ** 3 > spec.budget:
        raise QuadratureBudgetExceededError(f"{spec.n_nodes}³ 个节点超过预算 {spec.budget}")
    v, w = _hermite(spec.n_nodes)
    return v / np.sqrt(spec.epsilon), w


def family_amplitude(family: KernelFamily, x0, zeta1, cutoff: Cutoff):
    """单位符号下各核族对 ζ₁ 的振幅 (E2 的相位 x⁰ζ₁ 并入振幅)"""
    zeta1 = np.asarray(zeta1, dtype=float)
    if family == KernelFamily.E1:
        return np.ones_like(zeta1) + 0j
    if family == KernelFamily.E2:
        return np.exp(1j * np.asarray(x0, dtype=float) * zeta1)
    return boxcar_factor(x0, zeta1)


def _evaluate(spec: KernelSpec, xs: np.ndarray, ys: np.ndarray, amplitude) -> np.ndarray:
    """
    ∫ e^{i(x′−y′)·ζ} a(x⁰, ζ₁) e^{−ε|ζ|²} dζ

    ζ = v/√ε 后权函数为 e^{−|v|²}，振幅只依赖 ζ₁，张量积分解为三个一维和。
    """
    zeta, w = _hermite_nodes(spec)
    d = xs[:, 1:] - ys
    amp = amplitude(xs[:, :1], zeta[None, :])
    s1 = np.sum(w * np.exp(1j * d[:, :1] * zeta) * amp, axis=1)
    s2 = np.sum(w * np.exp(1j * d[:, 1:2] * zeta), axis=1)
    s3 = np.sum(w * np.exp(1j * d[:, 2:3] * zeta), axis=1)
    return s1 * s2 * s3 / spec.epsilon ** 1.5


def _as_points(x, y) -> Tuple[np.ndarray, np.ndarray]:
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    ys = np.atleast_2d(np.asarray(y, dtype=float))
    if xs.shape[1] != 4 or ys.shape[1] != 3:
        raise ConfigurationError("x 需要 4 个分量, y′ 需要 3 个分量")
    return xs, ys


def kernel_eval_batch(spec: KernelSpec, xs, ys) -> np.ndarray:
    """批量求值，xs 形状 (M, 4)，ys 形状 (M, 3)"""
    xs, ys = _as_points(xs, ys)
    return _evaluate(spec, xs, ys, lambda x0, z: family_amplitude(spec.family, x0, z, spec.cutoff))


def kernel_eval(spec: KernelSpec, x: Sequence[float], y: Sequence[float]) -> complex:
    """
    正则化核 E_k(x, y′)

    Raises:
        QuadratureBudgetExceededError: n_nodes³ > budget
    """
    return complex(kernel_eval_batch(spec, x, y)[0])


def gaussian_e1(epsilon: float, x: Sequence[float], y: Sequence[float]) -> float:
    """E1 的解析值 (π/ε)^{3/2} e^{−|x′−y′|²/4ε}"""
    d = np.asarray(x, dtype=float)[1:] - np.asarray(y, dtype=float)
    return float((np.pi / epsilon) ** 1.5 * np.exp(-np.dot(d, d) / (4.0 * epsilon)))


class E3Terms(NamedTuple):
    """E3 的三项: const (C_{D₀} 型), osc (C_{D₀−D₁} 型), smooth (光滑余项)"""
    const: complex
    osc: complex
    smooth: complex

    @property
    def total(self) -> complex:
        return self.const + self.osc + self.smooth


def e3_terms(spec: KernelSpec, x: Sequence[float], y: Sequence[float]) -> E3Terms:
    """按 boxcar 分解把 E3 拆为 −2·E1[(1−χ)/iζ₁] + 2·E2[(1−χ)/iζ₁] + E1[χ·boxcar]"""
    xs, ys = _as_points(x, y)
    cutoff = spec.cutoff

    def const_amp(x0, z):
        return -2.0 * reduced_amplitude(z, cutoff) * np.ones_like(x0)

    def osc_amp(x0, z):
        return 2.0 * np.exp(1j * x0 * z) * reduced_amplitude(z, cutoff)

    def smooth_amp(x0, z):
        return cutoff_value(cutoff, z) * boxcar_factor(x0, z)

    return E3Terms(
        const=complex(_evaluate(spec, xs, ys, const_amp)[0]),
        osc=complex(_evaluate(spec, xs, ys, osc_amp)[0]),
        smooth=complex(_evaluate(spec, xs, ys, smooth_amp)[0]),
    )


def e3_direct(spec: KernelSpec, x: Sequence[float], y: Sequence[float], n_r: int = 64) -> complex:
    """E3 = 2∫₀^{x⁰} E1(x⁰, x¹+σ, x², x³; y′) dσ，σ 方向用 Gauss–Legendre"""
    x = np.asarray(x, dtype=float)
    nodes, weights = _legendre(n_r)
    sigma = 0.5 * x[0] * (nodes + 1.0)
    xs = np.repeat(x[None, :], n_r, axis=0)
    xs[:, 1] += sigma
    ys = np.repeat(np.asarray(y, dtype=float)[None, :], n_r, axis=0)
    e1 = kernel_eval_batch(spec.model_copy(update={"family": KernelFamily.E1}), xs, ys)
    return complex(x[0] * np.sum(weights * e1))


def kernel_sweep(spec: KernelSpec, x0: float, x1_grid: Iterable[float], y: Sequence[float] = (0.0, 0.0, 0.0)) -> List[list]:
    """沿 x¹ 扫描，CSV 行 (x0, x1, x2, x3, y1, y2, y3, Re, Im, epsilon)"""
    x1 = np.asarray(list(x1_grid), dtype=float)
    xs = np.zeros((x1.size, 4))
    xs[:, 0] = x0
    xs[:, 1] = x1
    ys = np.repeat(np.asarray(y, dtype=float)[None, :], x1.size, axis=0)
    values = kernel_eval_batch(spec, xs, ys)
    return [
        [*[float(v) for v in xs[k]], *[float(v) for v in ys[k]], float(values[k].real), float(values[k].imag), spec.epsilon]
        for k in range(x1.size)
    ]


def _transverse_basis(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """u⊥ 的正交基 (e_a, e_b)，且 e_b 的第一个分量为 0"""
    basis = null_space(u[None, :])
    head = basis[0, :]
    h = np.linalg.norm(head)
    if h < 1e-14:
        return basis[:, 0], basis[:, 1]
    return basis @ (head / h), basis @ (np.array([-head[1], head[0]]) / h)


def decay_probe(
    spec: KernelSpec,
    x: Sequence[float],
    y: Sequence[float],
    direction: Sequence[float],
    radii: Sequence[float],
    window: float = 0.15,
    n_window: int = 400,
    span: float = 8.0,
    level_floor: float = 1e-6,
    slope_threshold: float = -2.5,
) -> DecayReport:
    """
    沿余切方向的加窗 Fourier 衰减探测

    F(ω) = ∫ dτ W(τ) e^{−iωτ} K(x′ + τu)，W(τ) = e^{−τ²/2w²}。正则化只作用于与 u 正交的
    ζ 分量，因此沿 u 的衰减完全来自核本身；频率方向对 Ŵ 用 Gauss–Legendre (±span/w)，
    横向两维用 Gauss–Hermite，其中一维与振幅无关而单独求和。

    Args:
        spec: 核参数 (family, epsilon, n_nodes, budget)
        x: (x⁰, x¹, x², x³)
        y: y′
        direction: 余切方向 (3 维，自动归一化)
        radii: 频率 ω 列表
        window: 窗宽 w

    Returns:
        DecayReport：level = |F| / ((π/ε)·2π·max|a|)，singular 当且仅当
        max level ≥ level_floor 且 log-log 斜率 ≥ slope_threshold

    Raises:
        InconclusiveDecayError: 预算不足或有效 level 少于两个
    """
    u = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0.0:
        raise ConfigurationError("探测方向不能为零向量")
    u = u / norm
    n = spec.n_nodes
    cost = len(radii) * (n_window * n + n)
    if cost > spec.budget:
        raise InconclusiveDecayError(f"需要 {cost} 次求值, 超过预算 {spec.budget}")

    x = np.asarray(x, dtype=float)
    d = x[1:] - np.asarray(y, dtype=float)
    x0, eps = x[0], spec.epsilon
    e_a, e_b = _transverse_basis(u)

    t, wt = _hermite(n)
    t = t / np.sqrt(eps)
    nu, wnu = _legendre(n_window)
    half = span / window
    nu, wnu = nu * half, wnu * half
    hat = window * np.sqrt(2.0 * np.pi) * np.exp(-0.5 * (window * nu) ** 2)
    b_factor = np.sum(wt * np.exp(1j * np.dot(d, e_b) * t))
    amax = 2.0 * x0 if spec.family == KernelFamily.E3 else 1.0
    ref = (np.pi / eps) * 2.0 * np.pi * amax

    levels = []
    for omega in radii:
        s = float(omega) + nu
        zeta1 = s[:, None] * u[0] + t[None, :] * e_a[0]
        phase = np.dot(d, u) * s[:, None] + np.dot(d, e_a) * t[None, :]
        amp = family_amplitude(spec.family, x0, zeta1, spec.cutoff)
        total = np.sum((wnu * hat)[:, None] * wt[None, :] * np.exp(1j * phase) * amp) * b_factor / eps
        levels.append(float(abs(total) / ref))

    levels_arr = np.asarray(levels)
    radii_arr = np.asarray(radii, dtype=float)
    ok = np.isfinite(levels_arr) & (levels_arr > 0.0)
    if ok.sum() < 2:
        raise InconclusiveDecayError("有效 level 少于两个")
    slope = float(np.polyfit(np.log(radii_arr[ok]), np.log(levels_arr[ok]), 1)[0])
    singular = float(levels_arr[ok].max()) >= level_floor and slope >= slope_threshold
    classification = "singular" if singular else "rapid"
    logger.debug(f"{spec.family.value} 方向 {u.round(6).tolist()}: 斜率 {slope:.3f}, 判定 {classification}")
    return DecayReport(
        family=spec.family,
        direction=[float(v) for v in u],
        radii=[float(v) for v in radii],
        levels=levels,
        slope=slope,
        classification=classification,
        evaluations=cost,
    )


def standard_decay_cases(config: KernelConfig) -> DecaySummary:
    """E1/E2/E3 的标准探测组合"""
    x0 = config.decay_x0
    origin = (0.0, 0.0, 0.0)
    cases = {
        "E1_diagonal_e1": (KernelFamily.E1, (x0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
        "E1_diagonal_oblique": (KernelFamily.E1, (x0, 0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
        "E1_off_diagonal_e1": (KernelFamily.E1, (x0, 0.0, 2.0, 0.0), (1.0, 0.0, 0.0)),
        "E1_off_diagonal_e2": (KernelFamily.E1, (x0, 0.0, 2.0, 0.0), (0.0, 1.0, 0.0)),
        "E2_shifted_support": (KernelFamily.E2, (x0, -x0, 0.0, 0.0), (1.0, 0.0, 0.0)),
        "E2_unshifted": (KernelFamily.E2, (x0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
        "E3_endpoint": (KernelFamily.E3, (x0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
        "E3_midpoint": (KernelFamily.E3, (x0, -0.5 * x0, 0.0, 0.0), (1.0, 0.0, 0.0)),
    }
    reports = {}
    for name, (family, x, direction) in cases.items():
        spec = config.spec.model_copy(update={"family": family})
        reports[name] = decay_probe(
            spec, x, origin, direction, config.decay_radii,
            window=config.decay_window, n_window=config.decay_nodes,
        )
        logger.info(f"衰减探测 {name}: {reports[name].classification}")
    return DecaySummary(cases=reports)
