"""
带种子的样本生成

全部随机性来自同一个 numpy Generator，同一种子给出同一组样本。

位生成器为 PCG64 (XSL-RR 输出)：128 位 LCG 状态，乘数
0x2360ED051FC65DA44385DF649FCCF645，状态与增量由 SeedSequence(seed) 导出。
numpy 不提供 64 位状态的位生成器，跨实现对比时以上述常数为准。
正态样本使用 numpy 的 ziggurat 算法。
"""

import logging
from typing import List

import numpy as np

from app.core.exceptions import KerrMLException
from app.schemas.kerr import KerrParams, PhasePoint
from app.services import kerr_geometry as kg
from app.services.bicharacteristic_flow import normalize_null

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _normalized(z: np.ndarray) -> PhasePoint:
    """动量缩放到 ‖p‖ = 1"""
    z = np.array(z, dtype=float)
    z[4:] /= np.abs(z[4:]).sum()
    return PhasePoint.from_array(z)


def _horizon_base(rng: np.random.Generator, params: KerrParams) -> np.ndarray:
    z = np.zeros(8)
    z[0] = rng.uniform(0.0, 10.0)
    z[1] = params.horizon_radius
    z[2] = rng.uniform(0.2, np.pi - 0.2)
    z[3] = rng.uniform(0.0, 2 * np.pi)
    z[5] = rng.uniform(-0.5, 0.5)
    z[6] = rng.uniform(-0.5, 0.5)
    z[7] = rng.choice([-1.0, 1.0]) * rng.uniform(1.0, 2.0)
    return z


def sigma2_points(rng: np.random.Generator, n: int, params: KerrParams) -> List[PhasePoint]:
    """Σ₂ 样本: r = r₊, p_t = −Ψ, |p_φ| 远离零 (远离 N*ℋ)"""
    out = []
    for _ in range(n):
        z = _horizon_base(rng, params)
        z[4] = -float(kg.psi(z, params))
        out.append(_normalized(z))
    return out


def horizon_points(rng: np.random.Generator, n: int, params: KerrParams) -> List[PhasePoint]:
    """视界上 |p_t + Ψ| ≥ ‖p‖/4 的点"""
    out = []
    for _ in range(n):
        z = _horizon_base(rng, params)
        psi = float(kg.psi(z, params))
        offset = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0) * (np.abs(z[5:]).sum() + abs(psi))
        z[4] = -psi + offset
        out.append(_normalized(z))
    return out


def random_phase_points(rng: np.random.Generator, n: int, params: KerrParams) -> List[PhasePoint]:
    """图册中的一般相空间点 (避开环奇点与极轴)"""
    out = []
    for _ in range(n):
        z = np.empty(8)
        z[0] = rng.uniform(-10.0, 10.0)
        z[1] = rng.uniform(0.1, 4.0) * params.r_s
        z[2] = rng.uniform(0.1, np.pi - 0.1)
        z[3] = rng.uniform(0.0, 2 * np.pi)
        z[4:] = rng.normal(size=4)
        out.append(PhasePoint.from_array(z))
    return out


def off_horizon_points(rng: np.random.Generator, n: int, params: KerrParams, min_gap: float = 0.05) -> List[PhasePoint]:
    """|r − r₊| ≥ min_gap·r_s 的一般点 (经度规路径可计算 P₀)"""
    out = []
    while len(out) < n:
        pp = random_phase_points(rng, 1, params)[0]
        if abs(pp.base.r - params.horizon_radius) >= min_gap * params.r_s:
            out.append(pp)
    return out


def exterior_null_rays(rng: np.random.Generator, n: int, params: KerrParams, r_range=(4.5, 8.0)) -> List[PhasePoint]:
    """外区出射零射线起点 (p_r < 0 即 ṙ > 0)，未来指向，‖p‖ = 1"""
    out = []
    while len(out) < n:
        z = np.zeros(8)
        z[0] = 0.0
        z[1] = rng.uniform(*r_range) * params.r_s / 2
        z[2] = rng.uniform(np.pi / 4, 3 * np.pi / 4)
        z[3] = rng.uniform(0.0, 2 * np.pi)
        z[5] = -rng.uniform(0.2, 1.0)
        z[6] = rng.uniform(-0.3, 0.3)
        z[7] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)
        try:
            pp = normalize_null(PhasePoint.from_array(z), params)
        except KerrMLException as e:
            logger.debug(f"跳过无法归一化的样本: {e.message}")
            continue
        out.append(_normalized(pp.as_array()))
    return out


def horizon_grid(params: KerrParams, n_theta: int = 50, n_pr: int = 50, n_ptheta: int = 4, axis_eps: float = 1e-6) -> List[PhasePoint]:
    """r = r₊ 上的 (θ, p_r, p_θ) 网格"""
    thetas = np.linspace(axis_eps, np.pi - axis_eps, n_theta)
    prs = np.linspace(-5.0, 5.0, n_pr)
    pths = np.linspace(-2.0, 2.0, n_ptheta)
    out = []
    for th in thetas:
        for pr in prs:
            for pth in pths:
                out.append(PhasePoint.from_array([0.0, params.horizon_radius, th, 0.0, -1.0, pr, pth, 2.0]))
    return out
