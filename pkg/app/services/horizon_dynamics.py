"""
双特征簇 Σ₂ 上的动力学

Σ₂ = {r = r_s/2, p_t + Ψ = 0}。本模块提供投影、四个引理的数值验证器，
以及视界轨道映射 (t, φ 闭式推进, p_r 由求积给出)。
"""

import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import null_space

from app.core.exceptions import (
    ConfigurationError,
    ConormalDegenerateError,
    DegenerateFibreError,
    NotNearSigma2Error,
    SampleOnConormalError,
)
from app.schemas.flow import IntegratorConfig
from app.schemas.horizon import (
    FibrePoint,
    LemmaName,
    LemmaReport,
    RelationFibre,
    Sigma2Point,
    Sigma2Residuals,
)
from app.schemas.kerr import KerrParams, PhasePoint, RegionClass, ToleranceConfig
from app.services import kerr_geometry as kg
from app.services.phase_calculus import ScalarField, gradient_array, hessian_array, poisson_bracket
from app.utils import dual

logger = logging.getLogger(__name__)

# 切向扰动步长
TANGENT_STEP = 1e-6
TANGENT_TOL = 1e-4


def horizon_defining_function(z, params: KerrParams):
    """f₁ = r − r_s/2"""
    return z[1] - params.horizon_radius


def characteristic_defining_function(z, params: KerrParams):
    """f₂ = p_t + Ψ"""
    return z[4] + kg.psi(z, params)


def snap_to_sigma2(pp: PhasePoint, params: KerrParams, phi_tol: float = 1e-12) -> Sigma2Point:
    """
    无条件投影: 先令 r := r₊, 再令 p_t := −Ψ；残差记录投影前的偏差

    Raises:
        ConormalDegenerateError: 投影后 Φ ≈ 0
    """
    dr = pp.base.r - params.horizon_radius
    defect = float(characteristic_defining_function(pp.as_tuple(), params))
    on_horizon = pp.replace(r=params.horizon_radius)
    projected = on_horizon.replace(p_t=-float(kg.psi(on_horizon, params)))

    phi = float(kg.capital_phi(projected, params))
    if phi <= phi_tol * kg.covector_norm(projected) ** 2:
        raise ConormalDegenerateError(f"投影后 Φ = {phi:.3e}")
    return Sigma2Point(point=projected, residuals=Sigma2Residuals(dr=dr, pt_plus_psi=defect))


def project_to_sigma2(pp: PhasePoint, params: KerrParams, tol: float = 1e-6, phi_tol: float = 1e-12) -> Sigma2Point:
    """
    投影到 Σ₂ (仅接受宽松分类下位于 Σ₂ 附近的点)

    Raises:
        NotNearSigma2Error: 宽松分类下不在 Σ₂ 附近
        ConormalDegenerateError: 位于 N*ℋ 或投影后 Φ ≈ 0
    """
    region = kg.classify(pp, params, tol=tol)
    if region == RegionClass.CONORMAL_NH:
        raise ConormalDegenerateError()
    if region != RegionClass.SIGMA2:
        raise NotNearSigma2Error(f"点的区域为 {region.value}，不在 Σ₂ 附近 (not near Σ₂)")
    return snap_to_sigma2(pp, params, phi_tol)


def _require_samples(n: int, lemma: LemmaName):
    if n == 0:
        raise ConfigurationError(f"{lemma.value}: 样本数为 0 (empty report)")


def _as_sigma2(samples: Iterable, params: KerrParams) -> List[Sigma2Point]:
    return [s if isinstance(s, Sigma2Point) else project_to_sigma2(s, params) for s in samples]


def verify_double_characteristics(
    sigma2_samples: Sequence,
    horizon_samples: Sequence[PhasePoint],
    params: KerrParams,
    tol: Optional[ToleranceConfig] = None,
) -> LemmaReport:
    """
    双特征点 = Σ₂

    Σ₂ 样本上 ‖dP̃₀‖ < gradient_tol·‖p‖，视界上 p_t + Ψ ≠ 0 的样本 ‖dP̃₀‖ > gradient_floor·‖p‖。
    """
    tol = tol or ToleranceConfig()
    n = len(sigma2_samples) + len(horizon_samples)
    _require_samples(n, LemmaName.DOUBLE_CHAR)

    on_sigma2 = [0.0]
    for sp in _as_sigma2(sigma2_samples, params):
        g = gradient_array(kg.principal_symbol, sp.point, params)
        on_sigma2.append(np.linalg.norm(g) / kg.covector_norm(sp.point))
    off_sigma2 = [np.inf]
    for pp in horizon_samples:
        g = gradient_array(kg.principal_symbol, pp, params)
        off_sigma2.append(np.linalg.norm(g) / kg.covector_norm(pp))

    max_on, min_off = float(max(on_sigma2)), float(min(off_sigma2))
    passed = max_on < tol.gradient_tol and min_off > tol.gradient_floor
    logger.info(f"双特征验证: max|dP̃₀| = {max_on:.3e}, 视界最小 |dP̃₀| = {min_off:.3e}, 通过 = {passed}")
    details = {"max_sigma2_gradient": max_on}
    if horizon_samples:
        details["min_horizon_gradient"] = min_off
    return LemmaReport(
        lemma=LemmaName.DOUBLE_CHAR,
        n_samples=n,
        max_residual=max_on,
        passed=passed,
        details=details,
    )


def tangent_defect(sp: Sigma2Point, params: KerrParams, step: float = TANGENT_STEP) -> float:
    """沿定义函数 Jacobian 核的 6 个方向扰动后, 定义函数的一阶缺陷"""
    x = sp.point.as_array()
    jac = np.vstack([
        gradient_array(horizon_defining_function, x, params),
        gradient_array(characteristic_defining_function, x, params),
    ])
    worst = 0.0
    for v in null_space(jac).T:
        y = x + step * v
        f1 = abs(float(horizon_defining_function(y, params)))
        f2 = abs(float(characteristic_defining_function(y, params)))
        worst = max(worst, max(f1, f2) / step)
    return worst


def verify_involutivity(
    samples: Sequence[PhasePoint],
    sigma2_samples: Sequence,
    params: KerrParams,
    tol: Optional[ToleranceConfig] = None,
) -> LemmaReport:
    """
    Σ₂ 为余维 2 的对合子流形

    {f₁, f₂} 在一般点处为零; Σ₂ 上 df₁, df₂ 线性无关, 且沿切空间扰动保持在 Σ₂ 上 (一阶)。
    """
    tol = tol or ToleranceConfig()
    n = len(samples) + len(sigma2_samples)
    _require_samples(n, LemmaName.INVOLUTIVE)

    brackets = [0.0]
    for pp in samples:
        brackets.append(abs(poisson_bracket(horizon_defining_function, characteristic_defining_function, pp, params)))

    min_rank, defects = 2, [0.0]
    for sp in _as_sigma2(sigma2_samples, params):
        jac = np.vstack([
            gradient_array(horizon_defining_function, sp.point, params),
            gradient_array(characteristic_defining_function, sp.point, params),
        ])
        min_rank = min(min_rank, int(np.linalg.matrix_rank(jac)))
        defects.append(tangent_defect(sp, params))

    max_bracket, max_defect = float(max(brackets)), float(max(defects))
    passed = max_bracket < tol.bracket_tol and min_rank == 2 and max_defect < TANGENT_TOL
    logger.info(f"对合性验证: max|{{f₁,f₂}}| = {max_bracket:.3e}, 最小秩 {min_rank}, 通过 = {passed}")
    return LemmaReport(
        lemma=LemmaName.INVOLUTIVE,
        n_samples=n,
        max_residual=max_bracket,
        passed=passed,
        details={"min_jacobian_rank": float(min_rank), "max_tangent_defect": max_defect},
    )


def hessian_structure(sp: Sigma2Point, params: KerrParams, phi_tol: float = 1e-12):
    """
    Σ₂ 点处 P̃₀ 的 Hessian 结构

    Returns:
        (奇异值, 外积重构 2 dw⊗dw − 2Φ dr⊗dr 的相对误差)

    Raises:
        SampleOnConormalError: Φ ≈ 0
    """
    x = sp.point
    phi = float(kg.capital_phi(x, params))
    if phi <= phi_tol * kg.covector_norm(x) ** 2:
        raise SampleOnConormalError()
    hess = hessian_array(kg.principal_symbol, x, params)
    w = gradient_array(characteristic_defining_function, x, params)
    e_r = np.zeros(8)
    e_r[1] = 1.0
    model = 2 * np.outer(w, w) - 2 * phi * np.outer(e_r, e_r)
    recon = float(np.max(np.abs(hess - model)) / np.max(np.abs(hess)))
    return np.linalg.svd(hess, compute_uv=False), recon


def verify_hessian_rank(sigma2_samples: Sequence, params: KerrParams, tol: Optional[ToleranceConfig] = None) -> LemmaReport:
    """P̃₀ 的 Hessian 在 Σ₂ \\ N*ℋ 上秩为 2"""
    tol = tol or ToleranceConfig()
    _require_samples(len(sigma2_samples), LemmaName.HESSIAN_RANK)

    gaps, nulls, recons = [], [], []
    for sp in _as_sigma2(sigma2_samples, params):
        sv, recon = hessian_structure(sp, params, phi_tol=tol.factor_tol)
        gaps.append(sv[1] / sv[0])
        nulls.append(sv[2] / sv[0])
        recons.append(recon)

    min_gap, max_null, max_recon = float(min(gaps)), float(max(nulls)), float(max(recons))
    passed = min_gap > tol.hessian_gap and max_null < tol.hessian_null and max_recon < tol.reconstruction_tol
    logger.info(f"Hessian 秩验证: min σ₂/σ₁ = {min_gap:.3e}, max σ₃/σ₁ = {max_null:.3e}, 通过 = {passed}")
    return LemmaReport(
        lemma=LemmaName.HESSIAN_RANK,
        n_samples=len(sigma2_samples),
        max_residual=max_null,
        passed=passed,
        details={"min_gap_ratio": min_gap, "max_null_ratio": max_null, "max_reconstruction_error": max_recon},
    )


def subprincipal_spot_checks(params: KerrParams):
    """视界外的两个已知值: (r₊+1, π/2, p_r=1, p_θ=5) → −6i, (r₊+1, π/3, p_r=0, p_θ=1) → −i"""
    r = params.horizon_radius + 1.0
    return [
        (PhasePoint.from_array([0.0, r, np.pi / 2, 0.0, 0.0, 1.0, 5.0, 0.0]), -6j),
        (PhasePoint.from_array([0.0, r, np.pi / 3, 0.0, 0.0, 0.0, 1.0, 0.0]), -1j),
    ]


def verify_subprincipal(horizon_grid: Sequence[PhasePoint], params: KerrParams) -> LemmaReport:
    """c_P 在 r = r_s/2 上为零 (机器精度)，并复现视界外的已知值"""
    _require_samples(len(horizon_grid), LemmaName.SUBPRINCIPAL)
    max_grid = max(abs(kg.subprincipal_symbol(pp, params)) for pp in horizon_grid)
    spot_err = 0.0
    if params.is_extremal:
        spot_err = max(abs(kg.subprincipal_symbol(pp, params) - expected) for pp, expected in subprincipal_spot_checks(params))
    passed = max_grid <= 1e-15 and spot_err < 1e-12
    logger.info(f"次主符号验证: 视界上 max|c_P| = {max_grid:.3e}, 通过 = {passed}")
    return LemmaReport(
        lemma=LemmaName.SUBPRINCIPAL,
        n_samples=len(horizon_grid),
        max_residual=float(max_grid),
        passed=passed,
        details={"max_spot_error": float(spot_err)},
    )


def horizon_generator(channel_alpha: float) -> ScalarField:
    """
    归一化生成函数 (p_t + Ψ) − α (r − r_s/2)√Φ

    它在 Σ₂ 上的 Hamilton 场为 ∂_t + (c/r_s)∂_φ + h ∂_{p_r}，h = −∂_rΨ + α√Φ；
    α = 1 即 P₀⁻，α = −1 即 P₀⁺。
    """
    def generator(z, params: KerrParams):
        return z[4] + kg.psi(z, params) - channel_alpha * (z[1] - params.horizon_radius) * dual.sqrt(kg.capital_phi(z, params))
    generator.__name__ = f"horizon_generator(alpha={channel_alpha})"
    return generator


def horizon_rate(pp, channel_alpha: float, params: KerrParams) -> float:
    """h = −∂Ψ/∂r + α√Φ"""
    d_psi = gradient_array(kg.psi, pp, params)[1]
    return float(-d_psi + channel_alpha * np.sqrt(float(kg.capital_phi(pp, params))))


def horizon_flow_map(
    sp: Sigma2Point,
    s1: float,
    s2: float,
    channel_alpha: float,
    params: KerrParams,
    cfg: Optional[IntegratorConfig] = None,
    phi_tol: float = 1e-12,
) -> PhasePoint:
    """
    视界轨道映射

    (t+s₁, r_s/2, θ, φ + (c/r_s)s₁; −(c/r_s)p_φ, p_r + s₂ + ∫₀^{s₁} h, p_θ, p_φ)

    Raises:
        DegenerateFibreError: Φ ≈ 0
    """
    cfg = cfg or IntegratorConfig()
    x = sp.point
    t, _, th, ph, _, pr, pth, pph = x.as_tuple()
    phi = float(kg.capital_phi(x, params))
    if phi <= phi_tol * kg.covector_norm(x) ** 2:
        raise DegenerateFibreError()

    omega = params.c / params.r_s
    pt = -omega * pph
    pr0 = pr + s2
    if s1 != 0.0:
        def orbit(s, p_r):
            return [t + s, params.horizon_radius, th, ph + omega * s, pt, p_r, pth, pph]

        sol = solve_ivp(
            lambda s, y: [horizon_rate(orbit(s, y[0]), channel_alpha, params)],
            (0.0, s1),
            [pr0],
            rtol=max(cfg.rel_tol, 1e-13),
            atol=cfg.abs_tol,
            max_step=cfg.max_step,
        )
        pr0 = float(sol.y[0, -1])
    return PhasePoint.from_array([t + s1, params.horizon_radius, th, ph + omega * s1, pt, pr0, pth, pph])


def fibre_sample(
    sp: Sigma2Point,
    s1_grid: Sequence[float],
    s2_grid: Sequence[float],
    channel_alpha: float,
    params: KerrParams,
    cfg: Optional[IntegratorConfig] = None,
) -> RelationFibre:
    """(s₁, s₂) 网格上的纤维采样"""
    points = [
        FibrePoint(s1=float(s1), s2=float(s2), point=horizon_flow_map(sp, s1, s2, channel_alpha, params, cfg))
        for s1 in s1_grid
        for s2 in s2_grid
    ]
    return RelationFibre(
        base=sp,
        channel_alpha=channel_alpha,
        s1_grid=[float(v) for v in s1_grid],
        s2_grid=[float(v) for v in s2_grid],
        points=points,
    )


def fibre_rows(fibre: RelationFibre) -> List[list]:
    """CSV 行 (s1, s2, t, r, theta, phi, p_t, p_r, p_theta, p_phi)"""
    return [[fp.s1, fp.s2, *[float(v) for v in fp.point.as_tuple()]] for fp in fibre.points]
