"""
Hamilton 流 q̇ = ∂_p H, ṗ = −∂_q H 的数值积分

实主型区域内追踪零双特征曲线, 逐样本审计 H、p_t、p_φ 的守恒,
在接近视界或环奇点时以事件终止 (跨视界的逻辑在 wavefront_engine 中)。
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from app.core.exceptions import (
    EmptyTrajectoryError,
    HorizonSingularError,
    KerrMLException,
    NoRealRootError,
    NotNullError,
    PoleSingularError,
    StepFailureError,
    ZeroCovectorError,
)
from app.schemas.flow import (
    ConservedReport,
    FlowDiagnostic,
    IntegratorConfig,
    Termination,
    Trajectory,
    TrajectorySample,
)
from app.schemas.kerr import KerrParams, PhasePoint, RegionClass
from app.services import kerr_geometry as kg
from app.services.phase_calculus import ScalarField, hamiltonian_field_of
from app.utils.dual import Jet

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]

TRAJECTORY_CSV_HEADER = ("s", "t", "r", "theta", "phi", "p_t", "p_r", "p_theta", "p_phi", "H_drift")


def hamiltonian_vector_field(pp: kg.PhaseLike, params: KerrParams) -> np.ndarray:
    """
    H 生成的 Hamilton 向量场

    H 与 t、φ 无关且对 p 为二次型, 故只需对 (r, θ) 做一阶前向展开。

    Returns:
        (ṫ, ṙ, θ̇, φ̇, ṗ_t, ṗ_r, ṗ_θ, ṗ_φ)

    Raises:
        HorizonSingularError: Δ = 0
    """
    _, r, th, _, pt, pr, pth, pph = [float(v) for v in kg.unpack(pp)]
    rj, thj = Jet.variables((r, th), order=1)
    g = kg.inverse_metric(rj, thj, params)
    gc = (
        g.tt * (pt * pt)
        + g.tphi * (2 * pt * pph)
        + g.rr * (pr * pr)
        + g.thth * (pth * pth)
        + g.phph * (pph * pph)
    )
    return np.array([
        -(g.tt.val * pt + g.tphi.val * pph),
        -g.rr.val * pr,
        -g.thth.val * pth,
        -(g.tphi.val * pt + g.phph.val * pph),
        0.0,
        0.5 * gc.grad[0],
        0.5 * gc.grad[1],
        0.0,
    ])


def normalize_null(pp: PhasePoint, params: KerrParams, future: bool = True) -> PhasePoint:
    """
    调整 p_t 使 H = 0

    p_t 满足 g^{tt}x² + 2g^{tφ}p_φ x + (g^{rr}p_r² + g^{θθ}p_θ² + g^{φφ}p_φ²) = 0，
    未来分支取 ṫ > 0 的根。

    Raises:
        ZeroCovectorError: (p_r, p_θ, p_φ) = 0
        NoRealRootError: 判别式为负
    """
    _, r, th, _, _, pr, pth, pph = pp.as_tuple()
    if pr == 0.0 and pth == 0.0 and pph == 0.0:
        raise ZeroCovectorError("唯一的根 p_t = 0 给出零余切向量 (zero covector)")
    g = kg.inverse_metric(r, th, params)
    b = g.tphi * pph
    rest = g.rr * pr * pr + g.thth * pth * pth + g.phph * pph * pph
    disc = b * b - g.tt * rest
    if disc < 0:
        raise NoRealRootError(f"判别式 {disc:.3e} < 0")
    root = np.sqrt(disc)
    # ṫ = −(g^{tt}x + g^{tφ}p_φ) = ±√disc
    x = (-b - root) / g.tt if future else (-b + root) / g.tt
    return pp.replace(p_t=float(x))


def _diagnostics(points: Sequence[np.ndarray], generator: ScalarField, params: KerrParams) -> List[FlowDiagnostic]:
    y0 = points[0]
    out = []
    for y in points:
        out.append(FlowDiagnostic(
            H=float(generator(y, params)),
            pt_drift=float(y[4] - y0[4]),
            pphi_drift=float(y[7] - y0[7]),
        ))
    return out


def _assemble(s_values, ys, generator, params, termination) -> Trajectory:
    samples, kept = [], []
    last = None
    for s, y in zip(s_values, ys):
        if last is not None and s == last:
            continue
        last = s
        kept.append(np.asarray(y, dtype=float))
        samples.append(TrajectorySample(s=float(s), point=PhasePoint.from_array(y)))
    return Trajectory(
        params=params,
        samples=samples,
        diagnostics=_diagnostics(kept, generator, params),
        termination=termination,
    )


def _run(
    field: VectorField,
    generator: ScalarField,
    start: PhasePoint,
    span: Tuple[float, float],
    cfg: IntegratorConfig,
    params: KerrParams,
    with_events: bool,
    s_eval: Optional[Sequence[float]] = None,
) -> Trajectory:
    s0, s1 = float(span[0]), float(span[1])
    y0 = start.as_array()
    if s1 == s0:
        return _assemble([s0], [y0], generator, params, Termination.SPAN_REACHED)

    r_h = params.horizon_radius
    margin = cfg.horizon_margin(params)
    events = []
    if with_events:
        def horizon_margin_event(s, y):
            return abs(y[1] - r_h) - margin

        def horizon_crossing_event(s, y):
            return y[1] - r_h

        def ring_event(s, y):
            return float(kg.sigma(y[1], y[2], params)) - cfg.ring_margin * params.r_s ** 2

        for ev in (horizon_margin_event, horizon_crossing_event, ring_event):
            ev.terminal = True
        events = [horizon_margin_event, horizon_crossing_event, ring_event]

    try:
        sol = solve_ivp(
            lambda s, y: field(y),
            (s0, s1),
            y0,
            method=cfg.method,
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
            max_step=cfg.max_step,
            events=events or None,
            t_eval=None if s_eval is None else np.asarray(s_eval, dtype=float),
        )
    except KerrMLException as e:
        raise StepFailureError(f"积分过程中离开定义域: {e.message}")

    if sol.status == -1:
        partial = None
        if sol.t.size:
            partial = _assemble(sol.t, sol.y.T, generator, params, Termination.STEP_FAILURE)
        logger.warning(f"积分失败: {sol.message}")
        raise StepFailureError(f"积分失败 (step failure): {sol.message}", trajectory=partial)

    termination = Termination.SPAN_REACHED
    if sol.status == 1:
        if with_events and sol.t_events[2].size:
            termination = Termination.RING_APPROACH
        else:
            termination = Termination.HORIZON_APPROACH

    s_values, ys = list(sol.t), list(sol.y.T)
    if s_eval is not None and sol.status == 1:
        # 事件终止时补上终点
        fired = next(i for i, ev in enumerate(sol.t_events) if ev.size)
        s_end = float(sol.t_events[fired][0])
        if not s_values or s_values[-1] != s_end:
            s_values.append(s_end)
            ys.append(sol.y_events[fired][0])
    if s_eval is None and len(s_values) > 2:
        steps = np.abs(np.diff(s_values))[:-1]
        if steps.size and steps.min() < cfg.min_step:
            partial = _assemble(s_values, ys, generator, params, Termination.STEP_FAILURE)
            raise StepFailureError(f"步长 {steps.min():.3e} 低于 min_step", trajectory=partial)

    traj = _assemble(s_values, ys, generator, params, termination)
    logger.debug(f"积分结束: {termination.value}, 样本数 {len(traj.samples)}")
    return traj


def integrate(
    start: PhasePoint,
    span: Tuple[float, float],
    cfg: IntegratorConfig,
    params: KerrParams,
    s_eval: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    沿 H 的 Hamilton 流积分

    Args:
        start: 起点 (须位于 Exterior/Interior 且满足零条件)
        span: (s₀, s₁)，允许反向
        cfg: 积分器配置
        params: 时空参数
        s_eval: 指定采样点 (默认记录每个接受步)

    Returns:
        Trajectory

    Raises:
        ZeroCovectorError, HorizonSingularError, PoleSingularError, NotNullError, StepFailureError
    """
    region = kg.classify(start, params)
    if region == RegionClass.AXIS_LIMIT:
        raise PoleSingularError("起点位于极轴截断内")
    if region not in (RegionClass.EXTERIOR, RegionClass.INTERIOR):
        raise HorizonSingularError(f"起点区域为 {region.value}，H 流在视界上无定义")
    h0 = float(kg.hamiltonian(start, params))
    norm = kg.covector_norm(start)
    if abs(h0) > cfg.null_tol * norm ** 2 and not cfg.allow_massive:
        raise NotNullError(f"H(start) = {h0:.3e}")
    traj = _run(
        lambda y: hamiltonian_vector_field(y, params),
        kg.hamiltonian,
        start,
        span,
        cfg,
        params,
        with_events=True,
        s_eval=s_eval,
    )
    logger.info(f"H 流积分: {len(traj.samples)} 个样本, 终止原因 {traj.termination.value}")
    return traj


def integrate_generator(
    generator: ScalarField,
    start: PhasePoint,
    span: Tuple[float, float],
    cfg: IntegratorConfig,
    params: KerrParams,
    stop_at_horizon: bool = False,
    s_eval: Optional[Sequence[float]] = None,
) -> Trajectory:
    """任意光滑生成函数的 Hamilton 流 (例如 Σ₂ 上的 P₀±)"""
    return _run(
        lambda y: hamiltonian_field_of(generator, y, params),
        generator,
        start,
        span,
        cfg,
        params,
        with_events=stop_at_horizon,
        s_eval=s_eval,
    )


def integrate_fixed_rk4(
    start: PhasePoint,
    span: Tuple[float, float],
    n_steps: int,
    params: KerrParams,
    generator: Optional[ScalarField] = None,
) -> Trajectory:
    """经典定步长四阶 Runge–Kutta，用作交叉验证"""
    if generator is None:
        field, gen = (lambda y: hamiltonian_vector_field(y, params)), kg.hamiltonian
    else:
        field, gen = (lambda y: hamiltonian_field_of(generator, y, params)), generator
    s_grid = np.linspace(float(span[0]), float(span[1]), int(n_steps) + 1)
    y = start.as_array()
    ys = [y]
    for k in range(int(n_steps)):
        h = s_grid[k + 1] - s_grid[k]
        k1 = field(y)
        k2 = field(y + 0.5 * h * k1)
        k3 = field(y + 0.5 * h * k2)
        k4 = field(y + h * k3)
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        ys.append(y)
    return _assemble(s_grid, ys, gen, params, Termination.SPAN_REACHED)


def conserved_report(traj: Trajectory) -> ConservedReport:
    """H、p_t、p_φ 的最大漂移"""
    if not traj.samples:
        raise EmptyTrajectoryError()
    scale = kg.covector_norm(traj.samples[0].point) or 1.0
    h0 = traj.diagnostics[0].H
    return ConservedReport(
        n_samples=len(traj.samples),
        max_H_drift=max(abs(d.H - h0) for d in traj.diagnostics) / scale ** 2,
        max_pt_drift=max(abs(d.pt_drift) for d in traj.diagnostics) / scale,
        max_pphi_drift=max(abs(d.pphi_drift) for d in traj.diagnostics) / scale,
        scale=scale,
    )


def trajectory_rows(traj: Trajectory) -> List[list]:
    """CSV 数据行 (s, t, r, theta, phi, p_t, p_r, p_theta, p_phi, H_drift)"""
    if not traj.samples:
        return []
    h0 = traj.diagnostics[0].H
    return [
        [smp.s, *[float(v) for v in smp.point.as_tuple()], d.H - h0]
        for smp, d in zip(traj.samples, traj.diagnostics)
    ]


def base_trace(traj: Trajectory) -> np.ndarray:
    """(N, 4) 基点坐标"""
    return np.array([smp.point.as_tuple()[:4] for smp in traj.samples], dtype=float)
