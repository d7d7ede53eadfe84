from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.kerr import KerrParams, PhasePoint, PhasePointIn


class IntegratorConfig(BaseModel):
    """积分器配置"""
    model_config = ConfigDict(extra="forbid")

    rel_tol: float = Field(1e-11, gt=0, description="相对误差容限")
    abs_tol: float = Field(1e-12, gt=0, description="绝对误差容限")
    max_step: float = Field(0.5, gt=0, description="最大仿射参数步长")
    min_step: float = Field(1e-12, gt=0, description="最小仿射参数步长")
    horizon_margin_factor: float = Field(1e-6, gt=0, description="视界停止距离 (相对 r_s)")
    ring_margin: float = Field(1e-3, gt=0, description="环奇点停止阈值 (Σ 相对 r_s²)")
    method: str = Field("DOP853", pattern="^(DOP853|RK45)$", description="嵌入式 Runge–Kutta 对")
    null_tol: float = Field(1e-9, gt=0, description="零条件容差 (相对 ‖p‖²)")
    allow_massive: bool = Field(False, description="允许 H ≠ 0 的起点")

    @model_validator(mode="after")
    def _check_steps(self):
        if self.min_step > self.max_step:
            raise ValueError("min_step 不能大于 max_step")
        return self

    def horizon_margin(self, params: KerrParams) -> float:
        return self.horizon_margin_factor * params.r_s


class Termination(str, Enum):
    SPAN_REACHED = "SpanReached"
    HORIZON_APPROACH = "HorizonApproach"
    RING_APPROACH = "RingApproach"
    STEP_FAILURE = "StepFailure"


class TrajectorySample(BaseModel):
    s: float = Field(..., description="仿射参数")
    point: PhasePoint


class FlowDiagnostic(BaseModel):
    """单个样本的守恒量偏差"""
    H: float
    pt_drift: float
    pphi_drift: float


class Trajectory(BaseModel):
    """双特征曲线采样"""
    params: KerrParams
    samples: List[TrajectorySample]
    diagnostics: List[FlowDiagnostic]
    termination: Termination

    @property
    def end(self) -> PhasePoint:
        return self.samples[-1].point

    @property
    def s_values(self) -> List[float]:
        return [smp.s for smp in self.samples]


class ConservedReport(BaseModel):
    """守恒量漂移汇总 (H 以 ‖p(0)‖² 归一, p_t、p_φ 以 ‖p(0)‖ 归一)"""
    n_samples: int
    max_H_drift: float
    max_pt_drift: float
    max_pphi_drift: float
    scale: float = Field(..., description="‖p(0)‖")


class TraceRequest(BaseModel):
    """轨迹追踪请求"""
    point: PhasePointIn
    span: Tuple[float, float] = (0.0, 10.0)
    params: Optional[KerrParams] = None
    integrator: Optional[IntegratorConfig] = None
    normalize: bool = Field(False, description="先将 p_t 调整为零测地线 (未来指向)")


class TraceResponse(BaseModel):
    trajectory: Trajectory
    report: ConservedReport
