import math
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class KerrParams(BaseModel):
    """极端 Kerr 时空参数 (a = r_s/2)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    r_s: float = Field(2.0, gt=0, description="Schwarzschild 半径")
    c: float = Field(1.0, gt=0, description="光速")
    spin_ratio: float = Field(1.0, gt=0, le=1, description="a/(r_s/2)，仅用于亚极端对照实验")
    allow_subextremal: bool = Field(False, description="是否允许 spin_ratio ≠ 1")

    @model_validator(mode="after")
    def _check_extremal(self):
        if self.spin_ratio != 1.0 and not self.allow_subextremal:
            raise ValueError("spin_ratio ≠ 1 需要设置 allow_subextremal (仅限对照实验)")
        return self

    @property
    def a(self) -> float:
        return self.spin_ratio * self.r_s / 2

    @property
    def is_extremal(self) -> bool:
        return self.spin_ratio == 1.0

    @property
    def horizon_radius(self) -> float:
        """外视界 r₊"""
        return self.r_s / 2 + math.sqrt(max(self.r_s ** 2 / 4 - self.a ** 2, 0.0))

    @property
    def inner_radius(self) -> float:
        """内视界 r₋ (极端情形与 r₊ 重合)"""
        return self.r_s / 2 - math.sqrt(max(self.r_s ** 2 / 4 - self.a ** 2, 0.0))


class SpacetimePoint(BaseModel):
    """Boyer–Lindquist 坐标下的时空点"""
    model_config = ConfigDict(frozen=True)

    t: float = Field(0.0, description="时间")
    r: float = Field(..., description="径向坐标")
    theta: float = Field(..., description="极角 θ")
    phi: float = Field(0.0, description="方位角 φ")


class Covector(BaseModel):
    """共轭动量"""
    model_config = ConfigDict(frozen=True)

    p_t: float = 0.0
    p_r: float = 0.0
    p_theta: float = 0.0
    p_phi: float = 0.0


class PhasePoint(BaseModel):
    """相空间点 (t, r, θ, φ; p_t, p_r, p_θ, p_φ)"""
    model_config = ConfigDict(frozen=True)

    base: SpacetimePoint
    mom: Covector

    def as_tuple(self) -> Tuple[float, ...]:
        b, m = self.base, self.mom
        return (b.t, b.r, b.theta, b.phi, m.p_t, m.p_r, m.p_theta, m.p_phi)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @classmethod
    def from_array(cls, z: Sequence[float]) -> "PhasePoint":
        z = [float(v) for v in z]
        if len(z) != 8:
            raise ValueError(f"相空间点需要 8 个分量, 实际 {len(z)} 个")
        return cls(
            base=SpacetimePoint(t=z[0], r=z[1], theta=z[2], phi=z[3]),
            mom=Covector(p_t=z[4], p_r=z[5], p_theta=z[6], p_phi=z[7]),
        )

    def replace(self, **components: float) -> "PhasePoint":
        """按分量名替换 (t, r, theta, phi, p_t, p_r, p_theta, p_phi)"""
        base = self.base.model_copy(update={k: v for k, v in components.items() if k in SpacetimePoint.model_fields})
        mom = self.mom.model_copy(update={k: v for k, v in components.items() if k in Covector.model_fields})
        return PhasePoint(base=base, mom=mom)


class RegionClass(str, Enum):
    """相空间区域分类"""
    EXTERIOR = "Exterior"
    INTERIOR = "Interior"
    HORIZON_GENERIC = "HorizonGeneric"
    SIGMA2 = "Sigma2"
    CONORMAL_NH = "ConormalNH"
    AXIS_LIMIT = "AxisLimit"
    RING_SINGULAR = "RingSingular"


class ToleranceConfig(BaseModel):
    """判定容差"""
    model_config = ConfigDict(extra="forbid")

    classify_tol: float = Field(1e-8, gt=0, description="区域分类容差 (相对 r_s 与 ‖p‖)")
    project_tol: float = Field(1e-6, gt=0, description="Σ₂ 投影的宽松容差")
    axis_eps: float = Field(1e-6, gt=0, description="极轴截断 ε (rad)")
    factor_tol: float = Field(1e-12, gt=0, description="Φ 退化阈值 (相对 ‖p‖²)")
    gradient_tol: float = Field(1e-10, gt=0, description="Σ₂ 上梯度消失阈值 (相对 ‖p‖)")
    gradient_floor: float = Field(1e-3, gt=0, description="视界非 Σ₂ 点梯度下界 (相对 ‖p‖)")
    bracket_tol: float = Field(1e-12, gt=0, description="Poisson 括号阈值")
    hessian_gap: float = Field(1e-3, gt=0, description="σ₂/σ₁ 下界")
    hessian_null: float = Field(1e-9, gt=0, description="σ₃/σ₁ 上界")
    reconstruction_tol: float = Field(1e-10, gt=0, description="Hessian 外积重构误差")


class PhasePointIn(BaseModel):
    """8 个数表示的相空间点 (命令行/接口输入)"""
    t: float = 0.0
    r: float
    theta: float
    phi: float = 0.0
    p_t: float
    p_r: float
    p_theta: float
    p_phi: float

    def to_phase_point(self) -> PhasePoint:
        return PhasePoint.from_array(
            [self.t, self.r, self.theta, self.phi, self.p_t, self.p_r, self.p_theta, self.p_phi]
        )


class ClassifyRequest(BaseModel):
    """分类请求"""
    point: PhasePointIn
    params: Optional[KerrParams] = None
    tol: Optional[float] = Field(None, gt=0, description="分类容差")


class ClassificationResponse(BaseModel):
    """分类结果与残差"""
    region: RegionClass
    delta: float = Field(..., description="Δ")
    pt_plus_psi: float = Field(..., description="p_t + Ψ")
    phi: Optional[float] = Field(None, description="Φ (极轴上可能无定义)")
