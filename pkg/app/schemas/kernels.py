from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class KernelFamily(str, Enum):
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"


class Cutoff(BaseModel):
    """χ: |ζ₁| ≤ r0 时为 1, |ζ₁| ≥ r1 时为 0, 中间为五次 smoothstep"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    r0: float = Field(0.5, gt=0)
    r1: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _check_radii(self):
        if self.r0 >= self.r1:
            raise ValueError("截断半径需满足 r0 < r1")
        return self


class KernelSpec(BaseModel):
    """正则化核的求值参数"""
    model_config = ConfigDict(extra="forbid")

    family: KernelFamily = KernelFamily.E1
    epsilon: float = Field(0.1, gt=0, description="Gauss 正则化 e^{−ε|ζ|²}")
    n_nodes: int = Field(64, ge=2, le=400, description="每维 Gauss–Hermite 节点数")
    budget: int = Field(1_000_000, gt=0, description="每个核值允许的被积函数求值次数")
    cutoff: Cutoff = Field(default_factory=Cutoff)


class KernelConfig(BaseModel):
    """kernels 子命令的配置"""
    model_config = ConfigDict(extra="forbid")

    spec: KernelSpec = Field(default_factory=lambda: KernelSpec(epsilon=0.05))
    boxcar_x0: Tuple[float, float, int] = Field((0.1, 2.0, 20), description="x⁰ 网格 (起点, 终点, 点数)")
    boxcar_xi: Tuple[float, float, int] = Field((-20.0, 20.0, 81), description="ξ₁ 网格")
    sweep_x0: float = Field(1.0, gt=0)
    sweep_x1: Tuple[float, float, int] = Field((-3.0, 3.0, 61), description="x¹ 扫描网格")
    decay_window: float = Field(0.15, gt=0, description="窗函数宽度")
    decay_radii: List[float] = Field(default_factory=lambda: [20.0, 40.0, 80.0, 160.0, 320.0])
    decay_nodes: int = Field(400, ge=8, description="频率方向 Gauss–Legendre 节点数")
    decay_x0: float = Field(2.0, gt=0)


class BoxcarRequest(BaseModel):
    """boxcar 分解残差请求"""
    x0: List[float] = Field(..., min_length=1)
    xi1: List[float] = Field(..., min_length=1)
    cutoff: Optional[Cutoff] = None
    quadrature: bool = Field(False, description="同时与 scipy quad 比较")


class BoxcarReport(BaseModel):
    n_points: int
    max_split_residual: float
    max_quadrature_residual: Optional[float] = None
    passed: bool = Field(..., alias="pass")

    model_config = ConfigDict(populate_by_name=True)


class ChartReport(BaseModel):
    symplectic: bool
    involution: bool
    max_round_trip_error: int
    example_x: List[int]
    example_xi: List[int]


class DecayReport(BaseModel):
    """沿给定余切方向的衰减判定"""
    family: KernelFamily
    direction: List[float]
    radii: List[float]
    levels: List[float] = Field(..., description="|F(ω)| / 参考值")
    slope: float = Field(..., description="log-log 拟合斜率")
    classification: str = Field(..., pattern="^(singular|rapid)$")
    evaluations: int


class DecaySummary(BaseModel):
    cases: Dict[str, DecayReport]
