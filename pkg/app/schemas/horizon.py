from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.kerr import KerrParams, PhasePoint, PhasePointIn


class Sigma2Residuals(BaseModel):
    """投影前的缺陷"""
    dr: float = Field(..., description="r − r_s/2")
    pt_plus_psi: float = Field(..., description="p_t + Ψ")


class Sigma2Point(BaseModel):
    """Σ₂ = {r = r_s/2, p_t + Ψ = 0} 上的点 (已投影)"""
    point: PhasePoint
    residuals: Sigma2Residuals


class FibrePoint(BaseModel):
    s1: float = Field(..., description="流参数")
    s2: float = Field(..., description="p_r 纤维参数")
    point: PhasePoint


class RelationFibre(BaseModel):
    """典范关系纤维的二参数采样"""
    base: Sigma2Point
    channel_alpha: float
    s1_grid: List[float]
    s2_grid: List[float]
    points: List[FibrePoint]


class LemmaName(str, Enum):
    DOUBLE_CHAR = "double-char"
    INVOLUTIVE = "involutive"
    HESSIAN_RANK = "hessian-rank"
    SUBPRINCIPAL = "subprincipal"


class LemmaReport(BaseModel):
    """引理验证报告 {lemma, n_samples, max_residual, pass}"""
    model_config = ConfigDict(populate_by_name=True)

    lemma: LemmaName
    n_samples: int
    max_residual: float
    passed: bool = Field(..., alias="pass")
    details: Dict[str, float] = Field(default_factory=dict)


class VerifyRequest(BaseModel):
    """引理验证请求"""
    lemma: str = Field("all", pattern="^(double-char|involutive|hessian-rank|subprincipal|all)$")
    n_samples: int = Field(100, ge=0, le=5000, description="每类样本数")
    seed: int = Field(20240607, description="随机种子")
    control_spin: Optional[float] = Field(None, gt=0, lt=1, description="亚极端对照实验的 a/(r_s/2)")


class VerificationRunResponse(BaseModel):
    """已持久化的验证记录"""
    id: int
    lemma: str
    n_samples: int
    seed: int
    max_residual: float
    passed: bool
    params_json: str
    created_at: Optional[datetime] = None

    class Config:
        from_attributes = True


class VerificationRunList(BaseModel):
    total: int
    items: List[VerificationRunResponse]


class OrbitRequest(BaseModel):
    """视界轨道请求"""
    point: PhasePointIn
    s1_max: float = Field(5.0, description="流参数终值")
    steps: int = Field(10, ge=1, le=10000, description="s₁ 网格段数")
    alpha: float = Field(1.0, description="通道参数 α")
    params: Optional[KerrParams] = None
