from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.kerr import PhasePoint, RegionClass


class Channel(str, Enum):
    """奇性传播通道"""
    PRINCIPAL = "Principal"
    HORIZON_ORBIT = "HorizonOrbit"


class BranchLabel(str, Enum):
    ROOT = "root"
    ORBIT = "orbit"
    EXIT_PLUS = "exit_plus"
    EXIT_MINUS = "exit_minus"


class BranchEventType(str, Enum):
    ENTER_SIGMA2 = "EnterSigma2"
    LEAVE_VIA_PLUS = "LeaveSigma2ViaPlus"
    LEAVE_VIA_MINUS = "LeaveSigma2ViaMinus"


class WavefrontSample(BaseModel):
    """波前样本及其谱系"""
    id: int
    point: PhasePoint
    region: RegionClass
    channel: Channel
    parent_id: Optional[int] = None
    branch: BranchLabel = BranchLabel.ROOT
    weight: float = Field(1.0, ge=0)
    s: float = Field(0.0, description="累计仿射参数")
    termination: Optional[str] = Field(None, description="叶子节点的终止原因")

    @model_validator(mode="after")
    def _check_channel(self):
        if self.channel == Channel.HORIZON_ORBIT and self.region != RegionClass.SIGMA2:
            raise ValueError("HorizonOrbit 通道的样本必须位于 Σ₂")
        return self


class BranchEvent(BaseModel):
    s: float
    sample_id: int
    type: BranchEventType


class PropagationConfig(BaseModel):
    """传播配置"""
    model_config = ConfigDict(extra="forbid")

    duration: float = Field(10.0, ge=0, description="仿射参数总长")
    branch_mask: List[BranchLabel] = Field(
        default_factory=lambda: [BranchLabel.ORBIT, BranchLabel.EXIT_PLUS, BranchLabel.EXIT_MINUS],
        description="Σ₂ 上启用的分支",
    )
    channel_alpha: float = Field(1.0, description="视界轨道的通道参数 α")
    entry_tol: float = Field(1e-6, gt=0, description="进入 Σ₂ 的 |p_t + Ψ| 阈值 (相对 ‖p(start)‖)")
    classify_tol: float = Field(1e-8, gt=0)
    match_tol: float = Field(1e-6, gt=0, description="关系复合的匹配容差")

    @field_validator("branch_mask")
    @classmethod
    def _check_mask(cls, v):
        if BranchLabel.ROOT in v:
            raise ValueError("branch_mask 只能包含 orbit / exit_plus / exit_minus")
        if len(set(v)) != len(v):
            raise ValueError("branch_mask 含重复项")
        return v


class SegmentDrift(BaseModel):
    """单个 Principal 段的守恒量漂移"""
    sample_id: int = Field(..., description="段的起点样本")
    max_H_drift: float
    max_pt_drift: float
    max_pphi_drift: float

    @property
    def worst(self) -> float:
        return max(self.max_H_drift, self.max_pt_drift, self.max_pphi_drift)


class ChannelCensus(BaseModel):
    """按通道/分支的叶子计数"""
    total: int
    leaf_count: int
    by_channel: Dict[str, int]
    by_branch: Dict[str, int]
    by_termination: Dict[str, int]
    segment_drifts: List[SegmentDrift] = Field(default_factory=list, description="每个 Principal 段的漂移")
    max_principal_drift: float = Field(0.0, description="各 Principal 段上 H、p_t、p_φ 归一化漂移的最大值")


class PropagationResult(BaseModel):
    """传播结果: 全部谱系节点、分支事件与统计"""
    samples: List[WavefrontSample]
    events: List[BranchEvent]
    initial_ids: List[int]
    final_ids: List[int]
    segment_drifts: List[SegmentDrift] = Field(default_factory=list)
    census: Optional[ChannelCensus] = None

    def by_id(self) -> Dict[int, WavefrontSample]:
        return {smp.id: smp for smp in self.samples}

    @property
    def final_samples(self) -> List[WavefrontSample]:
        index = self.by_id()
        return [index[i] for i in self.final_ids]
