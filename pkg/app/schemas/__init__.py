from app.schemas.kerr import *
from app.schemas.calculus import *
from app.schemas.flow import *
from app.schemas.horizon import *
from app.schemas.wavefront import *
from app.schemas.kernels import *

__all__ = [
    "KerrParams",
    "SpacetimePoint",
    "Covector",
    "PhasePoint",
    "PhasePointIn",
    "RegionClass",
    "ToleranceConfig",
    "ClassifyRequest",
    "ClassificationResponse",
    "Gradient8",
    "Hessian8",
    "IntegratorConfig",
    "Termination",
    "Trajectory",
    "TrajectorySample",
    "ConservedReport",
    "TraceRequest",
    "TraceResponse",
    "Sigma2Point",
    "Sigma2Residuals",
    "FibrePoint",
    "RelationFibre",
    "LemmaName",
    "LemmaReport",
    "VerifyRequest",
    "VerificationRunResponse",
    "VerificationRunList",
    "OrbitRequest",
    "Channel",
    "BranchLabel",
    "BranchEventType",
    "WavefrontSample",
    "BranchEvent",
    "PropagationConfig",
    "SegmentDrift",
    "ChannelCensus",
    "PropagationResult",
    "KernelFamily",
    "Cutoff",
    "KernelSpec",
    "KernelConfig",
    "BoxcarRequest",
    "BoxcarReport",
    "ChartReport",
    "DecayReport",
    "DecaySummary",
]
