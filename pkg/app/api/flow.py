import numpy as np
from fastapi import APIRouter

from app.schemas import IntegratorConfig, KerrParams, OrbitRequest, RelationFibre, TraceRequest, TraceResponse
from app.services.bicharacteristic_flow import conserved_report, integrate, normalize_null
from app.services.horizon_dynamics import fibre_sample, project_to_sigma2

router = APIRouter(prefix="/api", tags=["双特征流"])


@router.post("/trace", response_model=TraceResponse, summary="追踪零双特征曲线")
def trace(request: TraceRequest):
    """
    沿 H 流积分并给出守恒量漂移
    """
    params = request.params or KerrParams()
    start = request.point.to_phase_point()
    if request.normalize:
        start = normalize_null(start, params)
    traj = integrate(start, request.span, request.integrator or IntegratorConfig(), params)
    return TraceResponse(trajectory=traj, report=conserved_report(traj))


@router.post("/orbit", response_model=RelationFibre, summary="视界轨道")
def orbit(request: OrbitRequest):
    """
    投影到 Σ₂ 后沿视界轨道推进 (s₂ = 0)
    """
    params = request.params or KerrParams()
    sp = project_to_sigma2(request.point.to_phase_point(), params)
    s1_grid = np.linspace(0.0, request.s1_max, request.steps + 1)
    return fibre_sample(sp, s1_grid, [0.0], request.alpha, params)
