from fastapi import APIRouter

from app.schemas import ClassifyRequest, ClassificationResponse, KerrParams
from app.services import kerr_geometry as kg

router = APIRouter(prefix="/api", tags=["几何分类"])


@router.post("/classify", response_model=ClassificationResponse, summary="相空间点分类")
def classify_point(request: ClassifyRequest):
    """
    返回区域分类与残差 (Δ, p_t + Ψ, Φ)
    """
    params = request.params or KerrParams()
    pp = request.point.to_phase_point()
    region = kg.classify(pp, params, tol=request.tol or 1e-8)
    res = kg.residuals(pp, params)
    return ClassificationResponse(region=region, delta=res.delta, pt_plus_psi=res.pt_plus_psi, phi=res.phi)
