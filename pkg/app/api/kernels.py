from fastapi import APIRouter

from app.schemas import BoxcarReport, BoxcarRequest
from app.services.model_kernels import boxcar_report

router = APIRouter(prefix="/api/kernels", tags=["模型核"])


@router.post("/boxcar", response_model=BoxcarReport, summary="boxcar 分解残差")
def boxcar(request: BoxcarRequest):
    return boxcar_report(request.x0, request.xi1, request.cutoff, request.quadrature)
