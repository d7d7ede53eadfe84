from typing import Optional

from fastapi import APIRouter, Depends, Query
from sqlalchemy.orm import Session

from app.schemas import KerrParams, VerifyRequest, VerificationRunList, VerificationRunResponse
from app.core import get_db, settings
from app.services.verification import get_run, list_runs, record_reports, run_suite

router = APIRouter(prefix="/api/verify", tags=["引理验证"])


@router.post("", summary="运行引理验证")
def verify_lemmas(request: VerifyRequest, db: Session = Depends(get_db)):
    """
    运行引理验证并写入运行记录

    control_spin 给出时使用亚极端对照参数 (双特征引理预期失败)。
    """
    if request.control_spin is not None:
        params = KerrParams(spin_ratio=request.control_spin, allow_subextremal=True)
    else:
        params = KerrParams()
    reports = run_suite(request.lemma, request.n_samples, request.seed, params)
    rows = record_reports(db, reports, request.seed, params)
    return {
        "passed": all(r.passed for r in reports),
        "reports": reports,
        "run_ids": [row.id for row in rows],
    }


@router.get("/runs", response_model=VerificationRunList, summary="获取验证记录列表")
def get_runs(
    db: Session = Depends(get_db),
    page: int = Query(1, ge=1, description="页码"),
    size: int = Query(settings.DEFAULT_PAGE_SIZE, ge=1, le=settings.MAX_PAGE_SIZE, description="每页数量"),
    lemma: Optional[str] = Query(None, description="筛选引理"),
):
    total, items = list_runs(db, page, size, lemma)
    return VerificationRunList(total=total, items=[VerificationRunResponse.model_validate(row) for row in items])


@router.get("/runs/{run_id}", response_model=VerificationRunResponse, summary="获取验证记录详情")
def get_run_detail(run_id: int, db: Session = Depends(get_db)):
    return get_run(db, run_id)
