"""
引理验证套件与运行记录
"""

import logging
from typing import List, Optional, Tuple

from sqlalchemy.orm import Session

from app.core.exceptions import ConfigurationError, NotFoundException
from app.models import VerificationRun
from app.schemas.horizon import LemmaName, LemmaReport
from app.schemas.kerr import KerrParams, ToleranceConfig
from app.services import horizon_dynamics as hd
from app.services import sampling
from app.utils.export import ExportUtil

logger = logging.getLogger(__name__)

LEMMA_ORDER = [LemmaName.DOUBLE_CHAR, LemmaName.INVOLUTIVE, LemmaName.HESSIAN_RANK, LemmaName.SUBPRINCIPAL]


def select_lemmas(selector: str) -> List[LemmaName]:
    """"all" 或单个引理名"""
    if selector == "all":
        return list(LEMMA_ORDER)
    try:
        return [LemmaName(selector)]
    except ValueError:
        raise ConfigurationError(f"未知的引理: {selector}")


def run_lemma(
    lemma: LemmaName,
    n_samples: int,
    seed: int,
    params: KerrParams,
    tol: Optional[ToleranceConfig] = None,
) -> LemmaReport:
    """
    用带种子的样本运行单个引理验证

    Raises:
        ConfigurationError: n_samples = 0
    """
    if n_samples <= 0:
        raise ConfigurationError("n_samples = 0: 空报告 (empty report)")
    tol = tol or ToleranceConfig()
    rng = sampling.make_rng(seed)

    if lemma == LemmaName.DOUBLE_CHAR:
        return hd.verify_double_characteristics(
            sampling.sigma2_points(rng, n_samples, params),
            sampling.horizon_points(rng, n_samples, params),
            params,
            tol,
        )
    if lemma == LemmaName.INVOLUTIVE:
        return hd.verify_involutivity(
            sampling.random_phase_points(rng, 2 * n_samples, params),
            sampling.sigma2_points(rng, n_samples, params),
            params,
            tol,
        )
    if lemma == LemmaName.HESSIAN_RANK:
        return hd.verify_hessian_rank(sampling.sigma2_points(rng, n_samples, params), params, tol)
    return hd.verify_subprincipal(sampling.horizon_grid(params, axis_eps=tol.axis_eps), params)


def run_suite(selector: str, n_samples: int, seed: int, params: KerrParams, tol: Optional[ToleranceConfig] = None) -> List[LemmaReport]:
    reports = [run_lemma(lemma, n_samples, seed, params, tol) for lemma in select_lemmas(selector)]
    failed = [r.lemma.value for r in reports if not r.passed]
    if failed:
        logger.warning(f"引理验证未通过: {', '.join(failed)}")
    return reports


def record_reports(db: Session, reports: List[LemmaReport], seed: int, params: KerrParams) -> List[VerificationRun]:
    """写入运行记录"""
    rows = []
    for report in reports:
        row = VerificationRun(
            lemma=report.lemma.value,
            n_samples=report.n_samples,
            seed=seed,
            max_residual=report.max_residual,
            passed=report.passed,
            params_json=ExportUtil.dumps(params).strip(),
            report_json=ExportUtil.dumps(report).strip(),
        )
        db.add(row)
        rows.append(row)
    db.commit()
    for row in rows:
        db.refresh(row)
    logger.info(f"已记录 {len(rows)} 条验证结果")
    return rows


def list_runs(db: Session, page: int = 1, size: int = 20, lemma: Optional[str] = None) -> Tuple[int, List[VerificationRun]]:
    """分页查询运行记录 (新记录在前)"""
    query = db.query(VerificationRun)
    if lemma:
        query = query.filter(VerificationRun.lemma == lemma)
    total = query.count()
    items = query.order_by(VerificationRun.id.desc()).offset((page - 1) * size).limit(size).all()
    return total, items


def get_run(db: Session, run_id: int) -> VerificationRun:
    """按 id 获取运行记录"""
    row = db.query(VerificationRun).filter(VerificationRun.id == run_id).first()
    if not row:
        raise NotFoundException("验证记录不存在")
    return row
