"""
波前样本的双通道传播

视界外沿 H 流传播 (Principal 通道)；在双特征簇 Σ₂ 上切换为视界轨道
(HorizonOrbit 通道)，并按分支掩码分裂为 orbit / exit_plus / exit_minus。
只传播几何 (点云与权重)，不传播振幅。
"""

import logging
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from app.core.exceptions import (
    ConormalDegenerateError,
    ConormalEncounterError,
    UnclassifiableSampleError,
    ZeroCovectorError,
)
from app.schemas.flow import IntegratorConfig, Termination
from app.schemas.horizon import Sigma2Point, Sigma2Residuals
from app.schemas.kerr import KerrParams, PhasePoint, RegionClass
from app.schemas.wavefront import (
    BranchEvent,
    BranchEventType,
    BranchLabel,
    Channel,
    ChannelCensus,
    PropagationConfig,
    PropagationResult,
    SegmentDrift,
    WavefrontSample,
)
from app.services import kerr_geometry as kg
from app.services.bicharacteristic_flow import conserved_report, integrate, integrate_generator
from app.services.horizon_dynamics import horizon_flow_map, snap_to_sigma2
from app.services.phase_calculus import hamiltonian_field_of

logger = logging.getLogger(__name__)

PROPAGATION_CSV_HEADER = (
    "id", "parent_id", "channel", "branch", "region", "s", "weight",
    "t", "r", "theta", "phi", "p_t", "p_r", "p_theta", "p_phi",
)

_EXIT_GENERATORS = {
    BranchLabel.EXIT_PLUS: (kg.factor_plus, BranchEventType.LEAVE_VIA_PLUS),
    BranchLabel.EXIT_MINUS: (kg.factor_minus, BranchEventType.LEAVE_VIA_MINUS),
}


def principal_velocity(pp, params: KerrParams) -> np.ndarray:
    """P̃₀ 的 Hamilton 场；在 Σ₂ 上为零 (该处没有 Principal 流)"""
    return hamiltonian_field_of(kg.principal_symbol, pp, params)


def _snap(pp: PhasePoint, params: KerrParams, phi_tol: float = 1e-12) -> Sigma2Point:
    try:
        return snap_to_sigma2(pp, params, phi_tol)
    except ConormalDegenerateError as e:
        raise ConormalEncounterError(e.message)


def enter_sigma2(
    end: PhasePoint,
    start_norm: float,
    cfg: PropagationConfig,
    params: KerrParams,
    phi_tol: float = 1e-12,
) -> Optional[Sigma2Point]:
    """
    HorizonApproach 终点是否进入 Σ₂

    |p_t + Ψ| ≤ entry_tol·‖p(start)‖ 时投影到 Σ₂ (snap_to_sigma2)，否则返回 None。

    Raises:
        ConormalEncounterError: 投影点落在 N*ℋ 上
    """
    defect = float(end.mom.p_t + kg.psi(end, params))
    if abs(defect) > cfg.entry_tol * start_norm:
        return None
    m = end.mom
    if max(abs(m.p_t), abs(m.p_theta), abs(m.p_phi)) <= cfg.classify_tol * kg.covector_norm(end):
        raise ConormalEncounterError()
    return _snap(end, params, phi_tol)


class _Engine:
    """单次传播的谱系记账"""

    def __init__(self, cfg: PropagationConfig, integrator_cfg: IntegratorConfig, params: KerrParams):
        self.cfg = cfg
        self.integrator_cfg = integrator_cfg
        self.params = params
        self.samples: List[WavefrontSample] = []
        self.events: List[BranchEvent] = []
        self.drifts: List[SegmentDrift] = []
        self.parents = set()

    def add(self, **fields) -> WavefrontSample:
        smp = WavefrontSample(id=len(self.samples), **fields)
        self.samples.append(smp)
        if smp.parent_id is not None:
            self.parents.add(smp.parent_id)
        return smp

    def classify(self, pp: PhasePoint) -> RegionClass:
        try:
            region = kg.classify(pp, self.params, tol=self.cfg.classify_tol)
        except ZeroCovectorError:
            raise UnclassifiableSampleError("零余切向量 (zero covector) 无法分类")
        if region == RegionClass.CONORMAL_NH:
            raise ConormalEncounterError()
        if region == RegionClass.AXIS_LIMIT:
            raise UnclassifiableSampleError("样本位于极轴截断内")
        return region

    def seed(self, pp: PhasePoint) -> WavefrontSample:
        region = self.classify(pp)
        if region == RegionClass.SIGMA2:
            sp = _snap(pp, self.params)
            root = self.add(point=sp.point, region=region, channel=Channel.HORIZON_ORBIT)
            self.branch(root, sp, 0.0)
            return root

        if region == RegionClass.HORIZON_GENERIC:
            # H 流在 Δ = 0 上无定义
            root = self.add(point=pp, region=region, channel=Channel.PRINCIPAL, termination="HorizonGeneric")
            logger.warning(f"样本 {root.id} 位于视界但不在 Σ₂ 上, 不传播")
            return root
        root = self.add(point=pp, region=region, channel=Channel.PRINCIPAL)
        self.principal(root)
        return root

    def principal(self, root: WavefrontSample):
        traj = integrate(root.point, (0.0, self.cfg.duration), self.integrator_cfg, self.params)
        report = conserved_report(traj)
        self.drifts.append(SegmentDrift(sample_id=root.id, max_H_drift=report.max_H_drift,
                                        max_pt_drift=report.max_pt_drift, max_pphi_drift=report.max_pphi_drift))
        end, s_end = traj.end, traj.samples[-1].s

        if traj.termination == Termination.HORIZON_APPROACH:
            sp = enter_sigma2(end, kg.covector_norm(root.point), self.cfg, self.params)
            if sp is None:
                self.add(point=end, region=RegionClass.HORIZON_GENERIC, channel=Channel.PRINCIPAL,
                         parent_id=root.id, weight=root.weight, s=s_end, termination="HorizonGeneric")
                return
            entered = self.add(point=sp.point, region=RegionClass.SIGMA2, channel=Channel.HORIZON_ORBIT,
                               parent_id=root.id, weight=root.weight, s=s_end)
            self.events.append(BranchEvent(s=s_end, sample_id=entered.id, type=BranchEventType.ENTER_SIGMA2))
            logger.info(f"样本 {root.id} 在 s = {s_end:.6g} 进入 Σ₂")
            self.branch(entered, sp, s_end)
            return

        region = kg.classify(end, self.params, tol=self.cfg.classify_tol)
        self.add(point=end, region=region, channel=Channel.PRINCIPAL, parent_id=root.id,
                 weight=root.weight, s=s_end, termination=traj.termination.value)

    def branch(self, node: WavefrontSample, sp: Sigma2Point, s_entry: float):
        remaining = self.cfg.duration - s_entry
        if remaining <= 0 or not self.cfg.branch_mask:
            return
        weight = node.weight / len(self.cfg.branch_mask)
        for label in self.cfg.branch_mask:
            if label == BranchLabel.ORBIT:
                end = horizon_flow_map(sp, remaining, 0.0, self.cfg.channel_alpha, self.params, self.integrator_cfg)
                self.add(point=end, region=RegionClass.SIGMA2, channel=Channel.HORIZON_ORBIT, parent_id=node.id,
                         branch=label, weight=weight, s=self.cfg.duration, termination=Termination.SPAN_REACHED.value)
                continue
            generator, event_type = _EXIT_GENERATORS[label]
            traj = integrate_generator(generator, sp.point, (0.0, remaining), self.integrator_cfg, self.params)
            end = traj.end
            child = self.add(point=end, region=self.classify(end), channel=Channel.HORIZON_ORBIT, parent_id=node.id,
                             branch=label, weight=weight, s=s_entry + traj.samples[-1].s,
                             termination=traj.termination.value)
            self.events.append(BranchEvent(s=s_entry, sample_id=child.id, type=event_type))
        logger.debug(f"节点 {node.id} 分裂为 {len(self.cfg.branch_mask)} 个分支")


def propagate(
    samples: Sequence[PhasePoint],
    cfg: PropagationConfig,
    integrator_cfg: IntegratorConfig,
    params: KerrParams,
) -> PropagationResult:
    """
    传播一组波前样本

    Args:
        samples: 初始样本 (Principal 通道的样本须满足 H = 0)
        cfg: 传播配置
        integrator_cfg: 积分器配置
        params: 时空参数

    Returns:
        PropagationResult (含 census)

    Raises:
        UnclassifiableSampleError: 零余切向量或极轴样本
        ConormalEncounterError: 样本或进入点位于 N*ℋ
    """
    engine = _Engine(cfg, integrator_cfg, params)
    initial_ids = [engine.seed(pp).id for pp in samples]
    final_ids = [smp.id for smp in engine.samples if smp.id not in engine.parents]
    result = PropagationResult(
        samples=engine.samples,
        events=engine.events,
        initial_ids=initial_ids,
        final_ids=final_ids,
        segment_drifts=engine.drifts,
    )
    result.census = channel_census(result)
    logger.info(f"传播完成: {len(initial_ids)} 个初始样本, {len(final_ids)} 个叶子, {len(engine.events)} 个分支事件")
    return result


def channel_census(result: PropagationResult) -> ChannelCensus:
    """叶子按通道、分支与终止原因计数"""
    leaves = result.final_samples
    by_channel: Dict[str, int] = {c.value: 0 for c in Channel}
    by_branch: Dict[str, int] = {b.value: 0 for b in BranchLabel}
    by_termination: Dict[str, int] = {}
    for smp in leaves:
        by_channel[smp.channel.value] += 1
        by_branch[smp.branch.value] += 1
        key = smp.termination or "None"
        by_termination[key] = by_termination.get(key, 0) + 1
    return ChannelCensus(
        total=len(result.samples),
        leaf_count=len(leaves),
        by_channel=by_channel,
        by_branch=by_branch,
        by_termination=by_termination,
        segment_drifts=result.segment_drifts,
        max_principal_drift=max((d.worst for d in result.segment_drifts), default=0.0),
    )


def lineage(result: PropagationResult, sample_id: int) -> List[int]:
    """从样本回溯到初始样本的 id 链"""
    index = result.by_id()
    chain = [sample_id]
    while index[chain[-1]].parent_id is not None:
        chain.append(index[chain[-1]].parent_id)
    return chain


def result_rows(result: PropagationResult) -> List[list]:
    rows = []
    for smp in result.samples:
        rows.append([
            smp.id,
            "" if smp.parent_id is None else smp.parent_id,
            smp.channel.value,
            smp.branch.value,
            smp.region.value,
            smp.s,
            smp.weight,
            *[float(v) for v in smp.point.as_tuple()],
        ])
    return rows


# ---------------------------------------------------------------------------
# 采样的典范关系
# ---------------------------------------------------------------------------


class SampledRelation(NamedTuple):
    """点对集合 {(λ₁, λ₂)}，pairs 形状为 (N, 2, 8)"""
    pairs: np.ndarray

    @property
    def empty(self) -> bool:
        return self.pairs.shape[0] == 0

    def __len__(self) -> int:
        return int(self.pairs.shape[0])


def _relation(pairs: List) -> SampledRelation:
    if not pairs:
        return SampledRelation(np.zeros((0, 2, 8)))
    return SampledRelation(np.asarray(pairs, dtype=float).reshape(-1, 2, 8))


def normalized_coordinates(points: np.ndarray) -> np.ndarray:
    """动量除以 ‖p‖ 后的 8 维坐标 (锥不变度量)"""
    pts = np.atleast_2d(np.asarray(points, dtype=float)).copy()
    norm = np.abs(pts[:, 4:]).sum(axis=1, keepdims=True)
    norm[norm == 0.0] = 1.0
    pts[:, 4:] /= norm
    return pts


def diagonal_relation(points: Sequence) -> SampledRelation:
    """采样的恒等关系 Λ₀"""
    return _relation([[kg.unpack(p), kg.unpack(p)] for p in points])


def momentum_fibre_relation(sources: Sequence[Sigma2Point], s2_grid: Sequence[float]) -> SampledRelation:
    """C_{D₀} 型关系: λ ↦ λ + s₂ ∂_{p_r}"""
    pairs = []
    for sp in sources:
        z = sp.point.as_array()
        for s2 in s2_grid:
            w = z.copy()
            w[5] += float(s2)
            pairs.append([w, z])
    return _relation(pairs)


def flowout_relation(
    sources: Sequence[Sigma2Point],
    s_grid: Sequence[float],
    channel_alpha: float,
    params: KerrParams,
    cfg: Optional[IntegratorConfig] = None,
) -> SampledRelation:
    """Λ_{D₁} 型关系 {(map(λ, s), λ)}"""
    pairs = []
    for sp in sources:
        z = sp.point.as_array()
        for s in s_grid:
            end = horizon_flow_map(sp, float(s), 0.0, channel_alpha, params, cfg)
            pairs.append([end.as_array(), z])
    return _relation(pairs)


def relation_sources(relation: SampledRelation) -> List[Sigma2Point]:
    """关系左端点 (已在 Σ₂ 上) 作为下一步的源点"""
    zero = Sigma2Residuals(dr=0.0, pt_plus_psi=0.0)
    return [Sigma2Point(point=PhasePoint.from_array(z), residuals=zero) for z in relation.pairs[:, 0, :]]


def compose_relations(a: SampledRelation, b: SampledRelation, match_tol: float = 1e-6) -> SampledRelation:
    """
    A ∘ B = {(λ₁, λ₃) : (λ₁, λ₂) ∈ A, (λ₂′, λ₃) ∈ B, λ₂ ≈ λ₂′}

    匹配使用 cKDTree 的最大范数 (动量按 ‖p‖ 归一)。结果为空时记录警告 (EmptyComposition)。
    """
    if a.empty or b.empty:
        logger.warning("关系复合为空 (EmptyComposition): 输入为空")
        return _relation([])
    tree = cKDTree(normalized_coordinates(b.pairs[:, 0, :]))
    hits = tree.query_ball_point(normalized_coordinates(a.pairs[:, 1, :]), r=match_tol, p=np.inf)
    pairs = [[a.pairs[i, 0], b.pairs[j, 1]] for i, matches in enumerate(hits) for j in sorted(matches)]
    if not pairs:
        logger.warning("关系复合为空 (EmptyComposition)")
    return _relation(pairs)


def relations_agree(a: SampledRelation, b: SampledRelation, tol: float) -> bool:
    """两个采样关系在 tol 内作为集合相等"""
    if a.empty or b.empty:
        return a.empty and b.empty

    def flat(rel: SampledRelation) -> np.ndarray:
        return np.hstack([normalized_coordinates(rel.pairs[:, 0, :]), normalized_coordinates(rel.pairs[:, 1, :])])

    fa, fb = flat(a), flat(b)
    da, _ = cKDTree(fb).query(fa, p=np.inf)
    db, _ = cKDTree(fa).query(fb, p=np.inf)
    return bool(np.max(da) <= tol and np.max(db) <= tol)
