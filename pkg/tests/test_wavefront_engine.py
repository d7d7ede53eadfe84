import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import ConormalEncounterError, UnclassifiableSampleError
from app.schemas.flow import IntegratorConfig
from app.schemas.kerr import PhasePoint, RegionClass
from app.schemas.wavefront import BranchEventType, BranchLabel, Channel, PropagationConfig
from app.services import kerr_geometry as kg
from app.services import wavefront_engine as wf
from app.services.bicharacteristic_flow import integrate, normalize_null
from app.services.horizon_dynamics import horizon_flow_map
from tests.conftest import SIGMA2_EXAMPLE, exact_sigma2


@pytest.fixture
def icfg():
    return IntegratorConfig()


@pytest.fixture
def outgoing(params):
    return normalize_null(PhasePoint.from_array([0.0, 6.0, np.pi / 2, 0.0, 0.0, -1.0, 0.0, 0.5]), params)


@pytest.fixture
def sigma2_seed():
    return PhasePoint.from_array(SIGMA2_EXAMPLE)


# -- 传播 ------------------------------------------------------------------

def test_exterior_ray_stays_principal(params, icfg, outgoing):
    result = wf.propagate([outgoing], PropagationConfig(duration=10.0), icfg, params)
    assert result.initial_ids == [0]
    assert result.final_ids == [1]
    leaf = result.final_samples[0]
    assert leaf.channel == Channel.PRINCIPAL
    assert leaf.termination == "SpanReached"
    expected = integrate(outgoing, (0.0, 10.0), icfg, params).end
    assert_allclose(leaf.point.as_array(), expected.as_array(), rtol=0, atol=0)
    assert result.events == []
    assert result.census.by_channel == {"Principal": 1, "HorizonOrbit": 0}
    assert result.census.max_principal_drift < 1e-9
    [segment] = result.census.segment_drifts
    assert segment.sample_id == 0
    assert result.census.max_principal_drift == segment.worst


def test_sigma2_seed_branches(params, icfg, sigma2_seed):
    result = wf.propagate([sigma2_seed], PropagationConfig(duration=4.0), icfg, params)
    leaves = {smp.branch: smp for smp in result.final_samples}
    assert set(leaves) == {BranchLabel.ORBIT, BranchLabel.EXIT_PLUS, BranchLabel.EXIT_MINUS}
    for smp in leaves.values():
        assert smp.weight == pytest.approx(1.0 / 3.0)
        assert smp.channel == Channel.HORIZON_ORBIT
        assert smp.parent_id == 0
    assert sum(smp.weight for smp in leaves.values()) == pytest.approx(1.0)

    orbit = leaves[BranchLabel.ORBIT].point
    assert orbit.base.t == 4.0
    assert orbit.base.phi == 2.0

    sp = exact_sigma2(SIGMA2_EXAMPLE)
    assert_allclose(leaves[BranchLabel.EXIT_PLUS].point.as_array(),
                    horizon_flow_map(sp, 4.0, 0.0, -1.0, params).as_array(), atol=1e-8)
    assert_allclose(leaves[BranchLabel.EXIT_MINUS].point.as_array(),
                    horizon_flow_map(sp, 4.0, 0.0, 1.0, params).as_array(), atol=1e-8)

    leave_events = [e for e in result.events if e.type != BranchEventType.ENTER_SIGMA2]
    assert len(leave_events) == 2
    assert all(e.s == 0.0 for e in leave_events)
    assert {e.type for e in leave_events} == {BranchEventType.LEAVE_VIA_PLUS, BranchEventType.LEAVE_VIA_MINUS}


def test_census_reports_drift_per_segment(params, icfg, outgoing, sigma2_seed):
    other = normalize_null(PhasePoint.from_array([0.0, 8.0, np.pi / 3, 1.0, 0.0, -0.5, 0.2, -0.4]), params)
    result = wf.propagate([outgoing, sigma2_seed, other], PropagationConfig(duration=5.0), icfg, params)
    drifts = result.census.segment_drifts
    assert [d.sample_id for d in drifts] == [result.initial_ids[0], result.initial_ids[2]]
    for d in drifts:
        assert d.worst == max(d.max_H_drift, d.max_pt_drift, d.max_pphi_drift)
        assert d.worst < 1e-9
    assert result.census.max_principal_drift == max(d.worst for d in drifts)


def test_branch_mask(params, icfg, sigma2_seed):
    cfg = PropagationConfig(duration=4.0, branch_mask=[BranchLabel.ORBIT])
    result = wf.propagate([sigma2_seed], cfg, icfg, params)
    assert len(result.final_ids) == 1
    assert result.final_samples[0].weight == 1.0
    assert result.events == []


def test_branch_mask_rejects_root():
    with pytest.raises(ValueError):
        PropagationConfig(branch_mask=[BranchLabel.ROOT])
    with pytest.raises(ValueError):
        PropagationConfig(branch_mask=[BranchLabel.ORBIT, BranchLabel.ORBIT])


def test_horizon_generic_seed_is_leaf(params, icfg):
    pp = PhasePoint.from_array([0.0, 1.0, np.pi / 2, 0.0, 0.0, 0.5, 0.0, 1.0])
    result = wf.propagate([pp], PropagationConfig(), icfg, params)
    assert result.final_ids == [0]
    assert result.samples[0].region == RegionClass.HORIZON_GENERIC
    assert result.samples[0].termination == "HorizonGeneric"


def test_ingoing_ray_ends_horizon_generic(params, icfg):
    start = normalize_null(PhasePoint.from_array([0.0, 3.0, np.pi / 2, 0.0, 0.0, 1.0, 0.0, 0.2]), params)
    result = wf.propagate([start], PropagationConfig(duration=50.0), icfg, params)
    leaf = result.final_samples[0]
    assert leaf.region == RegionClass.HORIZON_GENERIC
    assert leaf.channel == Channel.PRINCIPAL
    assert result.census.by_termination == {"HorizonGeneric": 1}


# p_t = −(c/r_s)p_φ 的赤道入射零射线: 径向势 (r−1)²r(r+2) 无转折点, 渐近趋于 Σ₂
SUPERRADIANT_RAY = [0.0, 3.0, np.pi / 2, 0.0, -1.0, np.sqrt(60.0) / 4.0, 0.0, 2.0]


def test_ingoing_ray_enters_sigma2(params, icfg):
    start = PhasePoint.from_array(SUPERRADIANT_RAY)
    assert abs(float(kg.hamiltonian(start, params))) < 1e-12
    duration = 30.0
    result = wf.propagate([start], PropagationConfig(duration=duration), icfg, params)

    entries = [e for e in result.events if e.type == BranchEventType.ENTER_SIGMA2]
    assert len(entries) == 1
    entered = result.by_id()[entries[0].sample_id]
    assert entered.parent_id == 0
    assert entered.channel == Channel.HORIZON_ORBIT
    assert entered.region == RegionClass.SIGMA2
    assert entered.point.base.r == params.horizon_radius
    assert abs(entered.point.mom.p_t + float(kg.psi(entered.point, params))) < 1e-12
    assert 0.0 < entered.s < duration

    leaves = {smp.branch: smp for smp in result.final_samples}
    assert set(leaves) == {BranchLabel.ORBIT, BranchLabel.EXIT_PLUS, BranchLabel.EXIT_MINUS}
    for smp in leaves.values():
        assert smp.parent_id == entered.id
        assert smp.weight == pytest.approx(1.0 / 3.0)
        assert wf.lineage(result, smp.id) == [smp.id, entered.id, 0]
    assert result.census.by_channel == {"Principal": 0, "HorizonOrbit": 3}

    orbit = leaves[BranchLabel.ORBIT]
    assert orbit.s == duration
    assert orbit.point.base.t == pytest.approx(entered.point.base.t + (duration - entered.s), rel=1e-12)

    leave_events = [e for e in result.events if e.type != BranchEventType.ENTER_SIGMA2]
    assert len(leave_events) == 2
    assert all(e.s == entered.s for e in leave_events)


def test_tight_entry_tolerance_rejects_same_ray(params, icfg):
    start = PhasePoint.from_array(SUPERRADIANT_RAY)
    result = wf.propagate([start], PropagationConfig(duration=30.0, entry_tol=1e-9), icfg, params)
    assert [e.type for e in result.events] == []
    assert result.census.by_termination == {"HorizonGeneric": 1}


def test_unclassifiable_and_conormal_seeds(params, icfg):
    cfg = PropagationConfig()
    with pytest.raises(UnclassifiableSampleError):
        wf.propagate([PhasePoint.from_array([0.0, 3.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])], cfg, icfg, params)
    with pytest.raises(UnclassifiableSampleError):
        wf.propagate([PhasePoint.from_array([0.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])], cfg, icfg, params)
    with pytest.raises(ConormalEncounterError):
        wf.propagate([PhasePoint.from_array([0.0, 1.0, np.pi / 2, 0.0, 0.0, 1.0, 0.0, 0.0])], cfg, icfg, params)


def test_zero_duration(params, icfg, sigma2_seed):
    result = wf.propagate([sigma2_seed], PropagationConfig(duration=0.0), icfg, params)
    assert result.final_ids == [0]


def test_lineage_and_rows(params, icfg, sigma2_seed):
    result = wf.propagate([sigma2_seed], PropagationConfig(duration=2.0), icfg, params)
    for leaf_id in result.final_ids:
        assert wf.lineage(result, leaf_id) == [leaf_id, 0]
    rows = wf.result_rows(result)
    assert len(rows) == len(result.samples)
    assert all(len(row) == len(wf.PROPAGATION_CSV_HEADER) for row in rows)
    assert rows[0][1] == ""


# -- 进入 Σ₂ ---------------------------------------------------------------

def test_enter_sigma2(params):
    cfg = PropagationConfig()
    near = PhasePoint.from_array([5.0, 1.0 + 1e-8, np.pi / 2, 0.3, -1.0, 40.0, 0.0, 2.0])
    sp = wf.enter_sigma2(near, 1.0, cfg, params)
    assert sp.point.base.r == params.horizon_radius
    assert_allclose(sp.point.mom.p_t, -1.0, rtol=1e-14)
    assert sp.point.mom.p_r == 40.0

    generic = near.replace(p_t=0.0)
    assert wf.enter_sigma2(generic, 1.0, cfg, params) is None

    with pytest.raises(ConormalEncounterError):
        wf.enter_sigma2(PhasePoint.from_array([0.0, 1.0 + 1e-8, np.pi / 2, 0.0, 0.0, 5.0, 0.0, 0.0]), 1.0, cfg, params)


def test_principal_velocity_vanishes_on_sigma2(params, sigma2_seed):
    assert_allclose(wf.principal_velocity(sigma2_seed, params), np.zeros(8), atol=1e-13)


# -- 关系复合 ---------------------------------------------------------------

@pytest.fixture
def sources():
    return [exact_sigma2(SIGMA2_EXAMPLE), exact_sigma2([0.0, 1.0, np.pi / 3, 0.0, -1.0, 0.0, 0.0, 2.0])]


def test_diagonal_is_left_identity(params, sources):
    rel = wf.flowout_relation(sources, [0.0, 1.0, 2.0], 1.0, params)
    composed = wf.compose_relations(wf.diagonal_relation(rel.pairs[:, 0, :]), rel)
    assert len(composed) == len(rel)
    assert wf.relations_agree(composed, rel, 1e-9)


def test_disjoint_composition_is_empty(params, sources):
    rel = wf.flowout_relation(sources, [0.0, 1.0], 1.0, params)
    far = wf.diagonal_relation([PhasePoint.from_array([0.0, 5.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0])])
    assert wf.compose_relations(far, rel).empty
    assert wf.compose_relations(far, wf.diagonal_relation([])).empty
    assert wf.relations_agree(wf.diagonal_relation([]), wf.diagonal_relation([]), 1e-9)


def test_flowout_after_momentum_fibre(params, sources):
    s_grid, s2_grid = [0.0, 1.0, 2.5], [0.0, 1.0, 2.0]
    fibre = wf.momentum_fibre_relation(sources, s2_grid)
    flow = wf.flowout_relation(wf.relation_sources(fibre), s_grid, 1.0, params)
    composed = wf.compose_relations(flow, fibre)
    assert len(composed) == len(sources) * len(s_grid) * len(s2_grid)

    expected = []
    for sp in sources:
        for s in s_grid:
            for s2 in s2_grid:
                expected.append([horizon_flow_map(sp, s, s2, 1.0, params).as_array(), sp.point.as_array()])
    assert wf.relations_agree(composed, wf.SampledRelation(np.asarray(expected)), 1e-8)


def test_composition_is_associative(params, sources):
    tol = 1e-6
    fibre = wf.momentum_fibre_relation(sources, [0.0, 1.0])
    flow = wf.flowout_relation(wf.relation_sources(fibre), [0.0, 1.5], 1.0, params)
    diag = wf.diagonal_relation(flow.pairs[:, 0, :])
    left = wf.compose_relations(wf.compose_relations(diag, flow, tol), fibre, tol)
    right = wf.compose_relations(diag, wf.compose_relations(flow, fibre, tol), tol)
    assert not left.empty
    assert wf.relations_agree(left, right, 2 * tol)
