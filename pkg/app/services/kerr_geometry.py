"""
极端 Kerr 时空的符号演算标量

所有函数既接受 PhasePoint, 也接受 8 元序列 (分量可以是浮点数或 Jet)，
phase_calculus 借此对同一闭式表达式做精确微分。
"""

import logging
from typing import NamedTuple, Optional, Sequence, Tuple, Union

from app.core.exceptions import (
    DegenerateFactorizationError,
    HorizonSingularError,
    NonExtremalError,
    PoleSingularError,
    RingSingularError,
    ZeroCovectorError,
)
from app.schemas.kerr import KerrParams, PhasePoint, RegionClass
from app.utils import dual
from app.utils.dual import value_of

logger = logging.getLogger(__name__)

PhaseLike = Union[PhasePoint, Sequence]

# Σ 相对 r_s² 小于该值视为环奇点
RING_EPS = 1e-14


class InverseMetric(NamedTuple):
    """逆度规的非零分量"""
    tt: object
    tphi: object
    rr: object
    thth: object
    phph: object


class Residuals(NamedTuple):
    delta: float
    pt_plus_psi: float
    phi: Optional[float]


def unpack(pp: PhaseLike) -> Tuple:
    """(t, r, θ, φ, p_t, p_r, p_θ, p_φ)"""
    if isinstance(pp, PhasePoint):
        return pp.as_tuple()
    z = tuple(pp)
    if len(z) != 8:
        raise ValueError(f"相空间点需要 8 个分量, 实际 {len(z)} 个")
    return z


def covector_norm(pp: PhaseLike) -> float:
    """‖p‖ := |p_t| + |p_r| + |p_θ| + |p_φ|"""
    z = unpack(pp)
    return sum(abs(value_of(p)) for p in z[4:])


def _check_ring(sig, params: KerrParams):
    if value_of(sig) <= RING_EPS * params.r_s ** 2:
        raise RingSingularError()


def delta(r, params: KerrParams):
    """Δ = r² − r_s r + a² = (r − r₊)(r − r₋)，极端情形即 (r − r_s/2)²"""
    return (r - params.horizon_radius) * (r - params.inner_radius)


def delta_prime(r, params: KerrParams):
    return 2 * r - params.r_s


def sigma(r, theta, params: KerrParams):
    """Σ = r² + a² cos²θ"""
    return r * r + params.a ** 2 * dual.cos(theta) ** 2


def volume_density(r, theta, params: KerrParams):
    """Σ sin θ"""
    sig = sigma(r, theta, params)
    _check_ring(sig, params)
    return sig * dual.sin(theta)


def metric_A(r, theta, params: KerrParams):
    """A = r² + a² + (r_s r / Σ) a² sin²θ"""
    sig = sigma(r, theta, params)
    _check_ring(sig, params)
    a2 = params.a ** 2
    return r * r + a2 + params.r_s * r * a2 * dual.sin(theta) ** 2 / sig


def inverse_metric(r, theta, params: KerrParams) -> InverseMetric:
    """Boyer–Lindquist 逆度规 g^{μν}"""
    sig = sigma(r, theta, params)
    _check_ring(sig, params)
    dlt = delta(r, params)
    if value_of(dlt) == 0.0:
        raise HorizonSingularError()
    s = dual.sin(theta)
    if value_of(s) == 0.0:
        raise PoleSingularError("极轴上 g^{φφ} 无定义")
    c, a, r_s = params.c, params.a, params.r_s
    big_a = metric_A(r, theta, params)
    return InverseMetric(
        tt=-big_a / (c * c * dlt),
        tphi=-a * r_s * r / (c * dlt * sig),
        rr=dlt / sig,
        thth=1.0 / sig,
        phph=(sig - r_s * r) / (sig * dlt * s * s),
    )


def metric_contraction(pp: PhaseLike, params: KerrParams):
    """g^{μν} p_μ p_ν"""
    _, r, th, _, pt, pr, pth, pph = unpack(pp)
    g = inverse_metric(r, th, params)
    return (
        g.tt * pt * pt
        + 2 * g.tphi * pt * pph
        + g.rr * pr * pr
        + g.thth * pth * pth
        + g.phph * pph * pph
    )


def hamiltonian(pp: PhaseLike, params: KerrParams):
    """H = −½ g^{μν} p_μ p_ν"""
    return -0.5 * metric_contraction(pp, params)


def psi(pp: PhaseLike, params: KerrParams):
    """Ψ = (g^{tφ}/g^{tt}) p_φ = a c r_s r p_φ / (Σ A)，跨视界光滑"""
    _, r, th, _, _, _, _, pph = unpack(pp)
    sig = sigma(r, th, params)
    _check_ring(sig, params)
    return params.a * params.c * params.r_s * r * pph / (sig * metric_A(r, th, params))


def capital_phi(pp: PhaseLike, params: KerrParams):
    """
    Φ = (c²/A) [Δ p_r²/Σ + p_θ²/Σ + p_φ²/(A sin²θ)]

    满足 (p_t + Ψ)² − ΔΦ = g^{μν}p_μp_ν / g^{tt}，无需除以 Δ。
    """
    _, r, th, _, _, pr, pth, pph = unpack(pp)
    sig = sigma(r, th, params)
    _check_ring(sig, params)
    big_a = metric_A(r, th, params)
    s = dual.sin(th)
    body = delta(r, params) * pr * pr / sig + pth * pth / sig
    if value_of(s) == 0.0:
        if value_of(pph) != 0.0:
            raise PoleSingularError()
    else:
        body = body + pph * pph / (big_a * s * s)
    return params.c ** 2 * body / big_a


def principal_symbol(pp: PhaseLike, params: KerrParams):
    """归一化主符号 P̃₀ = (p_t + Ψ)² − ΔΦ"""
    z = unpack(pp)
    w = z[4] + psi(z, params)
    return w * w - delta(z[1], params) * capital_phi(z, params)


def full_principal_symbol(pp: PhaseLike, params: KerrParams):
    """P₀ = Σ sinθ · Δ · g^{μν}p_μp_ν (经由度规计算，视界外)"""
    z = unpack(pp)
    return volume_density(z[1], z[2], params) * delta(z[1], params) * metric_contraction(z, params)


def alpha_coefficient(pp: PhaseLike, params: KerrParams):
    """α = √−det g · Δ g^{tt} = −Σ sinθ A / c²，处处非零且跨视界有限"""
    z = unpack(pp)
    r, th = z[1], z[2]
    return -volume_density(r, th, params) * metric_A(r, th, params) / params.c ** 2


def _factor(pp: PhaseLike, params: KerrParams, sign: int, tol: float):
    if not params.is_extremal:
        raise NonExtremalError("P₀± 因式分解仅对极端 Kerr 成立")
    z = unpack(pp)
    phi = capital_phi(z, params)
    if value_of(phi) <= tol * covector_norm(z) ** 2:
        raise DegenerateFactorizationError()
    return z[4] + psi(z, params) + sign * (z[1] - params.horizon_radius) * dual.sqrt(phi)


def factor_plus(pp: PhaseLike, params: KerrParams, tol: float = 1e-12):
    """P₀⁺ = p_t + Ψ + (r − r_s/2)√Φ"""
    return _factor(pp, params, 1, tol)


def factor_minus(pp: PhaseLike, params: KerrParams, tol: float = 1e-12):
    """P₀⁻ = p_t + Ψ − (r − r_s/2)√Φ"""
    return _factor(pp, params, -1, tol)


def subprincipal_symbol(pp: PhaseLike, params: KerrParams) -> complex:
    """c_P = −3iΔΔ′ sinθ p_r − 2iΔ cosθ p_θ，在 r = r_s/2 上恒为零"""
    z = [value_of(v) for v in unpack(pp)]
    r, th, pr, pth = z[1], z[2], z[5], z[6]
    dlt = delta(r, params)
    imag = -3.0 * dlt * delta_prime(r, params) * dual.sin(th) * pr - 2.0 * dlt * dual.cos(th) * pth
    return complex(0.0, float(imag))


def residuals(pp: PhaseLike, params: KerrParams) -> Residuals:
    """(Δ, p_t + Ψ, Φ)"""
    z = [value_of(v) for v in unpack(pp)]
    try:
        phi = float(capital_phi(z, params))
    except PoleSingularError:
        phi = None
    return Residuals(float(delta(z[1], params)), float(z[4] + psi(z, params)), phi)


def classify(pp: PhaseLike, params: KerrParams, tol: float = 1e-8, axis_eps: float = 1e-6) -> RegionClass:
    """
    相空间区域分类

    Args:
        pp: 相空间点
        params: 时空参数
        tol: 相对容差 (视界距离相对 r_s, 动量条件相对 ‖p‖)
        axis_eps: 极轴截断

    Returns:
        RegionClass

    Raises:
        ZeroCovectorError: ‖p‖ = 0
        RingSingularError: Σ = 0
    """
    z = [value_of(v) for v in unpack(pp)]
    norm = covector_norm(z)
    if norm == 0.0:
        raise ZeroCovectorError()
    r, th = z[1], z[2]
    _check_ring(sigma(r, th, params), params)
    if abs(dual.sin(th)) < axis_eps:
        return RegionClass.AXIS_LIMIT

    on_horizon = abs(r - params.horizon_radius) <= tol * params.r_s
    if on_horizon:
        pt, pth, pph = z[4], z[6], z[7]
        if max(abs(pt), abs(pth), abs(pph)) <= tol * norm:
            return RegionClass.CONORMAL_NH
        if abs(pt + psi(z, params)) <= tol * norm:
            return RegionClass.SIGMA2
        return RegionClass.HORIZON_GENERIC
    return RegionClass.EXTERIOR if r > params.horizon_radius else RegionClass.INTERIOR
