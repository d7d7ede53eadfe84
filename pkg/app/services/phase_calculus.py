"""
相空间微分演算

梯度与 Hessian 由 app.utils.dual 的前向自动微分给出 (舍入误差级精确)，
有限差分仅作为独立校验。
"""

from typing import Any, Callable, Sequence

import numpy as np

from app.schemas.calculus import Gradient8, Hessian8
from app.schemas.kerr import KerrParams
from app.services.kerr_geometry import PhaseLike, unpack
from app.utils.dual import jet_eval, value_of

ScalarField = Callable[[Sequence[Any], KerrParams], Any]

# 相空间坐标顺序
COORDINATES = ("t", "r", "theta", "phi", "p_t", "p_r", "p_theta", "p_phi")


def _point(pp: PhaseLike) -> np.ndarray:
    return np.array([value_of(v) for v in unpack(pp)], dtype=float)


def coordinate(index: int) -> ScalarField:
    """第 index 个坐标函数"""
    def f(z, params):
        return z[index]
    f.__name__ = COORDINATES[index]
    return f


def gradient_array(f: ScalarField, pp: PhaseLike, params: KerrParams) -> np.ndarray:
    """一阶展开, 返回长度 8 的梯度数组"""
    _, grad, _ = jet_eval(lambda z: f(z, params), _point(pp), order=1)
    return np.asarray(grad, dtype=float)


def hessian_array(f: ScalarField, pp: PhaseLike, params: KerrParams) -> np.ndarray:
    _, _, hess = jet_eval(lambda z: f(z, params), _point(pp), order=2)
    return np.asarray(hess, dtype=float)


def gradient(f: ScalarField, pp: PhaseLike, params: KerrParams) -> Gradient8:
    """
    相空间梯度

    Args:
        f: 标量场 f(z, params)，z 为 8 元序列
        pp: 展开点
        params: 时空参数

    Returns:
        Gradient8
    """
    return Gradient8.from_array(gradient_array(f, pp, params))


def hessian(f: ScalarField, pp: PhaseLike, params: KerrParams) -> Hessian8:
    return Hessian8.from_array(hessian_array(f, pp, params))


def poisson_bracket(f: ScalarField, g: ScalarField, pp: PhaseLike, params: KerrParams) -> float:
    """{f, g} = Σ (∂_{p_μ}f ∂_{q^μ}g − ∂_{q^μ}f ∂_{p_μ}g)"""
    df = gradient_array(f, pp, params)
    dg = gradient_array(g, pp, params)
    return float(np.dot(df[4:], dg[:4]) - np.dot(df[:4], dg[4:]))


def hamiltonian_field_of(f: ScalarField, pp: PhaseLike, params: KerrParams) -> np.ndarray:
    """f 生成的 Hamilton 向量场 (q̇, ṗ) = (∂_p f, −∂_q f)"""
    df = gradient_array(f, pp, params)
    return np.concatenate([df[4:], -df[:4]])


def finite_difference_gradient(f: ScalarField, pp: PhaseLike, params: KerrParams, step: float = 1e-5) -> np.ndarray:
    """中心差分 + 一次 Richardson 外推 (独立校验用)"""
    x = _point(pp)

    def central(h):
        out = np.zeros(8)
        for i in range(8):
            e = np.zeros(8)
            e[i] = h
            out[i] = (float(f(x + e, params)) - float(f(x - e, params))) / (2 * h)
        return out

    d_h, d_half = central(step), central(step / 2)
    return (4 * d_half - d_h) / 3


def finite_difference_hessian(f: ScalarField, pp: PhaseLike, params: KerrParams, step: float = 1e-4) -> np.ndarray:
    x = _point(pp)

    def central(h):
        out = np.zeros((8, 8))
        for i in range(8):
            for j in range(i, 8):
                ei = np.zeros(8)
                ej = np.zeros(8)
                ei[i] = h
                ej[j] = h
                val = (
                    float(f(x + ei + ej, params))
                    - float(f(x + ei - ej, params))
                    - float(f(x - ei + ej, params))
                    + float(f(x - ei - ej, params))
                ) / (4 * h * h)
                out[i, j] = out[j, i] = val
        return out

    h_h, h_half = central(step), central(step / 2)
    return (4 * h_half - h_h) / 3
