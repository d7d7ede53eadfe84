"""
二阶前向自动微分

Jet 携带 (值, 梯度, Hessian)，按截断 Taylor 级数规则运算，
等价于嵌套的对偶数 (dual numbers)。只需一阶导数时可省略 Hessian，以减少开销。
"""

from typing import Callable, Iterable, List, Optional, Sequence, Union

import numpy as np

Number = Union[float, int, np.floating]


class Jet:
    """标量的二阶截断 Taylor 展开"""

    __slots__ = ("val", "grad", "hess")
    # 让 numpy 标量与 Jet 运算时回退到 Jet 的反射运算符
    __array_ufunc__ = None

    def __init__(self, val: float, grad: np.ndarray, hess: Optional[np.ndarray] = None):
        self.val = float(val)
        self.grad = grad
        self.hess = hess

    @classmethod
    def variables(cls, values: Sequence[float], order: int = 2) -> List["Jet"]:
        """
        以 values 为展开点创建自变量

        Args:
            values: 展开点坐标
            order: 1 只计算梯度, 2 同时计算 Hessian

        Returns:
            自变量 Jet 列表
        """
        n = len(values)
        eye = np.eye(n)
        return [
            cls(v, eye[i].copy(), np.zeros((n, n)) if order >= 2 else None)
            for i, v in enumerate(values)
        ]

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    def _const(self, c: Number) -> "Jet":
        n = self.grad.shape[0]
        return Jet(c, np.zeros(n), None if self.hess is None else np.zeros((n, n)))

    def _lift(self, other) -> "Jet":
        return other if isinstance(other, Jet) else self._const(other)

    def chain(self, f0: float, f1: float, f2: float) -> "Jet":
        """复合一元函数 f: 已知 f(v), f'(v), f''(v)"""
        grad = f1 * self.grad
        hess = None
        if self.hess is not None:
            hess = f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        return Jet(f0, grad, hess)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val + other, self.grad, self.hess)
        hess = None if self.hess is None or other.hess is None else self.hess + other.hess
        return Jet(self.val + other.val, self.grad + other.grad, hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val * other, self.grad * other, None if self.hess is None else self.hess * other)
        grad = self.grad * other.val + other.grad * self.val
        hess = None
        if self.hess is not None and other.hess is not None:
            cross = np.outer(self.grad, other.grad)
            hess = self.hess * other.val + other.hess * self.val + cross + cross.T
        return Jet(self.val * other.val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        v = self.val
        if v == 0.0:
            raise ZeroDivisionError("Jet 除以零")
        return self.chain(1.0 / v, -1.0 / v ** 2, 2.0 / v ** 3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if isinstance(n, Jet):
            raise TypeError("Jet 指数不支持")
        v = self.val
        if n == 0:
            return self._const(1.0)
        if n == 1:
            return self
        if n == 2:
            return self * self
        return self.chain(v ** n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2))

    def __abs__(self):
        return -self if self.val < 0 else self

    def __float__(self):
        return self.val

    # 比较只作用于值
    def __lt__(self, other):
        return self.val < value_of(other)

    def __le__(self, other):
        return self.val <= value_of(other)

    def __gt__(self, other):
        return self.val > value_of(other)

    def __ge__(self, other):
        return self.val >= value_of(other)

    def __repr__(self):
        return f"Jet(val={self.val!r}, grad={self.grad!r})"


def value_of(x) -> float:
    """取标量值 (Jet 或数)"""
    return x.val if isinstance(x, Jet) else float(x)


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return x.chain(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return x.chain(c, -s, -c)
    return np.cos(x)


def sqrt(x):
    if isinstance(x, Jet):
        v = x.val
        if v <= 0.0:
            raise ValueError(f"sqrt 在 {v} 处不可微")
        s = np.sqrt(v)
        return x.chain(s, 0.5 / s, -0.25 / (s * v))
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.val)
        return x.chain(e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        v = x.val
        return x.chain(np.log(v), 1.0 / v, -1.0 / v ** 2)
    return np.log(x)


def jet_eval(f: Callable, point: Iterable[float], order: int = 2):
    """在 point 处对 f 做前向展开, 返回 (值, 梯度, Hessian 或 None)"""
    point = [float(v) for v in point]
    out = f(Jet.variables(point, order=order))
    if not isinstance(out, Jet):
        n = len(point)
        return float(out), np.zeros(n), (np.zeros((n, n)) if order >= 2 else None)
    return out.val, out.grad, out.hess
