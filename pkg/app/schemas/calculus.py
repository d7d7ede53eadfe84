from typing import List

import numpy as np
from pydantic import BaseModel, Field, field_validator


class Gradient8(BaseModel):
    """相空间梯度: d_q = (∂_t, ∂_r, ∂_θ, ∂_φ), d_p = (∂_{p_t}, ∂_{p_r}, ∂_{p_θ}, ∂_{p_φ})"""
    d_q: List[float] = Field(..., min_length=4, max_length=4)
    d_p: List[float] = Field(..., min_length=4, max_length=4)

    @field_validator("d_q", "d_p")
    @classmethod
    def _finite(cls, v):
        if not all(np.isfinite(v)):
            raise ValueError("梯度含非有限分量")
        return v

    def as_array(self) -> np.ndarray:
        return np.array(self.d_q + self.d_p, dtype=float)

    @classmethod
    def from_array(cls, g) -> "Gradient8":
        g = [float(v) for v in g]
        return cls(d_q=g[:4], d_p=g[4:])


class Hessian8(BaseModel):
    """8×8 二阶偏导矩阵, 顺序 (t, r, θ, φ, p_t, p_r, p_θ, p_φ)"""
    entries: List[List[float]]

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    @classmethod
    def from_array(cls, h) -> "Hessian8":
        return cls(entries=[[float(v) for v in row] for row in np.asarray(h)])
