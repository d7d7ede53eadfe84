import os
import sys

# 测试期间默认使用内存数据库, 不在工作目录留下文件
os.environ.setdefault("DATABASE_URL", "sqlite://")
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from app.core import database
from app.schemas.horizon import Sigma2Point, Sigma2Residuals
from app.schemas.kerr import KerrParams, PhasePoint
from app.services import sampling

# (t, r, θ, φ; p_t, p_r, p_θ, p_φ)，r_s = 2, c = 1
SIGMA2_EXAMPLE = [0.0, 1.0, np.pi / 2, 0.0, -1.0, 7.0, 0.0, 2.0]


@pytest.fixture
def params():
    return KerrParams()


@pytest.fixture
def rng():
    return sampling.make_rng(20240607)


@pytest.fixture
def sigma2_example():
    return PhasePoint.from_array(SIGMA2_EXAMPLE)


def exact_sigma2(z) -> Sigma2Point:
    return Sigma2Point(point=PhasePoint.from_array(z), residuals=Sigma2Residuals(dr=0.0, pt_plus_psi=0.0))


@pytest.fixture
def db_session(tmp_path):
    database.configure_database(f"sqlite:///{tmp_path / 'runs.db'}")
    database.init_db()
    db = database.SessionLocal()
    try:
        yield db
    finally:
        db.close()
