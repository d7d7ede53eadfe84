from datetime import datetime
from app.core.database import Base
from sqlalchemy import Column, Integer, String, DateTime, Boolean, Float, Text


class VerificationRun(Base):
    """引理验证运行记录"""
    __tablename__ = "verification_runs"

    id = Column(Integer, primary_key=True, index=True)
    lemma = Column(String(32), nullable=False, index=True, comment="引理名称")
    n_samples = Column(Integer, nullable=False, comment="样本数")
    seed = Column(Integer, nullable=False, comment="随机种子")
    max_residual = Column(Float, nullable=False, comment="最大残差")
    passed = Column(Boolean, nullable=False, default=False, comment="是否通过")
    params_json = Column(Text, nullable=False, comment="时空参数 (JSON)")
    report_json = Column(Text, nullable=False, comment="完整报告 (JSON)")
    created_at = Column(DateTime, nullable=False, default=datetime.utcnow, comment="创建时间")
