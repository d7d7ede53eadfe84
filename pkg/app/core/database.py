from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool
from app.core.config import settings
import logging

logger = logging.getLogger(__name__)

# 数据库引擎 (configure_database 可替换)
engine = None

# 创建会话工厂
SessionLocal = sessionmaker(autocommit=False, autoflush=False)

# 创建基类
Base = declarative_base()


def _create_engine(url: str):
    if url.startswith("sqlite"):
        # 运行记录使用SQLite
        return create_engine(
            url,
            connect_args={"check_same_thread": False},
            poolclass=StaticPool,
        )
    return create_engine(url, pool_pre_ping=True)


def configure_database(url: str = None):
    """绑定数据库 (命令行 --db 与测试使用)"""
    global engine
    engine = _create_engine(url or settings.DATABASE_URL)
    SessionLocal.configure(bind=engine)
    logger.debug(f"运行记录数据库: {engine.url}")
    return engine


configure_database()


def get_db():
    """获取数据库会话"""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def init_db():
    """初始化数据库表"""
    import app.models  # noqa: F401  注册 ORM 模型
    Base.metadata.create_all(bind=engine)
