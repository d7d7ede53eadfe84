from pathlib import Path
from typing import Optional, Union

from pydantic import Field
from pydantic_settings import BaseSettings, JsonConfigSettingsSource, SettingsConfigDict

from app.core.exceptions import ConfigurationError
from app.schemas.flow import IntegratorConfig
from app.schemas.kernels import KernelConfig
from app.schemas.kerr import KerrParams, ToleranceConfig
from app.schemas.wavefront import PropagationConfig


class Settings(BaseSettings):
    """服务级配置 (可由环境变量覆盖，仅用于 HTTP 部署)"""
    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    # 应用配置
    APP_NAME: str = "kerrml 极端 Kerr 符号演算 API"
    APP_VERSION: str = "1.0.0"

    # 运行记录数据库 (SQLite)
    DATABASE_URL: str = "sqlite:///./kerrml_runs.db"

    # 日志级别
    LOG_LEVEL: str = "INFO"

    # CORS配置
    CORS_ORIGINS: list = ["*"]

    # 分页配置
    DEFAULT_PAGE_SIZE: int = 20
    MAX_PAGE_SIZE: int = 100

    # 默认随机种子
    DEFAULT_SEED: int = 20240607


settings = Settings()


class RunConfig(BaseSettings):
    """
    单次命令行运行的数值配置

    只从一个 JSON 文件读取 (环境变量与 .env 均不参与)，未知键一律拒绝。
    """
    model_config = SettingsConfigDict(extra="forbid")

    params: KerrParams = Field(default_factory=KerrParams)
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    kernels: KernelConfig = Field(default_factory=KernelConfig)
    propagation: PropagationConfig = Field(default_factory=PropagationConfig)
    seed: int = settings.DEFAULT_SEED
    out_dir: str = "."

    @classmethod
    def settings_customise_sources(cls, settings_cls, init_settings, env_settings, dotenv_settings, file_secret_settings):
        return (init_settings,)


def load_run_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    读取 RunConfig

    Args:
        path: JSON 配置文件；为空时使用默认值

    Raises:
        ConfigurationError: 文件不存在、JSON 无法解析或字段校验失败
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"配置文件不存在: {path}")
    try:
        data = JsonConfigSettingsSource(RunConfig, json_file=path)()
        if not isinstance(data, dict):
            raise ConfigurationError("配置文件顶层必须是 JSON 对象")
        return RunConfig(**data)
    except (ValueError, TypeError) as e:
        raise ConfigurationError(f"配置文件无效: {e}")
