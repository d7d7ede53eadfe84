from app.core.exceptions import KerrMLException, ConfigurationError, DomainError, NumericalFailure, NotFoundException
from app.core.config import settings, RunConfig, load_run_config
from app.core.database import Base, get_db

__all__ = [
    "settings",
    "RunConfig",
    "load_run_config",
    "Base",
    "get_db",
    "KerrMLException",
    "ConfigurationError",
    "DomainError",
    "NumericalFailure",
    "NotFoundException",
]
