from app.utils.dual import Jet
from app.utils.export import ExportUtil

__all__ = ["Jet", "ExportUtil"]
