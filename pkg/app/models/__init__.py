from app.models.verification_run import VerificationRun

__all__ = ["VerificationRun"]
