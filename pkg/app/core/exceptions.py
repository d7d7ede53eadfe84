from typing import Optional

from fastapi import status
from fastapi.responses import JSONResponse
from fastapi.requests import Request


class KerrMLException(Exception):
    """自定义异常基类"""
    default_message = "计算失败"

    def __init__(self, message: Optional[str] = None):
        self.message = message or self.default_message
        super().__init__(self.message)


# ===========================================
# 请求/配置类异常 (退出码 2)
# ===========================================

class ConfigurationError(KerrMLException):
    """配置或输入解析错误"""
    default_message = "配置错误"


class NotFoundException(KerrMLException):
    """资源未找到异常"""
    default_message = "资源未找到"


# ===========================================
# 定义域异常 (退出码 3)
# ===========================================

class DomainError(KerrMLException):
    """相空间点不在运算的定义域内"""
    default_message = "超出定义域"


class RingSingularError(DomainError):
    default_message = "环奇点 (ring singular): Σ = 0"


class HorizonSingularError(DomainError):
    default_message = "视界奇异 (horizon singular): Δ = 0"


class PoleSingularError(DomainError):
    default_message = "极轴奇异 (pole singular): sin θ = 0 且 p_φ ≠ 0"


class ZeroCovectorError(DomainError):
    default_message = "零余切向量 (zero covector)"


class NoRealRootError(DomainError):
    default_message = "p_t 二次方程无实根 (no real root)"


class NotNullError(DomainError):
    default_message = "初始点不是零测地线 (H ≠ 0)"


class NonExtremalError(DomainError):
    default_message = "参数不是极端 Kerr (non-extremal)"


class DegenerateFactorizationError(DomainError):
    default_message = "因式分解退化 (degenerate factorization): Φ ≈ 0"


class NotNearSigma2Error(DomainError):
    default_message = "点不在 Σ₂ 附近 (not near Σ₂)"


class ConormalDegenerateError(DomainError):
    default_message = "投影结果落在 N*ℋ 上 (conormal degenerate)"


class DegenerateFibreError(DomainError):
    default_message = "纤维退化 (degenerate fibre): Φ ≈ 0"


class SampleOnConormalError(DomainError):
    default_message = "样本位于 N*ℋ 上 (sample on conormal)"


class UnclassifiableSampleError(DomainError):
    default_message = "无法分类的样本 (unclassifiable sample)"


class ConormalEncounterError(DomainError):
    default_message = "传播到达 N*ℋ (conormal encounter)"


class EmptyTrajectoryError(DomainError):
    default_message = "轨迹为空 (empty trajectory)"


# ===========================================
# 数值异常 (退出码 4)
# ===========================================

class NumericalFailure(KerrMLException):
    """数值方法失败"""
    default_message = "数值计算失败"


class StepFailureError(NumericalFailure):
    """积分步长下溢或求解器失败，携带已积分的部分轨迹"""
    default_message = "积分步长失败 (step failure)"

    def __init__(self, message: Optional[str] = None, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class QuadratureBudgetExceededError(NumericalFailure):
    default_message = "求积节点数超出预算 (quadrature budget exceeded)"


class InconclusiveDecayError(NumericalFailure):
    default_message = "衰减判定不确定 (inconclusive decay)"


EXIT_OK = 0
EXIT_LEMMA_FAILED = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4
EXIT_INTERNAL = 70


def exit_code_for(exc: BaseException) -> int:
    """命令行退出码映射"""
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    elif isinstance(exc, DomainError):
        return EXIT_DOMAIN
    elif isinstance(exc, NumericalFailure):
        return EXIT_NUMERICAL
    elif isinstance(exc, KerrMLException):
        return EXIT_CONFIG
    else:
        return EXIT_INTERNAL


def exception_handler(request: Request, exc: Exception):
    """全局异常处理"""
    if isinstance(exc, NotFoundException):
        return JSONResponse(
            status_code=status.HTTP_404_NOT_FOUND,
            content={"detail": exc.message}
        )
    elif isinstance(exc, ConfigurationError):
        return JSONResponse(
            status_code=status.HTTP_400_BAD_REQUEST,
            content={"detail": exc.message}
        )
    elif isinstance(exc, DomainError):
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content={"detail": exc.message}
        )
    elif isinstance(exc, NumericalFailure):
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content={"detail": exc.message}
        )
    else:
        # 对于未处理的异常，返回500错误
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content={"detail": "服务器内部错误"}
        )
