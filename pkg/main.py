import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from app.api import geometry, verify, flow, kernels
from app.core.config import settings
from app.core.database import init_db
from app.core.exceptions import exception_handler
from app.core.exceptions import KerrMLException

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

# 创建运行记录表
init_db()

app = FastAPI(
    title=settings.APP_NAME,
    description="""
    ## 极端 Kerr 时空的符号演算与视界传播

    ### 核心功能
    - **区域分类**：相空间点分类及残差 (Δ, p_t + Ψ, Φ)
    - **引理验证**：双特征簇、对合性、Hessian 秩、次主符号
    - **双特征流**：视界外零双特征曲线追踪与守恒量审计
    - **视界轨道**：Σ₂ 上的闭式轨道映射
    - **模型核**：boxcar Fourier 恒等式残差

    ### 数据库设计
    - **VerificationRun表**：存储引理验证运行记录
    """,
    version=settings.APP_VERSION,
    license_info={
        "name": "MIT",
    },
)

# 注册全局异常处理器
app.add_exception_handler(KerrMLException, exception_handler)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# 注册路由
app.include_router(geometry.router, tags=["几何分类"])
app.include_router(verify.router, tags=["引理验证"])
app.include_router(flow.router, tags=["双特征流"])
app.include_router(kernels.router, tags=["模型核"])


@app.get("/")
def read_root():
    return {
        "message": "欢迎使用 kerrml API",
        "docs": "/docs",
        "redoc": "/redoc"
    }


@app.get("/health")
def health_check():
    return {"status": "healthy"}
