"""
kerrml 命令行

子命令: classify / verify / trace / orbit / propagate / kernels
退出码: 0 成功, 1 引理未通过, 2 配置/解析错误, 3 定义域错误, 4 数值失败, 70 内部错误
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List

import numpy as np
from pydantic import ValidationError

from app.core import database
from app.core.config import RunConfig, load_run_config, settings
from app.core.exceptions import (
    EXIT_INTERNAL,
    EXIT_LEMMA_FAILED,
    EXIT_OK,
    ConfigurationError,
    KerrMLException,
    exit_code_for,
)
from app.schemas.kernels import KernelFamily
from app.schemas.kerr import KerrParams, PhasePoint, PhasePointIn
from app.services import kerr_geometry as kg
from app.services import model_kernels as mk
from app.services import sampling
from app.services.bicharacteristic_flow import (
    TRAJECTORY_CSV_HEADER,
    conserved_report,
    integrate,
    normalize_null,
    trajectory_rows,
)
from app.services.horizon_dynamics import fibre_rows, fibre_sample, project_to_sigma2
from app.services.verification import record_reports, run_suite
from app.services.wavefront_engine import PROPAGATION_CSV_HEADER, propagate, result_rows
from app.utils.export import ExportUtil

logger = logging.getLogger(__name__)

ORBIT_CSV_HEADER = ("s1", "s2", "t", "r", "theta", "phi", "p_t", "p_r", "p_theta", "p_phi")


def parse_point(text: str) -> PhasePoint:
    """
    解析相空间点

    接受 8 个数的 JSON 数组、带字段名的 JSON 对象，或以 @ 开头的文件路径。

    Raises:
        ConfigurationError: 无法解析
    """
    try:
        if text.startswith("@"):
            text = Path(text[1:]).read_text(encoding="utf-8")
        data = json.loads(text)
        if isinstance(data, dict):
            return PhasePointIn(**data).to_phase_point()
        if isinstance(data, list) and len(data) == 8:
            return PhasePoint.from_array(data)
    except (OSError, ValueError, TypeError, ValidationError) as e:
        raise ConfigurationError(f"无法解析相空间点: {e}")
    raise ConfigurationError("相空间点需要 8 个数或带字段名的对象")


def _emit(obj: Any):
    sys.stdout.write(ExportUtil.dumps(obj))


def _grid(spec) -> np.ndarray:
    start, stop, n = spec
    return np.linspace(float(start), float(stop), int(n))


def cmd_classify(args, cfg: RunConfig) -> int:
    pp = parse_point(args.point)
    region = kg.classify(pp, cfg.params, tol=cfg.tolerances.classify_tol, axis_eps=cfg.tolerances.axis_eps)
    res = kg.residuals(pp, cfg.params)
    _emit({"region": region.value, "delta": res.delta, "pt_plus_psi": res.pt_plus_psi, "phi": res.phi})
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    params = cfg.params
    if args.control_spin is not None:
        params = KerrParams(r_s=params.r_s, c=params.c, spin_ratio=args.control_spin, allow_subextremal=True)
        logger.info(f"亚极端对照实验: a = {params.a}")
    reports = run_suite(args.lemma, args.n_samples, cfg.seed, params, cfg.tolerances)

    out = Path(cfg.out_dir)
    for report in reports:
        ExportUtil.write_json(out / f"verify_{report.lemma.value}.json", report)

    database.init_db()
    db = database.SessionLocal()
    try:
        record_reports(db, reports, cfg.seed, params)
    finally:
        db.close()

    passed = all(r.passed for r in reports)
    _emit({"passed": passed, "reports": reports})
    return EXIT_OK if passed else EXIT_LEMMA_FAILED


def cmd_trace(args, cfg: RunConfig) -> int:
    start = parse_point(args.point)
    if args.normalize:
        start = normalize_null(start, cfg.params)
    traj = integrate(start, tuple(args.span), cfg.integrator, cfg.params)
    report = conserved_report(traj)
    out = Path(cfg.out_dir)
    ExportUtil.write_csv(out / "trajectory.csv", TRAJECTORY_CSV_HEADER, trajectory_rows(traj))
    ExportUtil.write_json(out / "trajectory.json", {"trajectory": traj, "report": report})
    _emit(report)
    return EXIT_OK


def cmd_orbit(args, cfg: RunConfig) -> int:
    sp = project_to_sigma2(parse_point(args.point), cfg.params, tol=cfg.tolerances.project_tol)
    s1_grid = np.linspace(0.0, args.s1_max, args.steps + 1)
    fibre = fibre_sample(sp, s1_grid, [0.0], args.alpha, cfg.params, cfg.integrator)
    out = Path(cfg.out_dir)
    ExportUtil.write_csv(out / "orbit.csv", ORBIT_CSV_HEADER, fibre_rows(fibre))
    ExportUtil.write_json(out / "orbit.json", fibre)
    _emit({"n_samples": len(fibre.points), "end": fibre.points[-1].point})
    return EXIT_OK


def _load_samples(path: str) -> List[PhasePoint]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ConfigurationError(f"无法读取样本文件: {e}")
    if not isinstance(data, list):
        raise ConfigurationError("样本文件必须是 JSON 数组")
    return [parse_point(json.dumps(item)) for item in data]


def cmd_propagate(args, cfg: RunConfig) -> int:
    if args.samples:
        samples = _load_samples(args.samples)
    else:
        rng = sampling.make_rng(cfg.seed)
        samples = sampling.exterior_null_rays(rng, args.n_exterior, cfg.params)
        samples += sampling.sigma2_points(rng, args.n_sigma2, cfg.params)
    if not samples:
        raise ConfigurationError("没有可传播的样本")
    result = propagate(samples, cfg.propagation, cfg.integrator, cfg.params)
    out = Path(cfg.out_dir)
    ExportUtil.write_json(out / "propagation.json", result)
    ExportUtil.write_csv(out / "propagation.csv", PROPAGATION_CSV_HEADER, result_rows(result))
    _emit(result.census)
    return EXIT_OK


def cmd_kernels(args, cfg: RunConfig) -> int:
    kc = cfg.kernels
    out = Path(cfg.out_dir)
    if args.which == "boxcar":
        report = mk.boxcar_report(_grid(kc.boxcar_x0), _grid(kc.boxcar_xi), kc.spec.cutoff, quadrature=not args.no_quadrature)
        ExportUtil.write_json(out / "kernels_boxcar.json", report)
        _emit(report)
        return EXIT_OK if report.passed else EXIT_LEMMA_FAILED
    if args.which == "chart":
        report = mk.chart_report(sampling.make_rng(cfg.seed))
        ExportUtil.write_json(out / "kernels_chart.json", report)
        _emit(report)
        return EXIT_OK if report.symplectic and report.max_round_trip_error == 0 else EXIT_LEMMA_FAILED
    if args.which == "sweep":
        spec = kc.spec.model_copy(update={"family": KernelFamily(args.family)})
        rows = mk.kernel_sweep(spec, kc.sweep_x0, _grid(kc.sweep_x1))
        path = ExportUtil.write_csv(out / f"kernels_sweep_{args.family}.csv", mk.KERNEL_SWEEP_HEADER, rows)
        _emit({"family": args.family, "rows": len(rows), "path": str(path)})
        return EXIT_OK
    summary = mk.standard_decay_cases(kc)
    ExportUtil.write_json(out / "kernels_decay.json", summary)
    _emit({name: r.classification for name, r in summary.cases.items()})
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "verify": cmd_verify,
    "trace": cmd_trace,
    "orbit": cmd_orbit,
    "propagate": cmd_propagate,
    "kernels": cmd_kernels,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON 配置文件")
    common.add_argument("--seed", type=int, help="覆盖配置中的随机种子")
    common.add_argument("--out", help="输出目录")
    common.add_argument("--log-level", default=settings.LOG_LEVEL, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--db", help="运行记录数据库 URL (默认使用服务配置)")

    parser = argparse.ArgumentParser(prog="kerrml", description="极端 Kerr 符号演算与视界传播")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="相空间点分类")
    p.add_argument("point", help="8 个数的 JSON 数组或对象")

    p = sub.add_parser("verify", parents=[common], help="引理验证")
    p.add_argument("lemma", choices=["double-char", "involutive", "hessian-rank", "subprincipal", "all"])
    p.add_argument("--n-samples", type=int, default=200)
    p.add_argument("--control-spin", type=float, help="亚极端对照 a/(r_s/2)")

    p = sub.add_parser("trace", parents=[common], help="零双特征曲线")
    p.add_argument("--point", required=True)
    p.add_argument("--span", type=float, nargs=2, default=[0.0, 10.0], metavar=("S0", "S1"))
    p.add_argument("--normalize", action="store_true", help="先把 p_t 调整为未来指向的零余切向量")

    p = sub.add_parser("orbit", parents=[common], help="视界轨道")
    p.add_argument("--point", required=True)
    p.add_argument("--s1-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--alpha", type=float, default=1.0)

    p = sub.add_parser("propagate", parents=[common], help="波前传播")
    p.add_argument("--samples", help="样本 JSON 文件")
    p.add_argument("--n-exterior", type=int, default=10)
    p.add_argument("--n-sigma2", type=int, default=5)

    p = sub.add_parser("kernels", parents=[common], help="模型核检验")
    p.add_argument("which", choices=["boxcar", "chart", "sweep", "decay"])
    p.add_argument("--family", choices=[f.value for f in KernelFamily], default="E1")
    p.add_argument("--no-quadrature", action="store_true", help="boxcar 检查跳过数值积分")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=args.log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        cfg = load_run_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out_dir"] = args.out
        cfg = cfg.model_copy(update=overrides)
        if args.db:
            database.configure_database(args.db)
        return COMMANDS[args.command](args, cfg)
    except KerrMLException as e:
        logger.error(e.message)
        sys.stderr.write(json.dumps({"error": type(e).__name__, "detail": e.message}, ensure_ascii=False) + "\n")
        return exit_code_for(e)
    except Exception as e:
        logger.exception(f"内部错误: {e}")
        return EXIT_INTERNAL
