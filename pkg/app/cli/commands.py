# app/cli/commands.py
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigurationError, MultifractalError
from app.cli.parser import build_parser
from app.repositories.report_repository import ReportRepository
from app.schemas.config_schemas import MfdfaConfig, RunConfig
from app.schemas.run_schemas import RunManifest, RunReport, SynthRequest
from app.services.run_service import RunService

logger = logging.getLogger(__name__)

MFDFA_FLAGS = ('poly_order', 'scale_min', 'scale_max', 'scale_count', 'q_min', 'q_max', 'q_step', 'direction')
RUN_FLAGS = ('seed', 'surrogates', 'd_f', 'thresholds', 'excise', 'sweep_q_window')
SYNTH_FLAGS = ('kind', 'label', 'levels', 'a', 'n', 'dof', 'return_scale', 'start_price')


def _validation_message(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = '.'.join(str(part) for part in first.get('loc', ())) or 'config'
    return f"{where}: {first['msg']}"


def _read_config_payload(path: str) -> Dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding='utf-8'))
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file is not valid JSON: {exc}", path=path) from exc
    if not isinstance(payload, dict):
        raise ConfigurationError("config file must contain a JSON object", path=path)
    return payload


def load_manifest(path: str) -> RunManifest:
    source = Path(path)
    try:
        return ReportRepository(source.parent).load(source.name, schema=RunManifest)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid manifest ({_validation_message(exc)})", path=path) from exc


def load_config_file(path: Optional[str]) -> Tuple[RunConfig, Dict[str, Any]]:
    """读取 --config，返回运行配置与子命令参数

    manifest 取其 config 与 parameters；只含 MF-DFA 字段的文档视为 MfdfaConfig；其余按 RunConfig 解析。
    """
    if path is None:
        return RunConfig(), {}
    payload = _read_config_payload(path)
    if 'config' in payload and 'tool' in payload:
        manifest = load_manifest(path)
        return manifest.config, dict(manifest.parameters)
    try:
        if payload and set(payload) <= set(MfdfaConfig.model_fields):
            return RunConfig(mfdfa=MfdfaConfig.model_validate(payload)), {}
        return RunConfig.model_validate(payload), {}
    except ValidationError as exc:
        raise ConfigurationError(f"invalid configuration ({_validation_message(exc)})", path=path) from exc


def resolve_config(args, config: RunConfig) -> RunConfig:
    """配置文件在下，命令行参数在上"""
    mfdfa_updates = {name: getattr(args, name, None) for name in MFDFA_FLAGS}
    run_updates = {name: getattr(args, name, None) for name in RUN_FLAGS}
    run_updates = {name: value for name, value in run_updates.items() if value is not None}
    try:
        mfdfa = config.mfdfa.with_overrides(**mfdfa_updates)
        payload = config.model_dump()
        payload.update(run_updates, mfdfa=mfdfa.model_dump())
        return RunConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid configuration ({_validation_message(exc)})") from exc


def synth_request(args, parameters: Dict[str, Any]) -> SynthRequest:
    """manifest 记录的生成器参数在下，显式给出的命令行参数在上"""
    payload = {name: parameters[name] for name in SYNTH_FLAGS if name in parameters}
    payload.update({name: getattr(args, name) for name in SYNTH_FLAGS if getattr(args, name, None) is not None})
    try:
        return SynthRequest.model_validate(payload)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid synth parameters ({_validation_message(exc)})") from exc


def _print_summary(report: RunReport, out_dir: str):
    for market in report.markets:
        for analysis in market.analyses:
            print(f"{market.market:<16} {analysis.role:<20} delta_alpha={analysis.spectrum.delta_alpha:.4f}")
    if report.table is not None:
        print(report.table.to_text(), end='')
    for sweep in report.sweeps:
        for row in sweep.rows:
            print(
                f"{sweep.market:<16} k={row.k_sigma:<6g} "
                f"original={row.delta_alpha_original:.4f} surrogate={row.delta_alpha_surrogate:.4f}"
            )
    print(f"results written to {out_dir}")


def _report_failures(report: RunReport):
    for failure in report.failures:
        print(failure.model_dump_json(), file=sys.stderr)


def run_command(args) -> RunReport:
    config, parameters = load_config_file(args.config)
    service = RunService(resolve_config(args, config), Path(args.out), args.command)
    if args.command == 'synth':
        return service.synth(synth_request(args, parameters))
    if args.command == 'analyze':
        return asyncio.run(service.analyze(args.inputs))
    if args.command == 'split':
        return asyncio.run(service.split(args.inputs))
    return asyncio.run(service.threshold_sweep(args.inputs))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format=settings.LOG_FORMAT, stream=sys.stderr)

    try:
        report = run_command(args)
    except MultifractalError as exc:
        logger.error("Command failed | command=%s | error=%s", args.command, exc.error)
        print(json.dumps(exc.to_payload(), ensure_ascii=False, default=str), file=sys.stderr)
        return exc.exit_code

    _print_summary(report, args.out)
    _report_failures(report)
    return report.exit_code
