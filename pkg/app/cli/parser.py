# app/cli/parser.py
import argparse

from app.core.config import settings
from app.schemas.config_schemas import Direction
from app.schemas.run_schemas import SynthKind


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="JSON 配置文件：RunConfig、MfdfaConfig 或此前输出的 manifest.json")
    common.add_argument('--seed', type=int, help="主随机种子 (u64)")
    common.add_argument('--out', default=str(settings.DEFAULT_OUTPUT_DIR), help="结果目录")
    common.add_argument('--log-level', default=settings.LOG_LEVEL, help="日志级别")
    return common


def _analysis_options() -> argparse.ArgumentParser:
    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument('inputs', nargs='+', help="date,rate 格式的 CSV，每个文件一个市场（标签取文件名）")
    analysis.add_argument('--surrogates', type=int, help="每条序列的打乱替代样本个数")
    analysis.add_argument('--scale-min', type=int)
    analysis.add_argument('--scale-max', type=int)
    analysis.add_argument('--scale-count', type=int)
    analysis.add_argument('--q-min', type=float)
    analysis.add_argument('--q-max', type=float)
    analysis.add_argument('--q-step', type=float)
    analysis.add_argument('--poly-order', type=int, help="去趋势多项式阶数 m")
    analysis.add_argument('--direction', choices=[d.value for d in Direction])
    analysis.add_argument('--d-f', dest='d_f', type=float, help="分形支撑维数 D_f")
    return analysis


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='fx-multifractal',
        description=f"{settings.APP_NAME}：汇率收益的 MF-DFA 多重分形分析",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {settings.VERSION}")
    commands = parser.add_subparsers(dest='command', required=True)

    common, analysis = _common_options(), _analysis_options()

    analyze = commands.add_parser('analyze', parents=[common, analysis], help="整段序列及其替代样本的 h(q)、τ(q)、f(α)")
    analyze.add_argument('--excise', action='store_true', default=None, help="先剔除危机窗口")

    commands.add_parser('split', parents=[common, analysis], help="危机前后分段对比，输出 Δα 差值表")

    sweep = commands.add_parser('threshold-sweep', parents=[common, analysis], help="阈值过滤后 Δα 随 k 的变化")
    sweep.add_argument('--thresholds', type=float, nargs='+', help="阈值列表（σ 的倍数，递增）")
    sweep.add_argument('--sweep-q-window', type=float, help="Δα 只取 |q| 不超过该值的谱点（默认 5）")

    synth = commands.add_parser('synth', parents=[common], help="生成合成序列 CSV")
    # 未给出的参数取 manifest 中的生成器参数，再退回 SynthRequest 默认值
    synth.add_argument('--kind', choices=[k.value for k in SynthKind], help="默认 cascade")
    synth.add_argument('--label', help="输出文件名（不含扩展名）")
    synth.add_argument('--levels', type=int, help="级联层数，长度 2**levels（默认 14）")
    synth.add_argument('--a', type=float, help="级联乘子 (0.5, 1)，默认 0.75")
    synth.add_argument('--n', type=int, help="独立同分布序列长度（默认 16384）")
    synth.add_argument('--dof', type=float, help="Student-t 自由度 (> 2)，默认 4")
    synth.add_argument('--return-scale', type=float, help="收益缩放系数")
    synth.add_argument('--start-price', type=float, help="起始价格（默认 100）")
    return parser
