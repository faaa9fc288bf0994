# app/analysis/spectrum.py
"""h(q) → τ(q) → Legendre 变换得到奇异谱 f(α)，以及多重分形程度 Δα 的对比表。"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial

from app.analysis.mfdfa import HurstCurve
from app.core.exceptions import ConfigurationError, DegenerateSeriesError, MissingAnalysisError
from app.schemas.analysis_schemas import ComparisonRow, ComparisonTable

logger = logging.getLogger(__name__)

AFTER, BEFORE, ORIGINAL, SURROGATE = 'after', 'before', 'original', 'surrogate'
TABLE_LABELS = (AFTER, BEFORE, ORIGINAL, SURROGATE)


@dataclass(frozen=True, eq=False)
class TauCurve:
    """多重分形标度指数 τ(q) = q·h(q) - D_f"""
    q_grid: np.ndarray
    tau: np.ndarray
    d_f: float = 1.0


@dataclass(frozen=True, eq=False)
class SingularitySpectrum:
    """奇异谱采样点 (α, f(α))，每个点保留其来源 q"""
    q: np.ndarray
    alpha: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if alpha.size == 0:
            raise ConfigurationError("singularity spectrum needs at least one point")
        if not (q.shape == alpha.shape == f.shape):
            raise ConfigurationError("q, alpha and f must have the same length")
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'f', f)

    @property
    def points(self) -> List[Tuple[float, float, float]]:
        return [(float(a), float(fa), float(q)) for a, fa, q in zip(self.alpha, self.f, self.q)]

    @property
    def alpha_min(self) -> float:
        return float(self.alpha.min())

    @property
    def alpha_max(self) -> float:
        return float(self.alpha.max())

    @property
    def delta_alpha(self) -> float:
        return self.alpha_max - self.alpha_min

    @property
    def apex(self) -> Tuple[float, float]:
        """最接近 q = 0 的网格点处的 (α, f)，理论上 f = D_f"""
        index = int(np.argmin(np.abs(self.q)))
        return float(self.alpha[index]), float(self.f[index])

    def restrict(self, q_cut: float) -> 'SingularitySpectrum':
        keep = np.abs(self.q) <= q_cut
        return SingularitySpectrum(q=self.q[keep], alpha=self.alpha[keep], f=self.f[keep])


def tau_from_hurst(h: HurstCurve, d_f: float = 1.0) -> TauCurve:
    return TauCurve(q_grid=h.q_grid, tau=h.q_grid * h.h - d_f, d_f=d_f)


def legendre_spectrum(tau: TauCurve) -> SingularitySpectrum:
    """α = dτ/dq（内部中心差分、两端单侧差分），f = α·q - τ"""
    q = np.asarray(tau.q_grid, dtype=float)
    if q.size < 3:
        raise ConfigurationError("Legendre transform needs tau on at least 3 grid points", points=int(q.size))

    with np.errstate(all='ignore'):
        alpha = np.gradient(tau.tau, q, edge_order=1)
    bad = np.flatnonzero(~np.isfinite(alpha))
    if bad.size:
        raise DegenerateSeriesError(f"non-finite derivative dtau/dq at q={q[bad[0]]:g}", q=float(q[bad[0]]))

    return SingularitySpectrum(q=q, alpha=alpha, f=alpha * q - tau.tau)


def analyze_spectrum(h: HurstCurve, d_f: float = 1.0) -> Tuple[TauCurve, SingularitySpectrum]:
    tau = tau_from_hurst(h, d_f)
    return tau, legendre_spectrum(tau)


def delta_alpha(spec: SingularitySpectrum) -> float:
    """多重分形程度 Δα = α_max - α_min"""
    return spec.delta_alpha


def windowed_delta_alpha(spec: SingularitySpectrum, q_window: Optional[float] = None) -> float:
    """只用 |q| <= q_window 的谱点计算 Δα；q_window 为 None 时等同 delta_alpha"""
    if q_window is None:
        return spec.delta_alpha
    keep = int(np.count_nonzero(np.abs(spec.q) <= q_window))
    if keep < 2:
        raise ConfigurationError(
            f"q window {q_window:g} keeps fewer than 2 spectrum points",
            q_window=q_window,
            points=keep,
        )
    return spec.restrict(q_window).delta_alpha


def tau_nonlinearity(tau: TauCurve) -> float:
    """τ 偏离其最小二乘直线的最大绝对值；单分形时为 0"""
    q = np.asarray(tau.q_grid, dtype=float)
    if q.size < 3:
        raise ConfigurationError("nonlinearity needs tau on at least 3 grid points", points=int(q.size))
    coef = polynomial.polyfit(q, tau.tau, 1)
    return float(np.max(np.abs(tau.tau - polynomial.polyval(q, coef))))


SpectrumEntry = Union[SingularitySpectrum, Sequence[SingularitySpectrum]]


def _mean_width(entry: SpectrumEntry) -> float:
    if isinstance(entry, SingularitySpectrum):
        return entry.delta_alpha
    widths = [spec.delta_alpha for spec in entry]
    if not widths:
        raise ConfigurationError("empty surrogate ensemble")
    return float(np.mean(widths))


def comparison_table(analyses: Mapping[str, Mapping[str, SpectrumEntry]]) -> ComparisonTable:
    """按市场生成 Δα 差值行：a-b, o-s, a-s, b-s（a 危机后，b 危机前，o 原始，s 打乱）"""
    missing: Dict[str, List[str]] = {}
    for market in sorted(analyses):
        absent = [label for label in TABLE_LABELS if label not in analyses[market]]
        if absent:
            missing[market] = absent
    if missing:
        listing = '; '.join(f"{market}: {', '.join(labels)}" for market, labels in missing.items())
        raise MissingAnalysisError(f"missing analyses for comparison table ({listing})", missing=missing)

    rows = []
    for market in sorted(analyses):
        widths = {label: _mean_width(analyses[market][label]) for label in TABLE_LABELS}
        rows.append(ComparisonRow(
            market=market,
            after_minus_before=widths[AFTER] - widths[BEFORE],
            original_minus_surrogate=widths[ORIGINAL] - widths[SURROGATE],
            after_minus_surrogate=widths[AFTER] - widths[SURROGATE],
            before_minus_surrogate=widths[BEFORE] - widths[SURROGATE],
            delta_alpha=widths,
        ))
        logger.info(
            "Comparison row | market=%s | a-b=%.4f | o-s=%.4f",
            market, rows[-1].after_minus_before, rows[-1].original_minus_surrogate,
        )
    return ComparisonTable(rows=rows)
