"""
src/explorer.py
Design-space sweep over array size, group size, width and resolution multipliers,
latency minima and the takeaway checks built on top of the sweep rows
RELEVANT FILES: netgen.py, mapping.py, costmodel.py, reports.py, cli.py
"""

import logging
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import ModelDefaults, load_defaults
from costmodel import LEVELS, network_cost
from errors import ConfigurationError, CoverageError, ModelError, error_payload
from mapping import ArrayConfig
from netgen import LayerKind, generate_mobilenet_v1, network_counts

logger = logging.getLogger(__name__)

PRESET_SIDES = [16, 32, 64, 128]
FULL_G_VALUES = [1, 2, 4, 8, 16, 32, 64]
# largest G swept per width multiplier
FULL_MAX_G = {0.5: 16, 1.0: 32, 2.0: 64}


@dataclass
class SweepGrid:
    arrays: List[int]
    g_values: List[int]
    alphas: List[float]
    rhos: List[float]
    max_g: Dict[float, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ('arrays', 'g_values', 'alphas', 'rhos'):
            if not getattr(self, name):
                raise ConfigurationError(f"sweep grid needs at least one value for {name}")
        self.g_values = sorted(set(self.g_values))

    def _all_points(self):
        return itertools.product(self.arrays, self.alphas, self.rhos, self.g_values)

    def points(self) -> List[Tuple[int, float, float, int]]:
        return [p for p in self._all_points() if p[3] <= self.max_g.get(p[1], p[3])]

    def excluded(self) -> List[Tuple[Tuple[int, float, float, int], str]]:
        """Points over the per-alpha G cap, each with the reason it is not evaluated"""
        return [(p, f"G={p[3]} exceeds max_g={self.max_g[p[1]]} for alpha={p[1]:g}")
                for p in self._all_points() if p[3] > self.max_g.get(p[1], p[3])]


def full_grid() -> SweepGrid:
    return SweepGrid(arrays=list(PRESET_SIDES), g_values=list(FULL_G_VALUES),
                     alphas=[0.5, 1.0, 2.0], rhos=[0.5, 1.0, 2.0], max_g=dict(FULL_MAX_G))


@dataclass
class SweepRow:
    array_label: str
    array_side: int
    alpha: float
    rho: float
    G: int
    status: str = 'ok'
    notice: str = ''
    macs: Optional[int] = None
    params: Optional[int] = None
    avg_utilization: Optional[float] = None
    util_3x3: Optional[float] = None
    util_1x1: Optional[float] = None
    latency_ms: Optional[float] = None
    energy_mj: Optional[float] = None
    energy_breakdown: Dict[str, float] = field(default_factory=dict)
    error: Optional[Dict[str, str]] = None

    @property
    def ok(self) -> bool:
        return self.status == 'ok'

    @property
    def sort_key(self) -> Tuple:
        return (self.array_side, self.alpha, self.rho, self.G)


def _mean_or_none(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def evaluate_point(side: int, alpha: float, rho: float, G: int,
                   defaults: ModelDefaults = None) -> SweepRow:
    """One grid point; model errors are recorded on the row instead of raised"""
    defaults = defaults or load_defaults()
    row = SweepRow(array_label=f"{side}x{side}", array_side=side, alpha=alpha, rho=rho, G=G)
    try:
        net = generate_mobilenet_v1(alpha, rho, G)
        array = ArrayConfig.preset(side, double_memory=rho > 1, defaults=defaults)
        cost = network_cost(net, array, defaults)
    except ModelError as e:
        row.status = 'skipped'
        row.notice = str(e)
        row.error = error_payload(e)
        logger.warning(f"Skipping {row.array_label} alpha={alpha} rho={rho} G={G}: {e}")
        return row

    counts = network_counts(net)
    grouped = [c.mapping for c in cost.layers
               if c.layer.kind == LayerKind.GROUPED_CONV and c.layer.kernel_size == 3]
    pointwise = [c.mapping for c in cost.layers
                 if c.layer.kind == LayerKind.STANDARD_CONV and c.layer.kernel_size == 1]

    row.macs = counts.macs
    row.params = counts.params
    row.avg_utilization = cost.average_utilization
    row.util_3x3 = _mean_or_none([m.utilization for m in grouped])
    row.util_1x1 = _mean_or_none([m.utilization for m in pointwise])
    row.latency_ms = cost.latency_s * 1e3
    row.energy_mj = cost.energy_j * 1e3
    row.energy_breakdown = {k: v * 1e3 for k, v in cost.energy_breakdown.items()}
    logger.debug(f"{row.array_label} alpha={alpha} rho={rho} G={G}: "
                 f"util={row.avg_utilization:.3f} latency={row.latency_ms:.3f} ms")
    return row


def run_sweep(grid: SweepGrid, defaults: ModelDefaults = None,
              workers: int = None) -> List[SweepRow]:
    """Evaluate every grid point; output order is (array, alpha, rho, G) ascending"""
    defaults = defaults or load_defaults()
    workers = workers or defaults.sweep_workers
    points = grid.points()
    logger.info(f"Sweeping {len(points)} grid points with {workers} worker(s)")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: evaluate_point(*p, defaults=defaults), points))
    else:
        rows = [evaluate_point(*p, defaults=defaults) for p in points]

    for (side, alpha, rho, G), reason in grid.excluded():
        rows.append(SweepRow(array_label=f"{side}x{side}", array_side=side, alpha=alpha, rho=rho,
                             G=G, status='skipped', notice=reason))

    rows.sort(key=lambda r: r.sort_key)
    skipped = sum(1 for r in rows if not r.ok)
    logger.info(f"Sweep finished: {len(rows) - skipped} evaluated, {skipped} skipped")
    return rows


def _select(rows: Sequence[SweepRow], side: int, alpha: float, rho: float) -> List[SweepRow]:
    return sorted((r for r in rows
                   if r.ok and r.array_side == side and r.alpha == alpha and r.rho == rho),
                  key=lambda r: r.G)


def argmin_latency(rows: Sequence[SweepRow], array: int, alpha: float, rho: float) -> Tuple[int, float]:
    """G with the lowest latency; ties go to the smaller G"""
    matching = _select(rows, array, alpha, rho)
    if not matching:
        raise CoverageError(f"no rows for array={array} alpha={alpha} rho={rho}")
    best = min(matching, key=lambda r: (r.latency_ms, r.G))
    return best.G, best.latency_ms


@dataclass
class TakeawayCheck:
    check_id: str
    status: str
    evidence: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == 'pass'


@dataclass
class TakeawayReport:
    checks: List[TakeawayCheck]

    def get(self, check_id: str) -> TakeawayCheck:
        return next(c for c in self.checks if c.check_id == check_id)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> List[Dict]:
        return [{'check_id': c.check_id, 'pass': c.passed, 'status': c.status,
                 'evidence': c.evidence} for c in self.checks]


def _verdict(ok: bool) -> str:
    return 'pass' if ok else 'fail'


def _not_evaluable(check_id: str, reason: str) -> TakeawayCheck:
    return TakeawayCheck(check_id, 'not_evaluable', {'reason': reason})


def _lookup(rows, side, alpha, rho, G) -> Optional[SweepRow]:
    for r in _select(rows, side, alpha, rho):
        if r.G == G:
            return r
    return None


def _check_minima_shift(rows) -> TakeawayCheck:
    evidence = {}
    for rho in (1.0, 2.0):
        if not all(len(_select(rows, side, 1.0, rho)) >= 2 for side in PRESET_SIDES):
            continue
        evidence[f"rho={rho:g}"] = {f"{s}x{s}": argmin_latency(rows, s, 1.0, rho)[0]
                                    for s in PRESET_SIDES}
    if not evidence:
        return _not_evaluable('T1', 'needs alpha=1 rows on every preset array for rho 1 or 2')
    ok = all(list(argmins.values()) == sorted(argmins.values()) for argmins in evidence.values())
    return TakeawayCheck('T1', _verdict(ok), evidence)


def _check_plateau(rows, tolerance: float) -> TakeawayCheck:
    matching = _select(rows, 64, 0.5, 1.0)
    if len(matching) < 2:
        return _not_evaluable('T2', 'needs alpha=0.5 rho=1 rows on 64x64 for at least two G')
    top = matching[len(matching) // 2:]
    latencies = np.array([r.latency_ms for r in top])
    spread = float((latencies.max() - latencies.min()) / latencies.min())
    evidence = {'g_values': [r.G for r in top], 'latency_ms': latencies.tolist(),
                'spread': spread, 'tolerance': tolerance}
    return TakeawayCheck('T2', _verdict(spread <= tolerance), evidence)


def _check_utilization_not_latency(rows) -> TakeawayCheck:
    low, high = _lookup(rows, 64, 1.0, 2.0, 4), _lookup(rows, 64, 1.0, 2.0, 16)
    if low is None or high is None:
        return _not_evaluable('T3', 'needs alpha=1 rho=2 rows on 64x64 at G=4 and G=16')
    evidence = {'latency_ms': {'G4': low.latency_ms, 'G16': high.latency_ms},
                'utilization': {'G4': low.avg_utilization, 'G16': high.avg_utilization}}
    ok = high.latency_ms > low.latency_ms and high.avg_utilization > low.avg_utilization
    return TakeawayCheck('T3', _verdict(ok), evidence)


def _check_small_array_gain(rows) -> TakeawayCheck:
    ratios = {}
    for side in (16, 128):
        base, alt = _lookup(rows, side, 1.0, 2.0, 1), _lookup(rows, side, 0.5, 2.0, 1)
        if base is None or alt is None:
            return _not_evaluable('T4', 'needs alpha=1 and alpha=0.5 rows at rho=2, G=1 '
                                        'on 16x16 and 128x128')
        ratios[f"{side}x{side}"] = base.latency_ms / alt.latency_ms
    ok = ratios['16x16'] > ratios['128x128']
    return TakeawayCheck('T4', _verdict(ok), {'latency_ratio': ratios})


def takeaway_report(rows: Sequence[SweepRow], defaults: ModelDefaults = None) -> TakeawayReport:
    defaults = defaults or load_defaults()
    return TakeawayReport([
        _check_minima_shift(rows),
        _check_plateau(rows, defaults.plateau_tolerance),
        _check_utilization_not_latency(rows),
        _check_small_array_gain(rows),
    ])


def alternative_comparison(rows: Sequence[SweepRow], base: Tuple[float, float] = (1.0, 2.0),
                           alternative: Tuple[float, float] = (0.5, 2.0),
                           g_values: Sequence[int] = (1, 2, 4, 8, 16),
                           defaults: ModelDefaults = None) -> pd.DataFrame:
    """
    Side-by-side utilization, latency and energy of two (alpha, rho) variants per
    array and G, with the utilization gap and whether the alternative is cheaper.
    """
    defaults = defaults or load_defaults()
    records = []
    for side in PRESET_SIDES:
        for G in g_values:
            a = _lookup(rows, side, base[0], base[1], G)
            b = _lookup(rows, side, alternative[0], alternative[1], G)
            if a is None or b is None:
                continue
            util_delta = b.avg_utilization - a.avg_utilization
            records.append({
                'array': a.array_label,
                'G': G,
                'util_base': a.avg_utilization,
                'util_alt': b.avg_utilization,
                'util_delta': util_delta,
                'latency_ms_base': a.latency_ms,
                'latency_ms_alt': b.latency_ms,
                'latency_delta_ms': b.latency_ms - a.latency_ms,
                'energy_mj_base': a.energy_mj,
                'energy_mj_alt': b.energy_mj,
                'energy_delta_mj': b.energy_mj - a.energy_mj,
                'util_within_tolerance': abs(util_delta) <= defaults.alpha_tolerance,
                'alt_faster': b.latency_ms < a.latency_ms,
                'alt_lower_energy': b.energy_mj < a.energy_mj,
            })
    if not records:
        raise CoverageError(f"no cells with both alpha,rho={base} and alpha,rho={alternative}")
    return pd.DataFrame.from_records(records)


def rows_to_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """Flat table: energy breakdown becomes energy_<level>_mj columns, error timestamps dropped"""
    records = []
    for r in rows:
        record = asdict(r)
        breakdown = record.pop('energy_breakdown')
        record.pop('error')
        for level in LEVELS:
            record[f"energy_{level}_mj"] = breakdown.get(level)
        records.append(record)
    return pd.DataFrame.from_records(records)


def rows_from_frame(frame: pd.DataFrame) -> List[SweepRow]:
    rows = []
    for record in frame.to_dict(orient='records'):
        record = {k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in record.items()}
        breakdown = {level: record.pop(f"energy_{level}_mj", None) for level in LEVELS}
        record['notice'] = record.get('notice') or ''
        for key in ('array_side', 'G'):
            record[key] = int(record[key])
        for key in ('macs', 'params'):
            if record.get(key) is not None:
                record[key] = int(record[key])
        for key in ('alpha', 'rho'):
            record[key] = float(record[key])
        rows.append(SweepRow(**record, energy_breakdown={k: v for k, v in breakdown.items()
                                                          if v is not None}))
    return rows


def utilization_spread(rows: Sequence[SweepRow], alphas: Sequence[float] = (0.5, 1.0, 2.0),
                       rhos: Optional[Sequence[float]] = None) -> float:
    """Largest avg-utilization gap across alpha variants at equal (array, rho, G)"""
    table = rows_to_frame([r for r in rows if r.ok and r.alpha in alphas
                           and (rhos is None or r.rho in rhos)])
    if table.empty:
        return 0.0
    spread = table.groupby(['array_side', 'rho', 'G'])['avg_utilization'].agg(lambda s: s.max() - s.min())
    return float(spread.max())
