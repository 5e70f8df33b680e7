"""
src/mapping.py
Row-stationary occupancy model: places one layer on an R x C PE array and reports
the pass schedule and PE utilization used by the cost model
RELEVANT FILES: netgen.py, costmodel.py, config.py
"""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import ModelDefaults, load_defaults
from errors import ConfigurationError
from netgen import LayerSpec, LayerKind, NetworkSpec

logger = logging.getLogger(__name__)

KIB = 1024

# array side -> global buffer KiB; RF is 0.5 KiB per PE for every preset
PRESET_GBUF_KIB = {16: 128, 32: 256, 64: 512, 128: 1024}
PRESET_RF_BYTES_PER_PE = 512


@dataclass(frozen=True)
class EnergyCosts:
    """Joules per access at each level of the hierarchy"""
    dram_j: float = 200e-12
    gbuf_j: float = 6e-12
    array_j: float = 2e-12
    rf_j: float = 1e-12
    alu_j: float = 1e-12

    def to_dict(self) -> Dict[str, float]:
        return {
            'dram_j': self.dram_j,
            'gbuf_j': self.gbuf_j,
            'array_j': self.array_j,
            'rf_j': self.rf_j,
            'alu_j': self.alu_j,
        }


@dataclass(frozen=True)
class ArrayConfig:
    rows: int
    cols: int
    gbuf_bytes: int
    rf_bytes_per_pe: int
    clock_hz: float
    dram_bytes_per_cycle: float
    energy_costs: EnergyCosts
    word_bytes: int = 2
    label: str = ''

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def onchip_bytes(self) -> int:
        return self.gbuf_bytes + self.rf_bytes_per_pe * self.size

    @classmethod
    def preset(cls, side: int, double_memory: bool = False,
               defaults: ModelDefaults = None) -> 'ArrayConfig':
        """Square preset with the standard on-chip memory sizing"""
        if side not in PRESET_GBUF_KIB:
            raise ConfigurationError(
                f"unknown array preset {side}; choose from {sorted(PRESET_GBUF_KIB)}")
        defaults = defaults or load_defaults()
        scale = defaults.rho_memory_scale if double_memory else 1.0
        return cls(
            rows=side,
            cols=side,
            gbuf_bytes=int(PRESET_GBUF_KIB[side] * KIB * scale),
            rf_bytes_per_pe=int(PRESET_RF_BYTES_PER_PE * scale),
            clock_hz=defaults.clock_hz,
            dram_bytes_per_cycle=defaults.dram_bytes_per_cycle,
            energy_costs=EnergyCosts(alu_j=defaults.alu_pj * 1e-12),
            word_bytes=defaults.word_bytes,
            label=f"{side}x{side}",
        )

    def with_overrides(self, **changes) -> 'ArrayConfig':
        changes = {k: v for k, v in changes.items() if v is not None}
        unknown = set(changes) - set(self.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown array fields: {sorted(unknown)}")
        return replace(self, **changes)

    def to_dict(self) -> Dict:
        return {
            'label': self.label,
            'rows': self.rows,
            'cols': self.cols,
            'gbuf_bytes': self.gbuf_bytes,
            'rf_bytes_per_pe': self.rf_bytes_per_pe,
            'clock_hz': self.clock_hz,
            'dram_bytes_per_cycle': self.dram_bytes_per_cycle,
            'word_bytes': self.word_bytes,
            **self.energy_costs.to_dict(),
        }


@dataclass(frozen=True)
class MappingResult:
    layer: str
    pe_set_rows: int
    pe_set_cols: int
    r_g: int
    r_f: int
    r_s: int
    passes: int
    pass_cycles: int
    channel_tiles: int
    filter_tiles: int
    strip_tiles: int
    # (active PEs, number of passes with that occupancy)
    pass_profile: Tuple[Tuple[int, int], ...]
    array_size: int

    @property
    def active_pes_per_pass(self) -> List[int]:
        return [active for active, count in self.pass_profile for _ in range(count)]

    @property
    def active_pe_passes(self) -> int:
        return sum(active * count for active, count in self.pass_profile)

    @property
    def utilization(self) -> float:
        return self.active_pe_passes / (self.passes * self.array_size)

    def to_dict(self) -> Dict:
        return {
            'layer': self.layer,
            'pe_set_rows': self.pe_set_rows,
            'pe_set_cols': self.pe_set_cols,
            'r_g': self.r_g,
            'r_f': self.r_f,
            'r_s': self.r_s,
            'passes': self.passes,
            'utilization': self.utilization,
        }


def _idivc(a: int, b: int) -> int:
    return -(-a // b)


def _split(total: int, parts: int) -> List[int]:
    """Sizes of `parts` chunks of at most ceil(total/parts), last chunk takes the rest"""
    chunk = _idivc(total, parts)
    sizes = [chunk] * (parts - 1)
    sizes.append(total - chunk * (parts - 1))
    return [s for s in sizes if s > 0]


def _strip_fold(d_f: int, pe_rows: int, units_per_strip: int, array: ArrayConfig,
                search: bool) -> Tuple[int, int, int]:
    """
    Pick how many balanced ofmap strips to cut: the fewest that fit the columns, or
    with search=True the count that needs the fewest passes (widest wins ties).
    Returns (passes, strips, slots per pass).
    """
    best = None
    for width in range(min(d_f, array.cols), 0, -1):
        strips = _idivc(d_f, width)
        if _idivc(d_f, strips) != width:
            continue
        slots = (array.rows // pe_rows) * (array.cols // width)
        passes = _idivc(units_per_strip * strips, slots)
        if best is None or passes < best[0]:
            best = (passes, strips, slots)
        if not search:
            break
    return best


def _width_sums(widths: List[int], repeats: int, slots: int) -> Counter:
    """Columns busy in each pass when `repeats` copies of the strip list fill `slots` at a time"""
    units = len(widths) * repeats
    if len(set(widths)) == 1:
        sums = Counter({slots * widths[0]: units // slots})
        if units % slots:
            sums[units % slots * widths[0]] += 1
        return +sums
    sequence = np.tile(np.asarray(widths, dtype=np.int64), repeats)
    return Counter(np.add.reduceat(sequence, np.arange(0, units, slots)).tolist())


def _map_vector_op(layer: LayerSpec, array: ArrayConfig) -> MappingResult:
    active = min(array.size, layer.out_channels)
    macs = layer.out_channels * layer.in_channels
    return MappingResult(
        layer=layer.name,
        pe_set_rows=1,
        pe_set_cols=1,
        r_g=1,
        r_f=active,
        r_s=1,
        passes=1,
        pass_cycles=_idivc(macs, active),
        channel_tiles=1,
        filter_tiles=1,
        strip_tiles=1,
        pass_profile=((active, 1),),
        array_size=array.size,
    )


def map_layer(layer: LayerSpec, array: ArrayConfig) -> MappingResult:
    """
    A unit of work is one (input channel, filter, ofmap strip) triple inside a group: a
    PE set of d_k filter rows by one strip of ofmap columns. Strips come from folding
    the ofmap width onto the columns. Units of one group are tiled over the array
    channel-major, as many per pass as there are PE-set slots; groups run one after
    another. Pooling is a per-channel reduction over its whole input window.
    """
    layer.validate()
    if layer.kind == LayerKind.FULLY_CONNECTED:
        return _map_vector_op(layer, array)

    if layer.kind == LayerKind.POOLING:
        d_k, d_f = layer.in_spatial, 1
        channels, filters, groups = 1, 1, layer.in_channels
        pass_cycles = 0
    else:
        d_k, d_f = layer.kernel_size, layer.out_spatial
        channels = layer.effective_group
        filters = layer.out_channels // layer.groups
        groups = layer.groups
        pass_cycles = d_k * d_f

    row_chunks = _split(d_k, _idivc(d_k, array.rows))
    pe_set_rows = row_chunks[0]
    # k x k standard convs search the strip count; other layers take the fewest strips
    search = layer.kind == LayerKind.STANDARD_CONV and d_k > 1
    _, strips, slots = _strip_fold(d_f, pe_set_rows, channels * filters, array, search)
    widths = _split(d_f, strips)

    r_g = min(channels, slots)
    r_f = min(filters, max(1, slots // r_g))
    r_s = min(strips, max(1, slots // (r_g * r_f)))

    profile = Counter()
    for columns, n_passes in _width_sums(widths, channels * filters, slots).items():
        for rows, n_chunks in Counter(row_chunks).items():
            profile[rows * columns] += n_passes * n_chunks * groups

    passes = sum(profile.values())
    result = MappingResult(
        layer=layer.name,
        pe_set_rows=pe_set_rows,
        pe_set_cols=widths[0],
        r_g=r_g,
        r_f=r_f,
        r_s=r_s,
        passes=passes,
        pass_cycles=pass_cycles,
        channel_tiles=_idivc(channels, r_g),
        filter_tiles=_idivc(filters, r_f),
        strip_tiles=_idivc(strips, r_s),
        pass_profile=tuple(sorted(profile.items(), reverse=True)),
        array_size=array.size,
    )
    logger.debug(f"Mapped {layer.name} on {array.label}: {strips} strips, {slots} slots, "
                 f"passes={passes} util={result.utilization:.3f}")
    return result


def map_network(net: NetworkSpec, array: ArrayConfig) -> List[MappingResult]:
    return [map_layer(layer, array) for layer in net.layers]


def average_utilization(results: Sequence[MappingResult],
                        weights: Optional[Sequence[float]] = None) -> float:
    """
    Arithmetic mean of per-layer utilization. Passing per-layer cycles as weights
    gives the cycles-weighted alternative.
    """
    if not results:
        raise ValueError('average_utilization needs at least one mapping result')
    values = np.array([r.utilization for r in results], dtype=float)
    if weights is None:
        return float(values.mean())
    weights = np.asarray(weights, dtype=float)
    if weights.sum() == 0:
        return float(values.mean())
    return float(np.average(values, weights=weights))
