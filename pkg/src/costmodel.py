"""
src/costmodel.py
Memory-hierarchy access counts, roofline latency and energy per layer,
summed into whole-network cost
RELEVANT FILES: mapping.py, netgen.py, config.py, reports.py
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Dict, List

from config import ModelDefaults, load_defaults
from errors import MappingError
from mapping import ArrayConfig, EnergyCosts, MappingResult, average_utilization, map_layer
from netgen import LayerCounts, LayerSpec, NetworkSpec, count_layer

logger = logging.getLogger(__name__)

LEVELS = ('alu', 'dram', 'gbuf', 'array', 'rf')


@dataclass(frozen=True)
class AccessCounts:
    dram: int = 0
    gbuf: int = 0
    array: int = 0
    rf: int = 0
    alu_macs: int = 0

    def to_dict(self) -> Dict[str, int]:
        return {
            'alu': self.alu_macs,
            'dram': self.dram,
            'gbuf': self.gbuf,
            'array': self.array,
            'rf': self.rf,
        }


@dataclass(frozen=True)
class Latency:
    compute_cycles: int
    memory_cycles: int
    latency_cycles: int
    latency_s: float

    @property
    def memory_bound(self) -> bool:
        return self.memory_cycles > self.compute_cycles


@dataclass(frozen=True)
class LayerCost:
    layer: LayerSpec
    counts: LayerCounts
    mapping: MappingResult
    accesses: AccessCounts
    latency: Latency
    energy_breakdown: Dict[str, float]

    @property
    def compute_cycles(self) -> int:
        return self.latency.compute_cycles

    @property
    def memory_cycles(self) -> int:
        return self.latency.memory_cycles

    @property
    def latency_cycles(self) -> int:
        return self.latency.latency_cycles

    @property
    def latency_s(self) -> float:
        return self.latency.latency_s

    @property
    def energy_total_j(self) -> float:
        return sum(self.energy_breakdown.values())


@dataclass
class NetworkCost:
    network: str
    array: ArrayConfig
    layers: List[LayerCost] = field(default_factory=list)

    @property
    def latency_cycles(self) -> int:
        return sum(c.latency_cycles for c in self.layers)

    @property
    def latency_s(self) -> float:
        return sum(c.latency_s for c in self.layers)

    @property
    def energy_j(self) -> float:
        return sum(c.energy_total_j for c in self.layers)

    @property
    def energy_breakdown(self) -> Dict[str, float]:
        return {level: sum(c.energy_breakdown[level] for c in self.layers) for level in LEVELS}

    @property
    def accesses(self) -> AccessCounts:
        return AccessCounts(
            dram=sum(c.accesses.dram for c in self.layers),
            gbuf=sum(c.accesses.gbuf for c in self.layers),
            array=sum(c.accesses.array for c in self.layers),
            rf=sum(c.accesses.rf for c in self.layers),
            alu_macs=sum(c.accesses.alu_macs for c in self.layers),
        )

    @property
    def average_utilization(self) -> float:
        return average_utilization([c.mapping for c in self.layers])

    @property
    def cycle_weighted_utilization(self) -> float:
        """Utilization averaged over compute cycles instead of layers"""
        return average_utilization([c.mapping for c in self.layers],
                                   weights=[c.compute_cycles for c in self.layers])

    @property
    def memory_bound_layers(self) -> int:
        return sum(1 for c in self.layers if c.latency.memory_bound)

    def summary(self) -> Dict:
        return {
            'network': self.network,
            'array': self.array.label,
            'layers': len(self.layers),
            'avg_utilization': self.average_utilization,
            'cycle_weighted_utilization': self.cycle_weighted_utilization,
            'latency_ms': self.latency_s * 1e3,
            'energy_mj': self.energy_j * 1e3,
            'memory_bound_layers': self.memory_bound_layers,
            'energy_breakdown_mj': {k: v * 1e3 for k, v in self.energy_breakdown.items()},
        }


def reload_factor(counts: LayerCounts, array: ArrayConfig) -> int:
    """How many times weights are streamed from DRAM when the layer overflows on-chip memory"""
    working_set = (counts.params + counts.acts) * array.word_bytes
    if working_set <= array.onchip_bytes:
        return 1
    return math.ceil(working_set / array.onchip_bytes)


def access_counts(layer: LayerSpec, counts: LayerCounts, mapping: MappingResult,
                  array: ArrayConfig, defaults: ModelDefaults = None) -> AccessCounts:
    """
    Per-level access counts. Weights are re-read from GBuf once per ofmap strip tile,
    ifmaps once per filter tile and ofmaps once per channel tile.
    """
    defaults = defaults or load_defaults()
    gbuf = (counts.params * mapping.strip_tiles
            + counts.in_acts * mapping.filter_tiles
            + counts.out_acts * mapping.channel_tiles)
    dram = counts.params * reload_factor(counts, array) + counts.acts
    return AccessCounts(
        dram=dram,
        gbuf=gbuf,
        array=int(round(counts.macs * defaults.inter_pe_factor)),
        rf=counts.macs * defaults.rf_accesses_per_mac,
        alu_macs=counts.macs,
    )


def layer_latency(counts: LayerCounts, mapping: MappingResult, accesses: AccessCounts,
                  array: ArrayConfig) -> Latency:
    if counts.macs > 0 and mapping.utilization <= 0:
        raise MappingError(f"layer '{mapping.layer}' has {counts.macs} MACs but no active PEs")

    compute_cycles = mapping.passes * mapping.pass_cycles if counts.macs else 0
    memory_cycles = math.ceil(accesses.dram * array.word_bytes / array.dram_bytes_per_cycle)
    cycles = max(compute_cycles, memory_cycles)
    return Latency(compute_cycles, memory_cycles, cycles, cycles / array.clock_hz)


def layer_energy(accesses: AccessCounts, costs: EnergyCosts) -> Dict[str, float]:
    """Joules per level; the total is the sum of the values"""
    return {
        'alu': accesses.alu_macs * costs.alu_j,
        'dram': accesses.dram * costs.dram_j,
        'gbuf': accesses.gbuf * costs.gbuf_j,
        'array': accesses.array * costs.array_j,
        'rf': accesses.rf * costs.rf_j,
    }


def evaluate_layer(layer: LayerSpec, array: ArrayConfig, bias: bool = False,
                   defaults: ModelDefaults = None) -> LayerCost:
    counts = count_layer(layer, bias=bias)
    mapping = map_layer(layer, array)
    accesses = access_counts(layer, counts, mapping, array, defaults)
    latency = layer_latency(counts, mapping, accesses, array)
    return LayerCost(layer, counts, mapping, accesses, latency,
                     layer_energy(accesses, array.energy_costs))


def network_cost(net: NetworkSpec, array: ArrayConfig,
                 defaults: ModelDefaults = None) -> NetworkCost:
    """Layers are evaluated independently and summed (no inter-layer pipelining at batch 1)"""
    defaults = defaults or load_defaults()
    cost = NetworkCost(network=net.name, array=array)
    for layer in net.layers:
        cost.layers.append(evaluate_layer(layer, array, bias=net.bias, defaults=defaults))

    logger.debug(f"{net.name} on {array.label}: {cost.latency_s * 1e3:.3f} ms, "
                 f"{cost.energy_j * 1e3:.3f} mJ")
    return cost
