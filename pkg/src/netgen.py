"""
src/netgen.py
Network descriptors for the MobileNetV1 family (width, resolution and group-size knobs)
and the analytic per-layer work, storage and data-reuse counts
RELEVANT FILES: descriptor.py, mapping.py, costmodel.py, errors.py
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

from errors import DivisibilityError, DescriptorError

logger = logging.getLogger(__name__)


class LayerKind(str, Enum):
    STANDARD_CONV = 'standard_conv'
    GROUPED_CONV = 'grouped_conv'
    POOLING = 'pooling'
    FULLY_CONNECTED = 'fully_connected'


@dataclass(frozen=True)
class LayerSpec:
    """
    One layer on a square fmap. For grouped conv, channels_per_group is the
    number of input channels each filter sees (1 = depthwise, n = standard).
    """
    name: str
    kind: LayerKind
    kernel_size: int
    stride: int
    in_channels: int
    out_channels: int
    in_spatial: int
    padding: int = 0
    channels_per_group: Optional[int] = None

    @property
    def out_spatial(self) -> int:
        return (self.in_spatial + 2 * self.padding - self.kernel_size) // self.stride + 1

    @property
    def effective_group(self) -> int:
        """Input channels accumulated into one output (G for grouped conv, n otherwise)"""
        if self.kind == LayerKind.GROUPED_CONV:
            return self.channels_per_group
        return self.in_channels

    @property
    def groups(self) -> int:
        if self.kind == LayerKind.GROUPED_CONV:
            return self.in_channels // self.channels_per_group
        return 1

    @property
    def is_vector_op(self) -> bool:
        return self.kind in (LayerKind.POOLING, LayerKind.FULLY_CONNECTED)

    def validate(self):
        for attr in ('kernel_size', 'stride', 'in_channels', 'out_channels', 'in_spatial'):
            if getattr(self, attr) < 1:
                raise DescriptorError(f"{self.name}.{attr}", 'must be a positive integer')
        if self.padding < 0:
            raise DescriptorError(f"{self.name}.padding", 'must be non-negative')
        if self.out_spatial < 1:
            raise DescriptorError(f"{self.name}.kernel_size", 'kernel larger than padded input')
        if self.kind == LayerKind.GROUPED_CONV:
            cpg = self.channels_per_group
            if cpg is None or cpg < 1:
                raise DescriptorError(f"{self.name}.channels_per_group", 'required for grouped_conv')
            if self.in_channels % cpg != 0:
                raise DivisibilityError(self.name, self.in_channels, cpg)
            if self.out_channels % (self.in_channels // cpg) != 0:
                raise DivisibilityError(self.name, self.out_channels, self.in_channels // cpg)


@dataclass(frozen=True)
class LayerCounts:
    macs: int = 0
    params: int = 0
    in_acts: int = 0
    out_acts: int = 0

    @property
    def acts(self) -> int:
        return self.in_acts + self.out_acts

    @property
    def data_reuse(self) -> float:
        total = self.params + self.acts
        return self.macs / total if total else 0.0

    @property
    def w_reu(self) -> float:
        return self.macs / self.params if self.params else 0.0

    @property
    def a_reu(self) -> float:
        return self.macs / self.acts if self.acts else 0.0

    def __add__(self, other: 'LayerCounts') -> 'LayerCounts':
        return LayerCounts(
            macs=self.macs + other.macs,
            params=self.params + other.params,
            in_acts=self.in_acts + other.in_acts,
            out_acts=self.out_acts + other.out_acts,
        )

    def to_dict(self) -> Dict:
        return {
            'macs': self.macs,
            'params': self.params,
            'in_acts': self.in_acts,
            'out_acts': self.out_acts,
            'data_reuse': self.data_reuse,
            'w_reu': self.w_reu,
            'a_reu': self.a_reu,
        }


@dataclass(frozen=True)
class NetworkSpec:
    layers: Tuple[LayerSpec, ...]
    alpha: float = 1.0
    rho: float = 1.0
    group_size: int = 1
    batch: int = 1
    name: str = 'network'
    bias: bool = False

    def validate(self):
        for layer in self.layers:
            layer.validate()
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_channels != nxt.in_channels:
                raise DescriptorError(
                    f"{nxt.name}.in_channels",
                    f"expected {prev.out_channels} from '{prev.name}', got {nxt.in_channels}")
            if prev.out_spatial != nxt.in_spatial:
                raise DescriptorError(
                    f"{nxt.name}.in_spatial",
                    f"expected {prev.out_spatial} from '{prev.name}', got {nxt.in_spatial}")
        return self


def count_layer(layer: LayerSpec, bias: bool = False) -> LayerCounts:
    """Work and storage counts for one layer (batch of one)"""
    layer.validate()
    n, m = layer.in_channels, layer.out_channels
    d_k, d_f = layer.kernel_size, layer.out_spatial

    if layer.kind == LayerKind.POOLING:
        return LayerCounts(0, 0, n * layer.in_spatial ** 2, m * d_f ** 2)

    if layer.kind == LayerKind.FULLY_CONNECTED:
        # 1x1 conv on a 1x1 fmap
        d_k, d_f = 1, 1

    macs = m * layer.effective_group * d_k ** 2 * d_f ** 2
    params = m * layer.effective_group * d_k ** 2
    if bias:
        params += m

    in_acts = n * (layer.in_spatial ** 2 if layer.kind != LayerKind.FULLY_CONNECTED else 1)
    return LayerCounts(macs, params, in_acts, m * d_f ** 2)


def network_counts(net: NetworkSpec) -> LayerCounts:
    total = LayerCounts()
    for layer in net.layers:
        total = total + count_layer(layer, bias=net.bias)
    return total


def kind_totals(net: NetworkSpec) -> Dict[str, LayerCounts]:
    """Subtotals per layer kind, with 3x3 grouped layers and 1x1 convs kept apart"""
    totals: Dict[str, LayerCounts] = {}
    for layer in net.layers:
        key = layer.kind.value
        if layer.kind == LayerKind.STANDARD_CONV and layer.kernel_size == 1:
            key = 'pointwise_conv'
        totals[key] = totals.get(key, LayerCounts()) + count_layer(layer, bias=net.bias)
    return totals


def reuse_profile(net: NetworkSpec) -> List[Dict]:
    """Per-layer weight and activation reuse, in network order"""
    profile = []
    for index, layer in enumerate(net.layers):
        counts = count_layer(layer, bias=net.bias)
        profile.append({
            'index': index,
            'name': layer.name,
            'kind': layer.kind.value,
            'kernel_size': layer.kernel_size,
            'out_spatial': layer.out_spatial,
            'w_reu': counts.w_reu,
            'a_reu': counts.a_reu,
        })
    return profile


# (base output channels, stride) for the 13 depthwise-separable blocks
MOBILENET_V1_BLOCKS = [
    (64, 1), (128, 2), (128, 1), (256, 2), (256, 1), (512, 2),
    (512, 1), (512, 1), (512, 1), (512, 1), (512, 1),
    (1024, 2), (1024, 1),
]
NUM_CLASSES = 1000


def _scaled(base: int, alpha: float) -> int:
    channels = int(round(base * alpha))
    if channels < 1:
        raise DescriptorError('alpha', f"alpha={alpha} leaves {base} channels at zero")
    return channels


def generate_mobilenet_v1(alpha: float = 1.0, rho: float = 1.0, G: int = 1,
                          bias: bool = False) -> NetworkSpec:
    """
    Build MobileNetV1 with width multiplier alpha, resolution multiplier rho and
    channels_per_group G on every 3x3 layer except the first.
    """
    if alpha <= 0:
        raise DescriptorError('alpha', 'must be positive')
    if rho <= 0:
        raise DescriptorError('rho', 'must be positive')
    if G < 1:
        raise DescriptorError('group_size', 'must be a positive integer')

    spatial = int(round(224 * rho))
    if spatial < 1:
        raise DescriptorError('rho', f"rho={rho} gives an empty input")

    channels = _scaled(32, alpha)
    conv1 = LayerSpec('conv1', LayerKind.STANDARD_CONV, 3, 2, 3, channels, spatial, padding=1)
    layers = [conv1]
    spatial = conv1.out_spatial

    for index, (base, stride) in enumerate(MOBILENET_V1_BLOCKS, start=1):
        dw = LayerSpec(f"dw{index}", LayerKind.GROUPED_CONV, 3, stride, channels, channels,
                       spatial, padding=1, channels_per_group=min(G, channels))
        out_channels = _scaled(base, alpha)
        pw = LayerSpec(f"pw{index}", LayerKind.STANDARD_CONV, 1, 1, channels, out_channels,
                       dw.out_spatial, padding=0)
        layers.extend([dw, pw])
        channels, spatial = out_channels, pw.out_spatial

    layers.append(LayerSpec('pool', LayerKind.POOLING, spatial, 1, channels, channels, spatial))
    layers.append(LayerSpec('fc', LayerKind.FULLY_CONNECTED, 1, 1, channels, NUM_CLASSES, 1))

    net = NetworkSpec(tuple(layers), alpha=alpha, rho=rho, group_size=G,
                      name=f"mobilenet_v1_a{alpha:g}_r{rho:g}_g{G}", bias=bias)
    net.validate()
    logger.debug(f"Generated {net.name} with {len(net.layers)} layers")
    return net


def scaling_rule_counts(alpha: float = 1.0, rho: float = 1.0, G: int = 1) -> LayerCounts:
    """
    Whole-network MACs and params obtained by scaling the baseline (alpha=1, rho=1, G=1)
    subtotals per layer kind instead of rebuilding the layers:

        first conv, 1x1 convs   macs * alpha^2 rho^2     params * alpha^2
        3x3 grouped convs       macs * alpha rho^2 G     params * alpha^2 G
        classifier              unchanged (1024 inputs)

    This is the convention of the published MobileNetV1 count tables. The generated
    network agrees with it at alpha=1 for rho >= 1; elsewhere the structural counts
    differ because the first conv and the classifier scale with alpha and a rho=0.5
    input ends on a 4x4 fmap. Activation counts are those of the generated network.
    """
    if alpha <= 0 or rho <= 0 or G < 1:
        raise DescriptorError('scaling', f"invalid knobs alpha={alpha} rho={rho} G={G}")

    base = kind_totals(generate_mobilenet_v1(1.0, 1.0, 1))
    area = rho ** 2
    dense = base['standard_conv'] + base['pointwise_conv']
    grouped = base['grouped_conv']
    fc = base['fully_connected']

    macs = (dense.macs * alpha ** 2 * area + grouped.macs * alpha * area * G + fc.macs)
    params = (dense.params * alpha ** 2 + grouped.params * alpha ** 2 * G + fc.params)

    structural = network_counts(generate_mobilenet_v1(alpha, rho, G))
    return LayerCounts(int(round(macs)), int(round(params)),
                       structural.in_acts, structural.out_acts)


def apply_group_size(net: NetworkSpec, G: int) -> NetworkSpec:
    """Reset channels_per_group on every grouped layer to min(G, channels)"""
    if G < 1:
        raise DescriptorError('group_size', 'must be a positive integer')

    layers = []
    for layer in net.layers:
        if layer.kind == LayerKind.GROUPED_CONV:
            layer = replace(layer, channels_per_group=min(G, layer.in_channels))
            layer.validate()
        layers.append(layer)

    name = net.name
    suffix = f"_g{net.group_size}"
    if name.endswith(suffix):
        name = name[:-len(suffix)] + f"_g{G}"
    return replace(net, layers=tuple(layers), group_size=G, name=name)
