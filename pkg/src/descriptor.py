"""
src/descriptor.py
JSON network descriptor: pydantic schema, load/save and conversion to NetworkSpec
RELEVANT FILES: netgen.py, errors.py, cli.py
"""

import logging
from typing import List, Optional

from pydantic import BaseModel, Field, ValidationError

from errors import DescriptorError
from netgen import LayerKind, LayerSpec, NetworkSpec

logger = logging.getLogger(__name__)


class LayerDescriptor(BaseModel):
    name: str
    kind: LayerKind
    channels_per_group: Optional[int] = Field(default=None, ge=1)
    d_k: int = Field(ge=1)
    stride: int = Field(ge=1)
    in_channels: int = Field(ge=1)
    out_channels: int = Field(ge=1)
    in_spatial: int = Field(ge=1)
    padding: int = Field(default=0, ge=0)

    model_config = {'extra': 'forbid'}


class NetworkDescriptor(BaseModel):
    name: str
    alpha: float = Field(default=1.0, gt=0)
    rho: float = Field(default=1.0, gt=0)
    group_size: int = Field(default=1, ge=1)
    batch: int = Field(default=1, ge=1)
    bias: bool = False
    layers: List[LayerDescriptor]

    model_config = {'extra': 'forbid'}


def _field_path(error: dict) -> str:
    return '.'.join(str(part) for part in error.get('loc', ())) or '<root>'


def to_descriptor(net: NetworkSpec) -> NetworkDescriptor:
    return NetworkDescriptor(
        name=net.name,
        alpha=net.alpha,
        rho=net.rho,
        group_size=net.group_size,
        batch=net.batch,
        bias=net.bias,
        layers=[
            LayerDescriptor(
                name=layer.name,
                kind=layer.kind,
                channels_per_group=layer.channels_per_group,
                d_k=layer.kernel_size,
                stride=layer.stride,
                in_channels=layer.in_channels,
                out_channels=layer.out_channels,
                in_spatial=layer.in_spatial,
                padding=layer.padding,
            )
            for layer in net.layers
        ],
    )


def from_descriptor(desc: NetworkDescriptor) -> NetworkSpec:
    layers = tuple(
        LayerSpec(
            name=layer.name,
            kind=layer.kind,
            kernel_size=layer.d_k,
            stride=layer.stride,
            in_channels=layer.in_channels,
            out_channels=layer.out_channels,
            in_spatial=layer.in_spatial,
            padding=layer.padding,
            channels_per_group=layer.channels_per_group,
        )
        for layer in desc.layers
    )
    net = NetworkSpec(layers, alpha=desc.alpha, rho=desc.rho, group_size=desc.group_size,
                      batch=desc.batch, name=desc.name, bias=desc.bias)
    return net.validate()


def dumps_network(net: NetworkSpec) -> str:
    return to_descriptor(net).model_dump_json(indent=2)


def loads_network(text: str) -> NetworkSpec:
    """Parse descriptor JSON; schema failures name the first offending field"""
    try:
        desc = NetworkDescriptor.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        raise DescriptorError(_field_path(first), first.get('msg', 'invalid value')) from e
    return from_descriptor(desc)


def save_network(net: NetworkSpec, path: str):
    with open(path, 'w') as f:
        f.write(dumps_network(net))
    logger.info(f"Wrote network descriptor {net.name} to {path}")


def load_network(path: str) -> NetworkSpec:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise DescriptorError(path, f"cannot read descriptor: {e.strerror}") from e
    net = loads_network(text)
    logger.info(f"Loaded network {net.name} ({len(net.layers)} layers) from {path}")
    return net
