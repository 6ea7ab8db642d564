"""Layer and network descriptions plus the derived shape/cost quantities.

Three layer kinds are modeled (convolutional, fully-connected, pooling);
each knows how to derive its output tensor shape, FLOP count, and memory
access counts (tensor element counts).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import ClassVar, Union


class LayerSpecError(ValueError):
    """A layer description violates its structural constraints."""


class NetworkSpecError(ValueError):
    """A network document is malformed or contains an invalid layer."""


@dataclass(frozen=True)
class TensorShape:
    batch: int
    channels: int
    h: int
    w: int

    @property
    def element_count(self) -> int:
        return self.batch * self.channels * self.h * self.w


def _check_positive(obj, names: tuple[str, ...]) -> None:
    for name in names:
        value = getattr(obj, name)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise LayerSpecError(f"{name} must be a positive integer, got {value!r}")


def _check_padding(obj) -> None:
    pad = obj.padding
    if not isinstance(pad, int) or isinstance(pad, bool) or pad < 0:
        raise LayerSpecError(f"padding must be a non-negative integer, got {pad!r}")
    if obj.kernel > obj.in_h + 2 * pad or obj.kernel > obj.in_w + 2 * pad:
        raise LayerSpecError(
            f"kernel {obj.kernel} exceeds padded input "
            f"{obj.in_h}x{obj.in_w} (padding {pad})"
        )


@dataclass(frozen=True)
class Conv:
    batch: int
    in_channels: int
    in_h: int
    in_w: int
    out_channels: int
    kernel: int
    stride: int
    padding: int = 0

    kind: ClassVar[str] = "conv"

    def __post_init__(self):
        _check_positive(
            self, ("batch", "in_channels", "in_h", "in_w", "out_channels", "kernel", "stride")
        )
        _check_padding(self)


@dataclass(frozen=True)
class FullyConnected:
    batch: int
    in_size: int
    out_size: int

    kind: ClassVar[str] = "fc"

    def __post_init__(self):
        _check_positive(self, ("batch", "in_size", "out_size"))


@dataclass(frozen=True)
class Pool:
    batch: int
    channels: int
    in_h: int
    in_w: int
    kernel: int
    stride: int
    padding: int = 0

    kind: ClassVar[str] = "pool"

    def __post_init__(self):
        _check_positive(self, ("batch", "channels", "in_h", "in_w", "kernel", "stride"))
        _check_padding(self)


LayerSpec = Union[Conv, FullyConnected, Pool]

LAYER_KINDS = ("conv", "fc", "pool")


@dataclass(frozen=True)
class NetworkSpec:
    """An ordered, serial stack of layers. Layer n is ``layers[n-1]``."""

    name: str
    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        if len(self.layers) < 1:
            raise NetworkSpecError("network must contain at least one layer")
        object.__setattr__(self, "layers", tuple(self.layers))


@dataclass(frozen=True)
class DerivedQuantities:
    out_shape: TensorShape
    flops: int
    mem_in: int
    mem_out: int
    mem_kernel: int


def conv_output_side(in_side: int, kernel: int, stride: int, padding: int) -> int:
    """Output length along one spatial dimension of a conv/pool window sweep."""
    out = (in_side + 2 * padding - kernel) // stride + 1
    if out < 1:
        raise LayerSpecError(
            f"window of size {kernel} (stride {stride}, padding {padding}) "
            f"produces no output over input side {in_side}"
        )
    return out


def derive_quantities(layer: LayerSpec) -> DerivedQuantities:
    """Output shape, FLOP count, and tensor element counts for one layer.

    Convention: a multiply-add pair counts as 2 FLOPs; pooling counts one op
    per window element. Memory counts are tensor element counts.
    """
    if isinstance(layer, Conv):
        out_h = conv_output_side(layer.in_h, layer.kernel, layer.stride, layer.padding)
        out_w = conv_output_side(layer.in_w, layer.kernel, layer.stride, layer.padding)
        out_shape = TensorShape(layer.batch, layer.out_channels, out_h, out_w)
        flops = 2 * layer.batch * out_h * out_w * layer.out_channels * layer.kernel**2 * layer.in_channels
        mem_in = layer.batch * layer.in_channels * layer.in_h * layer.in_w
        mem_kernel = layer.out_channels * layer.in_channels * layer.kernel**2
    elif isinstance(layer, FullyConnected):
        out_shape = TensorShape(layer.batch, layer.out_size, 1, 1)
        flops = 2 * layer.batch * layer.in_size * layer.out_size
        mem_in = layer.batch * layer.in_size
        mem_kernel = layer.in_size * layer.out_size
    elif isinstance(layer, Pool):
        out_h = conv_output_side(layer.in_h, layer.kernel, layer.stride, layer.padding)
        out_w = conv_output_side(layer.in_w, layer.kernel, layer.stride, layer.padding)
        out_shape = TensorShape(layer.batch, layer.channels, out_h, out_w)
        flops = layer.batch * layer.channels * out_h * out_w * layer.kernel**2
        mem_in = layer.batch * layer.channels * layer.in_h * layer.in_w
        mem_kernel = 0
    else:
        raise LayerSpecError(f"unknown layer type: {type(layer).__name__}")
    return DerivedQuantities(
        out_shape=out_shape,
        flops=flops,
        mem_in=mem_in,
        mem_out=out_shape.element_count,
        mem_kernel=mem_kernel,
    )


_LAYER_CLASSES = {"conv": Conv, "fc": FullyConnected, "pool": Pool}


def layer_from_fields(kind: str, values: dict) -> LayerSpec:
    """Build one LayerSpec from a plain field dict, checking names and types."""
    cls = _LAYER_CLASSES.get(kind)
    if cls is None:
        raise NetworkSpecError(f"unknown layer type {kind!r} (expected one of {LAYER_KINDS})")
    known = {f.name for f in fields(cls)}
    extra = set(values) - known
    if extra:
        raise NetworkSpecError(f"unexpected fields for {kind!r} layer: {sorted(extra)}")
    # padding is the only defaulted field; everything else is required
    required = known - {"padding"}
    missing = required - set(values)
    if missing:
        raise NetworkSpecError(f"missing fields for {kind!r} layer: {sorted(missing)}")
    try:
        return cls(**values)
    except LayerSpecError as exc:
        raise NetworkSpecError(str(exc)) from exc


def parse_network(document: str | dict) -> NetworkSpec:
    """Parse and validate the JSON network description.

    Schema: ``{"name": str, "layers": [{"type": "conv"|"fc"|"pool", ...}]}``
    with per-type fields named exactly as the LayerSpec fields. Errors name
    the 1-based index of the offending layer.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise NetworkSpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise NetworkSpecError("network document must be a JSON object")
    name = document.get("name")
    if not isinstance(name, str):
        raise NetworkSpecError('network document needs a string "name"')
    raw_layers = document.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise NetworkSpecError('network document needs a non-empty "layers" list')
    layers = []
    for i, entry in enumerate(raw_layers, start=1):
        if not isinstance(entry, dict):
            raise NetworkSpecError(f"layer {i}: expected an object, got {type(entry).__name__}")
        entry = dict(entry)
        kind = entry.pop("type", None)
        try:
            layers.append(layer_from_fields(kind, entry))
        except NetworkSpecError as exc:
            raise NetworkSpecError(f"layer {i}: {exc}") from exc
    return NetworkSpec(name=name, layers=tuple(layers))
