"""Crossbar operation counts and MVMU energy for a layer stack.

A conv layer with output size ``d x d`` reuses each ``xs x xs`` weight block
once per output position, so its per-inference operation count is

    d * d * ceil(nc_in * k * k / xs) * ceil(nc_out / xs)

while a fully connected layer uses each block once:

    ceil(nf_in / xs) * ceil(nf_out / xs)

Total energy is the summed operation count times the energy per operation.
Only MVMU energy is modelled; memory, NoC and interconnect are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

CONV = "conv"
FC = "fc"

#: Energy of one 16-bit 128x128 crossbar matrix-vector operation, joules.
EPX_DEFAULT = 44e-9
XS_DEFAULT = 128


class TemplateError(ValueError):
    pass


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    d: int | None = None
    nc_in: int | None = None
    k: int | None = None
    nc_out: int | None = None
    nf_in: int | None = None
    nf_out: int | None = None

    def __post_init__(self):
        conv_fields = (self.d, self.nc_in, self.k, self.nc_out)
        fc_fields = (self.nf_in, self.nf_out)
        if self.kind == CONV:
            used, unused = conv_fields, fc_fields
        elif self.kind == FC:
            used, unused = fc_fields, conv_fields
        else:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if any(v is not None for v in unused):
            raise ValueError(f"{self.kind} layer has fields of the other kind set")
        for v in used:
            if v is None or int(v) != v or v < 1:
                raise ValueError(f"{self.kind} layer dimensions must be positive integers: {self}")

    @classmethod
    def conv(cls, d: int, nc_in: int, k: int, nc_out: int) -> "LayerSpec":
        return cls(CONV, d=d, nc_in=nc_in, k=k, nc_out=nc_out)

    @classmethod
    def fc(cls, nf_in: int, nf_out: int) -> "LayerSpec":
        return cls(FC, nf_in=nf_in, nf_out=nf_out)


@dataclass(frozen=True)
class HardwareConfig:
    xs: int = XS_DEFAULT
    epx: float = EPX_DEFAULT

    def __post_init__(self):
        if int(self.xs) != self.xs or self.xs < 1:
            raise ValueError("xs must be a positive integer")
        if not self.epx > 0:
            raise ValueError("epx must be positive")


def conv_crossbars(layer: LayerSpec, hw: HardwareConfig = HardwareConfig()) -> int:
    if layer.kind != CONV:
        raise ValueError("conv_crossbars needs a conv layer")
    return (
        layer.d
        * layer.d
        * ceil_div(layer.nc_in * layer.k * layer.k, hw.xs)
        * ceil_div(layer.nc_out, hw.xs)
    )


def fc_crossbars(layer: LayerSpec, hw: HardwareConfig = HardwareConfig()) -> int:
    if layer.kind != FC:
        raise ValueError("fc_crossbars needs an fc layer")
    return ceil_div(layer.nf_in, hw.xs) * ceil_div(layer.nf_out, hw.xs)


def crossbar_ops(layers: Sequence[LayerSpec], hw: HardwareConfig = HardwareConfig()) -> int:
    return sum(
        conv_crossbars(l, hw) if l.kind == CONV else fc_crossbars(l, hw) for l in layers
    )


def total_energy(layers: Sequence[LayerSpec], hw: HardwareConfig = HardwareConfig()) -> float:
    """Per-inference MVMU energy of the network, in joules."""
    if not layers:
        raise ValueError("network has no layers")
    return crossbar_ops(layers, hw) * hw.epx


# -- architecture templates -------------------------------------------------


@dataclass(frozen=True)
class ArchitectureTemplate:
    """A parametrized conv/fc stack.

    Any integer field of a layer entry may be a literal or ``{"param": name}``.
    ``conv_count_param`` / ``fc_count_param`` name HPs that truncate the conv
    list and the hidden fc list; the last fc entry is the classifier and is
    always present.  ``padding: same`` means ``k // 2``.
    """

    name: str
    input_size: int
    input_channels: int
    conv: tuple[Mapping[str, Any], ...]
    fc: tuple[Mapping[str, Any], ...]
    conv_count_param: str | None = None
    fc_count_param: str | None = None
    final_pool: Mapping[str, Any] | None = None

    def referenced_params(self) -> set[str]:
        names = {n for n in (self.conv_count_param, self.fc_count_param) if n}

        def walk(obj):
            if isinstance(obj, Mapping):
                if set(obj) == {"param"}:
                    names.add(str(obj["param"]))
                else:
                    for v in obj.values():
                        walk(v)
            elif isinstance(obj, (list, tuple)):
                for v in obj:
                    walk(v)

        walk(self.conv)
        walk(self.fc)
        walk(self.final_pool)
        return names


def parse_template(doc: Mapping[str, Any]) -> ArchitectureTemplate:
    try:
        return ArchitectureTemplate(
            name=str(doc.get("name", "network")),
            input_size=doc["input_size"],
            input_channels=doc["input_channels"],
            conv=tuple(doc.get("conv", ())),
            fc=tuple(doc["fc"]),
            conv_count_param=doc.get("conv_count_param"),
            fc_count_param=doc.get("fc_count_param"),
            final_pool=doc.get("final_pool"),
        )
    except KeyError as exc:
        raise TemplateError(f"template is missing required key {exc}") from None


def load_template(path: str | Path) -> ArchitectureTemplate:
    with open(path) as fh:
        return parse_template(yaml.safe_load(fh))


def _resolve(value: Any, hp: Mapping[str, Any], where: str) -> int:
    if isinstance(value, Mapping):
        name = value.get("param")
        if name not in hp:
            raise TemplateError(f"{where}: hyperparameter {name!r} is not defined")
        value = hp[name]
    v = float(value)
    if not v.is_integer():
        raise TemplateError(f"{where}: expected an integer, got {value!r}")
    return int(v)


def _pool(d: int, pool: Mapping[str, Any] | None, hp, where: str) -> int:
    if not pool:
        return d
    size = _resolve(pool["size"], hp, where)
    stride = _resolve(pool.get("stride", size), hp, where)
    return (d - size) // stride + 1


def network_from_hp(hp: Mapping[str, Any], template: ArchitectureTemplate) -> list[LayerSpec]:
    """Expand ``template`` under the HP values ``hp`` (a name -> value map)."""
    n_conv = len(template.conv)
    if template.conv_count_param:
        n_conv = _resolve({"param": template.conv_count_param}, hp, "conv count")
        if not 0 <= n_conv <= len(template.conv):
            raise TemplateError(f"template has {len(template.conv)} conv layers, {n_conv} requested")
    n_fc = len(template.fc)
    if template.fc_count_param:
        n_fc = _resolve({"param": template.fc_count_param}, hp, "fc count")
        if not 1 <= n_fc <= len(template.fc):
            raise TemplateError(f"template has {len(template.fc)} fc layers, {n_fc} requested")

    layers: list[LayerSpec] = []
    d = _resolve(template.input_size, hp, "input_size")
    ch = _resolve(template.input_channels, hp, "input_channels")
    for i, entry in enumerate(template.conv[:n_conv]):
        where = f"conv layer {i + 1}"
        k = _resolve(entry["kernel"], hp, where)
        stride = _resolve(entry.get("stride", 1), hp, where)
        pad = entry.get("padding", 0)
        pad = k // 2 if pad == "same" else _resolve(pad, hp, where)
        out = _resolve(entry["out_channels"], hp, where)
        d = (d + 2 * pad - k) // stride + 1
        if d < 1:
            raise TemplateError(f"{where}: kernel {k} leaves no output (input too small)")
        layers.append(LayerSpec.conv(d, ch, k, out))
        d = _pool(d, entry.get("pool"), hp, where)
        if d < 1:
            raise TemplateError(f"{where}: pooling leaves no output")
        ch = out
    if n_conv:
        d = _pool(d, template.final_pool, hp, "final pool")
        if d < 1:
            raise TemplateError("final pool leaves no output")
    features = d * d * ch

    hidden = list(template.fc[:-1])[: n_fc - 1]
    for i, entry in enumerate(hidden + [template.fc[-1]]):
        out = _resolve(entry["out_features"], hp, f"fc layer {i + 1}")
        layers.append(LayerSpec.fc(features, out))
        features = out
    return layers
