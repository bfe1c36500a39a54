"""Discrete hyperparameter grids.

A point in a :class:`SearchSpace` is an ``HPVector``: a plain tuple holding one
value index per parameter, in declaration order.  Tuples are hashable, so they
work directly as dict keys and set members.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

import numpy as np
import yaml

HPVector = tuple[int, ...]

#: Largest grid we are willing to enumerate.
CARDINALITY_GUARD = 2**24

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class SpaceError(ValueError):
    """Raised for malformed search-space declarations or invalid points."""


def format_value(value: Any) -> str:
    """Canonical text form of a parameter value, used for table matching."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, float, np.integer, np.floating)):
        v = float(value)
        if v.is_integer() and abs(v) < 1e15:
            return str(int(v))
        return repr(v)
    text = str(value).strip()
    try:
        return format_value(float(text))
    except ValueError:
        return text


@dataclass(frozen=True)
class ParamDef:
    """One searched hyperparameter.

    ``log=True`` (numeric only) encodes values on a log10 axis, which keeps
    decade-spaced grids such as learning rates evenly spread in [0, 1].
    """

    name: str
    values: tuple
    kind: str = NUMERIC
    log: bool = False

    def __post_init__(self):
        if not self.name:
            raise SpaceError("parameter name must be non-empty")
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SpaceError(f"{self.name}: unknown kind {self.kind!r}")
        if len(self.values) == 0:
            raise SpaceError(f"{self.name}: empty value list")
        if self.kind == NUMERIC:
            vals = []
            for v in self.values:
                try:
                    fv = float(v)
                except (TypeError, ValueError):
                    raise SpaceError(f"{self.name}: non-numeric value {v!r}") from None
                if not math.isfinite(fv):
                    raise SpaceError(f"{self.name}: non-finite value {v!r}")
                if self.log and fv <= 0:
                    raise SpaceError(f"{self.name}: log-scaled values must be positive")
                vals.append(int(fv) if isinstance(v, (int, np.integer)) else fv)
            object.__setattr__(self, "values", tuple(vals))
        elif self.log:
            raise SpaceError(f"{self.name}: log scale only applies to numeric params")
        keys = [format_value(v) for v in self.values]
        if len(set(keys)) != len(keys):
            raise SpaceError(f"{self.name}: duplicate values")

    def __len__(self) -> int:
        return len(self.values)

    def index_of(self, value: Any) -> int:
        key = format_value(value)
        for i, v in enumerate(self.values):
            if format_value(v) == key:
                return i
        raise SpaceError(f"{self.name}: unknown value {value!r}")

    def coordinate(self, index: int) -> float:
        n = len(self.values)
        if self.kind == CATEGORICAL:
            return 0.5 if n == 1 else index / (n - 1)
        vals = np.asarray(self.values, dtype=float)
        if self.log:
            vals = np.log10(vals)
        lo, hi = vals.min(), vals.max()
        if hi == lo:
            return 0.5
        return float((vals[index] - lo) / (hi - lo))


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamDef, ...]
    cardinality: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if not self.params:
            raise SpaceError("search space declares no parameters")
        names = [p.name for p in self.params]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise SpaceError(f"duplicate parameter name(s): {', '.join(dupes)}")
        card = math.prod(len(p) for p in self.params)
        if card >= 2**64:
            raise SpaceError("cardinality does not fit in 64 bits")
        object.__setattr__(self, "cardinality", card)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.params)

    def param(self, name: str) -> ParamDef:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def check(self, hp: Sequence[int]) -> HPVector:
        hp = tuple(int(i) for i in hp)
        if len(hp) != len(self.params):
            raise SpaceError(f"expected {len(self.params)} indices, got {len(hp)}")
        for i, p in zip(hp, self.params):
            if not 0 <= i < len(p):
                raise SpaceError(f"{p.name}: index {i} out of range")
        return hp

    def values_of(self, hp: HPVector) -> dict[str, Any]:
        """Map an HPVector to ``{name: value}``."""
        return {p.name: p.values[i] for p, i in zip(self.params, hp)}

    def from_values(self, values: dict[str, Any]) -> HPVector:
        missing = [n for n in self.names if n not in values]
        if missing:
            raise SpaceError(f"missing value(s) for {', '.join(missing)}")
        return tuple(p.index_of(values[p.name]) for p in self.params)

    def flat_index(self, hp: HPVector) -> int:
        return int(np.ravel_multi_index(hp, self.shape))

    def from_flat(self, k: int) -> HPVector:
        return tuple(int(i) for i in np.unravel_index(k, self.shape))


def parse_space(doc: dict | list) -> SearchSpace:
    """Build a SearchSpace from a loaded configuration document.

    Accepts either ``{"params": [...]}`` or a bare list of parameter entries,
    each with ``name``, ``values`` and optionally ``kind`` and ``scale``.
    """
    entries = doc.get("params") if isinstance(doc, dict) else doc
    if not entries:
        raise SpaceError("search space must declare at least one parameter")
    params = []
    for entry in entries:
        if not isinstance(entry, dict) or "name" not in entry:
            raise SpaceError(f"malformed parameter entry: {entry!r}")
        values = entry.get("values")
        if values is None or (isinstance(values, (list, tuple)) and not values):
            raise SpaceError(f"{entry['name']}: empty value list")
        if not isinstance(values, (list, tuple)):
            values = [values]
        kind = entry.get("kind", NUMERIC)
        scale = entry.get("scale", "linear")
        if scale not in ("linear", "log"):
            raise SpaceError(f"{entry['name']}: unknown scale {scale!r}")
        params.append(ParamDef(str(entry["name"]), tuple(values), kind, log=scale == "log"))
    return SearchSpace(tuple(params))


def load_space(path: str | Path) -> SearchSpace:
    with open(path) as fh:
        return parse_space(yaml.safe_load(fh))


def space_to_doc(space: SearchSpace) -> dict:
    params = []
    for p in space.params:
        entry = {"name": p.name, "kind": p.kind, "values": list(p.values)}
        if p.log:
            entry["scale"] = "log"
        params.append(entry)
    return {"params": params}


def enumerate_space(space: SearchSpace, guard: int = CARDINALITY_GUARD) -> Iterator[HPVector]:
    """Yield every grid point once; the last parameter varies fastest."""
    if space.cardinality > guard:
        raise SpaceError(f"cardinality {space.cardinality} exceeds guard {guard}")
    return itertools.product(*(range(len(p)) for p in space.params))


def sample_distinct(
    space: SearchSpace,
    rng: np.random.Generator,
    n: int,
    exclude: Iterable[HPVector] = (),
) -> list[HPVector]:
    """Draw ``n`` distinct points uniformly, avoiding ``exclude``."""
    exclude = {tuple(e) for e in exclude}
    if n + len(exclude) > space.cardinality:
        raise SpaceError(
            f"cannot draw {n} points: only {space.cardinality - len(exclude)} remain"
        )
    out: list[HPVector] = []
    seen = set(exclude)
    # rejection sampling is cheap unless the space is nearly exhausted
    if n + len(exclude) <= space.cardinality // 2:
        while len(out) < n:
            hp = tuple(int(rng.integers(len(p))) for p in space.params)
            if hp not in seen:
                seen.add(hp)
                out.append(hp)
        return out
    excluded = np.fromiter((space.flat_index(e) for e in exclude), dtype=np.int64)
    pool = np.setdiff1d(np.arange(space.cardinality, dtype=np.int64), excluded)
    picks = rng.permutation(pool)[:n]
    return [space.from_flat(int(k)) for k in picks]


def to_numeric(space: SearchSpace, hp: HPVector) -> np.ndarray:
    return np.array([p.coordinate(i) for p, i in zip(space.params, hp)], dtype=float)


def numeric_grid(space: SearchSpace) -> np.ndarray:
    """Coordinates of every grid point, rows in enumeration order."""
    axes = [np.array([p.coordinate(i) for i in range(len(p))]) for p in space.params]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)
