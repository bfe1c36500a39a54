"""Black-box (err, eng) objectives over a search space.

Three families share the :class:`ObjectiveFn` interface:

* :class:`TabulatedObjective` -- a full-coverage lookup table (CSV on disk);
* synthetic analytic benchmarks from :func:`make_synthetic`;
* :class:`ComposedObjective` -- energy from the crossbar model, error from a
  seeded analytic surrogate (:class:`SurrogateError`).
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .energy import ArchitectureTemplate, HardwareConfig, network_from_hp, total_energy
from .pareto import ObjectivePair
from .space import HPVector, SearchSpace, enumerate_space, format_value, to_numeric


class ObjectiveError(ValueError):
    pass


class ObjectiveFn:
    """Deterministic map from HPVector to ObjectivePair with a call counter."""

    def __init__(self, space: SearchSpace, evaluator: Callable[[HPVector], ObjectivePair], name: str):
        self.space = space
        self.name = name
        self.eval_count = 0
        self._evaluator = evaluator

    def evaluate(self, hp: HPVector) -> ObjectivePair:
        hp = self.space.check(hp)
        pair = ObjectivePair(*map(float, self._evaluator(hp)))
        self.eval_count += 1
        return pair

    __call__ = evaluate

    def reset(self) -> None:
        self.eval_count = 0


def evaluate(obj: ObjectiveFn, hp: HPVector) -> ObjectivePair:
    return obj.evaluate(hp)


class TabulatedObjective(ObjectiveFn):
    def __init__(self, space: SearchSpace, table: Mapping[HPVector, ObjectivePair], name: str = "table"):
        self.table = dict(table)
        super().__init__(space, self._lookup, name)

    def _lookup(self, hp: HPVector) -> ObjectivePair:
        try:
            return self.table[hp]
        except KeyError:
            raise ObjectiveError(f"table has no row for {self.space.values_of(hp)}") from None


def _read_text(document) -> tuple[str, str | None]:
    if isinstance(document, Path) or (isinstance(document, str) and "\n" not in document):
        with open(document, newline="") as fh:
            return fh.read(), Path(document).name
    if isinstance(document, str):
        return document, None
    return "".join(line if line.endswith("\n") else line + "\n" for line in document), None


def check_table(
    document: str | Path | Iterable[str], space: SearchSpace
) -> tuple[dict[HPVector, ObjectivePair], list[str]]:
    """Parse a table and collect every problem instead of stopping at the first."""
    text, _ = _read_text(document)
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    needed = space.names + ["err", "eng"]
    missing = [c for c in needed if c not in header]
    if missing:
        return {}, [f"line 1: table is missing column(s): {', '.join(missing)}"]

    findings: list[str] = []
    table: dict[HPVector, ObjectivePair] = {}
    for lineno, row in enumerate(reader, start=2):
        try:
            hp = tuple(p.index_of(row[p.name]) for p in space.params)
            pair = ObjectivePair(float(row["err"]), float(row["eng"])).validate()
        except (ValueError, TypeError) as exc:
            findings.append(f"line {lineno}: {exc}")
            continue
        if hp in table:
            findings.append(f"line {lineno}: duplicate row for {space.values_of(hp)}")
            continue
        table[hp] = pair
    for hp in enumerate_space(space):
        if hp not in table:
            vals = ", ".join(f"{k}={format_value(v)}" for k, v in space.values_of(hp).items())
            findings.append(f"table is missing grid point ({vals})")
    return table, findings


def load_table(document: str | Path | Iterable[str], space: SearchSpace, name: str = "table") -> TabulatedObjective:
    """Parse a delimited table with one column per parameter plus err, eng.

    ``document`` may be a path, CSV text, or an iterable of lines.  Raises on
    the first problem found.
    """
    _, fname = _read_text(document)
    table, findings = check_table(document, space)
    if findings:
        raise ObjectiveError(findings[0])
    return TabulatedObjective(space, table, fname or name)


def write_table(path: str | Path, space: SearchSpace, objective: ObjectiveFn) -> None:
    """Evaluate ``objective`` on the full grid and write it as a CSV table."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(space.names + ["err", "eng"])
        for hp in enumerate_space(space):
            pair = objective.evaluate(hp)
            vals = [format_value(v) for v in space.values_of(hp).values()]
            w.writerow(vals + [repr(pair.err), repr(pair.eng)])


# -- synthetic benchmarks ----------------------------------------------------


def _sphere_pair(space, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def f(hp):
        x = to_numeric(space, hp)
        return ObjectivePair(float(np.sum((x - a) ** 2)), float(np.sum((x - b) ** 2)))

    return f


def _zdt1(space):
    def f(hp):
        x = to_numeric(space, hp)
        f1 = float(x[0])
        g = 1.0 + (9.0 * float(np.mean(x[1:])) if x.size > 1 else 0.0)
        return ObjectivePair(f1, g * (1.0 - math.sqrt(f1 / g)))

    return f


SYNTHETIC = ("sphere-pair", "zdt1-grid", "conflicting-quadratics")


def make_synthetic(name: str, space: SearchSpace, **params) -> ObjectiveFn:
    """Analytic bi-objective benchmarks over ``to_numeric`` coordinates x.

    ``sphere-pair``
        err = |x - a|^2, eng = |x - b|^2 with centers ``a`` (default 0.25
        everywhere) and ``b`` (default 0.75).  With a == b the Pareto set is
        the single grid point nearest the shared center.
    ``conflicting-quadratics``
        sphere-pair with a = 0 and b = 1; every grid point on the diagonal
        between them is Pareto optimal (a coarse grid adds a few neighbours).
    ``zdt1-grid``
        ZDT1 restricted to the grid: err = x1, g = 1 + 9 mean(x2..xn),
        eng = g (1 - sqrt(x1 / g)).  The Pareto set is x2..xn = 0.
    """
    dim = len(space.params)
    if name == "sphere-pair":
        a = params.get("a", [0.25] * dim)
        b = params.get("b", [0.75] * dim)
        f = _sphere_pair(space, a, b)
    elif name == "conflicting-quadratics":
        f = _sphere_pair(space, [0.0] * dim, [1.0] * dim)
    elif name == "zdt1-grid":
        f = _zdt1(space)
    else:
        raise ObjectiveError(f"unknown synthetic objective {name!r}; choose from {SYNTHETIC}")
    return ObjectiveFn(space, f, name)


# -- composed: real energy, surrogate error ----------------------------------


class SurrogateError:
    """Seeded analytic stand-in for trained-network classification error.

    With u = to_numeric(hp), A the architecture parameters, and coefficients
    drawn once from ``numpy.random.default_rng(seed)`` in this order::

        w_j  ~ U(0.5, 1.5)            for j in A          (capacity weights)
        c_j  ~ U(0.2, 0.8)            for j not in A      (optimum location)
        b_j  ~ U(0.05, 0.15)          for j not in A      (curvature)
        v_jk ~ U(-0.04, 0.04) / p     for j < k           (interactions)

    the error is::

        cap = sum_A w_j u_j / sum_A w_j
        err = 0.08 + 0.30 exp(-2.5 cap)
              + sum_{j not in A} b_j (u_j - c_j)^2
              + sum_{j<k} v_jk (u_j - 1/2)(u_k - 1/2)

    floored at 0.01.  Bigger architectures lower the error and raise energy,
    which is what makes the two objectives conflict.
    """

    def __init__(self, space: SearchSpace, arch_params: Iterable[str], seed: int = 0):
        self.space = space
        self.seed = int(seed)
        names = space.names
        arch = set(arch_params)
        unknown = arch - set(names)
        if unknown:
            raise ObjectiveError(f"unknown architecture parameter(s): {sorted(unknown)}")
        p = len(names)
        self.arch_mask = np.array([n in arch for n in names])
        rng = np.random.default_rng(self.seed)
        n_arch = int(self.arch_mask.sum())
        self.w = rng.uniform(0.5, 1.5, n_arch)
        self.c = rng.uniform(0.2, 0.8, p - n_arch)
        self.b = rng.uniform(0.05, 0.15, p - n_arch)
        iu = np.triu_indices(p, k=1)
        self.v = np.zeros((p, p))
        self.v[iu] = rng.uniform(-0.04, 0.04, len(iu[0])) / p

    def __call__(self, hp: HPVector) -> float:
        u = to_numeric(self.space, hp)
        ua = u[self.arch_mask]
        cap = float(ua @ self.w / self.w.sum()) if ua.size else 0.0
        un = u[~self.arch_mask]
        centered = u - 0.5
        err = (
            0.08
            + 0.30 * math.exp(-2.5 * cap)
            + float(self.b @ (un - self.c) ** 2)
            + float(centered @ self.v @ centered)
        )
        return max(err, 0.01)


class ComposedObjective(ObjectiveFn):
    """err from ``err_fn``, eng from the crossbar energy model."""

    def __init__(
        self,
        space: SearchSpace,
        template: ArchitectureTemplate,
        err_fn: Callable[[HPVector], float] | None = None,
        hw: HardwareConfig = HardwareConfig(),
        surrogate_seed: int = 0,
        name: str | None = None,
    ):
        missing = template.referenced_params() - set(space.names)
        if missing:
            raise ObjectiveError(f"template references unknown hyperparameter(s): {sorted(missing)}")
        self.template = template
        self.hw = hw
        if err_fn is None:
            err_fn = SurrogateError(space, template.referenced_params(), surrogate_seed)
        self.err_fn = err_fn
        self._energy_cache: dict[tuple, float] = {}
        self._arch_names = sorted(template.referenced_params())
        super().__init__(space, self._pair, name or f"composed:{template.name}")

    def energy(self, hp: HPVector) -> float:
        values = self.space.values_of(hp)
        key = tuple(format_value(values[n]) for n in self._arch_names)
        if key not in self._energy_cache:
            self._energy_cache[key] = total_energy(network_from_hp(values, self.template), self.hw)
        return self._energy_cache[key]

    def _pair(self, hp: HPVector) -> ObjectivePair:
        return ObjectivePair(float(self.err_fn(hp)), self.energy(hp))


def grid_table(space: SearchSpace, objective: ObjectiveFn) -> dict[HPVector, ObjectivePair]:
    return {hp: objective.evaluate(hp) for hp in enumerate_space(space)}
