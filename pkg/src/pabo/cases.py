"""Desk-scale analogues of the three AlexNet / VGG19 case studies.

Each bundle pairs a search space shaped like one column of the case-study
hyperparameter table with a composed objective: ``eng`` is the exact crossbar
energy of the network the hyperparameters describe, ``err`` is the seeded
:class:`~pabo.objectives.SurrogateError`.  The error values are synthetic and
say nothing about how the real networks train.

Geometry pinned by the templates (the searched kernels need a stride and
padding that the tables leave open):

* AlexNet on Flower17: 227x227x3 input, conv1 stride 4 without padding, all
  later convs stride 1 with ``same`` padding, 3/2 max-pool after conv1, conv2
  and the last conv, fc 4096-4096-17.  ``conv_layers = 4`` drops conv5.
* VGG19 on CIFAR-10: 32x32x3 input, sixteen 3x3 ``same`` convs
  (64,64 | 128,128 | 256 x4 | 512 x4 | 512 x4) with 2/2 pooling after each
  block, fc 512-512-10.  "layer i" in parameter names is conv layer i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .baselines import Nsga2Config, run_grid
from .energy import ArchitectureTemplate, parse_template
from .objectives import ComposedObjective, write_table
from .pareto import hypervolume_2d, reference_point
from .space import SearchSpace, parse_space, space_to_doc

BUNDLE_VERSION = "v1"
CASES = ("cs1-analogue", "cs2-analogue", "cs3-analogue")


def _k(name):
    return {"param": name}


ALEXNET_FLOWER17 = {
    "name": "alexnet-flower17",
    "input_size": 227,
    "input_channels": 3,
    "conv_count_param": "conv_layers",
    "fc_count_param": "fc_layers",
    "conv": [
        {"out_channels": 96, "kernel": _k("kernel_1"), "stride": 4, "padding": 0,
         "pool": {"size": 3, "stride": 2}},
        {"out_channels": 256, "kernel": _k("kernel_2"), "padding": "same",
         "pool": {"size": 3, "stride": 2}},
        {"out_channels": 384, "kernel": _k("kernel_3"), "padding": "same"},
        {"out_channels": 384, "kernel": _k("kernel_4"), "padding": "same"},
        {"out_channels": 256, "kernel": 3, "padding": "same"},
    ],
    "final_pool": {"size": 3, "stride": 2},
    "fc": [{"out_features": 4096}, {"out_features": 4096}, {"out_features": 17}],
}

_VGG_WIDTHS = [64, 64, 128, 128] + [256] * 4 + [512] * 8
_VGG_POOL_AFTER = {2, 4, 8, 12, 16}
_VGG_BINDINGS = {
    1: ("out_channels", "features_1"),
    2: ("out_channels", "features_2"),
    4: ("out_channels", "features_4"),
    6: ("kernel", "kernel_6"),
    7: ("kernel", "kernel_7"),
    8: ("kernel", "kernel_8"),
    9: ("kernel", "kernel_9"),
}


def _vgg_conv():
    layers = []
    for i, width in enumerate(_VGG_WIDTHS, start=1):
        entry = {"out_channels": width, "kernel": 3, "padding": "same"}
        if i in _VGG_BINDINGS:
            field_name, param = _VGG_BINDINGS[i]
            entry[field_name] = _k(param)
        if i in _VGG_POOL_AFTER:
            entry["pool"] = {"size": 2, "stride": 2}
        layers.append(entry)
    return layers


VGG19_CIFAR10 = {
    "name": "vgg19-cifar10",
    "input_size": 32,
    "input_channels": 3,
    "conv": _vgg_conv(),
    "fc": [{"out_features": 512}, {"out_features": 512}, {"out_features": 10}],
}

_ALEX_ARCH_CS1 = [
    {"name": "fc_layers", "values": [2, 3]},
    {"name": "conv_layers", "values": [4, 5]},
    {"name": "kernel_1", "values": [5, 7]},
    {"name": "kernel_2", "values": [3, 5]},
    {"name": "kernel_3", "values": [3, 5]},
    {"name": "kernel_4", "values": [3]},
]

SPACES = {
    "cs1-analogue": [
        {"name": "dropout", "values": [0.4, 0.5]},
        {"name": "learning_rate", "values": [0.001]},
        {"name": "momentum", "values": [0.85, 0.9, 0.95]},
        *_ALEX_ARCH_CS1,
    ],
    "cs2-analogue": [
        {"name": "dropout", "values": [5e-3, 5e-2, 5e-1], "scale": "log"},
        {"name": "learning_rate", "values": [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1], "scale": "log"},
        {"name": "momentum", "values": [7e-3, 7e-2, 7e-1], "scale": "log"},
        {"name": "fc_layers", "values": [2, 3]},
        {"name": "conv_layers", "values": [4, 5]},
        {"name": "kernel_1", "values": [3, 5, 7, 11]},
        {"name": "kernel_2", "values": [3, 5]},
        {"name": "kernel_3", "values": [3, 5]},
        {"name": "kernel_4", "values": [3, 5]},
    ],
    "cs3-analogue": [
        {"name": "learning_rate", "values": [0.01, 0.1], "scale": "log"},
        {"name": "dropout_1", "values": [0.3, 0.4]},
        {"name": "lr_decay", "values": [1e-6, 1e-4], "scale": "log"},
        {"name": "weight_decay", "values": [0.0005, 0.05], "scale": "log"},
        {"name": "kernel_6", "values": [3, 5]},
        {"name": "kernel_7", "values": [3, 5]},
        {"name": "kernel_8", "values": [3, 5]},
        {"name": "kernel_9", "values": [3, 5, 7]},
        {"name": "features_1", "values": [64, 128]},
        {"name": "features_2", "values": [128, 256]},
        {"name": "features_4", "values": [256, 512]},
    ],
}

TEMPLATES = {
    "cs1-analogue": ALEXNET_FLOWER17,
    "cs2-analogue": ALEXNET_FLOWER17,
    "cs3-analogue": VGG19_CIFAR10,
}

EXPECTED_CARDINALITY = {"cs1-analogue": 192, "cs2-analogue": 6912, "cs3-analogue": 3072}

#: Comparison settings per case: random-search budget and NSGA-II size.
BASELINES = {
    "cs1-analogue": {"random_budget": 40, "nsga2": Nsga2Config(pop_size=10, max_generations=50)},
    "cs2-analogue": {"random_budget": 40, "nsga2": Nsga2Config(pop_size=20, max_generations=100)},
    "cs3-analogue": {"random_budget": 40, "nsga2": None},
}

PABO_MAX_EVALS = {"cs1-analogue": 40, "cs2-analogue": 40, "cs3-analogue": 60}


@dataclass
class CaseStudyBundle:
    name: str
    seed: int
    space: SearchSpace
    template: ArchitectureTemplate
    objective: ComposedObjective

    @property
    def template_doc(self) -> dict:
        return TEMPLATES[self.name]


def case_space(name: str) -> SearchSpace:
    return parse_space({"params": SPACES[name]})


def generate_case_bundle(name: str, seed: int = 0) -> CaseStudyBundle:
    if name not in SPACES:
        raise ValueError(f"unknown case {name!r}; choose from {CASES}")
    space = case_space(name)
    template = parse_template(TEMPLATES[name])
    objective = ComposedObjective(space, template, surrogate_seed=seed, name=name)
    return CaseStudyBundle(name, seed, space, template, objective)


def _manifests(name: str, ref) -> dict[str, dict]:
    # paths are relative to the manifests/ directory
    common = {"space": "../space.yaml", "objective": "table:../table.csv", "seed": 0,
              "reference_point": [float(x) for x in ref]}
    out = {
        "pabo": {**common, "algorithm": "pabo", "max_evals": PABO_MAX_EVALS[name]},
        "random": {**common, "algorithm": "random", "max_evals": BASELINES[name]["random_budget"]},
        "grid": {**common, "algorithm": "grid"},
    }
    ns = BASELINES[name]["nsga2"]
    if ns is not None:
        out["nsga2"] = {
            **common,
            "algorithm": "nsga2",
            "nsga2": {"pop_size": ns.pop_size, "max_generations": ns.max_generations},
        }
    return out


def write_bundle(bundle: CaseStudyBundle, root: str | Path) -> Path:
    """Write space, template, full table, manifests and expected metrics."""
    out = Path(root) / BUNDLE_VERSION / bundle.name
    (out / "manifests").mkdir(parents=True, exist_ok=True)
    with open(out / "space.yaml", "w") as fh:
        yaml.safe_dump(space_to_doc(bundle.space), fh, sort_keys=False)
    with open(out / "template.yaml", "w") as fh:
        yaml.safe_dump(bundle.template_doc, fh, sort_keys=False)
    write_table(out / "table.csv", bundle.space, bundle.objective)

    bundle.objective.reset()
    truth = run_grid(bundle.space, bundle.objective)
    ref = reference_point(o.objectives for o in truth.history)
    for algo, manifest in _manifests(bundle.name, ref).items():
        with open(out / "manifests" / f"{algo}.yaml", "w") as fh:
            yaml.safe_dump(manifest, fh, sort_keys=False)
    expected = {
        "case": bundle.name,
        "surrogate_seed": bundle.seed,
        "cardinality": bundle.space.cardinality,
        "reference_point": list(ref),
        "grid_hypervolume": hypervolume_2d(truth.front_pairs(), ref),
        "grid_front_size": len(truth.front),
        "pabo": {
            "max_evals": PABO_MAX_EVALS[bundle.name],
            "min_hypervolume_ratio": 0.95 if bundle.name == "cs3-analogue" else 0.98,
        },
        "tolerances": {"grid_hypervolume_rel": 1e-12},
    }
    with open(out / "expected_metrics.json", "w") as fh:
        json.dump(expected, fh, indent=2)
        fh.write("\n")
    return out
