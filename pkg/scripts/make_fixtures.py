"""Regenerate the JSON fixtures shipped in src/arboreal/fixtures."""

import json
from pathlib import Path

from arboreal.coloring import construct_scale_coloring, quality
from arboreal.generators import cantor_profile, cantor_tree, comb
from arboreal.prototype import ExtractionParams, extract_weak_prototype, normalized_profile
from arboreal.tree_core import WeightedRootedTree

OUT = Path(__file__).resolve().parents[1] / "src" / "arboreal" / "fixtures"


def caterpillar_with_cantor_tail(spine: int = 4) -> WeightedRootedTree:
    """Unit caterpillar s0..s_spine (one pendant leaf per spine edge) ending in a copy of C_3."""
    parent, length = {}, {}
    for i in range(1, spine + 1):
        parent[f"s{i:02d}"] = f"s{i - 1:02d}"
        parent[f"t{i:02d}"] = f"s{i - 1:02d}"
        length[f"s{i:02d}"] = length[f"t{i:02d}"] = 1.0
    c3 = cantor_tree(3)
    for v, p in c3.parent.items():
        parent["c" + v] = f"s{spine:02d}" if p == c3.root else "c" + p
        length["c" + v] = c3.edge_length[v]
    return WeightedRootedTree("s00", parent, length)


# (n, spine edge, tooth edge) for the comb corpus
COMBS = [
    (40, 1.0, 1.0), (60, 1.0, 1.0), (80, 1.0, 0.5), (100, 1.0, 2.0), (120, 1.0, 1.0),
    (60, 2.0, 1.0), (90, 1.0, 5.0), (150, 1.0, 1.0), (200, 1.0, 1.0), (240, 1.0, 0.25),
]


def write(name: str, data: dict) -> None:
    (OUT / f"{name}.json").write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    params = ExtractionParams(eps0=1 / 8, delta_exp=1 / 4, net_factor=4.0)
    t = caterpillar_with_cantor_tail()
    res = extract_weak_prototype(t, 0.3, params)
    write("binary_caterpillar_cantor_gaps", {
        "description": "caterpillar of length 4 whose last spine vertex carries C_3",
        "tree": t.to_json(),
        "params": {"delta": 0.3, "eps0": params.eps0, "delta_exp": params.delta_exp,
                   "net_factor": params.net_factor},
        "expected": {"status": res.status},
    })
    for i, (n, s, tl) in enumerate(COMBS, 1):
        t = comb(n, s, tl)
        q = quality(t, construct_scale_coloring(t, 2.0).coloring, strong=False)
        write(f"comb_{i:02d}", {
            "description": f"comb with {n} spine edges of length {s} and teeth of length {tl}",
            "tree": t.to_json(),
            "c": 2.0,
            "expected": {"goodness": q.goodness},
        })
    write("prototype_b64", {
        "description": "B_64 as a degree sequence; every path is (1, 1/64)-weak",
        "sst": [2] * 64 + [0], "edge_len": 1.0,
        "expected": {"eps": 1.0, "delta": 1 / 64, "R": 1.0},
    })
    write("prototype_half_binary_128", {
        "description": "height 128: binary for the first 65 levels, unary below",
        "sst": [2] * 65 + [1] * 63 + [0], "edge_len": 1.0,
        "expected": {"eps": 0.5, "delta": 1 / 128, "R": 1.0},
    })
    write("cantor5_normalized", {
        "description": "C_5 padded to height 128",
        "sst": list(normalized_profile(cantor_profile(5)).seq), "edge_len": 1.0,
        "expected": {"eps": 0.5, "delta": 2 ** (-5 / 3), "R": 1.0},
    })
    write("cantor5", {
        "description": "C_5 degree sequence",
        "sst": list(cantor_profile(5).seq), "edge_len": 1.0,
        "expected": {"eps": 0.5, "delta": 2 ** (-5 / 3), "R": 1.0},
    })


if __name__ == "__main__":
    main()
