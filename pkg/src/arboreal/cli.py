"""Command line front-end.

Every subcommand builds a JSON report, optionally a CSV table and a run
manifest. Reports contain no timestamps so that re-running a manifest
reproduces them byte for byte.

Exit codes: 0 success, 1 validation or check failure, 2 usage or parse
error, 3 inconclusive within budget.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .coloring import (
    binary_profile,
    check_monotone,
    color_classes,
    construct_scale_coloring,
    is_regular,
    quality,
    reasonable_coloring,
    regularize_coloring,
)
from .embedding import (
    PointEmbedding,
    bounds_report,
    distortion,
    matousek_bounds,
    matousek_embedding,
    reasonable_embedding,
    simple_coloring_embedding,
)
from .generators import (
    SSTProfile,
    cantor_profile,
    comb,
    complete_binary_tree,
    random_tree,
    sst,
    sst_profile_of,
)
from .markov import (
    FORK_MODES,
    ChainSpec,
    compute_convexity_exact,
    cycle_walk_chain,
    distortion_lower_bound,
    downward_walk_chain,
    estimate_convexity_mc,
    lamplighter_chain,
    regular_tree_walk_chain,
    sst_downward_walk_exact,
    walk_speed,
)
from .prototype import (
    ExtractionParams,
    extract_weak_prototype,
    load_fixture,
    prototype_convexity_bound,
    verify_weak_prototype,
)
from .tree_core import InputError, PreconditionError, ResourceError, WeightedRootedTree

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
CANTOR_TREE_LIMIT = 100_000

SIMPLE_BOUND = "2^(1/p) / goodness"
MATOUSEK_BOUND = "4 * log(2/delta)^min(1/p, 1/2)"
CONVEXITY_BOUND = "((e/4) * (log2(e/delta) - 4))^(1/p) with e = eps/(2R), or e = eps when normalized"


class UsageError(Exception):
    pass


class ClaimFailure(Exception):
    pass


# canonical serialization -----------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int | None = None, _lvl: int = 0) -> str:
    """JSON with sorted keys and floats written with 17 significant digits."""
    nl = "" if indent is None else "\n" + " " * (indent * (_lvl + 1))
    end = "" if indent is None else "\n" + " " * (indent * _lvl)
    sep = "," if indent is None else ","
    kv = ":" if indent is None else ": "
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k), ensure_ascii=False) + kv + dumps(obj[k], indent, _lvl + 1)
                 for k in sorted(obj, key=str)]
        return "{" + nl + (sep + nl).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + nl + (sep + nl).join(dumps(x, indent, _lvl + 1) for x in obj) + end + "]"
    if hasattr(obj, "item"):  # numpy scalars
        return dumps(obj.item(), indent, _lvl)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def digest(obj) -> str:
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


# input helpers ---------------------------------------------------------------

def read_json(path: str):
    """Load JSON from a file; ``fixture:NAME`` reads a packaged fixture."""
    if path.startswith("fixture:"):
        try:
            data = load_fixture(path[len("fixture:"):])
        except InputError as exc:
            raise UsageError(str(exc)) from exc
        return {k: v for k, v in data.items() if k not in ("tree_obj", "profile")}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def parse_tree(data) -> WeightedRootedTree | SSTProfile:
    if not isinstance(data, dict):
        raise InputError("tree file must hold a JSON object")
    if "sst" in data:
        return SSTProfile(tuple(int(x) for x in data["sst"]), float(data.get("edge_len", 1.0)))
    if "tree" in data and isinstance(data["tree"], dict):
        data = data["tree"]
    return WeightedRootedTree.from_json(data)


def load_tree(path: str, inputs: dict, materialize: bool = True) -> WeightedRootedTree | SSTProfile:
    data = read_json(path)
    inputs[path] = digest(data)
    t = parse_tree(data)
    if materialize and isinstance(t, SSTProfile):
        t = t.build()
    return t


def load_coloring(path: str, inputs: dict) -> dict[str, int]:
    data = read_json(path)
    inputs[path] = digest(data)
    col = data.get("coloring", data) if isinstance(data, dict) else None
    if not isinstance(col, dict):
        raise InputError("coloring file must map child vertices to colors")
    return {str(k): int(v) for k, v in col.items()}


# subcommands -----------------------------------------------------------------
# each returns (report, csv rows, exit code)

def cmd_gen(a, inputs):
    kind = a.kind
    if kind == "binary":
        _need(a, "k")
        return complete_binary_tree(a.k, a.edge_len).to_json(), None, EXIT_OK
    if kind == "sst":
        _need(a, "seq")
        seq = [int(x) for x in a.seq.split(",")]
        return sst(seq, a.edge_len).to_json(), None, EXIT_OK
    if kind == "cantor":
        _need(a, "i")
        prof = cantor_profile(a.i)
        if a.as_sst or prof.n_vertices() > CANTOR_TREE_LIMIT:
            return {"sst": list(prof.seq), "edge_len": prof.edge_len}, None, EXIT_OK
        return prof.build().to_json(), None, EXIT_OK
    if kind == "random":
        _need(a, "n")
        return random_tree(a.n, a.law, a.seed).to_json(), None, EXIT_OK
    if kind == "comb":
        _need(a, "n")
        return comb(a.n, a.edge_len, a.tooth_len).to_json(), None, EXIT_OK
    if kind == "lamplighter":
        _need(a, "N")
        lamplighter_chain(a.N)  # validates N
        return {"lamplighter": {"N": a.N}}, None, EXIT_OK
    raise UsageError(f"unknown generator {kind!r}")


def _need(a, name: str) -> None:
    if getattr(a, name) is None:
        raise UsageError(f"--{name} is required")


def cmd_validate(a, inputs):
    t = load_tree(a.tree, inputs, materialize=False)
    if isinstance(t, SSTProfile):
        rep = {"kind": "sst", "height": t.height, "n_vertices": t.n_vertices(), "n_leaves": t.n_leaves(), "valid": True}
        return rep, None, EXIT_OK
    rep = {
        "kind": "tree", "valid": True, "n_vertices": len(t.order), "n_leaves": len(t.leaves()),
        "height": t.height(), "min_edge": t.min_edge() if len(t.order) > 1 else None,
    }
    code = EXIT_OK
    if a.coloring:
        col = load_coloring(a.coloring, inputs)
        ok, bad = check_monotone(t, col)
        rep["coloring"] = {"monotone": ok, "offending_color": bad, "regular": ok and is_regular(t, col)}
        if not ok:
            rep["valid"] = False
            code = EXIT_FAIL
    return rep, None, code


def cmd_color(a, inputs):
    t = load_tree(a.tree, inputs)
    sc = construct_scale_coloring(t, a.c)
    q = quality(t, sc.coloring)
    k = None
    rep = {"c": a.c, "coloring": sc.coloring, "quality": q.report(), "monotone": check_monotone(t, sc.coloring)[0]}
    if a.with_profile:
        bp = binary_profile(t, a.c)
        k = bp.k_lower
        rep["binary_profile"] = {
            "k_lower": bp.k_lower, "best_scale": bp.best_scale,
            "witness_distortion": bp.witness_distortion,
            "witness": bp.witness.node_map if bp.witness else None,
        }
    rep["bounds"] = bounds_report(t, a.c, a.p, measured=q, k_lower=k)
    rep["bound_formulas"] = {"simple_embedding_upper": SIMPLE_BOUND, "strong_embedding_upper": MATOUSEK_BOUND}
    rows = [["color", "length", "n_edges", "top_vertex", "bottom_vertex"]]
    for c, es in sorted(color_classes(t, sc.coloring).items()):
        rows.append([c, sum(t.edge_length[e] for e in es), len(es), t.parent[es[0]], es[-1]])
    return rep, rows, EXIT_OK


def cmd_embed(a, inputs):
    t = load_tree(a.tree, inputs)
    col = load_coloring(a.coloring, inputs) if a.coloring else construct_scale_coloring(t, a.c).coloring
    rep: dict = {"method": a.method, "p": a.p}
    if a.method == "simple":
        q = quality(t, col, strong=False)
        emb = simple_coloring_embedding(t, col, a.p)
        bound = 2 ** (1 / a.p) / q.goodness
        rep["bound"] = {"formula": SIMPLE_BOUND, "value": bound, "goodness": q.goodness}
    elif a.method == "matousek":
        q = quality(t, col)
        sd = q.strong_delta
        if not sd:
            raise PreconditionError("use-delta-strong: coloring has no positive strong delta")
        delta = min(a.delta if a.delta is not None else sd, 0.5)
        emb = matousek_embedding(t, col, delta, a.p, strong_delta=sd)
        bounds = matousek_bounds(delta, a.p)
        bound = bounds["distortion"]
        rep["bound"] = {"formula": MATOUSEK_BOUND, "value": bound, "delta": delta, "all": bounds}
    elif a.method == "reasonable":
        if a.regularize:
            col = regularize_coloring(t, col)
        elif not is_regular(t, col):
            raise PreconditionError("regularity: input coloring is not regular; pass --regularize")
        q = quality(t, col, strong=False)
        rc = reasonable_coloring(t, col, q.goodness)
        emb = reasonable_embedding(t, rc.palette_coloring, q.goodness / 4, a.p)
        bound = math.inf
        rep["bound"] = {"formula": "finite", "value": None, "palette_size": rc.palette_size}
    else:
        raise UsageError(f"unknown method {a.method!r}")
    cert = distortion(emb, t)
    ok = math.isfinite(cert.distortion) and cert.distortion <= bound * (1 + 1e-9)
    rep["certificate"] = cert.to_json()
    rep["status"] = "PASS" if ok else "FAIL"
    rep["embedding"] = emb.to_json()
    rows = [["quantity", "value", "bound", "label", "status"],
            ["distortion", cert.distortion, None if math.isinf(bound) else bound, "certified", rep["status"]],
            ["lipschitz", cert.lip, None, "certified", ""],
            ["inverse_lipschitz", cert.colip and 1 / cert.colip, None, "certified", ""]]
    return rep, rows, EXIT_OK if ok else EXIT_FAIL


def cmd_certify(a, inputs):
    t = load_tree(a.tree, inputs)
    data = read_json(a.embedding)
    inputs[a.embedding] = digest(data)
    emb = PointEmbedding.from_json(data.get("embedding", data))
    cert = distortion(emb, t)
    rep = {"certificate": cert.to_json(), "p": emb.p}
    code = EXIT_OK
    if a.max_distortion is not None:
        ok = cert.distortion <= a.max_distortion * (1 + 1e-9)
        rep["status"] = "PASS" if ok else "FAIL"
        code = EXIT_OK if ok else EXIT_FAIL
    rows = [["quantity", "value"], ["lipschitz", cert.lip], ["colipschitz", cert.colip], ["distortion", cert.distortion]]
    return rep, rows, code


def _chain(a, inputs):
    kind = a.chain
    if kind == "downward":
        _need(a, "tree")
        t = load_tree(a.tree, inputs, materialize=False)
        if isinstance(t, SSTProfile):
            return t
        prof = sst_profile_of(t) if a.exact and len(t.order) > 1 else None
        return prof if prof is not None else downward_walk_chain(t, explicit=True if a.exact else None)
    if kind == "lamplighter":
        _need(a, "N")
        return lamplighter_chain(a.N)
    if kind == "cycle":
        _need(a, "N")
        return cycle_walk_chain(a.N)
    if kind == "regular":
        _need(a, "degree")
        return regular_tree_walk_chain(a.degree)
    if kind == "constant":
        return ChainSpec.explicit(["x"], [[1.0]], [1.0], coords=[[0.0]], name="constant")
    if kind == "file":
        _need(a, "file")
        data = read_json(a.file)
        inputs[a.file] = digest(data)
        return ChainSpec.from_json(data)
    raise UsageError(f"unknown chain {kind!r}")


def cmd_markov(a, inputs):
    ch = _chain(a, inputs)
    if isinstance(ch, SSTProfile):
        est = sst_downward_walk_exact(ch, a.p, a.m) if a.exact else estimate_convexity_mc(
            downward_walk_chain(ch.build()), a.p, a.m, a.samples, a.seed, a.fork_mode)
    elif a.exact:
        est = compute_convexity_exact(ch, a.p, a.m, a.fork_mode)
    else:
        est = estimate_convexity_mc(ch, a.p, a.m, a.samples, a.seed, a.fork_mode)
    rep = {"chain": a.chain, "estimate": est.to_json()}
    if not est.degenerate:
        rep["distortion_lower_bound"] = {
            "value": distortion_lower_bound(est, a.target_pi), "target_pi": a.target_pi,
            "formula": "ratio^(1/p) / target_pi", "label": "certified" if a.exact else "heuristic",
        }
    code = EXIT_OK
    if a.min_ratio is not None:
        ok = est.ratio is not None and est.ratio >= a.min_ratio
        rep["status"] = "PASS" if ok else "FAIL"
        code = EXIT_OK if ok else EXIT_FAIL
    cols = ["lhs", "rhs", "ratio", "pi_lower", "stderr", "method", "samples", "seed", "fork_mode"]
    j = est.to_json()
    return rep, [cols, [j[c] for c in cols]], code


def cmd_prototype(a, inputs):
    if a.action == "bound":
        for name in ("eps", "delta"):
            _need(a, name)
        v = prototype_convexity_bound(a.eps, a.delta, a.R, a.p, normalized=a.normalized)
        return {"bound": v, "formula": CONVEXITY_BOUND, "label": "formula"}, None, EXIT_OK
    if a.tree is None:
        raise UsageError("a tree file is required")
    t = load_tree(a.tree, inputs, materialize=False)
    if a.action == "verify":
        for name in ("eps", "delta"):
            _need(a, name)
        res = verify_weak_prototype(t, a.eps, a.delta, a.R)
        if res.ok:
            rep = {"status": "witness", "witness": res.to_json()}
            rows = [["leaf", "length", "weak_fraction", "ok"]]
            rows += [[x.leaf, sum(x.gaps), x.fraction, x.ok] for x in res.per_path_audits]
            return rep, rows, EXIT_OK
        rep = {"status": "failure", "reason": res.reason, "vertex": res.vertex,
               "path": list(res.path) if res.path else None, "value": res.value}
        return rep, None, EXIT_FAIL
    _need(a, "delta")
    if isinstance(t, SSTProfile):
        t = t.build()
    params = ExtractionParams(
        eps0=a.eps0, delta_exp=a.delta_exp, net_factor=a.net_factor, budget=a.budget,
    )
    res = extract_weak_prototype(t, a.delta, params)
    rep = res.to_json()
    if res.witness is not None:
        check = verify_weak_prototype(res.witness.subtree, res.witness.eps, res.witness.delta, res.witness.R)
        rep["revalidated"] = bool(check.ok)
        if not check.ok:
            raise ClaimFailure("returned witness failed re-validation")
    code = EXIT_INCONCLUSIVE if res.status == "inconclusive" else EXIT_OK
    return rep, None, code


def cmd_speed(a, inputs):
    ch = _chain(a, inputs)
    if isinstance(ch, SSTProfile):
        ch = downward_walk_chain(ch.build())
    s = walk_speed(ch, a.steps, a.samples, a.seed)
    rep = {"chain": a.chain, "speed_estimate": s.speed_estimate, "stderr": s.stderr,
           "steps": s.steps, "samples": s.samples, "seed": s.seed}
    rows = [["sample", "distance_over_steps"]] + [[i, v] for i, v in enumerate(s.values)]
    return rep, rows, EXIT_OK


def cmd_report(a, inputs):
    if a.rerun:
        man = read_json(a.rerun)
        inputs[a.rerun] = digest(man)
        try:
            argv = man["argv"]
            want = man["outputs"]["report"]
        except (KeyError, TypeError) as exc:
            raise UsageError(f"{a.rerun}: not a run manifest") from exc
        rep, _, code, _ = run(argv)
        got = digest(rep)
        same = got == want
        out = {"manifest": a.rerun, "expected": want, "obtained": got, "reproduced": same, "exit_code": code}
        return out, [["manifest", "reproduced", "expected", "obtained"], [a.rerun, same, want, got]], (
            EXIT_OK if same else EXIT_FAIL)
    if not a.files:
        raise UsageError("give report files or --rerun MANIFEST")
    rows = [["file", "sha256", "status", "keys"]]
    summary = []
    for f in a.files:
        data = read_json(f)
        inputs[f] = digest(data)
        st = data.get("status") if isinstance(data, dict) else None
        keys = ";".join(sorted(data)) if isinstance(data, dict) else ""
        rows.append([f, inputs[f], st, keys])
        summary.append({"file": f, "sha256": inputs[f], "status": st})
    return {"reports": summary}, rows, EXIT_OK


COMMANDS = {
    "gen": cmd_gen, "validate": cmd_validate, "color": cmd_color, "embed": cmd_embed,
    "certify": cmd_certify, "markov": cmd_markov, "prototype": cmd_prototype,
    "speed": cmd_speed, "report": cmd_report,
}


# argument parsing ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _chain_args(sp) -> None:
    sp.add_argument("--chain", choices=["downward", "lamplighter", "cycle", "regular", "constant", "file"], required=True)
    sp.add_argument("--tree")
    sp.add_argument("--N", type=int)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--file")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="arboreal", description="Tree metric embeddings, colorings and Markov convexity.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=None, help="worker count (default: $ARBOREAL_THREADS or 1)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="report file (default stdout)")
        sp.add_argument("--csv", help="write the command's table as CSV")
        sp.add_argument("--manifest", help="write a run manifest")

    g = sub.add_parser("gen", help="generate a tree or space descriptor")
    g.add_argument("kind", choices=["binary", "sst", "cantor", "random", "comb", "lamplighter"])
    g.add_argument("--k", type=int)
    g.add_argument("--i", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--N", type=int)
    g.add_argument("--seq")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--law", default="unit")
    g.add_argument("--edge-len", type=float, default=1.0)
    g.add_argument("--tooth-len", type=float, default=1.0)
    g.add_argument("--as-sst", action="store_true")
    common(g)

    v = sub.add_parser("validate", help="check a tree (and optionally a coloring) file")
    v.add_argument("tree")
    v.add_argument("--coloring")
    common(v)

    c = sub.add_parser("color", help="scale-selector coloring with quality report")
    c.add_argument("tree")
    c.add_argument("--c", type=float, default=2.0)
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--with-profile", action="store_true")
    common(c)

    e = sub.add_parser("embed", help="embed a tree and certify the distortion")
    e.add_argument("tree")
    e.add_argument("--coloring")
    e.add_argument("--method", choices=["simple", "matousek", "reasonable"], default="simple")
    e.add_argument("--p", type=float, default=2.0)
    e.add_argument("--c", type=float, default=2.0)
    e.add_argument("--delta", type=float)
    e.add_argument("--regularize", action="store_true", help="regularize the coloring first (reasonable method)")
    common(e)

    ce = sub.add_parser("certify", help="exact distortion of a stored embedding")
    ce.add_argument("tree")
    ce.add_argument("embedding")
    ce.add_argument("--max-distortion", type=float)
    common(ce)

    m = sub.add_parser("markov", help="Markov convexity ratio of a chain")
    _chain_args(m)
    m.add_argument("--p", type=float, default=2.0)
    m.add_argument("--m", type=int, required=True)
    m.add_argument("--exact", action="store_true")
    m.add_argument("--fork-mode", choices=list(FORK_MODES), default="definition")
    m.add_argument("--target-pi", type=float, default=4.0)
    m.add_argument("--min-ratio", type=float)
    common(m)

    pr = sub.add_parser("prototype", help="verify or extract weak prototypes")
    pr.add_argument("action", choices=["verify", "extract", "bound"])
    pr.add_argument("tree", nargs="?")
    pr.add_argument("--eps", type=float)
    pr.add_argument("--delta", type=float)
    pr.add_argument("--R", type=float, default=1.0)
    pr.add_argument("--p", type=float, default=2.0)
    pr.add_argument("--normalized", action="store_true")
    pr.add_argument("--eps0", type=float, default=ExtractionParams.eps0)
    pr.add_argument("--delta-exp", type=float, default=ExtractionParams.delta_exp)
    pr.add_argument("--net-factor", type=float, default=ExtractionParams.net_factor)
    pr.add_argument("--budget", type=int, default=ExtractionParams.budget)
    common(pr)

    s = sub.add_parser("speed", help="random walk speed estimate")
    _chain_args(s)
    s.add_argument("--steps", type=int, required=True)
    common(s)

    r = sub.add_parser("report", help="summarize reports or re-run a manifest")
    r.add_argument("files", nargs="*")
    r.add_argument("--rerun")
    common(r)
    return ap


def threads_setting(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("ARBOREAL_THREADS", "1")
        try:
            n = int(env)
        except ValueError as exc:
            raise UsageError(f"ARBOREAL_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise UsageError("thread count must be positive")
    return n


_NON_PARAMS = {"out", "csv", "manifest", "threads", "command"}


def run(argv: list[str]):
    """Parse and execute; returns (report, csv rows, exit code, namespace)."""
    args = build_parser().parse_args(argv)
    threads_setting(args)  # accepted for compatibility; execution is sequential
    inputs: dict[str, str] = {}
    rep, rows, code = COMMANDS[args.command](args, inputs)
    args._inputs = inputs
    return rep, rows, code, args


def _write_csv(path: str, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_fmt_float(x).strip('"') if isinstance(x, float) else ("" if x is None else x) for x in row])
    Path(path).write_text(buf.getvalue())


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        rep, rows, code, args = run(argv)
    except UsageError as exc:
        print(f"arboreal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, PreconditionError, ResourceError, ClaimFailure) as exc:
        print(f"arboreal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = dumps(rep, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        if rows is None:
            print("arboreal: this command has no table; --csv ignored", file=sys.stderr)
        else:
            _write_csv(args.csv, rows)
    if args.manifest:
        # argv without output destinations, so a rerun only recomputes
        clean, skip = [], False
        for tok in argv:
            if skip:
                skip = False
                continue
            if tok in ("--out", "--csv", "--manifest"):
                skip = True
                continue
            if tok.split("=")[0] in ("--out", "--csv", "--manifest"):
                continue
            clean.append(tok)
        params = {k: v for k, v in vars(args).items() if k not in _NON_PARAMS and not k.startswith("_")}
        man = {
            "command": args.command,
            "argv": clean,
            "parameters": params,
            "inputs": args._inputs,
            "seed": getattr(args, "seed", None),
            "tool_version": __version__,
            "outputs": {"report": digest(rep), "report_file": args.out, "exit_code": code},
        }
        Path(args.manifest).write_text(dumps(man, indent=1) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
