"""Command-line front end.

Exit codes: 0 success, 1 infeasible or failed computation, 2 bad input.
"""

import argparse
import json
import os
import sys
import time

from . import networks
from .bounds import EXCEEDS, lower_bound_dedicated_inputs, upper_bound, upper_bound_witness
from .cccp import CccpConfig, build_subproblem, initialize, run_cccp
from .errors import EnumerationLimitError, ParseError, SdpFailure, ZndcError
from .files import SystemFile, load_system, pattern_to_json, save_system
from .greedy import GreedyConfig, greedy_zndc
from .model import PatternMatrix, controllability_matrix_rank, is_controllable_pbh
from .oracle import exact_min_support_affine, exact_zndc
from .sdp import write_sdpa
from .structural import StructuralChecker, acg_to_dot

OK, FAILED, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _fmt_entries(entries):
    return "{" + ", ".join(f"({r + 1},{c + 1})" for r, c in sorted(entries)) + "}"


def _artifact(args, suffix):
    if not args.out:
        return None
    path = f"{args.out}{suffix}"
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    return path


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _numeric(sf, command):
    if sf.system is None:
        raise InputError(f"{command} needs a numeric system (keys A and B)")
    return sf.system


def _candidates(sf, mode):
    n, m = sf.n, sf.m
    if mode == "all":
        return None
    if mode == "a-only":
        return frozenset((r, c) for r in range(n) for c in range(n))
    if mode == "file":
        if sf.candidates is None:
            raise InputError("--candidates file but the system file lists no candidates")
        return sf.candidates
    raise InputError(f"unknown candidate mode {mode!r}")


# --- commands ---------------------------------------------------------------


def cmd_check(args, sf):
    sys_ = sf.system if sf.system is not None else sf.affine.nominal
    if sf.system is None:
        print("affine family: checking the nominal pair (A0, B0)")
    pbh = is_controllable_pbh(sys_)
    rank = controllability_matrix_rank(sys_)
    print(f"n = {sys_.n}, m = {sys_.m}")
    print(f"PBH controllable: {'yes' if pbh else 'no'}")
    print(f"controllability matrix rank: {rank}")
    if sf.pattern is None:
        return OK
    checker = StructuralChecker(sys_, seed=args.seed)
    ok = checker.is_structurally_controllable(sf.pattern)
    print(f"pattern {_fmt_entries(sf.pattern.support)}: {'feasible' if ok else 'not feasible'}")
    print(f"  input-reachable z vertices: {checker.g2(sf.pattern)} of {sys_.n + sys_.m}")
    return OK if ok else FAILED


def cmd_bounds(args, sf):
    sys_ = _numeric(sf, "bounds")
    ub = upper_bound(sys_)
    lb, states = lower_bound_dedicated_inputs(sys_, return_witness=True)
    print(f"upper bound (n - rank B): {ub}")
    print(f"lower bound (dedicated inputs): {lb}")
    if states is not None:
        print(f"  dedicated inputs at states {[s + 1 for s in states]}")
    witness = upper_bound_witness(sys_) if sys_.m else None
    if witness is not None:
        print(f"  upper-bound witness {_fmt_entries(witness.support)}")
    path = _artifact(args, "bounds.json")
    if path:
        doc = {
            "upper": ub,
            "lower": lb,
            "dedicated_states": None if states is None else [s + 1 for s in states],
            "upper_witness": None if witness is None else json.loads(pattern_to_json(witness))["entries"],
        }
        _write(path, json.dumps(doc, indent=2) + "\n")
    return OK


def cmd_greedy(args, sf):
    sys_ = _numeric(sf, "greedy")
    gamma = args.gamma if args.gamma is not None else float(sf.config.get("gamma", 1.0))
    cfg = GreedyConfig(gamma=gamma, candidates=_candidates(sf, args.candidates), seed=args.seed)
    try:
        cfg.validate(sys_.n, sys_.m)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    t0 = time.perf_counter()
    trace = greedy_zndc(sys_, cfg)
    noun = "entry" if trace.cardinality == 1 else "entries"
    print(f"greedy (gamma = {gamma}): {trace.cardinality} {noun} in {time.perf_counter() - t0:.2f} s")
    print(f"  pattern {_fmt_entries(trace.pattern.support)}")
    print(f"  structurally controllable: {'yes' if trace.success else 'no'}")
    path = _artifact(args, "greedy_trace.csv")
    if path:
        trace.to_csv(path)
        print(f"wrote {path}")
        _write(_artifact(args, "greedy_pattern.json"), pattern_to_json(trace.pattern) + "\n")
    return OK if trace.success else FAILED


def _cccp_config(args, sf):
    base = dict(sf.config)
    flags = {
        "tau": args.tau,
        "gamma": args.gamma,
        "eta": args.eta,
        "epsilon": args.epsilon,
        "xi": args.xi,
        "mu_override": args.mu,
        "max_outer_iter": args.max_iter,
        "init_objective": args.init,
    }
    base.update({k: v for k, v in flags.items() if v is not None})
    known = set(CccpConfig.__dataclass_fields__)
    unknown = sorted(set(base) - known)
    if unknown:
        raise InputError(f"unknown cccp config keys {unknown}")
    cfg = CccpConfig(**base)
    try:
        cfg.validate()
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return cfg


def cmd_cccp(args, sf):
    if sf.affine is None:
        raise InputError("cccp needs an affine family (key affine)")
    cfg = _cccp_config(args, sf)
    if args.dump_sdpa:
        state = initialize(sf.affine, cfg, args.seed)
        prob, _, _ = build_subproblem(state, sf.affine, cfg)
        with open(args.dump_sdpa, "w") as fh:
            write_sdpa(prob, fh)
        print(f"wrote {args.dump_sdpa}")
    t0 = time.perf_counter()
    try:
        res = run_cccp(sf.affine, cfg, seed=args.seed)
    except SdpFailure as exc:
        print(f"cccp failed: {exc} (after {len(exc.trace)} iterates)", file=sys.stderr)
        return FAILED
    theta = ", ".join(f"{t:.4f}" for t in res.theta)
    print(f"cccp: {len(res.trace) - 1} iterations in {time.perf_counter() - t0:.1f} s, converged: {res.converged}")
    print(f"  F: {res.trace[0]:.6g} -> {res.trace[-1]:.6g}")
    print(f"  theta = [{theta}]")
    print(f"  support {[i + 1 for i in res.support]} (size {len(res.support)})")
    print(f"  controllable at theta: {'yes' if res.feasible else 'no'}")
    path = _artifact(args, "cccp_trace.csv")
    if path:
        res.to_csv(path)
        print(f"wrote {path}")
        doc = {"theta": [float(t) for t in res.theta], "support": [i + 1 for i in res.support], "feasible": res.feasible}
        _write(_artifact(args, "cccp_theta.json"), json.dumps(doc, indent=2) + "\n")
    return OK if res.feasible and res.converged else FAILED


def cmd_exact(args, sf):
    if sf.affine is not None:
        k, supp = exact_min_support_affine(sf.affine, max_card=args.max_card, trials=args.trials, seed=args.seed)
        if k == EXCEEDS:
            print(f"no parameter support of size <= {args.max_card or sf.affine.n_params} is feasible")
            return FAILED
        print(f"minimal parameter support: {k} at {[i + 1 for i in supp]}")
        path = _artifact(args, "exact_support.json")
        if path:
            _write(path, json.dumps({"size": k, "support": [i + 1 for i in supp]}) + "\n")
        return OK
    sys_ = _numeric(sf, "exact")
    t0 = time.perf_counter()
    k, witness = exact_zndc(sys_, candidates=_candidates(sf, args.candidates), max_card=args.max_card, seed=args.seed)
    if k == EXCEEDS:
        print(f"r_c exceeds max_card ({time.perf_counter() - t0:.2f} s)")
        return FAILED
    print(f"r_c = {k} ({time.perf_counter() - t0:.2f} s)")
    print(f"  witness {_fmt_entries(witness.support)}")
    path = _artifact(args, "exact_pattern.json")
    if path:
        _write(path, pattern_to_json(witness) + "\n")
    return OK


def cmd_acg(args, sf):
    sys_ = _numeric(sf, "acg")
    pattern = sf.pattern if sf.pattern is not None else PatternMatrix(sys_.n, sys_.n + sys_.m)
    dot = acg_to_dot(StructuralChecker(sys_, seed=args.seed).acg(pattern))
    path = _artifact(args, "acg.dot")
    if path:
        _write(path, dot)
    else:
        sys.stdout.write(dot)
    return OK


def fixture_files():
    """``{filename: SystemFile}`` for the bundled benchmark systems."""
    out = {}
    for n in range(3, 7):
        out[f"complete_k{n}.json"] = SystemFile(system=networks.complete_graph(n), name=f"complete graph K{n}")
    out["example3.json"] = SystemFile(system=networks.mixed_spectrum_example(), name="mixed spectrum, n = 6")
    for n in (3, 4, 5):
        out[f"stem_n{n}.json"] = SystemFile(system=networks.zero_system(n), name=f"zero pair, n = {n}")
    for kind in networks.NETWORK_KINDS:
        out[f"{kind}.json"] = SystemFile(system=networks.network_system(kind), name=f"{kind} network")
        out[f"{kind}_undirected.json"] = SystemFile(
            affine=networks.undirected_network(kind), name=f"{kind} network, symmetric edge weights"
        )
        out[f"{kind}_laplacian.json"] = SystemFile(
            affine=networks.laplacian_network(kind), name=f"{kind} network, Laplacian dynamics"
        )
    return out


def cmd_fixtures(args):
    os.makedirs(args.directory, exist_ok=True)
    for fname, sf in fixture_files().items():
        path = os.path.join(args.directory, fname)
        save_system(sf, path)
        print(f"wrote {path}")
    return OK


# --- parser -----------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="zndc", description="Zero-norm distance to controllability.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("system", help="JSON system file")
        sp.add_argument("--out", help="prefix for artifact files")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    add("check", "PBH test, controllability-matrix rank, optional pattern check")
    add("bounds", "upper and lower bounds")
    g = add("greedy", "greedy entry selection")
    g.add_argument("--gamma", type=float)
    g.add_argument("--candidates", default="all", choices=["all", "a-only", "file"])
    c = add("cccp", "sparse parameter search for an affine family")
    c.add_argument("--tau", type=float)
    c.add_argument("--gamma", type=float)
    c.add_argument("--eta", type=float)
    c.add_argument("--epsilon", type=float)
    c.add_argument("--xi", type=float)
    c.add_argument("--mu", type=float)
    c.add_argument("--max-iter", type=int)
    c.add_argument("--init", choices=["constant-one", "nuclear-norm-of-W"])
    c.add_argument("--dump-sdpa", metavar="PATH", help="write the first step's SDP in SDPA sparse format")
    e = add("exact", "exhaustive minimum (small instances)")
    e.add_argument("--max-card", type=int)
    e.add_argument("--candidates", default="all", choices=["all", "a-only", "file"])
    e.add_argument("--trials", type=int, default=10, help="random draws per support (affine files)")
    add("acg", "auxiliary connection graph in DOT")
    f = sub.add_parser("fixtures", help="write the benchmark system files")
    f.add_argument("directory", nargs="?", default="fixtures")
    return p


COMMANDS = {
    "check": cmd_check,
    "bounds": cmd_bounds,
    "greedy": cmd_greedy,
    "cccp": cmd_cccp,
    "exact": cmd_exact,
    "acg": cmd_acg,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fixtures":
            return cmd_fixtures(args)
        sf = load_system(args.system)
        return COMMANDS[args.command](args, sf)
    except (OSError, ParseError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except EnumerationLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    except ZndcError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
