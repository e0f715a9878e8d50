#!/usr/bin/env python3
"""Max-cut relaxations from edge-list files.

Reads a graph in the "n m" / "i j w" text layout, builds the cost matrix
C = -(D - W)/4, solves at rank ceil(sqrt(2n)), certifies the result, and
compares the relaxation value against the exhaustive cut on graphs small
enough to enumerate.  Point the G1 environment hook at a real benchmark
file to run the same pipeline at n = 800:

    BMADMM_G1=/path/to/G1 python demos/02_maxcut_edge_lists.py
"""

import os
import time

from bmadmm import (
    ProblemSpec,
    SolverOptions,
    brute_force_maxcut,
    dual_certificate,
    load_gset,
    maxcut_cost,
    relative_gap,
    solve,
    two_norm_estimate,
)

HERE = os.path.dirname(__file__)

for name in ("edge.txt", "triangle.txt", "cycle4.txt", "k10.txt"):
    graph = load_gset(os.path.join(HERE, "..", "tests", "data", name))
    C = maxcut_cost(graph)
    result = solve(ProblemSpec.sphere(C), SolverOptions(seed=0))
    cert = dual_certificate(C, result.state.sigma_tilde)
    cut, _ = brute_force_maxcut(graph)
    # the relaxation lower-bounds <C, X>, so -value upper-bounds the cut
    print(
        f"{name:12s} n={graph.n:3d} relaxation={result.state.last_objective:9.4f} "
        f"best cut={cut:5.1f} bound holds: {-result.state.last_objective >= cut - 1e-6} "
        f"certified={cert.certified}"
    )

g1_path = os.environ.get("BMADMM_G1")
if g1_path and os.path.exists(g1_path):
    graph = load_gset(g1_path)
    C = maxcut_cost(graph)
    norm = two_norm_estimate(C)
    print(f"\n{graph.name}: n={graph.n}, ||C|| = {norm:.3f}")
    t0 = time.time()
    result = solve(ProblemSpec.sphere(C, r=40), SolverOptions(rho=norm, seed=0))
    cert = dual_certificate(C, result.state.sigma_tilde)
    gap = relative_gap(C, result.state.sigma_tilde, cert.lower_bound())
    print(
        f"objective {result.state.last_objective:.4f} in {result.state.k} "
        f"iterations / {time.time() - t0:.1f}s, certified gap {gap:.2e}"
    )
else:
    print("\n(set BMADMM_G1 to a local Gset file to run the n=800 benchmark)")
