import csv
import io

import numpy as np
import pytest

from zndc.bounds import lower_bound_dedicated_inputs
from zndc.greedy import GreedyConfig, greedy_zndc, objective_g
from zndc.model import LinearSystem, PatternMatrix, is_controllable_pbh, verify_feasibility
from zndc.networks import complete_graph, mixed_spectrum_example, network_system, zero_system
from zndc.numerics import distinct_eigenvalues, eigenvalues
from zndc.oracle import exact_zndc
from zndc.structural import (
    StructuralChecker,
    build_acg,
    count_input_reachable,
    is_structurally_controllable,
    lemma2_max_rank,
)

from .conftest import random_system


class TestObjective:
    def test_controllable(self):
        sys = LinearSystem(np.array([[0.0, 1.0], [-1.0, 0.5]]), np.array([[0.0], [1.0]]))
        p = len(distinct_eigenvalues(eigenvalues(sys.A)))
        g1, g2, g = objective_g(sys, PatternMatrix(2, 3))
        assert (g1, g2, g) == (p * 2, 3, p * 2 + 3)

    def test_complete_graph_empty(self):
        sys = complete_graph(6)
        pat = PatternMatrix(6, 7)
        eigs = distinct_eigenvalues(eigenvalues(sys.A))
        assert sorted(np.round(np.real(eigs), 8)) == [0.0, 6.0]
        g1, g2, g = objective_g(sys, pat, gamma=1.0)
        assert g1 == 7 == sum(lemma2_max_rank(lam, sys, pat) for lam in eigs)
        assert g2 == count_input_reachable(build_acg(sys, pat))
        assert g == g1 + g2

    def test_full_pattern(self, rng):
        for _ in range(10):
            sys = random_system(rng, 4, 1)
            checker = StructuralChecker(sys)
            g1, g2, _ = objective_g(sys, PatternMatrix.full(4, 5), checker=checker)
            assert g1 == checker.p * 4 and g2 == 5

    def test_target_iff_controllable(self, rng):
        for _ in range(40):
            sys = random_system(rng, 3, 1)
            checker = StructuralChecker(sys)
            pat = PatternMatrix.from_mask(rng.random((3, 4)) < 0.3)
            _, _, g = objective_g(sys, pat, gamma=2.0, checker=checker)
            target = checker.p * 3 + 2.0 * 4
            assert (g == target) == checker.is_structurally_controllable(pat)

    def test_gamma_positive(self):
        with pytest.raises(ValueError):
            objective_g(complete_graph(3), PatternMatrix(3, 4), gamma=0.0)


class TestGreedy:
    def test_complete_graph(self):
        trace = greedy_zndc(complete_graph(6), GreedyConfig(gamma=1.0))
        assert trace.success and trace.cardinality == 5
        assert is_structurally_controllable(complete_graph(6), trace.pattern)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_zero_system_stem(self, n):
        trace = greedy_zndc(zero_system(n))
        assert trace.success and trace.cardinality == n
        pat = trace.pattern
        # one input edge plus a state chain visiting every node once
        b_entries = [(r, c) for r, c in pat.support if c >= n]
        assert len(b_entries) == 1
        succ = {c: r for r, c in pat.support if c < n}
        node, seen = b_entries[0][0], set()
        while node is not None and node not in seen:
            seen.add(node)
            node = succ.get(node)
        assert seen == set(range(n))

    @pytest.mark.parametrize("kind", ["line", "star", "circle"])
    def test_networks_match_lower_bound(self, kind):
        sys = network_system(kind)
        trace = greedy_zndc(sys)
        assert trace.success
        assert trace.cardinality == lower_bound_dedicated_inputs(sys)
        assert verify_feasibility(sys, trace.pattern)

    def test_a_only_candidates(self):
        sys = network_system("star")
        cands = frozenset((r, c) for r in range(7) for c in range(7))
        trace = greedy_zndc(sys, GreedyConfig(candidates=cands))
        assert trace.success
        assert all(c < 7 for _, c in trace.pattern.support)

    def test_g_nondecreasing(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 5))
            trace = greedy_zndc(random_system(rng, n, 1))
            gs = [trace.initial.g] + [s.g for s in trace.steps]
            assert all(b >= a for a, b in zip(gs, gs[1:]))

    def test_success_passes_checks(self, rng):
        for k in range(20):
            sys = random_system(rng, int(rng.integers(2, 5)), 1)
            trace = greedy_zndc(sys)
            assert trace.success
            assert is_structurally_controllable(sys, trace.pattern)
            assert verify_feasibility(sys, trace.pattern, seed=k)

    def test_not_better_than_exact(self, rng):
        fixtures = [complete_graph(4), mixed_spectrum_example(), zero_system(3)]
        fixtures += [random_system(rng, int(rng.integers(2, 5)), 1) for _ in range(15)]
        for sys in fixtures:
            trace = greedy_zndc(sys)
            exact, _ = exact_zndc(sys)
            assert exact <= trace.cardinality <= sys.n * (sys.n + sys.m)

    def test_deterministic(self):
        sys = mixed_spectrum_example()
        a, b = greedy_zndc(sys), greedy_zndc(sys)
        assert a.steps == b.steps and a.pattern == b.pattern

    def test_already_controllable(self):
        sys = LinearSystem(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]))
        assert is_controllable_pbh(sys)
        trace = greedy_zndc(sys)
        assert trace.success and trace.cardinality == 0

    def test_failure_flag(self):
        # a single candidate cannot repair K4
        trace = greedy_zndc(complete_graph(4), GreedyConfig(candidates=frozenset({(0, 0)})))
        assert not trace.success and trace.cardinality == 1

    def test_max_steps(self):
        trace = greedy_zndc(complete_graph(5), GreedyConfig(max_steps=2))
        assert not trace.success and len(trace.steps) == 2

    @pytest.mark.parametrize(
        "config",
        [GreedyConfig(gamma=-1.0), GreedyConfig(candidates=frozenset()), GreedyConfig(candidates=frozenset({(5, 0)}))],
    )
    def test_invalid_config(self, config):
        with pytest.raises(ValueError):
            greedy_zndc(complete_graph(3), config)

    def test_csv(self):
        trace = greedy_zndc(complete_graph(4))
        buf = io.StringIO()
        trace.to_csv(buf)
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ["step", "row", "col", "g1", "g2", "g"]
        assert len(rows) == 2 + len(trace.steps)
        assert rows[1][0] == "0"
        r, c = trace.steps[0].entry
        assert rows[2][1:3] == [str(r + 1), str(c + 1)]
