import csv
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zndc.cli import fixture_files, main
from zndc.errors import ParseError
from zndc.files import SystemFile, load_system, parse_system, serialize
from zndc.model import AffineSystem, LinearSystem, PatternMatrix
from zndc.networks import complete_graph, undirected_network

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParse:
    def test_minimal(self):
        sf = parse_system('{"A": [[0]], "B": [[1]]}')
        assert (sf.n, sf.m) == (1, 1)

    def test_shipped_complete_graph(self):
        sf = load_system(FIXTURES / "complete_k6.json")
        assert np.array_equal(sf.system.A, np.ones((6, 6)))
        assert np.array_equal(sf.system.B, np.ones((6, 1)))

    def test_shipped_line_family(self):
        sf = load_system(FIXTURES / "line_undirected.json")
        af = sf.affine
        assert af.n_params == 6
        assert np.array_equal(af.A0, af.A0.T) and np.all(np.diag(af.A0) == -1)
        for a, b in af.directions:
            assert np.array_equal(a, a.T) and np.count_nonzero(a) == 2 and not b.any()

    def test_one_based_indices(self):
        sf = parse_system('{"A": [[0, 0], [0, 0]], "B": [[1], [0]], "pattern": [[2, 1]], "candidates": [[1, 3]]}')
        assert sf.pattern.support == {(1, 0)}
        assert sf.candidates == {(0, 2)}

    @pytest.mark.parametrize(
        "text,line",
        [
            ('{"A": [[0, 1]],\n "B": [[1]]}', 1),
            ('{"A": [[0]],\n "B": [[1], [2]]}', 2),
            ('{"A": [[0]],\n "B": [[1]],\n "pattern": [[2, 1]]}', 3),
            ('{"A": [[0]],\n "B": [[1]],\n "colour": 1}', 3),
            ('{"A": [[0]],\n "B": [[1]]\n "x": 1}', 3),
            ('{"A": [[0]]}', 1),
            ('{"A": [[0]], "B": [[1]], "affine": {"A0": [[0]], "B0": [[1]]}}', 1),
        ],
        ids=["nonsquare", "rows", "range", "key", "syntax", "missing-b", "both"],
    )
    def test_errors_carry_line(self, text, line):
        with pytest.raises(ParseError) as info:
            parse_system(text)
        assert info.value.line == line

    def test_fixture_set(self):
        names = set(fixture_files())
        assert {"complete_k3.json", "example3.json", "stem_n5.json", "star.json", "circle_laplacian.json"} <= names
        assert {p.name for p in FIXTURES.glob("*.json")} == names
        for name, sf in fixture_files().items():
            assert load_system(FIXTURES / name) == sf


small = st.integers(-3, 3).map(float)


@st.composite
def system_files(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(0, 2))
    if draw(st.booleans()):
        a = np.array(draw(st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
        b = np.array(draw(st.lists(st.lists(small, min_size=m, max_size=m), min_size=n, max_size=n))).reshape(n, m)
        cells = [(r, c) for r in range(n) for c in range(n + m)]
        pat = draw(st.none() | st.sets(st.sampled_from(cells)).map(lambda s: PatternMatrix(n, n + m, frozenset(s))))
        cands = draw(st.none() | st.frozensets(st.sampled_from(cells), min_size=1))
        return SystemFile(system=LinearSystem(a, b), pattern=pat, candidates=cands, config={"gamma": 2.5})
    l = draw(st.integers(1, 3))
    rnd = np.random.default_rng(draw(st.integers(0, 1000)))
    dirs = tuple((rnd.normal(size=(n, n)), rnd.normal(size=(n, m))) for _ in range(l))
    af = AffineSystem(rnd.normal(size=(n, n)), rnd.normal(size=(n, m)), dirs)
    return SystemFile(affine=af, name=draw(st.none() | st.text(max_size=8)))


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(system_files())
    def test_serialize_parse(self, sf):
        back = parse_system(serialize(sf))
        assert back == sf
        assert parse_system(serialize(back)) == back

    @pytest.mark.parametrize("name", sorted(fixture_files()))
    def test_shipped_text_is_canonical(self, name):
        text = (FIXTURES / name).read_text()
        assert serialize(parse_system(text)) == text


class TestCommands:
    def test_check(self, capsys):
        code, out, _ = run(["check", FIXTURES / "star.json"], capsys)
        assert code == 0
        assert "PBH controllable: no" in out and "controllability matrix rank: 2" in out

    def test_check_pattern(self, tmp_path, capsys):
        f = tmp_path / "k3.json"
        f.write_text('{"A": [[1,1,1],[1,1,1],[1,1,1]], "B": [[1],[1],[1]], "pattern": [[1,1],[2,2]]}')
        assert run(["check", f], capsys)[0] == 0
        f.write_text('{"A": [[1,1,1],[1,1,1],[1,1,1]], "B": [[1],[1],[1]], "pattern": [[1,1]]}')
        assert run(["check", f], capsys)[0] == 1

    def test_bounds(self, tmp_path, capsys):
        code, _, _ = run(["bounds", FIXTURES / "example3.json", "--out", tmp_path / "ex_"], capsys)
        assert code == 0
        doc = json.loads((tmp_path / "ex_bounds.json").read_text())
        assert doc["upper"] == 5 and doc["lower"] == 2 and doc["dedicated_states"] == [3, 5]

    def test_greedy_trace(self, tmp_path, capsys):
        code, out, _ = run(["greedy", FIXTURES / "complete_k4.json", "--gamma", 1, "--out", tmp_path / "k4_"], capsys)
        assert code == 0 and "3 entries" in out
        with open(tmp_path / "k4_greedy_trace.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["step", "row", "col", "g1", "g2", "g"]
        assert len(rows) == 5
        pat = json.loads((tmp_path / "k4_greedy_pattern.json").read_text())
        assert pat["shape"] == [4, 5] and len(pat["entries"]) == 3

    def test_greedy_a_only(self, capsys):
        code, out, _ = run(["greedy", FIXTURES / "star.json", "--candidates", "a-only"], capsys)
        assert code == 0 and ",8)" not in out

    def test_greedy_file_candidates_missing(self, capsys):
        assert run(["greedy", FIXTURES / "complete_k3.json", "--candidates", "file"], capsys)[0] == 2

    def test_exact(self, tmp_path, capsys):
        code, out, _ = run(["exact", FIXTURES / "example3.json", "--max-card", 3, "--out", tmp_path / "e_"], capsys)
        assert code == 0 and "r_c = 3" in out
        assert json.loads((tmp_path / "e_exact_pattern.json").read_text())["entries"] == [[1, 1], [3, 4], [5, 6]]
        assert run(["exact", FIXTURES / "example3.json", "--max-card", 2], capsys)[0] == 1

    def test_exact_affine(self, capsys):
        code, out, _ = run(["exact", FIXTURES / "circle_undirected.json"], capsys)
        assert code == 0 and "minimal parameter support: 1" in out
        assert run(["exact", FIXTURES / "line_undirected.json"], capsys)[0] == 1

    def test_acg_stdout(self, capsys):
        code, out, _ = run(["acg", FIXTURES / "complete_k3.json"], capsys)
        assert code == 0 and out.startswith("digraph")
        for v in ("z1", "z4", "x3", "u1"):
            assert f"  {v} [" in out

    def test_acg_file(self, tmp_path, capsys):
        assert run(["acg", FIXTURES / "stem_n3.json", "--out", tmp_path / "s_"], capsys)[0] == 0
        assert (tmp_path / "s_acg.dot").read_text().startswith("digraph")

    def test_cccp(self, tmp_path, capsys):
        prefix = tmp_path / "c_"
        sdpa = tmp_path / "step.dat-s"
        code, out, _ = run(["cccp", FIXTURES / "circle_undirected.json", "--out", prefix, "--dump-sdpa", sdpa], capsys)
        assert code == 0
        with open(tmp_path / "c_cccp_trace.csv") as fh:
            header = next(csv.reader(fh))
        assert header == ["k", "F", "weighted_l1", "nuclear_gap"] + [f"theta_{i}" for i in range(1, 8)]
        doc = json.loads((tmp_path / "c_cccp_theta.json").read_text())
        assert len(doc["theta"]) == 7 and len(doc["support"]) == 1 and doc["feasible"]
        assert sdpa.read_text().splitlines()[3].split() == ["7", "44", "-15"]

    def test_cccp_infeasible_exit(self, capsys):
        assert run(["cccp", FIXTURES / "star_undirected.json"], capsys)[0] == 1

    def test_fixtures_command(self, tmp_path, capsys):
        assert run(["fixtures", tmp_path / "fx"], capsys)[0] == 0
        assert len(list((tmp_path / "fx").glob("*.json"))) == len(fixture_files())


class TestExitCodes:
    def test_missing_file(self, tmp_path, capsys):
        assert run(["check", tmp_path / "nope.json"], capsys)[0] == 2

    def test_parse_error(self, tmp_path, capsys):
        f = tmp_path / "bad.json"
        f.write_text('{"A": [[0, 1]],\n "B": [[1]]}')
        code, _, err = run(["bounds", f], capsys)
        assert code == 2 and "line 1" in err

    def test_numeric_command_on_affine(self, capsys):
        assert run(["greedy", FIXTURES / "line_undirected.json"], capsys)[0] == 2

    def test_bad_config(self, capsys):
        assert run(["cccp", FIXTURES / "line_undirected.json", "--eta", 2], capsys)[0] == 2

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["check", "x.json", "--bogus"])
        assert info.value.code == 2
