import subprocess
import sys

import pytest

from nsplace.cli import main
from nsplace.design import parse_design, parse_placement
from nsplace.lpfile import parse_lp
from nsplace.metrics import MetricsReport, overlap_violations

FAST = ["--iterations", "60", "--node-limit", "300"]

HAND = """\
board 10 10 1
comp A 2 2
comp B 2 2 fixed 6 0 0
pin A 1 2 1
pin B 1 0 1
net N A.1 B.1
"""


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "d.txt"
    assert main(["gen", "--components", "6", "--nets", "5", "--width", "20", "--height", "15",
                 "--utilization", "0.25", "--seed", "2", "-o", str(path)]) == 0
    return path


def run(*args):
    return main([str(a) for a in args])


def test_gen_is_seed_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        run("gen", "--components", 10, "--nets", 8, "--width", 30, "--height", 20, "--seed", 7, "-o", p)
    assert a.read_bytes() == b.read_bytes()
    d = parse_design(a.read_text())
    assert d.n == 10 and len(d.nets) == 8


def test_eval_hand_arithmetic(tmp_path, capsys):
    d = tmp_path / "d.txt"
    d.write_text(HAND)
    p = tmp_path / "p.txt"
    p.write_text("place A 1 0 0\nplace B 6 0 0\n")
    csv = tmp_path / "m.csv"
    assert run("eval", d, p, "--csv", csv) == 0
    out = capsys.readouterr().out
    # pins at (3, 1) and (6, 1): HPWL 3
    assert "hpwl_total" in out and " 3\n" in out
    assert MetricsReport.from_csv(csv.read_text()).hpwl_total == 3.0


def test_eval_baseline_column(tmp_path, capsys):
    d = tmp_path / "d.txt"
    d.write_text(HAND)
    base, new = tmp_path / "b.txt", tmp_path / "n.txt"
    base.write_text("place A 0 5 0\nplace B 6 0 0\n")      # pins (2, 6) and (6, 1): HPWL 9
    new.write_text("place A 1 0 0\nplace B 6 0 0\n")
    assert run("eval", d, new, "--baseline", base) == 0
    assert "(+66.7%)" in capsys.readouterr().out


def test_stages_chain_equals_place(small, tmp_path):
    s0, s1, s2, full = (tmp_path / f"{n}.txt" for n in ("s0", "s1", "s2", "full"))
    assert run("init", small, "-o", s0, *FAST) == 0
    assert run("gp", small, s0, "-o", s1, *FAST) == 0
    assert run("legalize", small, s1, "-o", s2, *FAST) in (0, 3)
    assert run("place", small, "-o", full, *FAST) in (0, 3)
    assert s2.read_bytes() == full.read_bytes()


def test_gp_keeps_fixed_components(tmp_path):
    d = tmp_path / "d.txt"
    run("gen", "--components", 6, "--nets", 5, "--width", 20, "--height", 15, "--utilization", 0.25,
        "--fixed", 2, "--seed", 1, "-o", d)
    s0, s1 = tmp_path / "s0.txt", tmp_path / "s1.txt"
    run("init", d, "-o", s0, *FAST)
    run("gp", d, s0, "-o", s1, *FAST)
    design = parse_design(d.read_text())
    a, b = parse_placement(s0.read_text(), design), parse_placement(s1.read_text(), design)
    for i, c in enumerate(design.components):
        if c.fixed:
            assert (a.x[i], a.y[i], a.r[i]) == (b.x[i], b.y[i], b.r[i]) == c.fixed_position


def test_place_artifacts_and_determinism(small, tmp_path):
    outs = []
    for k in range(2):
        p, rep, svg, tr = (tmp_path / f"{n}{k}" for n in ("p", "r", "s", "t"))
        assert run("place", small, "-o", p, "--report", rep, "--svg", svg, "--trace", tr, *FAST) in (0, 3)
        outs.append(p.read_bytes())
        assert svg.read_text().startswith("<?xml")
        assert MetricsReport.from_csv(rep.read_text()).overlap_count == 0
        assert tr.read_text().count("\n") >= 1
    assert outs[0] == outs[1]


@pytest.mark.parametrize("flag", [["--lns", "0"], ["--no-rel-constraints"]])
def test_ablation_flags(small, tmp_path, flag):
    p = tmp_path / "p.txt"
    assert run("place", small, "-o", p, *FAST, *flag) in (0, 3)
    d = parse_design(small.read_text())
    assert overlap_violations(d, parse_placement(p.read_text(), d)) == (0, 0.0)


def test_legalize_lp_out(small, tmp_path):
    s0, out, lp = tmp_path / "s0.txt", tmp_path / "o.txt", tmp_path / "m.lp"
    run("init", small, "-o", s0, *FAST)
    assert run("legalize", small, s0, "-o", out, "--lp-out", lp, *FAST) in (0, 3)
    model = parse_lp(lp.read_text())
    assert model.num_binaries >= 6


def test_render(small, tmp_path):
    s0, svg = tmp_path / "s0.txt", tmp_path / "v.svg"
    run("init", small, "-o", s0, *FAST)
    assert run("render", small, s0, "-o", svg, "--hulls") == 0
    assert svg.read_text().count('class="component"') == 6


class TestExitCodes:
    def test_missing_file(self, tmp_path, capsys):
        assert run("eval", tmp_path / "nope.txt", tmp_path / "p.txt") == 1
        assert "nsplace:" in capsys.readouterr().err

    def test_malformed_design(self, tmp_path, capsys):
        d = tmp_path / "d.txt"
        d.write_text("board 5 5 1\ncomp A 1\n")
        assert run("init", d, "-o", tmp_path / "o.txt") == 1
        assert "line 2" in capsys.readouterr().err

    def test_bad_argument(self, small):
        with pytest.raises(SystemExit) as e:
            main(["place", str(small)])
        assert e.value.code == 1

    def test_bad_parameter_value(self, small, tmp_path):
        assert run("place", small, "-o", tmp_path / "p.txt", "--alpha", "-1") == 1

    def test_infeasible(self, tmp_path):
        d = tmp_path / "d.txt"
        d.write_text("board 4 4 1\ncomp A 3 3\ncomp B 3 3\n")
        p = tmp_path / "p.txt"
        p.write_text("place A 0 0 0\nplace B 1 1 0\n")
        out = tmp_path / "o.txt"
        assert run("legalize", d, p, "-o", out) == 2
        assert not out.exists()

    def test_limit_keeps_incumbent(self, tmp_path):
        d = tmp_path / "d.txt"
        run("gen", "--components", 8, "--nets", 10, "--width", 16, "--height", 12,
            "--utilization", 0.3, "--seed", 0, "-o", d)
        s0, out = tmp_path / "s0.txt", tmp_path / "o.txt"
        run("init", d, "-o", s0)
        assert run("legalize", d, s0, "-o", out, "--node-limit", 2, "--no-rel-constraints") == 3
        design = parse_design(d.read_text())
        assert overlap_violations(design, parse_placement(out.read_text(), design)) == (0, 0.0)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nsplace.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("nsplace ")
