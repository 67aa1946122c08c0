import re

import numpy as np
import pytest

from nsplace.design import Board, Design
from nsplace.generate import generate_design
from nsplace.metrics import (MetricsReport, crossing_count, hpwl_per_net, hpwl_total, ns_objective,
                             out_of_bounds, overlap_violations, percent_improvement, report,
                             star_segments)
from nsplace.render import render_svg

from conftest import make_design, placement
from oracles import crossings_bruteforce


def one_part(pins, nets, size=10):
    d = make_design((size, size, 1), [("A", size, size, pins)], nets)
    return d, placement(d, [0], [0])


class TestHpwl:
    def test_example(self):
        d, p = one_part({"1": (0, 0), "2": (3, 4)}, [("N", ["A.1", "A.2"])])
        assert hpwl_total(d, p) == 7

    def test_single_pin(self):
        d, p = one_part({"1": (1, 1)}, [("N", ["A.1"])])
        assert hpwl_total(d, p) == 0

    def test_translation_invariance(self):
        d = generate_design(8, 6, 40, 30, seed=0)
        rng = np.random.default_rng(0)
        x, y = rng.uniform(0, 20, 8), rng.uniform(0, 15, 8)
        a = hpwl_per_net(d, placement(d, x, y))
        b = hpwl_per_net(d, placement(d, x + 2.5, y - 1.25))
        assert a == pytest.approx(b, abs=1e-12)


class TestCrossings:
    def test_x_shape(self):
        d, p = one_part({"1": (0, 0), "2": (4, 4), "3": (0, 2), "4": (1, 0)},
                        [("N1", ["A.1", "A.2"]), ("N2", ["A.3", "A.4"])])
        assert crossing_count(d, p) == 1

    def test_parallel(self):
        d, p = one_part({"1": (0, 0), "2": (2, 0), "3": (0, 1), "4": (2, 1)},
                        [("N1", ["A.1", "A.2"]), ("N2", ["A.3", "A.4"])])
        assert crossing_count(d, p) == 0

    def test_matches_bruteforce(self):
        for seed in range(8):
            d = generate_design(12, 10, 40, 30, seed=seed)
            rng = np.random.default_rng(seed)
            p = placement(d, rng.uniform(0, 25, 12), rng.uniform(0, 18, 12), rng.integers(0, 2, 12))
            assert crossing_count(d, p) == crossings_bruteforce(star_segments(d, p))


class TestOverlap:
    def unit(self):
        return make_design((5, 5, 1), [("A", 1, 1, {}), ("B", 1, 1, {})])

    def test_identical(self):
        d = self.unit()
        assert overlap_violations(d, placement(d, [1, 1], [1, 1])) == (1, 1.0)

    def test_half(self):
        d = self.unit()
        assert overlap_violations(d, placement(d, [1, 1.5], [1, 1])) == (1, 0.5)

    def test_abutting_is_legal(self):
        d = self.unit()
        assert overlap_violations(d, placement(d, [1, 2], [1, 1])) == (0, 0.0)

    def test_out_of_bounds(self):
        d = self.unit()
        assert out_of_bounds(d, placement(d, [4.5, 0], [0, -0.1])) == ["A", "B"]


class TestNsMetric:
    def test_disjoint_is_zero(self):
        d, p = one_part({"1": (0, 0), "2": (1, 0), "3": (5, 5), "4": (6, 5)},
                        [("N1", ["A.1", "A.2"]), ("N2", ["A.3", "A.4"])])
        assert ns_objective(d, p) < 1e-6

    def test_coincident_single_pins(self):
        d, p = one_part({"1": (2, 2), "2": (2, 2)}, [("N1", ["A.1"]), ("N2", ["A.2"])])
        assert ns_objective(d, p) == pytest.approx(2.0)


class TestReport:
    def test_fields_match_functions(self):
        d = generate_design(8, 6, 30, 20, seed=2)
        p = placement(d, np.linspace(0, 20, 8), np.linspace(0, 10, 8))
        rep, table = report(d, p, {"gp": 1.5})
        assert rep.hpwl_total == hpwl_total(d, p)
        assert rep.ns_objective == ns_objective(d, p)
        assert rep.crossing_count == crossing_count(d, p)
        assert (rep.overlap_count, rep.overlap_area) == overlap_violations(d, p)
        assert "hpwl_total" in table and "runtime_gp" in table

    def test_csv_round_trip(self):
        rep = MetricsReport(12.5, 0.125, 3, 1, 0.25, {"init": 0.5})
        assert MetricsReport.from_csv(rep.to_csv()) == rep

    def test_percent_improvement_column(self):
        base = MetricsReport(100.0, 2.0, 10, 0, 0.0)
        new = MetricsReport(80.0, 1.5, 12, 0, 0.0)
        rows = dict(line.split(",", 1) for line in new.to_csv(base).splitlines()[1:])
        assert rows["hpwl_total"] == "80.0,20.0"
        assert rows["crossing_count"] == "12,-20.0"
        assert rows["overlap_count"] == "0,"
        assert percent_improvement(100, 80) == 20.0
        assert percent_improvement(0, 5) is None
        assert "(+20.0%)" in new.table(base)


class TestSvg:
    def test_empty_design(self):
        svg = render_svg(Design(Board(10, 5)), placement(Design(Board(10, 5)), [], []))
        assert svg.count('class="board"') == 1 and "<rect" not in svg

    def test_one_rect_per_component(self):
        d = generate_design(9, 5, 30, 20, seed=1)
        svg = render_svg(d, placement(d, np.zeros(9), np.zeros(9)))
        assert len(re.findall(r'<rect class="component"', svg)) == 9

    def test_hulls_for_nets_with_area(self):
        d, p = one_part({"1": (0, 0), "2": (4, 0), "3": (0, 4), "4": (1, 1), "5": (2, 2), "6": (3, 3)},
                        [("N1", ["A.1", "A.2", "A.3"]), ("N2", ["A.4", "A.5", "A.6"]), ("N3", ["A.1", "A.4"])])
        svg = render_svg(d, p, hulls=True)
        assert svg.count('class="hull"') == 1
        assert 'class="hull"' not in render_svg(d, p)

    def test_well_formed(self):
        import xml.etree.ElementTree as ET
        d = generate_design(5, 4, 20, 20, seed=3)
        ET.fromstring(render_svg(d, placement(d, np.arange(5.0), np.arange(5.0)), hulls=True))
