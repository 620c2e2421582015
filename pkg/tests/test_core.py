from decimal import Decimal
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgn import (DomainError, GapFunction, PgnError, PiecewiseLinearMap,
                 StructureError, breakpoints_of, concatenate,
                 format_rational, parse_rational, sup_distance)
from pgn.template import TemplateParams, build_block, build_system

from oracles import dense_max_distance, exp_oracle, ln_oracle


def simple_map():
    return PiecewiseLinearMap((F(0), F(2)), ((F(0), F(0)), (F(1), F(1))))


class TestRationals:
    def test_parse_forms(self):
        assert parse_rational("3/4") == F(3, 4)
        assert parse_rational("0.25") == F(1, 4)
        assert parse_rational("-7") == F(-7)
        assert parse_rational(" 10/4 ") == F(5, 2)

    def test_parse_rejects_junk(self):
        with pytest.raises(PgnError):
            parse_rational("1/0")
        with pytest.raises(PgnError):
            parse_rational("abc")

    def test_format_round_trip(self):
        for x in (F(0), F(-3), F(22, 7), F(1, 2 ** 64)):
            assert parse_rational(format_rational(x)) == x


class TestGapFunction:
    TOL = F(1, 2 ** 64)

    @pytest.mark.parametrize("x", [
        F(2), F(3), F(100), F(147), F(1, 3), F(2, 3), F(999999, 1000),
        F(10) ** 6, F(1, 137), F(1836311903), F(435, 2),
    ])
    def test_log_accuracy(self, x):
        g = GapFunction().log(x)
        diff = abs(Decimal(g.numerator) / Decimal(g.denominator) - ln_oracle(x))
        assert diff <= Decimal(self.TOL.numerator) / Decimal(self.TOL.denominator)

    @pytest.mark.parametrize("x", [
        F(0), F(1), F(2), F(-3), F(1, 2), F(-7, 3), F(138155105579642742,
                                                     10 ** 16),
    ])
    def test_exp_accuracy(self, x):
        e = GapFunction().exp(x)
        diff = abs(Decimal(e.numerator) / Decimal(e.denominator) - exp_oracle(x))
        assert diff <= Decimal(self.TOL.numerator) / Decimal(self.TOL.denominator)

    def test_exact_identities(self):
        gap = GapFunction()
        assert gap.log(1) == 0
        assert gap.exp(0) == 1

    def test_rejects_nonpositive_log(self):
        with pytest.raises(PgnError):
            GapFunction().log(0)
        with pytest.raises(PgnError):
            GapFunction().log(F(-1, 2))

    def test_deterministic_across_instances(self):
        xs = [F(100), F(2, 3), F(31, 7)]
        a, b = GapFunction(), GapFunction()
        assert [a.log(x) for x in xs] == [b.log(x) for x in xs]
        assert [a.exp(x) for x in xs] == [b.exp(x) for x in xs]

    def test_log_monotone(self):
        gap = GapFunction()
        samples = [F(3, 2), F(2), F(5, 2), F(10), F(100), F(10) ** 9]
        logs = [gap.log(x) for x in samples]
        assert logs == sorted(logs) and len(set(logs)) == len(logs)

    def test_underflow_raises(self):
        with pytest.raises(PgnError):
            GapFunction().exp(-200)


class TestPiecewiseLinearMap:
    def test_midpoint_and_endpoints(self):
        m = simple_map()
        assert m.evaluate(1) == (F(1, 2), F(1, 2))
        assert m.evaluate(0) == (F(0), F(0))
        assert m.evaluate(2) == (F(1), F(1))

    def test_domain_error_names_interval(self):
        with pytest.raises(DomainError, match=r"\[0, 2\]"):
            simple_map().evaluate(3)

    def test_block_evaluation_matches_schedule(self):
        # reference block: the slope schedule forces the second and third
        # components to meet at r_k with value q_k/(n+1) + n*alpha
        params = TemplateParams(n=2, w=F(3), alpha=F(1), delta=F(1, 2),
                                q1=F(100), blocks=1, beta=F(1, 2))
        block, bp = build_block(params, 1, F(100))
        assert bp.r_k == 103
        assert block.evaluate(103) == (F(97, 3), F(106, 3), F(106, 3))

    def test_structural_rejections(self):
        with pytest.raises(StructureError):
            PiecewiseLinearMap((F(0), F(0)), ((F(0), F(0)), (F(1), F(1))))
        with pytest.raises(StructureError):
            PiecewiseLinearMap((F(0), F(1)), ((F(0),), (F(1),)))
        with pytest.raises(StructureError):
            PiecewiseLinearMap((F(0),), ((F(0), F(0)),))
        with pytest.raises(StructureError):
            PiecewiseLinearMap((F(0), F(1)),
                               ((F(0), F(0)), (F(1), F(1), F(1))))

    def test_json_round_trip_exact(self):
        m = PiecewiseLinearMap(
            (F(-1, 3), F(7, 5), F(2)),
            ((F(1, 7), F(9)), (F(-2, 11), F(4, 3)), (F(0), F(1))))
        doc = m.to_json_dict(meta={"tag": 1})
        back = PiecewiseLinearMap.from_json_dict(doc)
        assert back == m
        assert doc["meta"] == {"tag": 1}


class TestSupDistance:
    def test_identity_and_offset(self):
        m = simple_map()
        assert sup_distance(m, m) == 0
        shifted = PiecewiseLinearMap(
            m.breakpoints,
            tuple((r[0] + F(3, 7), r[1]) for r in m.values))
        assert sup_distance(m, shifted) == F(3, 7)

    def test_component_mismatch(self):
        three = PiecewiseLinearMap((F(0), F(1)),
                                   ((F(0),) * 3, (F(1),) * 3))
        with pytest.raises(DomainError):
            sup_distance(simple_map(), three)

    def test_disjoint_domains(self):
        a = simple_map()
        b = PiecewiseLinearMap((F(5), F(6)), ((F(0), F(0)), (F(1), F(1))))
        with pytest.raises(DomainError):
            sup_distance(a, b)

    def test_matches_dense_oracle_on_crossing_maps(self):
        a = PiecewiseLinearMap((F(0), F(1), F(3)),
                               ((F(0), F(2)), (F(2), F(0)), (F(0), F(5))))
        b = PiecewiseLinearMap((F(0), F(2), F(3)),
                               ((F(1), F(0)), (F(0), F(3)), (F(2), F(2))))
        assert sup_distance(a, b) == dense_max_distance(a, b, 0, 3)

    def test_delta_family_divergence_vs_dense_oracle(self):
        base = dict(n=2, w=F(3), alpha=F(1), q1=F(100), blocks=3,
                    beta=F(1, 2))
        s0 = build_system(TemplateParams(delta=F(0), **base))
        s1 = build_system(TemplateParams(delta=F(1), **base))
        q1, q3 = s0.blocks[0].q_k, s0.blocks[2].q_k
        exact = sup_distance(s0.map, s1.map, (q1, q3))
        assert exact == dense_max_distance(s0.map, s1.map, q1, q3)
        g_q2 = GapFunction().log(s0.blocks[1].q_k)
        assert exact >= (2 - 1) * g_q2

    def test_symmetry(self):
        a = PiecewiseLinearMap((F(0), F(1)), ((F(0), F(0)), (F(1), F(2))))
        b = PiecewiseLinearMap((F(0), F(1)), ((F(1), F(0)), (F(0), F(3))))
        assert sup_distance(a, b) == sup_distance(b, a) > 0


class TestBreakpointsOf:
    def test_single_segment(self):
        m = PiecewiseLinearMap((F(0), F(1)), ((F(0), F(0)), (F(1), F(1))))
        assert breakpoints_of(m) == [0, 1]

    def test_block_has_seven_breakpoints(self):
        params = TemplateParams(n=2, w=F(3), alpha=F(1), delta=F(1, 2),
                                q1=F(100), blocks=1, beta=F(1, 2))
        block, bp = build_block(params, 1, F(100))
        assert breakpoints_of(block) == [
            bp.q_k, bp.r_k, bp.s_k, bp.t_k, bp.u_k, bp.p_k, bp.q_k1]

    def test_concatenation_lists_shared_point_once(self):
        params = TemplateParams(n=2, w=F(3), alpha=F(1), delta=F(1, 2),
                                q1=F(100), blocks=2, beta=F(1, 2))
        built = build_system(params)
        bps = breakpoints_of(built.map)
        assert len(bps) == len(set(bps)) == 13
        assert built.blocks[0].q_k1 in bps

    def test_concatenate_rejects_mismatch(self):
        a = simple_map()
        b = PiecewiseLinearMap((F(2), F(3)), ((F(5), F(5)), (F(6), F(6))))
        with pytest.raises(PgnError):
            concatenate([a, b])


small_fracs = st.fractions(min_value=-10, max_value=10, max_denominator=12)


@st.composite
def pl_maps(draw):
    k = draw(st.integers(min_value=2, max_value=5))
    bps = sorted(draw(st.sets(small_fracs, min_size=k, max_size=k)))
    width = draw(st.integers(min_value=2, max_value=4))
    rows = tuple(
        tuple(draw(small_fracs) for _ in range(width)) for _ in bps)
    return PiecewiseLinearMap(tuple(F(b) for b in bps), rows)


@settings(max_examples=60, deadline=None)
@given(pl_maps(), st.fractions(min_value=0, max_value=1, max_denominator=64))
def test_evaluate_between_surrounding_rows(m, t):
    lo, hi = m.domain
    q = lo + (hi - lo) * t
    row = m.evaluate(q)
    import bisect
    i = max(0, bisect.bisect_right(m.breakpoints, q) - 1)
    i = min(i, len(m.breakpoints) - 2)
    for d, v in enumerate(row):
        a, b = m.values[i][d], m.values[i + 1][d]
        assert min(a, b) <= v <= max(a, b)


@settings(max_examples=40, deadline=None)
@given(pl_maps())
def test_sup_distance_zero_iff_identical(m):
    assert sup_distance(m, m) == 0
    bumped = PiecewiseLinearMap(
        m.breakpoints,
        tuple(tuple(v + F(1, 97) for v in row) for row in m.values))
    assert sup_distance(m, bumped) == F(1, 97)
