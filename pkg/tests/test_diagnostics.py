from fractions import Fraction as F

import pytest

from pgn import (GapFunction, GaugeBody, LINEAR_FORM, PgnError,
                 PiecewiseLinearMap, analyze, analyze_profile,
                 compare_system_profile, minima_profile,
                 profile_interpolant, profile_kernel_locked)
from pgn.minima import MinimaProfile
from pgn.template import TemplateParams, block_functionals, build_system

GAP = GapFunction()


def twenty_block_system():
    params = TemplateParams(n=2, w=F(3), alpha=F(1), delta=F(1, 2),
                            q1=F(100), blocks=20, beta=F(1, 2))
    return params, build_system(params)


class TestAnalyzeSystems:
    def test_template_tail_margins(self):
        params, built = twenty_block_system()
        tail_from = built.blocks[4].q_k
        report = analyze(built.map, 2, F(3), tail_start=tail_from, gap=GAP)
        assert report.di_margin_min == 1
        assert report.dw_margin_max == F(1, 2)
        last = built.blocks[-1]
        # the exponent estimator tracks the last dip of the ratio
        assert report.ratio_min_at == last.p_k
        assert report.ratio_min == (last.p_k / 4 - F(1, 2)) / last.p_k
        expected_omega = 1 / report.ratio_min - 1
        assert report.omega_estimate == expected_omega
        assert abs(expected_omega - 3) < F(1, 1000)
        # the global tail minimum sits at the first dip instead
        assert report.ratio_min_global_at == built.blocks[4].p_k

    def test_di_margin_attained_at_anchor(self):
        params, built = twenty_block_system()
        report = analyze(built.map, 2, F(3), tail_start=F(100), gap=GAP)
        assert report.di_margin_at == F(100)
        assert report.dw_margin_at == built.blocks[0].p_k

    def test_matches_block_functionals(self):
        params, built = twenty_block_system()
        f = block_functionals(built.block_maps[-1], params, built.blocks[-1])
        report = analyze(built.map, 2, F(3),
                         tail_start=built.blocks[-1].q_k, gap=GAP)
        assert report.di_margin_min == f.min_di_margin
        assert report.dw_margin_max == f.dw_peak
        assert report.ratio_min == f.min_ratio

    def test_verdicts(self):
        _, built = twenty_block_system()
        report = analyze(built.map, 2, F(3), epsilon=F(1, 2), nu=F(1, 2),
                         gap=GAP)
        # threshold -log(1/2)/3 = 0.231 < 1 = margin
        assert report.di_satisfied is True
        # dw threshold -log(1/2)/4 = 0.173 < 1/2 = peak
        assert report.dw_satisfied is False
        tiny = GAP.exp(-9)  # epsilon with -log(eps)/3 = 3 > 1
        strict = analyze(built.map, 2, F(3), epsilon=tiny, gap=GAP)
        assert strict.di_satisfied is False

    def test_verdict_monotonicity(self):
        _, built = twenty_block_system()
        held = None
        for eps in (F(1, 100), F(1, 10), F(1, 2), F(9, 10)):
            rep = analyze(built.map, 2, F(3), epsilon=eps, gap=GAP)
            if held is True:
                assert rep.di_satisfied is True
            held = rep.di_satisfied

    def test_empty_tail_rejected(self):
        _, built = twenty_block_system()
        end = built.map.domain[1]
        with pytest.raises(PgnError):
            analyze(built.map, 2, F(3), tail_start=end, gap=GAP)
        with pytest.raises(PgnError):
            analyze(built.map, 2, F(3), tail_start=F(1), gap=GAP)

    def test_notes_always_flag_range_limits(self):
        _, built = twenty_block_system()
        report = analyze(built.map, 2, F(3), gap=GAP)
        assert any("range-limited" in n for n in report.notes)


class TestAnalyzeProfiles:
    def test_zero_target_is_singular_like(self):
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(0),)), range(0, 6))
        report = analyze_profile(prof, F(1))
        assert report.omega_is_infinite
        assert report.ratio_min == 0
        assert profile_kernel_locked(prof)

    def test_two_thirds_locks_infinite(self):
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(2, 3),)),
                              range(0, 9))
        report = analyze_profile(prof, F(1))
        assert report.omega_is_infinite
        assert any("annihilates" in n for n in report.notes)

    def test_interpolant_is_the_log_map(self):
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(2, 3),)),
                              range(0, 5))
        interp = profile_interpolant(prof)
        assert interp.breakpoints == prof.grid
        for i, q in prof.valid_points():
            assert interp.evaluate(q) == prof.logs[i]

    def test_censoring_note_present(self):
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(1, 2),)),
                              range(0, 5))
        report = analyze_profile(prof, F(1))
        assert any("censored" in n for n in report.notes)


class TestCompare:
    def test_system_against_its_own_sampling_is_zero(self):
        _, built = twenty_block_system()
        grid = tuple(built.blocks[k].q_k for k in range(6))
        logs = tuple(built.map.evaluate(q) for q in grid)
        fake = MinimaProfile(
            body=GaugeBody(LINEAR_FORM, (F(0), F(0))), gap_bits=64,
            bound_mode="auto", grid=grid,
            scales=tuple(GAP.exp(q) for q in grid),
            minima=tuple(tuple(F(1) for _ in row) for row in logs),
            logs=logs,
            witnesses=tuple(((1, 0, 0), (0, 1, 0), (0, 0, 1))
                            for _ in grid),
            errors=(None,) * len(grid))
        report = compare_system_profile(built.map, fake)
        assert report.sup_distance_on_grid == 0
        assert report.points == len(grid)

    def test_zero_target_against_trivial_system(self):
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(0),)), range(0, 9))
        trivial = PiecewiseLinearMap(
            (F(0), F(10)), ((F(0), F(0)), (F(0), F(10))))
        report = compare_system_profile(trivial, prof)
        # the only slack is the double surrogate log(exp(q)) vs q
        assert report.sup_distance_on_grid <= F(1, 2 ** 60)
        assert report.per_component_max[0] == 0

    def test_verdict_against_supplied_constant(self):
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(0),)), range(0, 5))
        trivial = PiecewiseLinearMap(
            (F(0), F(10)), ((F(0), F(0)), (F(0), F(10))))
        report = compare_system_profile(trivial, prof, rn=F(1))
        assert report.within_rn is True

    def test_template_vs_profile_plumbing(self):
        _, built = twenty_block_system()
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(1, 3), F(2, 5))),
                              [F(100), F(101), F(102)], bound=3)
        # points failed (bound tiny) -> no overlap of valid points
        with pytest.raises(PgnError):
            compare_system_profile(built.map, prof)

    def test_component_count_mismatch(self):
        _, built = twenty_block_system()
        prof = minima_profile(GaugeBody(LINEAR_FORM, (F(0),)), range(0, 3))
        with pytest.raises(PgnError):
            compare_system_profile(built.map, prof)
