import re
import xml.dom.minidom
from fractions import Fraction as F

import pytest

from pgn import PgnError, PiecewiseLinearMap, PlotSpec, render_svg, sup_distance
from pgn.template import TemplateParams, build_block


def trivial_map():
    return PiecewiseLinearMap((F(1), F(2)),
                              ((F(0), F(0), F(1)), (F(0), F(0), F(2))))


def block_with_overlays():
    base = dict(n=2, w=F(3), alpha=F(1), q1=F(100), blocks=1, beta=F(1, 2))
    main, bp = build_block(TemplateParams(delta=F(1, 2), **base), 1, F(100))
    lo, bp0 = build_block(TemplateParams(delta=F(0), **base), 1, F(100))
    hi, bp1 = build_block(TemplateParams(delta=F(1), **base), 1, F(100))
    return main, bp, lo, bp0, hi, bp1


class TestRenderSvg:
    def test_valid_svg_with_expected_polylines(self):
        doc = render_svg(PlotSpec(subject=trivial_map()))
        parsed = xml.dom.minidom.parseString(doc)
        assert parsed.documentElement.tagName == "svg"
        assert parsed.documentElement.getAttribute("version") == "1.1"
        assert doc.count("<polyline") == 3

    def test_deterministic_output(self):
        spec = PlotSpec(subject=trivial_map(), guide_n=2, guide_w=F(3),
                        annotations=((F(1), "a"), (F(2), "b")))
        assert render_svg(spec) == render_svg(spec)

    def test_annotations_and_guides_present(self):
        spec = PlotSpec(subject=trivial_map(), guide_n=2, guide_w=F(3),
                        annotations=((F(1), "start"), (F(2), "end")))
        doc = render_svg(spec)
        assert "start</text>" in doc and "end</text>" in doc
        assert "q/(n+1)" in doc and "q/(w+1)" in doc
        assert doc.count('class="bp"') == 2

    def test_rejects_empty_subject(self):
        with pytest.raises(PgnError):
            render_svg(PlotSpec(subject=None))

    def test_overlays_are_dotted_and_under_main(self):
        main, bp, lo, _, hi, _ = block_with_overlays()
        doc = render_svg(PlotSpec(subject=main, overlays=(lo, hi)))
        assert doc.count('class="overlay"') == 6
        assert doc.count('class="component"') == 3
        assert doc.index('class="overlay"') < doc.index('class="component"')


class TestBlockGeometry:
    def test_axis_label_order(self):
        main, bp, lo, bp0, hi, bp1 = block_with_overlays()
        labels = [(bp.q_k, "q_1"), (bp.r_k, "r_1"), (bp.s_k_m, "s_1^m"),
                  (bp.s_k, "s_1"), (bp.s_k_M, "s_1^M"), (bp.t_k, "t_1"),
                  (bp.u_k, "u_1"), (bp.p_k, "p_1"), (bp.q_k1, "q_2")]
        doc = render_svg(PlotSpec(subject=main, overlays=(lo, hi),
                                  annotations=tuple(labels)))
        found = re.findall(
            r'<text class="bp-label" x="([0-9.]+)" y="[0-9.]+">([^<]+)</text>',
            doc)
        assert [name for _, name in found] == [n for _, n in labels]
        xs = [float(x) for x, _ in found]
        assert xs == sorted(xs)

    def test_family_variants_differ_only_inside_the_slide_region(self):
        main, bp, lo, bp0, hi, bp1 = block_with_overlays()
        # region boundary: the widest variant (delta=0) stops sliding at its t
        t_widest = bp0.t_k
        for a, b in ((lo, hi), (main, lo), (main, hi)):
            assert sup_distance(a, b, (bp.q_k, bp.r_k)) == 0
            assert sup_distance(a, b, (t_widest, bp.q_k1)) == 0
            assert sup_distance(a, b, (bp.r_k, t_widest)) > 0
