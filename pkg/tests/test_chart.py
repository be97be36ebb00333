import xml.dom.minidom

from tqmf.chart import GENERATOR, adams_chart
from tqmf.linalg import AbelianGroupPresentation as G


def test_chart_shapes_and_metadata():
    groups = {(0, 0): G(1), (1, 1): G(0, (2,)), (0, 4): G(2), (2, 2): G(0, (4,)), (3, 3): G()}
    svg = adams_chart(groups, [((0, 4), (1, 1))], {(1, 1): ["h1"]}, "test")
    doc = xml.dom.minidom.parseString(svg)
    root = doc.documentElement
    assert root.getAttribute("version") == "1.1"
    assert len(doc.getElementsByTagName("circle")) == 1
    # free summands and Z/4 are drawn as squares; the trivial group is not drawn
    assert len([r for r in doc.getElementsByTagName("rect") if r.getAttribute("fill") == "none"]) == 4
    titles = [t.firstChild.data for t in doc.getElementsByTagName("title")]
    assert any("h1" in t for t in titles) and not any("stem=3" in t for t in titles)
    assert f"generator: {GENERATOR}" in svg
    assert svg == adams_chart(groups, [((0, 4), (1, 1))], {(1, 1): ["h1"]}, "test")


def test_arrows_need_both_ends():
    groups = {(0, 4): G(1)}
    svg = adams_chart(groups, [((0, 4), (3, 3))])
    assert 'stroke="#c33"' not in svg
