import math
import xml.etree.ElementTree as ET

import pytest

from semismooth_nlse.svgplot import loglog_svg

NS = {"s": "http://www.w3.org/2000/svg"}


def to_data(root, px, py):
    """Invert the pixel mapping recorded on the root element."""
    a = {k: float(v) for k, v in root.attrib.items() if k.startswith("data-")}
    lx = a["data-log-x0"] + (px - a["data-plot-left"]) / a["data-plot-width"] * (a["data-log-x1"] - a["data-log-x0"])
    ly = a["data-log-y1"] - (py - a["data-plot-top"]) / a["data-plot-height"] * (a["data-log-y1"] - a["data-log-y0"])
    return lx, ly


def points(el):
    return [tuple(map(float, p.split(","))) for p in el.get("points").split()]


class TestLogLogSvg:
    def setup_method(self):
        self.taus = [0.1 / 2**k for k in range(5)]
        # Synthetic table with error exactly C tau^1.5
        self.errs = [0.3 * t**1.5 for t in self.taus]

    @pytest.mark.parametrize("order", [0.5, 1.0, 1.5, 2.0])
    def test_guide_slope_matches_requested_order(self, order):
        root = ET.fromstring(loglog_svg({"l2": (self.taus, self.errs)}, guides=[order]))
        guide = root.find("s:polyline[@class='guide']", NS)
        assert float(guide.get("data-order")) == order
        (x0, y0), (x1, y1) = (to_data(root, *p) for p in points(guide))
        assert math.isclose((y1 - y0) / (x1 - x0), order, rel_tol=1e-6)

    def test_series_slope_survives_rendering(self):
        root = ET.fromstring(loglog_svg({"l2": (self.taus, self.errs)}))
        pts = [to_data(root, *p) for p in points(root.find("s:polyline[@class='series']", NS))]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            assert math.isclose((y1 - y0) / (x1 - x0), 1.5, rel_tol=1e-3)
        assert math.isclose(10 ** pts[0][0], self.taus[0], rel_tol=1e-3)

    def test_labels_are_escaped_and_markers_drawn(self):
        text = loglog_svg({"a<b": (self.taus, self.errs)}, title="x & y")
        root = ET.fromstring(text)
        assert root.find("s:polyline", NS).get("data-label") == "a<b"
        assert len(root.findall("s:circle", NS)) == len(self.taus)

    def test_non_positive_points_are_skipped(self):
        root = ET.fromstring(loglog_svg({"e": ([1, 0.5, 0.25], [1e-3, 0.0, 1e-4])}))
        assert len(root.findall("s:circle", NS)) == 2
        with pytest.raises(ValueError):
            loglog_svg({"e": ([1.0], [0.0])})
