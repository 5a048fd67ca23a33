import numpy as np
import pytest

from tdce.experiments import DESIGN_POINTS, equalize, fit_to_format
from tdce.fixedpoint import FDE_FORMAT, TDCE_FORMAT
from tdce.taps import ChannelSpec, max_taps


def test_design_points_consistent():
    for spans, dp in DESIGN_POINTS.items():
        assert dp["n"] == max_taps(ChannelSpec().with_spans(spans))
        assert dp["m_tdce"] <= dp["n"] and dp["m_fde"] < dp["n_fft"]
        assert dp["l_knn"] % dp["lp"] == 0 and dp["l_gd"] % dp["lp"] == 0


def test_fit_to_format_scales_only_narrow_formats():
    x = np.exp(1j * np.linspace(0, 6, 100))
    assert np.array_equal(fit_to_format(x, TDCE_FORMAT), x)
    np.testing.assert_allclose(fit_to_format(x, FDE_FORMAT), x * FDE_FORMAT.max_value / 4)
    assert fit_to_format(x, None) is x


def test_unknown_design(small_link):
    with pytest.raises(ValueError):
        equalize(small_link, ChannelSpec(), "mlse", 31)


@pytest.mark.parametrize("design,kw", [("direct", {}), ("tdce-knn", {"n_c": 9}), ("tdce-gd", {"n_c": 6}),
                                       ("fde", {"fft_size": 256})])
def test_all_designs_run(small_link, design, kw):
    res = equalize(small_link, ChannelSpec(), design, 29 if design == "fde" else 31, **kw)
    assert res.ber < 0.02 and res.delay in (14, 15)
    assert (res.filter is not None) == design.startswith("tdce")
