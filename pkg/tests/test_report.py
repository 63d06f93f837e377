import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kron_trace.errors import DegenerateFit
from kron_trace.report import Record, Report, exponent_fit, level_spread


def test_exact_power_law():
    s = np.array([1.0, 2.0, 4.0, 8.0])
    fit = exponent_fit(s, 3.0 * s ** -1.7)
    assert fit.exponent == pytest.approx(-1.7) and fit.constant == pytest.approx(3.0)
    assert fit.residual == pytest.approx(0, abs=1e-12)


def test_noisy_power_law():
    rng = np.random.default_rng(11)
    s = np.geomspace(1, 1e3, 40)
    v = s ** 0.7 * rng.uniform(0.9, 1.1, s.size)
    assert exponent_fit(s, v).exponent == pytest.approx(0.7, abs=0.05)


def test_degenerate_fits():
    with pytest.raises(DegenerateFit):
        exponent_fit([1.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateFit):
        exponent_fit([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])


def test_report_thresholds():
    recs = [Record("a", 1.0, 2.0, 1.0), Record("b", 2.0, 1.0, 1.0)]
    assert Report("r", recs, {"max_ratio": 2.0}).passed
    assert not Report("r", recs, {"max_ratio": 1.5}).passed
    assert not Report("r", recs, {"max": 1.5}).passed
    assert Report("r", recs, {"min": 1.0}).passed
    assert not Report("r", []).passed
    s = Report("r", recs).summary()
    assert (s["min"], s["max"], s["ratio"]) == (1.0, 2.0, 2.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=30))
def test_summary_recomputable(vals):
    recs = [Record(str(k), 1.0, v, 1.0) for k, v in enumerate(vals)]
    rep = Report("r", recs)
    assert rep.min == min(vals) and rep.max == max(vals)
    assert rep.spread == pytest.approx(max(vals) / min(vals))
    assert level_spread(vals) == pytest.approx(rep.spread)
