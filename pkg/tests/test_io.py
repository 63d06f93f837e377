import csv
import io
import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kron_trace.errors import SchemaError
from kron_trace.generators import gen_half_strip, gen_sg_slit
from kron_trace.io import (
    cover_to_dict,
    dumps,
    geometry_from_dict,
    geometry_to_dict,
    network_from_dict,
    network_to_dict,
    report_to_csv,
    report_to_dict,
    trace_from_dict,
    trace_to_dict,
    write_atomic,
)
from kron_trace.report import Record, Report
from kron_trace.trace import schur_trace
from kron_trace.whitney import build_cover


def test_network_round_trip():
    net = gen_half_strip(8, 4, "absorbing").net
    back = network_from_dict(json.loads(dumps(network_to_dict(net))))
    assert back.ids == net.ids
    np.testing.assert_array_equal(back.cond, net.cond)
    np.testing.assert_array_equal(back.ghost_c, net.ghost_c)
    np.testing.assert_array_equal(back.boundary, net.boundary)


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["vertices"][0].update(weight=1.0),
    lambda d: d["edges"][0].pop("c"),
    lambda d: d["vertices"][0].update(boundary="yes"),
])
def test_schema_errors(mutate):
    doc = network_to_dict(gen_sg_slit(1).net)
    mutate(doc)
    with pytest.raises(SchemaError):
        network_from_dict(doc)


def test_geometry_round_trip():
    d = gen_sg_slit(3)
    geom, sigma = geometry_from_dict(d.net, json.loads(dumps(geometry_to_dict(d.net, d.geom, d.sigma))))
    np.testing.assert_array_equal(geom.rho_b, d.geom.rho_b)
    np.testing.assert_array_equal(geom.d_D, d.geom.d_D)
    np.testing.assert_array_equal(sigma, d.sigma)
    assert geom.labels == d.geom.labels


def test_trace_round_trip_is_bit_exact():
    tf = schur_trace(gen_half_strip(8, 4, "absorbing").net, measure=np.full(9, 1 / 9))
    back = trace_from_dict(json.loads(dumps(trace_to_dict(tf))))
    np.testing.assert_array_equal(back.c_hat, tf.c_hat)
    np.testing.assert_array_equal(back.kappa, tf.kappa)
    np.testing.assert_array_equal(back.measure, tf.measure)


def test_cover_document():
    d = gen_sg_slit(4)
    doc = cover_to_dict(d.net, build_cover(d.geom))
    assert set(doc) == {"epsilon", "centers", "floor"}
    assert set(doc["centers"][0]) == {"id", "r", "patch"}


def test_report_outputs():
    rep = Report("demo", [Record('a,"b"', 1.0, 0.1, 3.0), Record("c", 2.0, 1.0, 1.0)])
    doc = report_to_dict(rep)
    assert set(doc) == {"name", "samples", "min", "max", "ratio", "fit", "pass"}
    rows = list(csv.reader(io.StringIO(report_to_csv(rep))))
    assert rows[0] == ["name", "location", "scale", "lhs", "rhs", "ratio"]
    assert rows[1][1] == 'a,"b"'
    assert rows[1][3] == "0.10000000000000001"


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip(x):
    assert json.loads(dumps([x, x]))[0] == x


def test_atomic_write_leaves_no_partial_files(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    write_atomic(target, "old")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        write_atomic(target, "new")
    assert target.read_text() == "old"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.json"]
