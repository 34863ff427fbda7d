import json
import math

import numpy as np
import pytest

from ddid import io as dio
from ddid.density import density_estimate
from ddid.measures import DiscreteMeasure, SupportSet
from ddid.timefreq import GaborExpansion, SampledSignal


def test_measure_round_trip():
    mu = DiscreteMeasure([0.1 + 0.2j, -3 + 1e-17j], [1 - 2j, 0.3 + 0j])
    back = dio.measure_from_obj(json.loads(dio.json_text(dio.measure_to_obj(mu))))
    assert back == mu


def test_support_and_signal_round_trips():
    S = SupportSet([0, 1.5 - 2j])
    assert dio.support_from_obj(dio.support_to_obj(S)) == S
    x = GaborExpansion([1, 2j], [0, 1 + 1j])
    y = dio.signal_from_obj(dio.signal_to_obj(x))
    assert np.array_equal(y.coeffs, x.coeffs) and np.array_equal(y.locs, x.locs)
    s = SampledSignal(-1.0, 0.5, np.array([1, 2j, 3]))
    t = dio.signal_from_obj(dio.signal_to_obj(s))
    assert t.t0 == -1 and t.dt == 0.5 and np.array_equal(t.samples, s.samples)


def test_nonfinite_rejected_with_path():
    with pytest.raises(dio.FormatError, match=r"\$\.atoms\[1\]\.tau"):
        dio.loads('{"atoms": [{"tau": 0, "nu": 0}, {"tau": NaN, "nu": 0}]}')
    assert dio.find_nonfinite({"a": [1, {"b": math.inf}]}) == "$.a[1].b"
    with pytest.raises(ValueError):
        dio.json_text({"x": math.nan})


def test_missing_fields_reported():
    with pytest.raises(dio.FormatError, match="re"):
        dio.measure_from_obj({"atoms": [{"tau": 0, "nu": 0}]})
    with pytest.raises(dio.FormatError):
        dio.support_from_obj({"points": []})


def test_csv_headers_and_repr_floats():
    curve = density_estimate([[0, 0.5]], [1, 2])
    text = dio.density_csv(curve)
    lines = text.splitlines()
    assert lines[0] == "R,count,ratio"
    assert lines[1] == "1.0,2,2.0"
    assert dio.sweep_csv([(0.1, 1 / 3, 0, 0)]).splitlines()[1] == "0.1,0.3333333333333333,0,0"


def test_fock_csv_handles_zeros():
    text = dio.fock_csv(np.array([0, 1]), np.array([-np.inf + 0j, 0.5 + 4j]))
    rows = text.splitlines()
    assert rows[0] == "re(z),im(z),log_abs,arg"
    assert rows[1].split(",")[2] == "-inf"
    assert float(rows[2].split(",")[3]) == pytest.approx(4 - 2 * math.pi)


def test_atomic_write(tmp_path):
    p = tmp_path / "a" / "b.txt"
    dio.atomic_write(str(p), "x\n")
    assert p.read_text() == "x\n"
    assert not [f for f in p.parent.iterdir() if f.name.startswith(".tmp-")]
