"""Readers and writers for the JSON and CSV file formats."""
import csv
import io as _io
import json
import math
import os
import tempfile

import numpy as np

from .measures import DiscreteMeasure, SupportSet
from .timefreq import GaborExpansion, SampledSignal


class FormatError(ValueError):
    pass


def find_nonfinite(obj, path="$"):
    """Path of the first NaN/Inf number inside a parsed JSON value, or None."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return path
    if isinstance(obj, dict):
        for k, v in obj.items():
            hit = find_nonfinite(v, f"{path}.{k}")
            if hit:
                return hit
    if isinstance(obj, list):
        for i, v in enumerate(obj):
            hit = find_nonfinite(v, f"{path}[{i}]")
            if hit:
                return hit
    return None


def loads(text):
    obj = json.loads(text)
    bad = find_nonfinite(obj)
    if bad:
        raise FormatError(f"non-finite number at {bad}")
    return obj


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _num(d, key, where):
    if key not in d:
        raise FormatError(f"{where}: missing field {key!r}")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"{where}.{key}: expected a number")
    return float(v)


def measure_from_obj(obj):
    atoms = obj.get("atoms") if isinstance(obj, dict) else None
    if not isinstance(atoms, list):
        raise FormatError("measure must be an object with an 'atoms' list")
    z = [complex(_num(a, "tau", f"atoms[{i}]"), _num(a, "nu", f"atoms[{i}]")) for i, a in enumerate(atoms)]
    w = [complex(_num(a, "re", f"atoms[{i}]"), _num(a, "im", f"atoms[{i}]")) for i, a in enumerate(atoms)]
    return DiscreteMeasure(z, w)


def support_from_obj(obj):
    atoms = obj.get("atoms") if isinstance(obj, dict) else None
    if not isinstance(atoms, list):
        raise FormatError("support set must be an object with an 'atoms' list")
    return SupportSet([complex(_num(a, "tau", f"atoms[{i}]"), _num(a, "nu", f"atoms[{i}]"))
                       for i, a in enumerate(atoms)])


def measure_to_obj(mu):
    return {"atoms": [{"tau": float(z.real), "nu": float(z.imag), "re": float(w.real), "im": float(w.imag)}
                      for z, w in zip(mu.locations, mu.weights)]}


def support_to_obj(S):
    return {"atoms": [{"tau": float(z.real), "nu": float(z.imag)} for z in S.z]}


def signal_from_obj(obj):
    if "terms" in obj:
        terms = obj["terms"]
        c = [complex(_num(t, "re", "terms"), _num(t, "im", "terms")) for t in terms]
        z = [complex(_num(t, "tau", "terms"), _num(t, "nu", "terms")) for t in terms]
        return GaborExpansion(c, z)
    re, im = np.asarray(obj["re"], dtype=float), np.asarray(obj["im"], dtype=float)
    if re.shape != im.shape:
        raise FormatError("re and im sample arrays differ in length")
    return SampledSignal(_num(obj, "t0", "signal"), _num(obj, "dt", "signal"), re + 1j * im)


def signal_to_obj(x):
    if isinstance(x, GaborExpansion):
        return {"terms": [{"re": float(c.real), "im": float(c.imag), "tau": float(z.real), "nu": float(z.imag)}
                          for c, z in zip(x.coeffs, x.locs)]}
    return {"t0": x.t0, "dt": x.dt, "re": [float(v) for v in x.samples.real],
            "im": [float(v) for v in x.samples.imag]}


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def density_csv(curve):
    return csv_text(["R", "count", "ratio"], zip(curve.R, curve.count, curve.ratio))


def stft_csv(field):
    nodes = field.grid.nodes.ravel()
    vals = field.values.ravel()
    return csv_text(["tau", "nu", "re", "im"], zip(nodes.real, nodes.imag, vals.real, vals.imag))


def fock_csv(z, logval):
    z = np.asarray(z).ravel()
    logval = np.asarray(logval).ravel()
    arg = np.angle(np.exp(1j * np.where(np.isfinite(logval.real), logval.imag, 0.0)))
    return csv_text(["re(z)", "im(z)", "log_abs", "arg"], zip(z.real, z.imag, logval.real, arg))


def ladder_csv(sizes, bounds):
    return csv_text(["size", "lower", "upper"], [(n, b.lower, b.upper) for n, b in zip(sizes, bounds)])


def sweep_csv(rows):
    return csv_text(["noise", "max_pos_err", "max_wt_err", "spurious_norm"], rows)
