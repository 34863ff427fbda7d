"""Regenerate the bundled fixtures and experiment configs under src/ddid/data."""
import os
import platform
import tempfile

import numpy as np

from ddid import cli
from ddid import io as dio
from ddid.density import CRITICAL_SEPARATION, SquareLattice, hexagonal_lattice, lattice_points
from ddid.measures import DiscreteMeasure

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "ddid", "data")
R_LIST = [2, 4, 8, 16, 26, 27, 28, 29, 30]


def write(rel, obj):
    dio.atomic_write(os.path.join(DATA, rel), dio.json_text(obj))


def fixtures():
    write("hex_lattice.json", dio.support_to_obj(hexagonal_lattice(CRITICAL_SEPARATION, (0, 40, 0, 40))))
    write("omega_1.json", dio.support_to_obj(lattice_points(SquareLattice(1.0), (0, 40, 0, 40))))
    write("omega_1p2.json", dio.support_to_obj(lattice_points(SquareLattice(1.2), (0, 48, 0, 48))))
    mu1 = DiscreteMeasure([0, 2 + 0.3j, -1.5 + 2j], [1.0 + 0.5j, -0.7 + 1.2j, 0.9 - 0.4j])
    mu2 = DiscreteMeasure([0.4 + 1.1j, -2 - 1j, 1.8 - 1.9j], [-1.1 + 0.2j, 0.6 + 0.8j, 1.3 + 0.0j])
    write("interpolation_6.json", {"mu1": dio.measure_to_obj(mu1), "mu2": dio.measure_to_obj(mu2)})
    rec = DiscreteMeasure([-2.5 + 0.5j, 0.2 - 2.1j, 1.9 + 1.4j, -0.6 + 2.6j, 2.8 - 1.2j],
                          [1.2 + 0.3j, -0.8 + 0.9j, 0.7 - 1.1j, 1.5 + 0.0j, -0.6 - 0.6j])
    write("recovery_5.json", dio.measure_to_obj(rec))
    rng = np.random.default_rng(3)
    m = np.arange(-3, 4)
    z = (1.25 * (m[:, None] + 1j * m[None, :])).ravel()
    z = z + 0.15 * (rng.uniform(-1, 1, z.size) + 1j * rng.uniform(-1, 1, z.size))
    z[np.argmin(np.abs(z))] = 0
    write("perturbed_lattice_49.json", {"atoms": [{"tau": float(v.real), "nu": float(v.imag)}
                                                  for v in np.round(z, 4)]})


def cfg(name, experiment, inputs=None, parameters=None):
    c = {"experiment": experiment}
    if inputs:
        c["inputs"] = inputs
    if parameters:
        c["parameters"] = parameters
    c["output_dir"] = f"ddid-out/{name}"
    write(f"configs/{name}.json", c)


def configs():
    cfg("density_hex", "density", {"sets": ["fixture:hex_lattice"]},
        {"R_list": R_LIST, "classify": {"kind": "separated", "s": CRITICAL_SEPARATION}})
    cfg("density_omega_1", "density", {"sets": ["fixture:omega_1"]}, {"R_list": R_LIST})
    cfg("density_omega_1p2", "density", {"sets": ["fixture:omega_1p2"]}, {"R_list": R_LIST})
    cfg("sigma", "sigma", None, {"gamma": 1.0, "half_width": 5.0, "step": 0.1})
    cfg("gtilde", "gtilde", {"zeros": "fixture:perturbed_lattice_49"},
        {"gamma": 1.0, "theta": 0.9, "R": 5.0, "half_width": 4.0, "step": 0.1})
    cfg("interpolant", "interpolant", {"instance": "fixture:interpolation_6"})
    cfg("gram", "gram", {"support": {"square": {"gamma": 1.2, "box": [-4.8, 4.8, -4.8, 4.8]}}})
    cfg("riesz_ladder_omega_1", "riesz_ladder", None, {"gamma": 1.0, "sizes": [3, 5, 7, 9, 11]})
    cfg("riesz_ladder_omega_1p2", "riesz_ladder", None, {"gamma": 1.2, "sizes": [3, 5, 7, 9, 11]})
    cfg("constants", "constants", None, {"trials": 200, "n_atoms": 4, "separation": 2.0, "box": 4.0, "seed": 0})
    cfg("recover", "recover", {"measure": "fixture:recovery_5"},
        {"noise_level": 0.0, "seed": 0, "epsilon": 1e-3})
    cfg("sweep", "sweep", {"measure": "fixture:recovery_5"},
        {"noise_levels": [1e-4, 1e-3, 1e-2], "seeds": [0, 1, 2]})


def platform_tag():
    return {"machine": platform.machine(), "system": platform.system(), "numpy": np.__version__}


def checksums():
    """Expected sha256 of every output file of every bundled config, on this platform."""
    out = {}
    cdir = os.path.join(DATA, "configs")
    for name in sorted(os.listdir(cdir)):
        with tempfile.TemporaryDirectory() as tmp:
            manifest, _ = cli.run(os.path.join(cdir, name), env_dir=tmp)
        out[name[:-5]] = {f["path"]: f["sha256"] for f in manifest["files"]}
    write("checksums.json", {"platform": platform_tag(), "configs": out})


if __name__ == "__main__":
    os.makedirs(os.path.join(DATA, "configs"), exist_ok=True)
    fixtures()
    configs()
    checksums()
