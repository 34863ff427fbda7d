"""Why density 1 is the threshold: counting, Gram spectra and the class verdicts side by side."""
import numpy as np

from ddid.density import (CRITICAL_SEPARATION, ClassDescriptor, SquareLattice, classify_class, density_estimate,
                          hexagonal_lattice, lattice_points)
from ddid.identify import riesz_ladder

R_LIST = [2, 4, 8, 16, 26, 27, 28, 29, 30]


def main():
    sets = {
        "square lattice, mesh 1": lattice_points(SquareLattice(1.0), (0, 40, 0, 40)),
        "square lattice, mesh 1.2": lattice_points(SquareLattice(1.2), (0, 48, 0, 48)),
        f"hexagonal lattice, spacing {CRITICAL_SEPARATION:.4f}": hexagonal_lattice(CRITICAL_SEPARATION,
                                                                                   (0, 40, 0, 40)),
    }
    print("Largest count in a sliding R x R square, divided by R^2 (max over R >= 26):")
    for name, S in sets.items():
        print(f"  {name:40s} {density_estimate([S], R_LIST).tail_max:.4f}")

    # the lower frame bound of growing lattice blocks; it collapses only at mesh 1
    print("\nSmallest Gram eigenvalue of k x k lattice blocks (Gaussian window):")
    print("   k   mesh 1.0   mesh 1.2")
    for k, a, b in zip((3, 5, 7, 9, 11), riesz_ladder(1.0), riesz_ladder(1.2)):
        print(f"  {k:2d}   {a.lower:8.4f}   {b.lower:8.4f}")

    print("\nVerdicts:")
    cases = [("separated, s = 1.6", ClassDescriptor("separated", s=1.6)),
             ("separated, s = 1.5", ClassDescriptor("separated", s=1.5)),
             ("rayleigh, theta = 0.4", ClassDescriptor("rayleigh", s=0.5, theta=0.4, R=10)),
             ("rayleigh, theta = 0.6", ClassDescriptor("rayleigh", s=0.5, theta=0.6, R=10)),
             ("lattice, A = I", ClassDescriptor("lattice", A=np.eye(2))),
             ("lattice, A = 1.1 I", ClassDescriptor("lattice", A=1.1 * np.eye(2)))]
    for label, d in cases:
        c = classify_class(d)
        print(f"  {label:22s} -> {c.verdict.value} {c.note}".rstrip())


if __name__ == "__main__":
    main()
