"""Build the entire function that takes prescribed values on two small supports.

The construction perturbs the zeros of the Weierstrass sigma function of a
square lattice, then sums shifted copies, one per node.
"""
import numpy as np

from ddid.bargmann import growth_certificate, gtilde, interpolant, model_from_points, sigma
from ddid.timefreq import TFGrid


def main():
    z = np.array([0.3 + 0.2j, 1.7 - 2.2j, 2.0 + 0j])
    for zi, v in zip(z, sigma(1.0, z)):
        print(f"sigma_1({zi:.1f}) = {v:.6g}")

    rng = np.random.default_rng(0)
    m = np.arange(-3, 4)
    zeros = (1.25 * (m[:, None] + 1j * m[None, :])).ravel()
    zeros = zeros + 0.15 * (rng.uniform(-1, 1, zeros.size) + 1j * rng.uniform(-1, 1, zeros.size))
    zeros[np.argmin(np.abs(zeros))] = 0
    model = model_from_points(zeros, gamma=1.0, theta=0.9, R=5.0)
    c, C = growth_certificate(model, TFGrid.square(4, 0.1))
    print(f"\n49-zero model: g~(0) = {gtilde(model, np.zeros(1))[0].real}, "
          f"max |g~| on zeros = {np.abs(gtilde(model, zeros[zeros != 0])).max()}")
    print(f"growth fit: |g~(z)| exp(-pi|z|^2/2) (rho ^ 1) <= {C:.2f} exp({c:.3f} |z| log|z|)")

    L1 = np.array([0, 2 + 0.3j, -1.5 + 2j])
    L2 = np.array([0.4 + 1.1j, -2 - 1j, 1.8 - 1.9j])
    beta = rng.normal(size=6) + 1j * rng.normal(size=6)
    F = interpolant(L1, L2, beta)
    got = F(np.conj(F.nodes)) * np.exp(-np.pi * np.abs(F.nodes) ** 2 / 2)
    print(f"\ninterpolant with gamma={F.gamma:.4f}, theta={F.theta}:")
    for lam, b, v in zip(F.nodes, beta, got):
        print(f"  node {lam:.2f}: wanted {b:.4f}, got {v:.4f}")


if __name__ == "__main__":
    main()
