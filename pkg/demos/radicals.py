"""Degree-one L-real radicals of the six worked pencils, with the reduced
pencil and the affine hull of the scalar solution set."""

import numpy as np

from freera import LinearPencil, format_poly, lreal_radical_zero


def E(i, j, n):
    M = np.zeros((n, n))
    M[i, j] = 1.0
    return M


PENCILS = {
    "ball in one variable": LinearPencil(np.eye(2), [E(0, 1, 2)]),
    "x1 forced to zero": LinearPencil(np.diag([1.0, 0.0]), [E(0, 1, 2)]),
    "infeasible 2x2": LinearPencil(np.array([[0.0, 1.0], [1.0, 0.0]]), [E(0, 0, 2)]),
    "infeasible 3x3": LinearPencil(E(1, 2, 3) + E(2, 1, 3), [E(0, 1, 3) + E(2, 2, 3), E(1, 1, 3)]),
    "flat ball in x1, x2": LinearPencil(np.diag([1.0, 1.0, 1.0, 0.0]), [E(0, 1, 4), E(0, 2, 4), E(0, 3, 4)]),
    "thin pencil, x2 forced to zero": LinearPencil(np.diag([1.0, 0.0, 0.0]), [E(1, 1, 3), E(0, 0, 3) + E(1, 2, 3)]),
}

if __name__ == "__main__":
    for name, L in PENCILS.items():
        res = lreal_radical_zero(L)
        gens = ", ".join(format_poly(p) for p in res.generators) or "none"
        print(f"{name}: feasible={res.feasible}  radical generators: {gens}")
        print(f"    reduced pencil size {res.reduced_pencil.size}; hull rows {res.hull.tolist()}")
