"""Complete positivity of three maps on 2x2 matrices, compared with the
Choi matrix."""

import numpy as np

from freera import LinearStarMap, OperatorSystem, choi_matrix, is_completely_positive


def E(i, j):
    M = np.zeros((2, 2))
    M[i, j] = 1.0
    return M


full = OperatorSystem(2, [E(i, j) for i in range(2) for j in range(2)])
maps = {
    "identity": lambda A: A,
    "transpose": lambda A: A.T,
    "Tr(A) Id - A^T": lambda A: np.trace(A) * np.eye(2) - A.T,
    "Tr(A) Id - A": lambda A: np.trace(A) * np.eye(2) - A,
}

for name, f in maps.items():
    tau = LinearStarMap(full, 2, [f(b) for b in full.basis])
    res = is_completely_positive(tau)
    choi = np.linalg.eigvalsh(choi_matrix(tau))[0]
    print(f"{name}: {res.verdict}  (smallest Choi eigenvalue {choi:+.3f})")
    if res.S is not None:
        print(f"    tau applied to a PSD block matrix has eigenvalue {res.tau_S_min_eig:+.3f}")
