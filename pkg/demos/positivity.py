"""Positivity on the free unit ball: a certificate for 2 - x1* x1 and a
matrix witness for x1 + x1* - 1.5."""

from freera import LinearPencil, MatPoly, check_positive, verify_certificate
import numpy as np

ball = LinearPencil(np.eye(2), [np.array([[0.0, 1.0], [0.0, 0.0]])])

p = MatPoly(1, 1, 1, {(0, 0, ()): 2.0, (0, 0, (-1, 1)): -1.0})
cert = check_positive(p, ball)
report = verify_certificate(cert, p, ball)
print(f"2 - x1* x1: certificate with {len(cert.sos_terms)} square terms, accepted: {report.accepted}, residual {report.expansion_residual:.1e}")

q = MatPoly(1, 1, 1, {(0, 0, ()): -1.5, (0, 0, (1,)): 1.0, (0, 0, (-1,)): 1.0})
res = check_positive(q, ball)
if hasattr(res, "X"):
    print(f"x1 + x1* - 1.5: witness of size {res.n}, v* q(X) v = {res.value:.4f}, min eig L(X) = {res.min_eig:.2e}")
else:
    print("x1 + x1* - 1.5: certificate found")
