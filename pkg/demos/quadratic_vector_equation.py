"""
The quadratic vector equation -1/m = z*1 + a + S m on the upper half-plane.

The same contraction machinery that powers the covariance fixed point solves
this system.  With n = 1, a = 0, S = 1 the solution is the Stieltjes
transform of the semicircle law; we print its density recovered from
Im(m)/pi and compare against the closed form sqrt(4 - x^2)/(2 pi).

Run: python demos/quadratic_vector_equation.py
"""

import numpy as np

from covspectra import QveProblem, qve_residual, solve_qve

print("semicircle density from the scalar equation:")
print("   x     Im(m)/pi   closed form")
for x in np.linspace(-1.8, 1.8, 7):
    prob = QveProblem(z=complex(x, 1e-3), a=np.zeros(1), S=np.ones((1, 1)))
    m = solve_qve(prob)
    exact = np.sqrt(max(4.0 - x * x, 0.0)) / (2 * np.pi)
    print(f"  {x:5.2f}   {m[0].imag / np.pi:8.5f}   {exact:8.5f}")

# a coupled system: banded variance profile
rng = np.random.Generator(np.random.Philox(key=11))
k = 8
S = np.exp(-np.abs(np.subtract.outer(np.arange(k), np.arange(k))) / 2.0)
prob = QveProblem(z=0.5 + 0.05j, a=rng.uniform(-0.5, 0.5, k), S=S)
m = solve_qve(prob)
print(f"\nbanded system, n={k}: residual = {qve_residual(prob, m):.2e}, "
      f"min Im(m) = {m.imag.min():.4f}")
