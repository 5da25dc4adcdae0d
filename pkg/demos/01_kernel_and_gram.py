"""Kernel functions and the Gram matrix for the two-state example system.

For A = [[0, 1], [1, 0]], b = e1, c = e2 the impulse response is sinh, so
every Gram entry has a closed form. This script compares it with the
quadrature path.

    python demos/01_kernel_and_gram.py
"""
import time

import numpy as np

from ctspline import check_minimal, gram_matrix, kernel_g, matrix_exponential
from ctspline.experiment import paper_system, paper_times

model = paper_system()
print("minimal:", check_minimal(model))

E = matrix_exponential(model.A, 1.0)
print("exp(A) =\n", E)
print("cosh 1, sinh 1 =", np.cosh(1.0), np.sinh(1.0))

# g_7 evaluated across its support; zero from t_7 = 1.6 onwards
t = np.linspace(0, 2.5, 11)
print("g_7(t):", np.round(kernel_g(model, 1.6, t), 6))

times = paper_times()
start = time.perf_counter()
G = gram_matrix(model, times).entries
print(f"Gram {G.shape} in {time.perf_counter() - start:.2f}s")

ti, tj = np.meshgrid(times, times, indexing="ij")
m = np.minimum(ti, tj)
exact = 0.5 * ((np.sinh(ti + tj) - np.sinh(ti + tj - 2 * m)) / 2 - m * np.cosh(ti - tj))
print("max |G - closed form| =", np.abs(G - exact).max())
print("G_11 =", G[0, 0])

w = np.linalg.eigvalsh(G)
print(f"eigenvalues span {w.min():.3e} .. {w.max():.3e} (condition {w.max() / w.min():.2e})")
