# coding: utf-8

# # Harmonic (1,0)-forms on a non-integrable torus
#
# On T^4 with the almost complex structure J_q, q = exp(sin(2 pi (y1 + y2))),
# only one harmonic (1,0)-form survives, while b^1 = 4. The computation is
# pseudospectral in the active plane and block diagonal in the passive
# Fourier modes. Runs in about a minute.

# In[1]:

import numpy as np

from hlc_lab.torus_spectral import (QSpec, TorusModel, delta_mubar_norm, harmonic_dim, lambda1,
                                    mubar_zero_census)

model = TorusModel(1, 1, QSpec.exp_sin())
rep = harmonic_dim((1, 0), model, 16)
print(f"h10 = {rep.dim} (determinate: {rep.determinate}), b1 = {model.b1}")
print(f"gap ratios: {rep.gap_ratio:.3g} at N=16, {rep.refined_gap_ratio:.3g} at N=32")


# Only the zero Fourier block carries a kernel.

# In[2]:

for b in rep.blocks:
    if b.N == rep.N:
        print(f"{str(b.modes):10s} dim {b.dim}  sigma_min {b.singular_values[0]:.3e}  gap {b.gap_ratio:.3g}")


# The spectral gap lambda_1 stays below 4 ||Delta_mubar||, as it must since
# b^1 != 2 h^{1,0}.

# In[3]:

lam = lambda1(model, 16)
norm = delta_mubar_norm(model, 16)
print(f"lambda_1 = {lam.value:.10f}, 4 ||Delta_mubar|| = {4 * norm:.10f} (4 pi^2 = {4 * np.pi ** 2:.10f})")


# The Nijenhuis piece mubar has rank 1 away from the lines cos(2 pi (y1 + y2)) = 0.

# In[4]:

for N in (8, 16, 32, 64):
    print(N, mubar_zero_census(model, N))
