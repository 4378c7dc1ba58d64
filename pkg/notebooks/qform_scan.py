# %% [markdown]
# # Quadratic forms over small levels
#
# For each even minimal character of small modulus, build the form in the
# cosine coefficients for both parities, check it is positive semidefinite,
# minimize under sum(x) = 1 and look at h on the imaginary segment.

# %%
import numpy as np

from twistmin.chars import DirichletChar, enumerate_chars, is_minimal
from twistmin.trace import check_h_criterion, minimize_constrained, qform

delta, M = 0.375, 8

# %%
def even_minimal(N):
    if N == 1:
        return [DirichletChar.trivial(1)]
    return [c for c in enumerate_chars(N) if is_minimal(c) and c.is_even()]


rows = []
for N in (1, 5, 7, 8, 9, 11, 12, 13):
    for chi in even_minimal(N):
        for eps in (0, 1):
            A = qform(chi, eps, delta, M)
            mz = minimize_constrained(A)
            crit = check_h_criterion(mz.x, delta)
            rows.append((chi.to_literal(), eps, A.min_eig(), mz.Q, mz.Q_uniform, crit.min_value))

# %%
print(f"{'chi':10s} eps   min eig      Q*         Q unif     min h(iy)")
for lit, eps, lam, q, qu, hm in rows:
    print(f"{lit:10s} {eps}   {lam: .3e}  {q: .4e}  {qu: .4e}  {hm:.4f}")

# %% [markdown]
# Minimizer at level one, odd parity.

# %%
A = qform(DirichletChar.trivial(1), 1, delta, M)
mz = minimize_constrained(A)
print(np.round(mz.x, 5), mz.x.sum(), mz.kkt_residual)

# %% [markdown]
# Subtracting a count at h(0) moves every entry by the same amount.

# %%
chi = DirichletChar.from_literal("5:2")
A0 = qform(chi, 0, delta, 4)
A2 = qform(chi, 0, delta, 4, n_artin=2)
print(np.unique(np.round(A0.A - A2.A, 12)), 2 / A0.m_chi)
