# %% [markdown]
# # Trace walkthrough
#
# Build a test pair, evaluate the geometric side for a few minimal
# characters and compare it with the sieved full side.

# %%
import numpy as np

from twistmin.chars import DirichletChar
from twistmin.testfun import Transforms, build_test_pair, eval_h
from twistmin.trace import geom_full_sieved, geom_min

# %%
delta, M = 0.375, 8
pair = build_test_pair(delta, [1 / M] * M)
tf = Transforms(pair)
print("support X =", pair.X)
print("h(0) =", eval_h(pair, 0.0), " int g =", pair.g.integral())
print("h(i/2) =", tf.h_half)

# %% [markdown]
# h is real and nonnegative on the real line and on [-i/2, i/2].

# %%
r = np.linspace(0, 40, 9)
print(np.round(eval_h(pair, r), 8))
y = np.linspace(0, 0.5, 6)
print(np.round(eval_h(pair, 1j * y), 6))

# %% [markdown]
# ## Level one, term by term

# %%
one = DirichletChar.trivial(1)
for n in (1, -1):
    b = geom_min(one, n, tf)
    print(f"n = {n:+d}")
    for k, v in b.terms.items():
        print(f"   {k:18s} {complex(v).real: .12f}")
    print(f"   {'total':18s} {b.total: .12f}")

# %% [markdown]
# The constant term as it would read without the log 2 shift and without
# the eigenvalue 0 correction at n = -1:

# %%
for n in (1, -1):
    a = geom_min(one, n, tf).total
    p = geom_min(one, n, tf, as_printed=True).total
    print(n, a, p, p - a)

# %% [markdown]
# ## Minimal side against the sieved full side

# %%
for lit in ("5:2", "9:0", "13:4", "25:0", "36:1,1", "100:1,5"):
    chi = DirichletChar.from_literal(lit)
    for n in (1, -1):
        a = geom_min(chi, n, tf).total
        b = geom_full_sieved(chi, n, tf).total
        print(f"{lit:8s} n={n:+d}  {a: .10f}  {b: .10f}  diff {abs(a - b):.1e}")
