# coding: utf-8

# # Hard Lefschetz on a 4-dimensional nilmanifold
#
# The nilmanifold with d e3 = -e12 and d e4 = -e13 carries the symplectic form
# omega = e14 + e23. Its cochain complex is finite dimensional, so every
# question below is settled by exact rank computations over the rationals.

# In[1]:

from hlc_lab import exact
from hlc_lab.exact import QQ
from hlc_lab.lefschetz_complex import (betti_vector, check_dd_lambda, check_equivalences, check_guillemin,
                                       check_hlc)
from hlc_lab.nilmanifold_ce import build_ce, builtin_example_nonhlc, validate_symplectic

spec, omega = builtin_example_nonhlc()
report, c = validate_symplectic(build_ce(spec), omega)
print("symplectic:", report.ok)
print("Betti numbers:", betti_vector(c))


# Multiplication by omega should map H^1 onto H^3. Here it is the zero map:
# omega ^ e1 is exact.

# In[2]:

hlc = check_hlc(c)
for e in hlc.entries:
    print(f"k={e.k}: rank {e.rank}, b(n-k)={e.source_betti}, b(n+k)={e.target_betti}, iso={e.isomorphism}")
print("failing degrees:", hlc.failing, "witness:", hlc.entries[1].witness)

labels = [c.label(1, j) for j in range(c.dims[1])]
e1 = exact.column([QQ(1) if lab == "e1" else QQ(0) for lab in labels], QQ)
labels2 = [c.label(2, j) for j in range(c.dims[2])]
e42 = exact.column([QQ(-1) if lab == "e2^e4" else QQ(0) for lab in labels2], QQ)
print("omega ^ e1 == d(e4 ^ e2):", c.L[1] * e1 == c.d[2] * e42)


# The dd^Lambda-lemma fails as well, and the four equivalent conditions
# agree on the verdict.

# In[3]:

ddl = check_dd_lambda(c)
print("dd^Lambda-lemma:", ddl.holds, ddl.first_failure())
print("equivalences:", check_equivalences(c).as_dict())


# On cochains the Lefschetz property survives on every natural subspace;
# the failure is only visible in cohomology.

# In[4]:

print("cochain-level Lefschetz:", check_guillemin(c)["all"])
