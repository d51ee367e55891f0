"""Macdonald polynomials, the Fock representation and relations of quantum toroidal gl(1).

Run:  python3 demos/macdonald_and_toroidal.py
"""
from capvertex.exactalg import Env, RatFun
from capvertex.fock import arbitrate_convention, build_macdonald
from capvertex.graded import partitions
from capvertex.toroidal import Generators, collinear_relation, triangle_closure

env = Env.symbolic(1)
print("conventions passing the eigencheck:", arbitrate_convention(3, env))

basis = build_macdonald(2, "plain-inv", env)
for nu in partitions(2):
    coords = ", ".join(RatFun(c).to_text() for c in basis.column(nu))
    print(f"P{list(nu)} in the power sums {[list(m) for m in partitions(2)]}: {coords}")

# Generators at a random exact specialization, truncated at degree 6 and checked up to degree 3.
gens = Generators(6, Env.specialized(1, 1))
for a, b in [((1, 1), (-1, -1)), ((2, 1), (-2, -1)), ((1, 0), (2, 0))]:
    ok, _ = collinear_relation(gens, a, b, 3)
    print(f"[e{a}, e{b}] relation holds:", ok)
print("triangle closure against the diagonal e(0,1):", triangle_closure(gens, 3)[0])
