"""The wall operator E(z), the wKZ solver and the cocycle identity on tensor products of Fock spaces.

Run:  python3 demos/wall_kz.py
"""
from capvertex.exactalg import Env, RatFun
from capvertex.qde import solve_wkz, verify_cocycle
from capvertex.toroidal import E_op, TensorEvaluation, univqkz_check

z = RatFun.var("Z")
env = Env.specialized(2, 3)

# F(a1) x F(a2) truncated at total degree 2.
ev = TensorEvaluation(2, env, env.A[:2])
E = E_op(ev, z)
print("E(z) from F(a1) x 1 to 1 x F(a2) at degree 1:", E.block((1, 0), (0, 1))[0, 0].to_text())
print("E solves its difference equation:", univqkz_check(ev, z)[0])
print("recursive wKZ solution equals E:", solve_wkz(ev.identity(), ev, z).equals(E))

# Three factors: Y^(2),(1)(z) Y_12(z hbar^1/2) = Y^(1),(2)(z) Y_23(z hbar^-1/2).
for check in verify_cocycle(2, env, z).checks:
    print(check.name, "->", check.status)
