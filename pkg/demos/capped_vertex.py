"""Capping operator from the quantum difference equation, and rationality of the capped vertex.

Run:  python3 demos/capped_vertex.py
"""
from capvertex.exactalg import Env
from capvertex.locvertex import Descendent
from capvertex.qde import capped_vertex, classical_report, qde_report, rationality_check, truncated_exp

env = Env.specialized(3, 1)

# Psi(z q) O(1) = M(z) Psi(z), solved order by order with Psi(0) = 1, then checked independently.
print(qde_report(2, 4, env).checks[0])

# With tau = 1 the capped vertex is classical: every positive power of z cancels.
print(classical_report(2, 4, env).checks[0])

# With a nontrivial descendent the capped vertex is a rational function of z.
parts, out = capped_vertex(2, Descendent.p(1), 12, env)
for nu, series in zip(parts, out):
    rep = rationality_check(series, 8, name=f"capped {list(nu)}")
    fit = rep.result[f"capped {list(nu)}"]
    print(f"capped vertex at {list(nu)}: Pade ({fit['m']},{fit['n']}),",
          f"predicts {fit['predicted_orders']} further orders exactly")

# A truncated exponential has no such fit.
print("truncated exp is rational:", rationality_check(truncated_exp(8)).passed)
