"""Bare descendent vertex of the Hilbert scheme of points by localization.

Run:  python3 demos/bare_vertex.py
"""
from capvertex.combinat import DegreeData, MultiPartition, enumerate_degree_data
from capvertex.locvertex import Descendent, bare_vertex, s_character, tvir_character

# The fixed point [1] of Hilb^1(C^2): its tangent character and first virtual tangent space.
lam = MultiPartition([[1]])
print("tangent character at [1]:", s_character(lam, DegreeData.zero(lam)).to_text())
d1 = enumerate_degree_data(lam, 1)[0]
print("virtual tangent space at degree 1:", tvir_character(lam, d1).to_text())

# Degree data on [2,1] are reverse plane partitions.
for d in enumerate_degree_data(MultiPartition([[2, 1]]), 2):
    print("degree datum on [2,1] of total 2:", d)

# The vertex with the descendent p[1], symbolic in all equivariant parameters.
series = bare_vertex(lam, Descendent.p(1), 2)
for k, c in enumerate(series.coeffs):
    print(f"z^{k}:", c.to_text())
