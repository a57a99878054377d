"""Descartes quadruples and the Apollonian group, exactly.

Four mutually tangent circles have curvatures on the cone of the Descartes
form.  Swapping the circle in slot i for the other circle tangent to the
remaining three is a linear reflection; the four reflections generate the
group whose orbit of the root quadruple carries every curvature.
"""

from apollonian import core

root = (-11, 21, 24, 28)
print("F(root) =", core.descartes_form(root))

v = root
for i in (1, 4, 3, 4):
    v = core.apply_reflection(i, v)
    print(f"after S{i}: {v}   F = {core.descartes_form(v)}")

back, word = core.reduce_to_root(v)
print("reduces back to", back, "undoing", word)

# the double swap S4 S3 is a unipotent: its powers sweep a tangency pencil
for n in range(4):
    print(f"C1^{n} . root =", core.mat_vec(core.unipotent_c1_power(n), root))

# the 2x2 shadow: the element with bottom row w_{x,y} evaluates curvatures
x, y = 1, 1
print("w_(1,1) =", core.w_vector(x, y), " (the bottom row of C1)")
print("xi(1,1) bottom row:", core.xi(x, y)[3])

# the exact spin cover: the three Gaussian 2x2 generators land on the
# standard generating products of the even subgroup
for g in core.SPIN_PREIMAGE_GENERATORS:
    m = core.iota(g)
    print("iota(generator) is the word", core.gamma_word(m))
