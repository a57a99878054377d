"""Each orbit point carries a shifted binary quadratic form whose coprime
values are curvatures; its discriminant is locked to -4 a^2.
"""

from apollonian import core, forms, orbit

root = (-11, 21, 24, 28)
f = forms.extract_form(core.IDENTITY, root)
print("root form:", f, " discriminant:", f.discriminant())
print("values (f - a)(2x, y):",
      [(x, y, forms.evaluate(f, x, y)) for (x, y) in ((0, 1), (1, 1), (1, -1))])

print("reduced class of (10,7,17):", forms.reduce_class((10, 7, 17)))
print("all primitive classes of disc -484:",
      [(c.A, c.B, c.C) for c in forms.reduced_forms_of_discriminant(11)])

print("classes representing z (fast vs direct search):")
for z in (1, 17, 28, 121):
    print(f"  z={z:4d}: {forms.representing_classes(z, -11)} "
          f"{forms.representing_classes_bruteforce(z, -11)}")

# the (k, l) lift turns the zero set of the form mod d into a square condition
k, l = forms.kl_lift(10, 7, 17, 121)
print("kl_lift for d=121:", (k, l),
      " exhaustive check:", forms.kl_lift_check(10, 7, 17, 121))
print("zero pairs (11, M=100):", forms.zero_pairs_count(10, 7, 17, 11, 100))

fam = orbit.build_family(root, 8, 8)
f0 = forms.ShiftedForm(*(int(v) for v in fam.forms[0]))
print(f"family of {len(fam)} forms; coincidences with the first at M=12:",
      forms.coincidence_count(f0, fam, 12))
print("class multiplicity report:",
      {k: v for k, v in forms.family_class_multiplicity(fam).items()
       if k != "histogram"})
