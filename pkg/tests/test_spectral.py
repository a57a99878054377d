import numpy as np
import pytest

from apollonian import core, spectral as sp

ROOT = (-11, 21, 24, 28)


def test_generator_correspondence():
    rep = sp.generator_correspondence_check()
    assert rep["all_match"]
    # the first generator commutes with the shear up to the twist: end result
    # is exactly gamma1
    first = rep["matches"][0]
    assert first["twisted"] == sp.GAMMA1
    # second generator lands on gamma2 up to sign
    second = rep["matches"][1]
    assert second["twisted"] in (sp.GAMMA2, core.m2_neg(sp.GAMMA2))


def test_gamma_constants():
    for g in (sp.GAMMA1, sp.GAMMA2, sp.GAMMA3):
        assert core.m2_det(g) == core.gi(1)
    assert len(sp.S_BAR) == 12


def test_closure_orders(registry):
    assert sp.quotient_order_sl2(1) == 1
    o2 = sp.quotient_order_sl2(2)
    registry.record("spectral.order_q2", o2)
    assert sp.sl2_zi_full_order(2) == 48
    assert 48 % o2 == 0
    for q in (3, 4, 5, 8):
        registry.record(f"spectral.order_q{q}", sp.quotient_order_sl2(q))
    # mod 5 the closure is everything
    assert sp.quotient_order_sl2(5) == 14400


def test_closure_multiplicativity():
    assert sp.quotient_order_sl2(6) == \
        sp.quotient_order_sl2(2) * sp.quotient_order_sl2(3)
    assert sp.quotient_order_sl2(12) == \
        sp.quotient_order_sl2(4) * sp.quotient_order_sl2(3)


def test_h1_characterization():
    # the subgroup generated by gamma1, gamma2 (with signs) is the b = 0 mod 4
    # subgroup, reduced mod q
    import itertools
    for q in (4, 8, 12):
        h1 = sp.closure_sl2(q, sp.H1_GENS)
        got = {tuple(int(x) for x in row) for row in h1.elements}
        want = set()
        for a, b, c, d in itertools.product(range(q), repeat=4):
            if (a * d - b * c) % q == 1 and b % 4 == 0:
                want.add((a, 0, b, 0, c, 0, d, 0))
        assert got == want, q


def test_alternation_length(registry):
    for q in (2, 3, 4, 8):
        k, sizes = sp.alternation_length(q)
        registry.record(f"spectral.alternation_k_{q}", k)
        assert k <= 72
        assert all(b > a for a, b in zip(sizes, sizes[1:]))  # strict growth
    # multiplicativity compatibility on a computed coprime pair
    assert sp.alternation_length(6)[0] == max(
        sp.alternation_length(2)[0], sp.alternation_length(3)[0])
    assert sp.alternation_length(12)[0] == max(
        sp.alternation_length(4)[0], sp.alternation_length(3)[0])


def test_local_identities():
    for m in (8, 10, 12):
        assert sp.local_identity_check(2, m)["all_hold"]
    for m in (1, 2, 3):
        assert sp.local_identity_check(3, m)["all_hold"]
    with pytest.raises(ValueError):
        sp.local_identity_check(2, 5)
    with pytest.raises(ValueError):
        sp.local_identity_check(5, 2)


def test_unipotent_conjugation_identity():
    assert sp.unipotent_conjugation_identity(5, 1, 1)
    assert sp.unipotent_conjugation_identity(7, 2, 3)
    for p, m in ((5, 1), (5, 3), (7, 2)):
        for a in range(1, p):
            assert sp.unipotent_conjugation_identity(p, m, a)
    with pytest.raises(ValueError):
        sp.unipotent_conjugation_identity(3, 1, 1)
    with pytest.raises(ValueError):
        sp.unipotent_conjugation_identity(5, 1, 5)


def test_sum_of_unit_squares():
    assert sp.sum_of_unit_squares(1, 5, 1) == [1]
    for x in range(81):
        units = sp.sum_of_unit_squares(x, 3, 4)
        assert 1 <= len(units) <= 4
        assert all(u % 3 != 0 for u in units)
        assert sum(u * u for u in units) % 81 == x
    zeros = sp.sum_of_unit_squares(0, 5, 2)
    assert sum(u * u for u in zeros) % 25 == 0


def test_markov_spectrum_small(registry):
    for q in (2, 3, 4, 5, 8):
        spec = sp.markov_spectrum(q)
        lam1 = spec.eigenvalues[1]
        assert spec.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
        assert lam1 < 1 - 1e-3
        assert all(-1 - 1e-9 <= e <= 1 + 1e-9 for e in spec.eigenvalues)
        assert all(b <= a + 1e-9 for a, b in zip(spec.eigenvalues,
                                                 spec.eigenvalues[1:]))
        registry.record(f"spectral.lambda1_q{q}", lam1, atol=1e-6)
        registry.record(f"spectral.s_size_q{q}", spec.s_size)


def test_markov_vs_dense():
    for q in (2, 3, 4, 8):
        G = sp._closure_cached(q, "G")
        perms = sp._left_mult_perms(G, sp.S_BAR, q)
        n = G.order
        T = np.zeros((n, n))
        for row in perms:
            T[np.arange(n), row] += 1
        T /= perms.shape[0]
        dense = np.linalg.eigvalsh((T + T.T) / 2)[-2]
        assert sp.markov_spectrum(q).eigenvalues[1] == pytest.approx(
            dense, abs=1e-6)


def test_spectral_gap_flatness(registry):
    lams = [sp.markov_spectrum(q).eigenvalues[1] for q in (2, 3, 4, 5, 8)]
    registry.record("spectral.gap_spread", float(max(lams) - min(lams)),
                    atol=1e-6)
    assert max(lams) < 1 - 1e-3


def test_transference():
    for q in (2, 4):
        rep = sp.transference_check(q)
        assert rep.holds
        assert rep.lhs >= rep.rhs > 0
    # degenerate single-factor bound where H1 already fills the quotient
    g = sp.closure_sl2(2, sp.S_BAR)
    h1 = sp.closure_sl2(2, sp.H1_GENS)
    assert g.order == h1.order
    spec_g = sp.markov_spectrum(2)
    spec_h = sp.markov_spectrum(2, sp.H1_GENS)
    lhs = 1 - spec_g.eigenvalues[1]
    rhs = (spec_h.s_size / spec_g.s_size) * (1 - spec_h.eigenvalues[1]) / 2
    assert lhs >= rhs
