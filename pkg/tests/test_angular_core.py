import itertools
import math

import numpy as np
import pytest
from scipy import special

from intelligent_spin import angular_core as ac
from intelligent_spin.errors import DomainError

from oracles import dense_matrices, exact_cg, sphere_quadrature, ylm_low


class TestLogFactorial:
    def test_small_values(self):
        assert ac.log_factorial(0) == 0.0
        assert ac.log_factorial(1) == 0.0
        assert ac.log_factorial(10) == pytest.approx(math.log(3628800), rel=1e-15)
        assert ac.log_factorial(10) == pytest.approx(15.104412573075516, rel=1e-14)

    @pytest.mark.parametrize("n", [2, 17, 100, 250, 400, 2047, 2048, 5000])
    def test_against_exact_integer(self, n):
        exact = sum(math.log(j) for j in range(2, n + 1)) if n < 600 else math.lgamma(n + 1)
        assert ac.log_factorial(n) == pytest.approx(exact, rel=1e-13)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            ac.log_factorial(-1)


class TestClebschGordan:
    def test_examples(self):
        assert ac.clebsch_gordan(0, 0, 0, 0, 0, 0) == pytest.approx(1.0, abs=1e-15)
        assert ac.clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(1 / math.sqrt(3), abs=1e-14)
        assert ac.clebsch_gordan(1, 1, 0, 0, 2, 0) == pytest.approx(math.sqrt(2 / 3), abs=1e-14)

    def test_key_splat(self):
        key = ac.CGKey(2, 1, 1, 0, 3, 1)
        assert ac.clebsch_gordan(*key) == pytest.approx(exact_cg(*key), abs=1e-14)

    def test_selection_rules_give_exact_zero(self):
        assert ac.clebsch_gordan(1, 1, 1, 1, 1, 1) == 0.0  # m != m1 + m2
        assert ac.clebsch_gordan(1, 1, 0, 0, 3, 0) == 0.0  # triangle
        assert ac.clebsch_gordan(1, 1, 0, 0, 1, 0) == 0.0  # odd parity zero-projection
        assert ac.clebsch_gordan(1, 1, 2, -2, 0, 0) == 0.0  # |m1| > l1

    def test_negative_l_rejected(self):
        with pytest.raises(DomainError):
            ac.clebsch_gordan(-1, 1, 0, 0, 0, 0)

    def test_against_exact_oracle_all_keys_up_to_8(self):
        keys = []
        for l1, l2 in itertools.product(range(9), repeat=2):
            for l in range(abs(l1 - l2), l1 + l2 + 1):
                for m1 in range(-l1, l1 + 1):
                    for m2 in range(-l2, l2 + 1):
                        if abs(m1 + m2) <= l:
                            keys.append((l1, l2, m1, m2, l, m1 + m2))
        arr = np.array(keys).T
        got = ac.clebsch_gordan_array(*arr)
        want = np.array([exact_cg(*k) for k in keys])
        assert np.max(np.abs(got - want)) < 1e-12

    def test_against_sympy_spot_values(self):
        wigner = pytest.importorskip("sympy.physics.wigner")
        for key in [(3, 2, 1, -1, 4, 0), (5, 5, 0, 0, 6, 0), (4, 3, -2, 3, 5, 1), (6, 2, 6, -2, 6, 4)]:
            l1, l2, m1, m2, l, m = key
            want = float(wigner.clebsch_gordan(l1, l2, l, m1, m2, m))
            assert ac.clebsch_gordan(*key) == pytest.approx(want, abs=1e-13)

    @pytest.mark.parametrize("l1,l2", [(l1, l2) for l1 in range(11) for l2 in range(l1, 11)])
    def test_orthogonality(self, l1, l2):
        # rows indexed by (l, m), columns by (m1, m2)
        rows = [(l, m) for l in range(abs(l1 - l2), l1 + l2 + 1) for m in range(-l, l + 1)]
        cols = [(m1, m2) for m1 in range(-l1, l1 + 1) for m2 in range(-l2, l2 + 1)]
        L = np.array([r[0] for r in rows])[:, None]
        M = np.array([r[1] for r in rows])[:, None]
        M1 = np.array([c[0] for c in cols])[None, :]
        M2 = np.array([c[1] for c in cols])[None, :]
        C = ac.clebsch_gordan_array(l1, l2, M1, M2, L, M)
        assert np.max(np.abs(C @ C.T - np.eye(len(rows)))) < 1e-12

    @pytest.mark.parametrize("l1,l2", [(40, 41), (60, 40), (100, 100), (120, 80)])
    def test_large_zero_projection_and_stretched(self, l1, l2):
        lo, hi = abs(l1 - l2), l1 + l2
        for l in (lo, lo + 2, (lo + hi) // 2 // 2 * 2 + lo % 2, hi):
            zp = ac.clebsch_gordan(l1, l2, 0, 0, l, 0)
            assert zp == pytest.approx(exact_cg(l1, l2, 0, 0, l, 0), rel=1e-11)
            st = ac.clebsch_gordan(l1, l2, l1, -l2, l, l1 - l2)
            assert st == pytest.approx(exact_cg(l1, l2, l1, -l2, l, l1 - l2), rel=1e-11)


class TestSphericalHarmonics:
    def test_examples(self):
        assert ac.spherical_harmonic(0, 0, 1.3, 2.1) == pytest.approx(1 / math.sqrt(4 * math.pi))
        assert ac.spherical_harmonic(1, 0, 0.0, 0.0) == pytest.approx(math.sqrt(3 / (4 * math.pi)))
        assert ac.spherical_harmonic(1, 1, math.pi / 2, 0.0) == pytest.approx(-math.sqrt(3 / (8 * math.pi)))

    def test_domain_error(self):
        with pytest.raises(DomainError):
            ac.spherical_harmonic(1, 2, 0.1, 0.1)

    def test_hand_written_low_orders(self):
        rng = np.random.default_rng(3)
        th = rng.uniform(0, math.pi, 50)
        ph = rng.uniform(0, 2 * math.pi, 50)
        for l in range(3):
            for m in range(-l, l + 1):
                np.testing.assert_allclose(ac.spherical_harmonic(l, m, th, ph), ylm_low(l, m, th, ph), atol=1e-14)

    def test_against_scipy(self):
        rng = np.random.default_rng(4)
        th = rng.uniform(0, math.pi, 40)
        ph = rng.uniform(0, 2 * math.pi, 40)
        for l in (3, 10, 25, 40):
            for m in (-l, -l // 2, 0, 1, l):
                want = special.sph_harm_y(l, m, th, ph)
                np.testing.assert_allclose(ac.spherical_harmonic(l, m, th, ph), want, atol=1e-12)

    def test_orthonormality_under_quadrature(self):
        L = 20
        T, P, W = sphere_quadrature(L + 2, 2 * L + 3)
        basis = np.array(
            [ac.spherical_harmonic(l, m, T, P).ravel() for l in range(L + 1) for m in range(-l, l + 1)]
        )
        gram = (basis.conj() * W.ravel()) @ basis.T
        assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10

    def test_legendre_table_shape_and_triangle(self):
        t = ac.legendre_table(5, np.linspace(0, math.pi, 7))
        assert t.shape == (6, 6, 7)
        assert np.all(t[np.triu_indices(6, 1)] == 0.0)


class TestOperatorMatrices:
    def test_examples(self):
        np.testing.assert_array_equal(ac.operator_matrix(0, "Lz"), [[0]])
        plus = ac.operator_matrix(1, "Lplus")
        np.testing.assert_allclose(np.diag(plus, -1), [math.sqrt(2)] * 2)
        assert np.count_nonzero(plus) == 2
        np.testing.assert_array_equal(ac.operator_matrix(1, "L2"), 2 * np.eye(3))

    def test_unknown_operator(self):
        with pytest.raises(ValueError):
            ac.operator_matrix(1, "Lw")

    def test_negative_l(self):
        with pytest.raises(DomainError):
            ac.operator_matrix(-1, "Lz")

    @pytest.mark.parametrize("l", [1, 2, 7])
    def test_matches_loop_construction(self, l):
        lx, ly, lz = dense_matrices(l)
        np.testing.assert_allclose(ac.operator_matrix(l, "Lx"), lx, atol=1e-15)
        np.testing.assert_allclose(ac.operator_matrix(l, "Ly"), ly, atol=1e-15)
        np.testing.assert_allclose(ac.operator_matrix(l, "Lz"), lz, atol=1e-15)

    @pytest.mark.parametrize("l", range(31))
    def test_commutator_and_hermiticity(self, l):
        lx, ly, lz = (ac.operator_matrix(l, w) for w in ("Lx", "Ly", "Lz"))
        assert np.max(np.abs(lx @ ly - ly @ lx - 1j * lz), initial=0.0) < 1e-12
        np.testing.assert_array_equal(lx, lx.conj().T)
        np.testing.assert_array_equal(ly, ly.conj().T)
        casimir = lx @ lx + ly @ ly + lz @ lz
        assert np.max(np.abs(casimir - ac.operator_matrix(l, "L2"))) < 1e-10
