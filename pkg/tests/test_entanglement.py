import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hm_finalstate import entanglement as ent
from hm_finalstate.states import BoundaryUnitary, haar_state, haar_unitary
from hm_finalstate.tensor import (
    DensityOperator,
    HilbertLayout,
    LayoutError,
    StateVector,
    hermitian_eigenvalues,
    partial_trace,
)

M = lambda n: HilbertLayout((("M", n),))  # noqa: E731


def random_f(gen, n):
    z = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    return ent.FCoefficients(n, z / (n * np.linalg.norm(z)))


def hand_initial_n2(phi):
    """Amplitudes of the N=2 initial state, expanded by hand over (M, in, out, B)."""
    t = np.zeros((2, 2, 3, 2), dtype=complex)
    r = 1 / np.sqrt(2)
    for k in range(2):
        # vacuum branch with Bob in |1>: (|0,0> + |1,1>)/sqrt2
        t[k, 0, 0, 1] = r * r * phi[k]
        t[k, 1, 1, 1] = r * r * phi[k]
        # excitation branch with Bob in |0>: sqrt(1/3)|0,1> + sqrt(2/3)|1,2>
        t[k, 0, 1, 0] = r * np.sqrt(1 / 3) * phi[k]
        t[k, 1, 2, 0] = r * np.sqrt(2 / 3) * phi[k]
    return t.reshape(-1)


class TestInitialState:
    def test_n1(self):
        phi = StateVector(M(1), [1.0])
        x = ent.alice_bob_initial(1, phi)
        assert x.layout.names == ("M", "A_in", "A_out", "B")
        t = x.tensor()
        assert t[0, 0, 0, 1] == pytest.approx(1 / np.sqrt(2))
        assert t[0, 0, 1, 0] == pytest.approx(1 / np.sqrt(2))
        assert np.count_nonzero(t) == 2

    def test_n2(self, rng):
        phi = haar_state(2, rng)
        np.testing.assert_allclose(
            ent.alice_bob_initial(2, phi).amplitudes, hand_initial_n2(phi.amplitudes), atol=1e-15
        )

    @pytest.mark.parametrize("n", range(1, 9))
    def test_norm(self, n, rng):
        assert abs(ent.alice_bob_initial(n, haar_state(n, rng)).norm - 1) <= 1e-12

    def test_dimension_mismatch(self, rng):
        with pytest.raises(LayoutError):
            ent.alice_bob_initial(3, haar_state(2, rng))


class TestEvaporatedState:
    def test_n1_hand(self):
        u = BoundaryUnitary(np.array([[np.exp(0.3j)]]))
        phi = StateVector(M(1), [np.exp(-1.1j)])
        psi = ent.evaporate_alice_bob(ent.alice_bob_initial(1, phi), u)
        f0 = np.exp(-0.3j) * np.exp(-1.1j)
        want = np.zeros((2, 2), dtype=complex)
        want[0, 1] = f0 / np.sqrt(2)
        want[1, 0] = f0 / np.sqrt(2)
        np.testing.assert_allclose(psi.tensor(), want, atol=1e-15)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_closed_form(self, n, rng):
        u, phi = haar_unitary(n, rng), haar_state(n, rng)
        psi = ent.evaporate_alice_bob(ent.alice_bob_initial(n, phi), u)
        f = ent.f_coefficients(u, phi)
        np.testing.assert_allclose(psi.amplitudes, ent.evaporated_closed_form(f).amplitudes, atol=1e-12)
        assert not psi.normalized

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_printed_branch_ratios(self, n, rng):
        u, phi = haar_unitary(n, rng), haar_state(n, rng)
        psi = ent.evaporate_alice_bob(ent.alice_bob_initial(n, phi), u)
        printed = ent.evaporated_printed(ent.f_coefficients(u, phi))
        r0, r1 = ent.branch_ratios(psi, printed)
        assert r0 == pytest.approx(1.0, abs=1e-12)
        assert r1 == pytest.approx(np.sqrt(n / 2), abs=1e-12)

    def test_printed_agrees_at_n2(self, rng):
        u, phi = haar_unitary(2, rng), haar_state(2, rng)
        psi = ent.evaporate_alice_bob(ent.alice_bob_initial(2, phi), u)
        printed = ent.evaporated_printed(ent.f_coefficients(u, phi))
        np.testing.assert_allclose(psi.amplitudes, printed.amplitudes, atol=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_linear_in_matter_state(self, seed, n):
        gen = np.random.default_rng(seed)
        u = haar_unitary(n, gen)
        p1, p2 = haar_state(n, gen), haar_state(n, gen)
        a, b = 0.28, 0.96j
        mix = a * p1.amplitudes + b * p2.amplitudes
        s = np.linalg.norm(mix)
        evap = lambda p: ent.evaporate_alice_bob(ent.alice_bob_initial(n, p), u).amplitudes  # noqa: E731
        lhs = s * evap(StateVector(M(n), mix / s))
        np.testing.assert_allclose(lhs, a * evap(p1) + b * evap(p2), atol=1e-12)

    def test_layout_mismatch(self, rng):
        x = ent.alice_bob_initial(2, haar_state(2, rng))
        with pytest.raises(LayoutError):
            ent.evaporate_alice_bob(x, haar_unitary(3, rng))


class TestFCoefficients:
    def test_identity_basis(self):
        f = ent.f_coefficients(BoundaryUnitary.identity(4), StateVector(M(4), [1, 0, 0, 0]))
        np.testing.assert_allclose(f.values, [0.25, 0, 0, 0])

    def test_identity_uniform(self):
        n = 5
        f = ent.f_coefficients(BoundaryUnitary.identity(n), StateVector(M(n), np.ones(n) / np.sqrt(n)))
        np.testing.assert_allclose(f.values, np.full(n, 1 / (n * np.sqrt(n))))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_norm_identity(self, seed, n):
        gen = np.random.default_rng(seed)
        f = ent.f_coefficients(haar_unitary(n, gen), haar_state(n, gen))
        assert abs(f.norm_sq - 1 / n**2) <= 1e-12
        assert np.all(np.abs(f.values) <= 1 / n + 1e-12)

    def test_boundary_reads_zero(self):
        f = ent.FCoefficients(2, [0.5, 0.5])
        assert f[-1] == 0 and f[2] == 0


class TestEntanglementFidelity:
    def test_n1_hand(self):
        u = BoundaryUnitary(np.array([[1j]]))
        phi = StateVector(M(1), [1.0])
        x = ent.alice_bob_initial(1, phi)
        psi = ent.evaporate_alice_bob(x, u)
        # reduced state is the Bell-like (|01> + |10>)/sqrt2 and psi is f0 times it
        assert ent.entanglement_fidelity_direct(x, psi) == pytest.approx(1.0, abs=1e-14)
        f = ent.f_coefficients(u, phi)
        assert ent.entanglement_fidelity_printed(f) == pytest.approx((1 + 0.5 + 1 / 16) / 4)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_against_full_partial_trace(self, n, rng):
        u, phi = haar_unitary(n, rng), haar_state(n, rng)
        x = ent.alice_bob_initial(n, phi)
        psi = ent.evaporate_alice_bob(x, u)
        rho = partial_trace(x.density(), {"A_out", "B"}).matrix
        want = np.vdot(psi.amplitudes, rho @ psi.amplitudes).real
        assert ent.entanglement_fidelity_direct(x, psi) == pytest.approx(want, abs=1e-14)
        assert ent.entanglement_fidelity_rederived(ent.f_coefficients(u, phi)) == pytest.approx(want, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_nonnegative(self, seed, n):
        gen = np.random.default_rng(seed)
        u, phi = haar_unitary(n, gen), haar_state(n, gen)
        x = ent.alice_bob_initial(n, phi)
        assert ent.entanglement_fidelity_direct(x, ent.evaporate_alice_bob(x, u)) >= 0

    def test_printed_scales_with_f_norm(self):
        n = 4
        phi = StateVector(M(n), np.ones(n) / 2)
        f = ent.f_coefficients(BoundaryUnitary.identity(n), phi)
        m = np.arange(n)
        bracket = (m + 1) ** 2 + (m + 1) / (n + 1) + 1 / (4 * (n + 1) ** 2)
        want = (1 / n**3) * bracket.sum() / (n * (n + 1) ** 2)
        assert ent.entanglement_fidelity_printed(f) == pytest.approx(want)
        doubled = ent.FCoefficients(n, 2 * f.values)
        assert ent.entanglement_fidelity_printed(doubled) == pytest.approx(4 * want)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_haar_mean(self, n):
        """N^3 F_e averages to 3/4 + (2N+1)/(6(N+1)) over Haar states."""
        gen = np.random.default_rng(99 + n)
        u = haar_unitary(n, gen)
        vals = []
        for _ in range(3000):
            phi = haar_state(n, gen)
            x = ent.alice_bob_initial(n, phi)
            vals.append(n**3 * ent.entanglement_fidelity_direct(x, ent.evaporate_alice_bob(x, u)))
        vals = np.array(vals)
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - ent.haar_mean_scaled_fidelity(n)) <= 5 * se

    def test_haar_mean_limit(self):
        assert ent.haar_mean_scaled_fidelity(10**9) == pytest.approx(13 / 12, abs=1e-8)


class TestRhoAB:
    def test_properties(self, rng):
        u, phi = haar_unitary(3, rng), haar_state(3, rng)
        psi = ent.evaporate_alice_bob(ent.alice_bob_initial(3, phi), u)
        rho = ent.rho_ab(psi)
        eig = hermitian_eigenvalues(rho.matrix)
        assert int(np.sum(eig > 1e-10)) == 1
        assert rho.trace == pytest.approx(psi.norm_sq, abs=1e-15)
        r = rho.matrix / rho.trace
        np.testing.assert_allclose(r @ r, r, atol=1e-12)


class TestBlocks:
    def test_first_block_top_left(self, rng):
        f = random_f(rng, 4)
        assert ent.block_matrix_printed(f, 0)[0, 0] == 0

    def test_pattern(self, rng):
        n = 5
        f = random_f(rng, n)
        m = 2
        b = ent.block_matrix_printed(f, m)
        assert b[1, 2] == pytest.approx(np.sqrt((m + 1) / (2 * (n + 1))) * abs(f[m]) ** 2)
        assert b[0, 0] == pytest.approx(m * abs(f[m - 1]) ** 2 / (n + 1))
        assert b[3, 3] == pytest.approx(abs(f[m + 1]) ** 2 / 2)
        np.testing.assert_allclose(b, b.conj().T, atol=1e-12)

    def test_index_range(self, rng):
        f = random_f(rng, 3)
        with pytest.raises(IndexError):
            ent.block_matrix_printed(f, 3)
        with pytest.raises(IndexError):
            ent.pt_block_eigs_printed(f, -1)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_eigenvalues_match_solver(self, seed, n):
        f = random_f(np.random.default_rng(seed), n)
        for m in range(n):
            printed = np.sort(ent.pt_block_eigs_printed(f, m))
            np.testing.assert_allclose(printed, ent.pt_block_eigs_numeric(f, m), atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.data())
    def test_negative_root_sign(self, seed, n, data):
        f = random_f(np.random.default_rng(seed), n)
        m = data.draw(st.integers(0, n - 1))
        lam = ent.pt_block_eigs_printed(f, m)
        a = f.abs2(m + 1) / 2
        d = m * f.abs2(m - 1) / (n + 1)
        cross = 2 * (m + 1) * f.abs2(m) ** 2 / (n + 1)
        disc = (a - d) ** 2 + cross
        assert disc >= 0
        if cross > 4 * a * d * (1 + 1e-9):
            assert lam[3] < 0
        elif cross < 4 * a * d * (1 - 1e-9):
            assert lam[3] > 0

    def test_block_trace_bookkeeping(self, rng):
        n = 4
        u, phi = haar_unitary(n, rng), haar_state(n, rng)
        f = ent.f_coefficients(u, phi)
        psi = ent.evaporate_alice_bob(ent.alice_bob_initial(n, phi), u)
        m = np.arange(n)
        shared = np.sum(np.abs(f.values) ** 2 * ((m + 1) / (n + 1) + 0.5))
        # each |(m+1)0> and |(m+1)1> reappears as |m'0>, |m'1> of the next block
        assert psi.norm_sq == pytest.approx(shared, abs=1e-14)
        assert ent.block_trace_sum(f) == pytest.approx(2 * shared - f.abs2(0) / 2 - n * f.abs2(n - 1) / (n + 1), abs=1e-14)


class TestPTSpectrum:
    def test_product_state(self, rng):
        lay = ent.evaporated_layout(3)
        a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = np.kron(a, b)
        rho = DensityOperator(lay, np.outer(v, v.conj()) / np.vdot(v, v).real)
        assert ent.pt_spectrum_full(rho)[0] >= -1e-10
        assert ent.negativity(rho) == pytest.approx(0.0, abs=1e-12)

    def test_bell_embedded(self):
        n = 2
        lay = ent.evaporated_layout(n)
        t = np.zeros((n + 1, 2), dtype=complex)
        t[0, 0] = t[2, 1] = 0.3
        psi = StateVector(lay, t.reshape(-1), normalized=False)
        eig = ent.pt_spectrum_full(ent.rho_ab(psi))
        assert eig[0] == pytest.approx(-psi.norm_sq / 2, abs=1e-15)

    def test_bell_negativity(self):
        lay = HilbertLayout((("A_out", 2), ("B", 2)))
        v = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert ent.negativity(DensityOperator(lay, np.outer(v, v))) == pytest.approx(0.5)

    def test_layout_check(self):
        rho = DensityOperator(HilbertLayout((("A", 2), ("C", 3))), np.eye(6) / 6)
        with pytest.raises(LayoutError):
            ent.pt_spectrum_full(rho)


class TestSurvival:
    def test_first_block_always(self, rng):
        for _ in range(20):
            assert ent.survival_condition(random_f(rng, 4), 0)

    def test_uniform_magnitudes(self):
        n = 6
        f = ent.FCoefficients(n, np.exp(1j * np.arange(n)) / (n * np.sqrt(n)))
        assert ent.survives_all(f)

    def test_can_fail(self):
        f = ent.FCoefficients(3, np.array([1.0, 0.01, 1.0]) / 3)
        assert not ent.survival_condition(f, 1)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_survival_implies_negative(self, n, rng):
        for _ in range(100):
            u, phi = haar_unitary(n, rng), haar_state(n, rng)
            f = ent.f_coefficients(u, phi)
            psi = ent.evaporate_alice_bob(ent.alice_bob_initial(n, phi), u)
            if ent.survives_all(f):
                assert ent.pt_spectrum_full(ent.rho_ab(psi))[0] < -1e-10
