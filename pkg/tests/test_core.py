import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from steerkit.core import (
    CANONICAL_TRIAD,
    DensityMatrix,
    FrameAngle,
    StateValidationError,
    StateVector,
    apply_local_unitary,
    as_density,
    bloch_vector,
    density_from_bloch,
    frame_unitary,
    generalized_ghz,
    generalized_w,
    load_state,
    named_state,
    partial_trace,
    ptrace_array,
    rotated_pauli_triad,
    save_state,
    tensor_product,
    triad_vectors,
)

thetas = st.floats(0, math.pi)
phis = st.floats(0, 2 * math.pi, exclude_max=True)


def random_ket(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(v / np.linalg.norm(v))


def random_density(rng, dim, rank=2):
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


class TestStateVector:
    def test_normalization_enforced(self):
        with pytest.raises(StateValidationError, match="normalized"):
            StateVector(np.array([1, 1, 0, 0]))

    @pytest.mark.parametrize("dim", [1, 3, 6, 16])
    def test_bad_dimension(self, dim):
        amps = np.zeros(dim)
        amps[0] = 1
        with pytest.raises(StateValidationError):
            StateVector(amps)

    def test_immutable(self, ghz):
        with pytest.raises(ValueError):
            ghz.amplitudes[0] = 0

    def test_density_is_projector(self, w_state):
        rho = w_state.density()
        assert np.allclose(rho.entries @ rho.entries, rho.entries)
        assert rho.purity() == pytest.approx(1.0)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(StateValidationError, match="Hermitian"):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(StateValidationError, match="trace"):
            DensityMatrix(np.eye(2))

    def test_rejects_negative(self):
        with pytest.raises(StateValidationError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_mixed_purity(self):
        assert DensityMatrix(np.eye(4) / 4).purity() == pytest.approx(0.25)


class TestFrames:
    def test_ranges(self):
        with pytest.raises(StateValidationError):
            FrameAngle(-0.1, 0)
        with pytest.raises(StateValidationError):
            FrameAngle(0.1, 2 * math.pi)

    def test_canonical_triad_is_pauli(self):
        z = CANONICAL_TRIAD.basis("z")
        assert np.allclose(np.abs(z), np.eye(2))
        for axis, sign_row in ((0, 0), (1, 1)):
            for out in range(2):
                r = bloch_vector(CANONICAL_TRIAD.projector(axis, out))
                assert abs(abs(r[axis]) - 1) < 1e-12

    def test_protocol_frame_axes(self):
        t = rotated_pauli_triad(FrameAngle(math.pi / 2, 0.0))
        # triad x is the computational basis, triad z the Pauli-x basis
        assert np.allclose(np.abs(t.basis("x")) ** 2, np.eye(2))
        assert abs(bloch_vector(t.projector("z", 0))[0] - 1) < 1e-12

    @given(thetas, phis)
    def test_triad_orthonormal_and_unbiased(self, theta, phi):
        v = triad_vectors(theta, phi)
        for a in range(3):
            g = v[a].conj() @ v[a].T
            assert np.allclose(g, np.eye(2), atol=1e-9)
            for b in range(a + 1, 3):
                assert np.allclose(np.abs(v[a].conj() @ v[b].T) ** 2, 0.5, atol=1e-9)

    @given(thetas, phis, thetas, phis)
    def test_frame_unitaries_relate_triads(self, t1, p1, t2, p2):
        u1, u2 = frame_unitary(t1, p1), frame_unitary(t2, p2)
        assert np.allclose(u1.conj().T @ u1, np.eye(2), atol=1e-12)
        v = u2 @ u1.conj().T
        assert np.allclose(np.einsum("mn,aon->aom", v, triad_vectors(t1, p1)), triad_vectors(t2, p2), atol=1e-12)

    @given(thetas, phis)
    def test_wrap_in_range(self, theta, phi):
        f = FrameAngle.wrap(theta + math.pi, phi)
        assert 0 <= f.theta <= math.pi and 0 <= f.phi < 2 * math.pi


class TestPartialTrace:
    def test_ghz_marginals(self, ghz):
        ab = partial_trace(ghz, "AB")
        assert np.allclose(ab.entries, np.diag([0.5, 0, 0, 0.5]))
        assert np.allclose(partial_trace(ghz, "A").entries, np.eye(2) / 2)

    @pytest.mark.parametrize("keep", ["", "ABC", "AA", "AD"])
    def test_invalid_keep(self, ghz, keep):
        with pytest.raises(StateValidationError):
            partial_trace(ghz, keep)

    @given(st.integers(0, 2**32 - 1))
    def test_composition(self, seed):
        rho = random_density(np.random.default_rng(seed), 8, rank=3)
        direct = partial_trace(rho, "A").entries
        assert np.allclose(direct, ptrace_array(rho.entries, (0,)), atol=1e-12)
        for keep in ("AB", "AC"):
            two = partial_trace(rho, keep).entries.reshape(2, 2, 2, 2)
            assert np.allclose(np.einsum("ajbj->ab", two), direct, atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    def test_tensor_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        a, bc = random_ket(rng, 2), random_ket(rng, 4)
        full = tensor_product(a, bc)
        assert np.allclose(partial_trace(full, "A").entries, a.density().entries, atol=1e-12)
        assert np.allclose(partial_trace(full, "BC").entries, bc.density().entries, atol=1e-12)


class TestNamedStates:
    def test_ghz_family_edges(self):
        assert np.allclose(generalized_ghz(1.0).amplitudes, np.eye(8)[0])
        assert np.allclose(generalized_ghz(1 / math.sqrt(2)).amplitudes, named_state("ghz").amplitudes)
        with pytest.raises(StateValidationError):
            generalized_ghz(1.2)

    def test_generalized_w(self):
        psi = named_state("generalized_w_example")
        assert np.allclose(psi.amplitudes[[1, 2, 4]], [0.2, math.sqrt(0.6), 0.6])
        with pytest.raises(StateValidationError):
            generalized_w(1, 1, 1)

    def test_parameterized_lookup(self):
        psi = named_state("generalized-ghz", 0.6)
        assert psi.amplitudes[0] == pytest.approx(0.6)

    def test_unknown(self):
        with pytest.raises(StateValidationError, match="unknown state"):
            named_state("bell")

    @pytest.mark.parametrize("name", ["bell_ab_times_0", "bell_ac_times_1", "plus_one_plus", "product_000"])
    def test_examples_normalized(self, name):
        assert np.linalg.norm(named_state(name).amplitudes) == pytest.approx(1.0)

    def test_local_unitary_keeps_marginal_spectrum(self, w_state):
        u = frame_unitary(0.7, 1.1)
        out = apply_local_unitary(w_state, "B", u)
        before = np.linalg.eigvalsh(partial_trace(w_state, "AC").entries)
        after = np.linalg.eigvalsh(partial_trace(out, "AC").entries)
        assert np.allclose(before, after)

    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
    def test_bloch_round_trip(self, x, y, z):
        r = np.array([x, y, z])
        if np.linalg.norm(r) > 1:
            r = r / np.linalg.norm(r)
        assert np.allclose(bloch_vector(density_from_bloch(r).entries), r, atol=1e-12)


class TestStateFiles:
    def test_round_trip(self, tmp_path, w_state):
        path = tmp_path / "w.json"
        save_state(w_state, path)
        back = load_state(path)
        assert np.allclose(back.amplitudes, w_state.amplitudes)
        assert back.label == "w"

    @pytest.mark.parametrize(
        "doc, message",
        [
            ({"dim": 2, "amplitudes": [[1, 0], [1, 0]]}, "normalized"),
            ({"amplitudes": [[1, 0]]}, "dim"),
            ({"dim": 2, "amplitudes": [[1, 0]]}, "exactly"),
            ({"dim": 2, "amplitudes": [[1, 0], ["a", 0]]}, "number pair"),
        ],
    )
    def test_rejects_bad_documents(self, tmp_path, doc, message):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(StateValidationError, match=message):
            load_state(path)

    def test_rejects_non_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(StateValidationError, match="JSON"):
            load_state(path)

    def test_as_density_passthrough(self):
        rho = DensityMatrix(np.eye(2) / 2)
        assert as_density(rho) is rho
