import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerkit.core import DensityMatrix, FrameAngle, StateValidationError, as_density, named_state
from steerkit.protocol import (
    HONEST,
    PROTOCOL_FRAME,
    V_NOTE,
    PartyBehavior,
    conditional_entropy,
    estimate_from_counts,
    hex_to_bits,
    key_rate_bound,
    pauli_to_triad,
    run_qka,
    run_qpc,
    substream,
)
from steerkit.steering import evaluate_inequality

SWAP_LIAR = PartyBehavior.parse("liar:x=z")


def noisy_ghz(p=0.8):
    rho = p * as_density(named_state("ghz")).entries + (1 - p) * np.eye(8) / 8
    return DensityMatrix(rho, "noisy-ghz")


class TestBehaviors:
    @pytest.mark.parametrize(
        "text",
        ["honest", "liar:x=z", "triad-liar:x=z", "liar:x=z,z=x", "fixed:0", "fixed:1", "misaligned:0.1,-0.2"],
    )
    def test_effects_are_povms(self, text):
        eff = PartyBehavior.parse(text).effects(PROTOCOL_FRAME)
        for i in range(3):
            assert np.allclose(eff[i].sum(axis=0), np.eye(2))
            for b in range(2):
                assert np.all(np.linalg.eigvalsh(eff[i, b]) > -1e-12)

    def test_describe_round_trip(self):
        for text in ["honest", "fixed:1", "triad-liar:x=y", "misaligned:0.1,0.0"]:
            b = PartyBehavior.parse(text)
            assert PartyBehavior.parse(b.describe()) == b

    def test_pauli_names_map_through_frame(self):
        assert pauli_to_triad(PROTOCOL_FRAME) == (2, 1, 0)
        # lab Pauli x is triad z at the protocol frame
        assert PartyBehavior.parse("liar:x=z") == PartyBehavior.parse("triad-liar:z=x")

    @pytest.mark.parametrize("text", ["liar", "liar:x", "fixed:2", "misaligned:1", "sometimes", "liar:q=z"])
    def test_rejects_bad_syntax(self, text):
        with pytest.raises(StateValidationError):
            PartyBehavior.parse(text)


class TestEntropy:
    def test_correlated(self):
        assert conditional_entropy([[0.5, 0], [0, 0.5]]) == 0.0

    def test_independent(self):
        assert conditional_entropy(np.full((2, 2), 0.25)) == pytest.approx(1.0)

    def test_hand_example(self):
        assert conditional_entropy([[0.5, 0.25], [0.0, 0.25]]) == pytest.approx(0.5)

    @pytest.mark.parametrize("table", [[[0.5, 0.5], [0.5, 0.5]], [[-0.1, 0.6], [0.25, 0.25]], [0.5, 0.5], [[np.nan, 1], [0, 0]]])
    def test_rejects_malformed(self, table):
        with pytest.raises(StateValidationError):
            conditional_entropy(table)

    @given(st.integers(0, 2**32 - 1))
    def test_bounds(self, seed):
        p = np.random.default_rng(seed).dirichlet(np.ones(8)).reshape(2, 4)
        h = conditional_entropy(p)
        assert 0 <= h <= 1 + 1e-12


class TestKeyRate:
    def test_perfect_correlations(self):
        joint = np.zeros((2, 4))
        joint[0, 0] = joint[1, 3] = 0.5
        rep = key_rate_bound(joint, joint, "z", "x")
        assert rep.v == 0.5 and rep.r_min == 1.0
        assert V_NOTE in rep.notes

    def test_independent_outcomes(self):
        u = np.full((2, 4), 1 / 8)
        assert key_rate_bound(u, u).r_min == pytest.approx(-1.0)

    def test_identical_bases_flagged(self):
        u = np.full((2, 4), 1 / 8)
        rep = key_rate_bound(u, u, "z", "z")
        assert rep.identical_bases and rep.uncertainty_floor == 0.0 and rep.r_min <= 0

    @given(st.integers(0, 2**32 - 1), st.sampled_from(["x", "y", "z"]), st.sampled_from(["x", "y", "z"]))
    def test_identity_exact(self, seed, k, kp):
        rng = np.random.default_rng(seed)
        a, b = (rng.dirichlet(np.ones(8)).reshape(2, 4) for _ in range(2))
        rep = key_rate_bound(a, b, k, kp)
        assert rep.r_min == rep.uncertainty_floor - rep.h_k - rep.h_kprime
        assert 0.5 <= rep.v <= 1 and rep.h_k >= 0 and rep.h_kprime >= 0

    def test_custom_basis(self):
        u = np.full((2, 4), 1 / 8)
        basis = np.array([[1, 0], [0, 1]], dtype=complex)
        assert key_rate_bound(u, u, basis, "x").v == 0.5


class TestQkaExact:
    def test_honest_matches_evaluate(self, ghz):
        res = run_qka(500)
        ref = evaluate_inequality(ghz, "s1-diag", PROTOCOL_FRAME).lhs
        assert abs(res.lhs_estimate - ref) <= 1e-12
        assert res.authenticated and res.stderr == 0.0
        assert res.key_rate.r_min == 1.0

    def test_basis_liar_detected(self):
        res = run_qka(500, bob=SWAP_LIAR)
        assert res.lhs_estimate < 3.0 - 0.5
        assert not res.authenticated

    def test_liar_on_computational_rounds_is_invisible(self):
        # Charlie's computational outcome alone collapses Alice, so Bob's lie costs nothing
        res = run_qka(500, bob=PartyBehavior.parse("triad-liar:x=z"))
        assert res.lhs_estimate == pytest.approx(3.0, abs=1e-12)

    @pytest.mark.parametrize("text, value", [("fixed:0", 1.0), ("liar:y=x", 2.0), ("liar:y=z", 3.0), ("liar:x=z,y=x", 1.0)])
    def test_other_cheaters(self, text, value):
        assert run_qka(50, bob=PartyBehavior.parse(text)).lhs_estimate == pytest.approx(value, abs=1e-9)

    @given(st.floats(0.01, 0.5))
    @settings(max_examples=15)
    def test_misalignment_lowers_value(self, delta):
        res = run_qka(10, charlie=PartyBehavior("misaligned", offset=(delta, 0.0)))
        assert res.lhs_estimate < 3.0

    def test_threshold_is_the_rule(self):
        res = run_qka(50, bob=PartyBehavior.parse("liar:y=z"), threshold=1.5)
        assert res.authenticated == (res.lhs_estimate >= 1.5)

    def test_escrow_key_is_shared(self):
        res = run_qka(3000, seed=5)
        assert res.key.role == "escrow"
        assert res.key.mismatches == 0
        assert 800 < len(res.key_bits) < 1200

    def test_collective_key_is_reconstructible(self):
        res = run_qka(3000, seed=5, key_role="collective")
        assert res.key.mismatches == 0 and len(res.key_bits) > 1500

    def test_escrow_key_breaks_with_liar(self):
        res = run_qka(3000, seed=5, bob=PartyBehavior.parse("liar:z=x"))
        assert res.key.mismatches > 300

    @pytest.mark.parametrize(
        "kwargs",
        [{"rounds": 0}, {"rounds": 10, "mode": "fast"}, {"rounds": 10, "key_role": "bob"}],
    )
    def test_validation(self, kwargs):
        with pytest.raises(StateValidationError):
            run_qka(**kwargs)

    def test_rejects_two_qubit_source(self):
        with pytest.raises(StateValidationError):
            run_qka(10, state=DensityMatrix(np.eye(4) / 4))


class TestQkaSampled:
    def test_honest_within_three_se(self):
        res = run_qka(30000, mode="sampled", seed=11)
        assert abs(res.lhs_estimate - 3.0) <= 3 * res.stderr
        assert res.authenticated

    def test_small_runs_warn(self):
        with pytest.warns(UserWarning, match="1000"):
            run_qka(500, mode="sampled")

    def test_empty_cells_reported(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_qka(5, mode="sampled", seed=2)
        assert len(res.empty_cells) > 0
        assert res.to_dict()["empty_cells"]

    def test_transcript_reproducible(self):
        a = run_qka(2000, mode="sampled", seed=7)
        b = run_qka(2000, mode="sampled", seed=7)
        assert a.transcript.to_jsonl() == b.transcript.to_jsonl()
        assert a.to_dict() == b.to_dict()
        assert run_qka(2000, mode="sampled", seed=8).transcript.to_jsonl() != a.transcript.to_jsonl()

    def test_transcript_records(self):
        res = run_qka(1200, mode="sampled", seed=1)
        lines = res.transcript.to_jsonl().splitlines()
        assert len(lines) == 1200
        rec = json.loads(lines[3])
        assert set(rec) == {"index", "axis", "b", "c", "alice_axis", "a", "claimed_axes"}
        assert rec["index"] == 3
        rounds = list(res.transcript)
        assert rounds[3].axis == rec["axis"] and rounds[3].alice_action == "probe"

    def test_stderr_scales_as_inverse_sqrt(self):
        sizes = [1000, 10000, 100000]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            se = [np.mean([run_qka(n, state=noisy_ghz(), mode="sampled", seed=s).stderr for s in range(4)]) for n in sizes]
        slope = np.polyfit(np.log(sizes), np.log(se), 1)[0]
        assert -0.6 < slope < -0.4

    def test_estimator_exact_on_ideal_counts(self):
        # counts proportional to exact GHZ statistics reproduce the exact value
        from steerkit.protocol import _Model

        model = _Model(named_state("ghz"), HONEST, HONEST, PROTOCOL_FRAME)
        lhs, empty = estimate_from_counts(model.table * 1e6)
        assert lhs == pytest.approx(3.0, abs=1e-9)
        assert not empty.any()

    def test_substreams_independent(self):
        a = substream(1, "alice").random(5)
        b = substream(1, "source").random(5)
        assert not np.allclose(a, b)
        assert np.allclose(a, substream(1, "alice").random(5))


def bits(rng, n):
    return tuple(int(x) for x in rng.integers(0, 2, n))


class TestQpc:
    def test_equal_secrets(self):
        rng = np.random.default_rng(0)
        s = bits(rng, 128)
        res = run_qpc(s, s, 600, 200)
        assert res.overall == "equal" and res.authenticated
        assert res.compared == 128

    def test_differing_positions(self):
        rng = np.random.default_rng(1)
        s = list(bits(rng, 128))
        t = list(s)
        for p in (3, 77):
            t[p] ^= 1
        res = run_qpc(s, t, 600, 200)
        assert [n for n, v in enumerate(res.verdicts) if v == "unequal"] == [3, 77]
        assert res.overall == "unequal"

    @given(st.integers(0, 2**32 - 1), st.integers(1, 40))
    @settings(max_examples=30)
    def test_verdict_is_xor(self, seed, n):
        rng = np.random.default_rng(seed)
        sb, sc = bits(rng, n), bits(rng, n)
        res = run_qpc(sb, sc, 4 * n + 4, 2 * (n // 2 + 1), seed=seed)
        assert res.verdicts == tuple("unequal" if x ^ y else "equal" for x, y in zip(sb, sc))

    def test_liar_withholds(self):
        s = (1, 0, 1)
        res = run_qpc(s, s, 40, 20, bob=SWAP_LIAR)
        assert not res.authenticated
        assert res.verdicts is None and res.overall == "withheld"

    def test_default_bias(self):
        res = run_qpc((1, 0), (1, 0), 40)
        assert res.checked == 20
        assert res.config["z_designated"] == 10

    def test_sampled_check(self):
        s = (1, 1, 0, 0)
        res = run_qpc(s, s, 8000, 4000, mode="sampled", seed=3)
        assert res.authenticated and res.check_stderr > 0
        assert res.overall == "equal"

    @pytest.mark.parametrize(
        "sb, sc, total, check",
        [((1, 0), (1,), 20, 4), ((1, 0), (1, 0), 10, 10), ((1, 0), (1, 0), 5, 4), ((1, 2), (1, 0), 20, 4), ((1,), (1,), 20, 1)],
    )
    def test_validation(self, sb, sc, total, check):
        with pytest.raises(StateValidationError):
            run_qpc(sb, sc, total, check)

    def test_hex(self):
        assert hex_to_bits("a1") == (1, 0, 1, 0, 0, 0, 0, 1)
        assert hex_to_bits("0x0F") == (0, 0, 0, 0, 1, 1, 1, 1)
        with pytest.raises(StateValidationError):
            hex_to_bits("xyz")
