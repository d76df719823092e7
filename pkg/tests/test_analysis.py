import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsdc import analysis
from qsdc.adversary import AttackAction, AttackModel, BasisPolicy
from qsdc.protocol import Episode, EpisodeRecord, ProtocolParams, Role, run_session

import oracles

Z95 = 1.959963984540054


@pytest.mark.parametrize("bit, hadamard, action", oracles.all_cells())
def test_exact_distribution_matches_dense_oracle(bit, hadamard, action):
    got = analysis.exact_distribution(bit, hadamard, AttackAction(action))
    expected = oracles.episode_table(bit, hadamard, action)
    assert set(got.table) == set(expected)
    for key in expected:
        assert got.table[key] == pytest.approx(expected[key], abs=1e-12)
    assert math.fsum(got.table.values()) == pytest.approx(1.0, abs=1e-9)


def test_exact_distribution_rejects_unknown():
    with pytest.raises(ValueError):
        analysis.exact_distribution(0, False, "telepathy")
    with pytest.raises(ValueError):
        analysis.exact_distribution(2, False, AttackAction.NONE)


def test_no_attack_tables_differ_by_bob_flip():
    t0 = analysis.exact_distribution(0, False, AttackAction.NONE).table
    t1 = analysis.exact_distribution(1, False, AttackAction.NONE).table
    for key, p in t0.items():
        flipped = key[:2] + str(1 - int(key[2]))
        assert t1[flipped] == pytest.approx(p, abs=1e-12)


def test_wilson_zero_errors():
    low, high = analysis.wilson_interval(0, 5000)
    assert low == 0.0
    # closed form at zero successes: z^2 / (n + z^2)
    assert high == pytest.approx(Z95**2 / (5000 + Z95**2), rel=1e-12)
    assert high < 0.0008


def test_wilson_half_width_scales_inverse_sqrt():
    widths = [np.subtract(*analysis.wilson_interval(n // 2, n)[::-1]) / 2 for n in (1000, 4000, 16000)]
    assert widths[0] / widths[1] == pytest.approx(2.0, rel=0.01)
    assert widths[1] / widths[2] == pytest.approx(2.0, rel=0.01)


def test_wilson_rejects_empty():
    with pytest.raises(ValueError):
        analysis.wilson_interval(0, 0)


def test_estimate_rates_no_attack():
    result = run_session(ProtocolParams(10_000, master_seed=1))
    summary = analysis.estimate_rates(result.records, result.params)
    assert summary.check.trials == 5000
    assert summary.check.rate == 0.0 and summary.check.high < 0.0008
    assert not summary.detected


def test_estimate_rates_collective_matched_cell():
    result = run_session(ProtocolParams(20_000, master_seed=2), AttackModel.collective())
    plain = [r for r in result.records if not r.episode.hadamard_applied]
    summary = analysis.estimate_rates(plain, result.params)
    assert summary.check.trials >= 4500
    assert abs(summary.check.rate - 0.5) < 0.02


def test_estimate_rates_single_record():
    rec = EpisodeRecord(Episode(1, False, Role.CHECK, 0), 0, 1, 0)
    summary = analysis.estimate_rates([rec], ProtocolParams(2))
    assert summary.check.rate == 0.0
    assert summary.check.high > 0.5
    with pytest.raises(ValueError):
        analysis.estimate_rates([], ProtocolParams(2))


def test_mutual_information_identity_channel():
    pairs = [(x, x) for x in (0, 1) * 500]
    assert analysis.empirical_mutual_information(pairs) == pytest.approx(1.0, abs=1e-12)


def test_mutual_information_independent():
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, 2, size=(10_000, 2))
    # plug-in bias is about (|X||Y| - 1) / (2 n ln 2) = 2.2e-4 bits
    assert analysis.empirical_mutual_information(pairs) < 0.01


def test_mutual_information_degenerate():
    assert analysis.empirical_mutual_information([]) == 0.0
    assert analysis.empirical_mutual_information([(1, 0)] * 10) == 0.0


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2)), min_size=1, max_size=200))
def test_mutual_information_bounds_and_oracle(pairs):
    mi = analysis.empirical_mutual_information(pairs)
    n = len(pairs)
    joint = {}
    for p in pairs:
        joint[p] = joint.get(p, 0.0) + 1 / n
    assert mi == pytest.approx(oracles.mutual_information(joint), abs=1e-9)

    def entropy(values):
        _, counts = np.unique(values, return_counts=True)
        q = counts / counts.sum()
        return float(-(q * np.log2(q)).sum())

    xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
    assert 0.0 <= mi <= min(entropy(xs), entropy(ys)) + 1e-12


def test_collective_ancilla_reveals_nothing():
    message = "".join(map(str, np.random.default_rng(3).integers(0, 2, size=10_000)))
    result = run_session(ProtocolParams(20_000, message=message, master_seed=4), AttackModel.collective())
    pairs = analysis.eve_secret_pairs(result)
    assert len(pairs) == 10_000
    assert analysis.empirical_mutual_information(pairs) < 0.01


@pytest.mark.parametrize(
    "config",
    [(0, False, AttackAction.NONE), (0, False, AttackAction.INTERCEPT_Z)],
)
def test_oracle_vs_monte_carlo(config):
    assert analysis.oracle_vs_monte_carlo(config, 100_000, np.random.default_rng(5)) < 0.02


def test_oracle_vs_monte_carlo_guards():
    with pytest.raises(ValueError):
        analysis.oracle_vs_monte_carlo((0, False, AttackAction.NONE), 10, np.random.default_rng(0))
    exact = analysis.exact_distribution(1, True, AttackAction.COLLECTIVE)
    assert analysis.tv_distance(exact.table, exact.table) == 0.0


@pytest.mark.parametrize(
    "attack, expected",
    [
        (AttackModel.none(), 0.0),
        (AttackModel.collective(), 0.25),
        (AttackModel.collective(probability=0.4), 0.10),
        (AttackModel.intercept_resend(BasisPolicy.ALWAYS_Z), 0.5),
        (AttackModel.intercept_resend(BasisPolicy.ALWAYS_X), 0.25),
        (AttackModel.intercept_resend(BasisPolicy.UNIFORM_RANDOM), 0.375),
    ],
)
def test_expected_check_error_rate(attack, expected):
    # mixture of the frozen per-cell rates with half the pairs Hadamard-flagged
    assert analysis.expected_check_error_rate(ProtocolParams(1000), attack) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("bits", ["", "1", "1010", "10100011", "111111111"])
def test_hex_round_trip(bits):
    text = analysis.bits_to_hex(bits)
    assert analysis.hex_to_bits(text)[: len(bits)] == bits


def test_hex_rejects_garbage():
    with pytest.raises(ValueError):
        analysis.hex_to_bits("zz")


def test_build_report():
    params = ProtocolParams(2000, message="1" * 64, abort_threshold=0.05, master_seed=6)
    result = run_session(params, AttackModel.collective())
    report = analysis.build_report(result, elapsed=0.5, tv_samples=1000, rng=np.random.default_rng(1))
    body = report.to_dict()
    for name in ("params", "attack", "check_error_rate", "ci95", "detected", "recovered_message_hex", "eve_mi_bits", "throughput"):
        assert name in body
    assert body["detected"] and body["recovered_message_hex"] is None
    assert body["throughput"] == 0.5
    assert len(body["oracle_tv_distances"]) == 8
    assert report.metadata()["episodes_per_second"] == pytest.approx(4000)
