"""Statistics over sessions: error rates, Eve's information, oracle checks.

The exact distributions here are built by enumerating projections with
:func:`qsdc.qcore.outcome_distribution`; nothing in this module samples in
order to produce an expected value.  The Monte Carlo counterpart reuses the
sampling pipeline from :mod:`qsdc.protocol`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Iterable, Optional

import numpy as np

from . import qcore
from .adversary import AttackAction, AttackKind, AttackModel, BasisPolicy, attack_collective_cnot, substitute
from .protocol import (
    QUBIT_B,
    ProtocolParams,
    Role,
    SessionResult,
    alice_encode,
    hadamard_layer,
    recover_bit,
    simulate,
)
from .qcore import Basis

Config = tuple  # (alice_bit, hadamard, AttackAction)


# -- exact oracle ------------------------------------------------------------


@dataclass(frozen=True)
class ExactDistribution:
    """Joint outcome table of one episode configuration.

    ``labels`` names the characters of each key, e.g. ``("a", "A", "B")``;
    B and E are X-basis bits, ``eve`` is Eve's intercept bit.
    """

    alice_bit: int
    hadamard: bool
    action: AttackAction
    labels: tuple
    table: dict

    def marginal(self, *names: str) -> dict:
        pos = [self.labels.index(n) for n in names]
        out: dict = {}
        for key, p in self.table.items():
            sub = "".join(key[i] for i in pos)
            out[sub] = out.get(sub, 0.0) + p
        return out

    def check_error(self) -> float:
        """Probability that Table-1 recovery disagrees with Alice's bit."""
        ia, ib = self.labels.index("a"), self.labels.index("B")
        return math.fsum(
            p for key, p in self.table.items() if recover_bit(int(key[ia]), int(key[ib])) != self.alice_bit
        )

    def to_dict(self) -> dict:
        return {
            "alice_bit": self.alice_bit,
            "hadamard": self.hadamard,
            "attack": self.action.value,
            "labels": list(self.labels),
            "table": {k: self.table[k] for k in sorted(self.table)},
        }


def outcome_labels(action: AttackAction) -> tuple:
    if action.intercepts:
        return ("eve", "a", "A", "B")
    if action.entangles:
        return ("a", "A", "B", "E")
    return ("a", "A", "B")


def _measurement_plan(action: AttackAction) -> list:
    plan = [(0, Basis.Z), (1, Basis.Z), (2, Basis.X)]
    if action.entangles:
        plan.append((3, Basis.X))
    return plan


def exact_distribution(alice_bit: int, hadamard: bool, action: AttackAction) -> ExactDistribution:
    if alice_bit not in (0, 1):
        raise ValueError(f"alice_bit must be 0 or 1, got {alice_bit!r}")
    if not isinstance(action, AttackAction):
        raise ValueError(f"unknown attack action {action!r}")
    state = qcore.make_epr_pair()
    branches = [("", 1.0, state)]
    if action.intercepts:
        branches = []
        for e in (0, 1):
            p, post = qcore.project(state, QUBIT_B, action.basis, e)
            if post is not None:
                branches.append((str(e), p, substitute(post, QUBIT_B, action.basis, e)))
    elif action.entangles:
        state, _ = attack_collective_cnot(state, QUBIT_B, pre_hadamard=action is AttackAction.COLLECTIVE_H)
        branches = [("", 1.0, state)]

    labels = outcome_labels(action)
    table = {"".join(bits): 0.0 for bits in itertools.product("01", repeat=len(labels))}
    plan = _measurement_plan(action)
    for prefix, weight, branch in branches:
        final = alice_encode(hadamard_layer(branch, hadamard), alice_bit)
        for key, p in qcore.outcome_distribution(final, plan).items():
            table[prefix + key] += weight * p
    return ExactDistribution(alice_bit, hadamard, action, labels, table)


def all_configs(actions: Iterable[AttackAction] = tuple(AttackAction)) -> list:
    return [(b, h, act) for act in actions for b in (0, 1) for h in (False, True)]


# -- Monte Carlo side --------------------------------------------------------


def monte_carlo_frequencies(config: Config, samples: int, rng: np.random.Generator) -> dict:
    """Empirical outcome frequencies from ``samples`` simulated episodes."""
    alice_bit, hadamard, action = config
    out = simulate(alice_bit, hadamard, action, rng, batch=samples)
    labels = outcome_labels(action)
    columns = [out["eve" if name in ("eve", "E") else name] for name in labels]
    code = np.zeros(samples, dtype=np.int64)
    for col in columns:
        code = (code << 1) | np.asarray(col, dtype=np.int64)
    counts = np.bincount(code, minlength=2 ** len(labels))
    width = len(labels)
    return {format(i, f"0{width}b"): counts[i] / samples for i in range(2**width)}


def tv_distance(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def oracle_vs_monte_carlo(config: Config, samples: int, rng: np.random.Generator) -> float:
    if samples < 1000:
        raise ValueError("need at least 1000 samples for a meaningful comparison")
    exact = exact_distribution(*config)
    return tv_distance(monte_carlo_frequencies(config, samples, rng), exact.table)


def action_weights(attack: AttackModel) -> dict:
    """Per-episode probability of each concrete action under ``attack``."""
    p = attack.probability
    if attack.kind is AttackKind.NONE or p == 0:
        return {AttackAction.NONE: 1.0}
    weights = {AttackAction.NONE: 1.0 - p}
    if attack.kind is AttackKind.COLLECTIVE_CNOT:
        weights[AttackAction.COLLECTIVE_H if attack.pre_hadamard else AttackAction.COLLECTIVE] = p
    elif attack.policy is BasisPolicy.ALWAYS_Z:
        weights[AttackAction.INTERCEPT_Z] = p
    elif attack.policy is BasisPolicy.ALWAYS_X:
        weights[AttackAction.INTERCEPT_X] = p
    else:
        weights[AttackAction.INTERCEPT_Z] = weights[AttackAction.INTERCEPT_X] = p / 2
    return weights


def expected_check_error_rate(params: ProtocolParams, attack: AttackModel) -> float:
    """Exact per-check-episode error rate implied by the oracle.

    Check bits are uniform and the Hadamard subset is drawn independently
    of the check subset, so the rate is a plain mixture over cells.
    """
    h_frac = params.n_hadamard / params.n_pairs
    terms = []
    for action, w in action_weights(attack).items():
        for h, wh in ((True, h_frac), (False, 1.0 - h_frac)):
            for b in (0, 1):
                terms.append(w * wh * 0.5 * exact_distribution(b, h, action).check_error())
    return math.fsum(terms)


# -- rates and information ---------------------------------------------------

_Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class RateEstimate:
    errors: int
    trials: int
    rate: float
    low: float
    high: float

    @property
    def half_width(self) -> float:
        return (self.high - self.low) / 2

    def to_dict(self) -> dict:
        return {"errors": self.errors, "trials": self.trials, "rate": self.rate, "ci95": [self.low, self.high]}


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("Wilson interval needs at least one trial")
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    spread = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - spread), min(1.0, centre + spread)


def rate_estimate(mismatches: Iterable[bool]) -> RateEstimate:
    flags = [bool(m) for m in mismatches]
    k, n = sum(flags), len(flags)
    low, high = wilson_interval(k, n)
    return RateEstimate(k, n, k / n, low, high)


@dataclass(frozen=True)
class RateSummary:
    check: RateEstimate
    message: Optional[RateEstimate]
    detected: bool


def _mismatch(record) -> bool:
    return recover_bit(record.alice_a_bit, record.bob_x_bit) != record.episode.alice_bit


def estimate_rates(records: list, params: ProtocolParams) -> RateSummary:
    if not records:
        raise ValueError("no episode records to estimate from")
    checks = [_mismatch(r) for r in records if r.episode.role is Role.CHECK]
    if not checks:
        raise ValueError("records contain no check episodes")
    messages = [_mismatch(r) for r in records if r.episode.role is Role.MESSAGE]
    check = rate_estimate(checks)
    return RateSummary(check, rate_estimate(messages) if messages else None, check.rate > params.abort_threshold)


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return -math.fsum(p * np.log2(p))


def empirical_mutual_information(pairs) -> float:
    """Plug-in mutual information (bits) of the empirical joint distribution."""
    arr = np.asarray(list(pairs))
    if arr.size == 0:
        return 0.0
    _, x = np.unique(arr[:, 0], return_inverse=True)
    _, y = np.unique(arr[:, 1], return_inverse=True)
    joint = np.zeros((x.max() + 1, y.max() + 1))
    np.add.at(joint, (x.ravel(), y.ravel()), 1)
    hx, hy = _entropy(joint.sum(axis=1)), _entropy(joint.sum(axis=0))
    mi = hx + hy - _entropy(joint.ravel())
    return float(min(max(mi, 0.0), hx, hy))


def eve_secret_pairs(result: SessionResult) -> list:
    """(Eve's bit, secret bit) for every message pair Eve actually touched."""
    return [
        (r.eve_record.symbol, r.episode.alice_bit)
        for r in result.records
        if r.episode.role is Role.MESSAGE and r.eve_record is not None and r.eve_record.symbol is not None
    ]


# -- reports -----------------------------------------------------------------


def bits_to_hex(bits: str) -> str:
    if not bits:
        return ""
    padded = bits + "0" * (-len(bits) % 4)
    return "".join(format(int(padded[i : i + 4], 2), "x") for i in range(0, len(padded), 4))


def hex_to_bits(text: str) -> str:
    text = text.lower().removeprefix("0x")
    try:
        return "".join(format(int(c, 16), "04b") for c in text)
    except ValueError:
        raise ValueError(f"not a hex string: {text!r}") from None


def config_key(config: Config) -> str:
    bit, had, action = config
    return f"{action.value}/bit={bit}/hadamard={'t' if had else 'f'}"


@dataclass
class SimulationReport:
    params: ProtocolParams
    attack: AttackModel
    check_error_rate: RateEstimate
    expected_check_error_rate: float
    detected: bool
    aborted: bool
    recovered_message: Optional[str]
    message_bit_error_rate: Optional[RateEstimate]
    eve_mi_bits: float
    throughput: float
    oracle_tv_distances: dict = field(default_factory=dict)
    episodes_per_second: Optional[float] = None

    def to_dict(self) -> dict:
        """Deterministic report body; timing lives in :meth:`metadata`."""
        return {
            "params": self.params.to_dict(),
            "attack": self.attack.to_dict(),
            "check_error_rate": self.check_error_rate.rate,
            "ci95": [self.check_error_rate.low, self.check_error_rate.high],
            "check_episodes": self.check_error_rate.trials,
            "expected_check_error_rate": self.expected_check_error_rate,
            "detected": self.detected,
            "aborted": self.aborted,
            "recovered_message_hex": None if self.recovered_message is None else bits_to_hex(self.recovered_message),
            "recovered_message_bits": None if self.recovered_message is None else len(self.recovered_message),
            "message_bit_error_rate": None if self.message_bit_error_rate is None else self.message_bit_error_rate.rate,
            "eve_mi_bits": self.eve_mi_bits,
            "throughput": self.throughput,
            "oracle_tv_distances": dict(sorted(self.oracle_tv_distances.items())),
        }

    def metadata(self) -> dict:
        return {"episodes_per_second": self.episodes_per_second}


def build_report(
    result: SessionResult,
    elapsed: Optional[float] = None,
    tv_samples: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> SimulationReport:
    params, attack = result.params, result.attack
    rates = estimate_rates(result.records, params)
    tv = {}
    if tv_samples:
        rng = rng if rng is not None else np.random.default_rng(params.master_seed)
        for config in all_configs(action_weights(attack)):
            tv[config_key(config)] = oracle_vs_monte_carlo(config, tv_samples, rng)
    return SimulationReport(
        params=params,
        attack=attack,
        check_error_rate=rates.check,
        expected_check_error_rate=expected_check_error_rate(params, attack),
        detected=rates.detected,
        aborted=result.aborted,
        recovered_message=result.recovered_message,
        message_bit_error_rate=None if result.aborted else rates.message,
        eve_mi_bits=empirical_mutual_information(eve_secret_pairs(result)),
        throughput=params.throughput,
        oracle_tv_distances=tv,
        episodes_per_second=None if not elapsed else params.n_pairs / elapsed,
    )
