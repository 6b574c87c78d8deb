"""Timing harness and storage arithmetic.

Times are wall-clock nanoseconds from ``time.perf_counter_ns``. Reports can
optionally express them as equivalent clock cycles at a given frequency so
rows line up with cycle-count tables from embedded targets.
"""

from __future__ import annotations

import csv
import io
import math
import random
import statistics
import time
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from .curve import N
from .ecdsa import PrivateKey, keygen, sign, verify
from .keccak import keccak256
from .transaction import LegacyTransaction, SignedTransaction, signing_payload, v_for

DEFAULT_WARMUP = 10
DEFAULT_DISPERSION_THRESHOLD = 0.05
SECONDS_PER_DAY = 86400

Clock = Callable[[], int]


class TimingDispersionWarning(UserWarning):
    """Timing spread is high enough to be worth a side-channel look."""


@dataclass(frozen=True)
class BenchStats:
    min: float
    max: float
    mean: float
    standard_deviation: float
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.standard_deviation < 0:
            raise ValueError("standard deviation must be non-negative")
        if not self.min <= self.mean <= self.max:
            raise ValueError("stats violate min <= mean <= max")


def stats(samples: Sequence[float]) -> BenchStats:
    """Aggregate samples; SD is the population SD, so one sample gives 0."""
    if not samples:
        raise ValueError("no samples")
    mean = statistics.fmean(samples)
    # fmean of equal values can round a hair outside [min, max]
    mean = min(max(mean, min(samples)), max(samples))
    return BenchStats(
        min=min(samples),
        max=max(samples),
        mean=mean,
        standard_deviation=statistics.pstdev(samples) if len(samples) > 1 else 0.0,
        trials=len(samples),
    )


def time_samples(
    op: Callable,
    trials: int,
    gen: Optional[Callable[[int], tuple]] = None,
    warmup: int = DEFAULT_WARMUP,
    clock: Clock = time.perf_counter_ns,
) -> List[int]:
    """Per-trial durations of ``op(*gen(i))``; input generation is not timed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for i in range(warmup):
        op(*(gen(i) if gen else ()))
    out = []
    for i in range(trials):
        args = gen(i) if gen else ()
        t0 = clock()
        op(*args)
        out.append(clock() - t0)
    return out


def measure(op: Callable, trials: int, gen=None, warmup: int = DEFAULT_WARMUP, clock: Clock = time.perf_counter_ns) -> BenchStats:
    return stats(time_samples(op, trials, gen, warmup, clock))


def timing_dispersion(
    op: Callable,
    trials: int,
    gen=None,
    threshold: float = DEFAULT_DISPERSION_THRESHOLD,
    warmup: int = DEFAULT_WARMUP,
    clock: Clock = time.perf_counter_ns,
) -> float:
    """SD/mean over ``trials`` runs; warns above ``threshold``."""
    if trials < 100:
        raise ValueError("dispersion screening needs at least 100 trials")
    st = measure(op, trials, gen, warmup, clock)
    ratio = st.standard_deviation / st.mean if st.mean > 0 else 0.0
    if ratio > threshold:
        warnings.warn(
            f"timing SD/mean = {ratio:.4f} exceeds {threshold}", TimingDispersionWarning, stacklevel=2
        )
    return ratio


# --- ECDSA / transaction workloads ----------------------------------------


def _random_inputs(seed: int):
    rng = random.Random(seed)

    def gen(_i):
        key = PrivateKey(rng.randrange(1, N))
        data = rng.randbytes(rng.randrange(0, 128))
        return key, data

    return gen


def _random_tx(key, data, rng: random.Random):
    return LegacyTransaction(
        nonce=rng.randrange(0, 2**16),
        gas_price=20 * 10**9,
        gas_limit=21000 + 16 * len(data),
        to=rng.randbytes(20),
        value=rng.randrange(0, 10**18),
        data=data,
        chain_id=3,
    )


def ecdsa_workload(op: str, seed: int = 0):
    """Return ``(callable, gen)`` for ``keygen``, ``sign`` or ``verify``."""
    rng = random.Random(seed)
    if op == "keygen":
        return (lambda: keygen(lambda n: rng.randbytes(n))), None
    inputs = _random_inputs(seed)
    if op == "sign":
        def gen(i):
            key, data = inputs(i)
            return keccak256(data), key
        return sign, gen
    if op == "verify":
        def gen(i):
            key, data = inputs(i)
            digest = keccak256(data)
            return digest, sign(digest, key), key.public_key()
        return verify, gen
    raise ValueError(f"unknown op {op!r}")


PHASES = (2, 3, 4, 5)
PHASE_NAMES = {2: "rlp-encode", 3: "keccak256", 4: "ecdsa-sign", 5: "rlp-encode-signed"}


@dataclass(frozen=True)
class PhaseBreakdown:
    mean_ns: Dict[int, float]
    percent: Dict[int, float]
    trials: int

    @property
    def total_ns(self) -> float:
        return sum(self.mean_ns.values())


def phase_samples(trials: int, seed: int = 0, warmup: int = DEFAULT_WARMUP, clock: Clock = time.perf_counter_ns):
    """Per-phase durations for building and signing ``trials`` random transactions.

    Each trial draws a fresh key and random data. Key generation is not timed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    inputs = _random_inputs(seed)
    samples: Dict[int, List[int]] = {p: [] for p in PHASES}
    for i in range(warmup + trials):
        key, data = inputs(i)
        tx = _random_tx(key, data, rng)
        t0 = clock()
        payload = signing_payload(tx)
        t1 = clock()
        digest = keccak256(payload)
        t2 = clock()
        sig = sign(digest, key)
        t3 = clock()
        SignedTransaction(tx, sig.r, sig.s, v_for(tx.chain_id, sig.y_parity)).encode()
        t4 = clock()
        if i < warmup:
            continue
        samples[2].append(t1 - t0)
        samples[3].append(t2 - t1)
        samples[4].append(t3 - t2)
        samples[5].append(t4 - t3)
    return samples


def phase_breakdown(trials: int, seed: int = 0, warmup: int = DEFAULT_WARMUP, clock: Clock = time.perf_counter_ns) -> PhaseBreakdown:
    samples = phase_samples(trials, seed, warmup, clock)
    means = {p: statistics.fmean(samples[p]) for p in PHASES}
    total = sum(means.values())
    percent = {p: 100.0 * means[p] / total if total else 0.0 for p in PHASES}
    return PhaseBreakdown(means, percent, trials)


# --- reporting -------------------------------------------------------------

CSV_COLUMNS = ("op", "min_ns", "max_ns", "mean_ns", "sd_ns", "trials")


def format_table(rows: Dict[str, BenchStats], freq_hz: Optional[float] = None) -> str:
    """Min/Max/Mean/SD table, in ms or (given ``freq_hz``) millions of cycles."""
    if freq_hz:
        unit = "Mcycles"
        scale = freq_hz / 1e9 / 1e6
    else:
        unit = "ms"
        scale = 1e-6
    header = f"{'Function':<12}{'Min':>12}{'Max':>12}{'Mean':>12}{'SD':>12}{'Trials':>8}"
    lines = [f"# unit: {unit}", header, "-" * len(header)]
    for name, st in rows.items():
        lines.append(
            f"{name:<12}"
            f"{st.min * scale:>12.4f}{st.max * scale:>12.4f}{st.mean * scale:>12.4f}"
            f"{st.standard_deviation * scale:>12.4f}{st.trials:>8d}"
        )
    return "\n".join(lines) + "\n"


def format_csv(rows: Dict[str, BenchStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for name, st in rows.items():
        w.writerow([name, st.min, st.max, f"{st.mean:.1f}", f"{st.standard_deviation:.1f}", st.trials])
    return buf.getvalue()


def format_phases(pb: PhaseBreakdown) -> str:
    header = f"{'Phase':<6}{'Step':<20}{'Mean (ms)':>12}{'Perc.':>10}"
    lines = [header, "-" * len(header)]
    for p in PHASES:
        lines.append(f"{p:<6}{PHASE_NAMES[p]:<20}{pb.mean_ns[p] / 1e6:>12.4f}{pb.percent[p]:>9.2f}%")
    lines.append(f"{'total':<26}{pb.total_ns / 1e6:>12.4f}{sum(pb.percent.values()):>9.2f}%")
    return "\n".join(lines) + "\n"


def stats_dict(st: BenchStats) -> dict:
    return asdict(st)


# --- storage arithmetic ----------------------------------------------------


@dataclass(frozen=True)
class StorageEstimate:
    total_header_bytes: float
    daily_blocks: float
    daily_header_bytes: float


def estimate_node_storage(block_count: int, avg_header_bytes: float, block_interval_seconds: float) -> StorageEstimate:
    """Header storage for a light node, and its daily growth."""
    if block_interval_seconds == 0:
        raise ZeroDivisionError("block interval must be non-zero")
    if block_count <= 0 or avg_header_bytes <= 0 or block_interval_seconds < 0 or math.isnan(block_interval_seconds):
        raise ValueError("inputs must be positive")
    daily_blocks = SECONDS_PER_DAY / block_interval_seconds
    return StorageEstimate(
        total_header_bytes=block_count * avg_header_bytes,
        daily_blocks=daily_blocks,
        daily_header_bytes=daily_blocks * avg_header_bytes,
    )


def run_ops(ops: Iterable[str], trials: int, seed: int = 0, warmup: int = DEFAULT_WARMUP) -> Dict[str, BenchStats]:
    rows = {}
    for op in ops:
        fn, gen = ecdsa_workload(op, seed)
        rows[op] = measure(fn, trials, gen, warmup)
    return rows
