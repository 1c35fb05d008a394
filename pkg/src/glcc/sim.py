"""Deterministic virtual-time master/worker simulator.

Delays are numbers, not sleeps: a round is fully determined by its seed,
so latency experiments are exact and hardware-independent. Worker compute
time is charged as (unit cost) * G * L abstract seconds; straggler models
add per-worker delays on top.
"""

import math
import random
from dataclasses import dataclass

from . import coding
from .coding import GlccParams, EvaluationDomain, NoiseRng, derive_seed


@dataclass(frozen=True)
class FixedStraggler:
    """Each worker independently stalls for `delay` seconds with
    probability p."""

    p: float
    delay: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("straggler probability must be in [0, 1]")


@dataclass(frozen=True)
class ExponentialStraggler:
    """I.i.d. exponential delay with the given rate (mean 1/rate)."""

    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")


def sample_delays(model, n: int, rng: random.Random):
    """One virtual delay per worker; None model means no delays."""
    if model is None:
        return [0.0] * n
    if isinstance(model, FixedStraggler):
        return [model.delay if rng.random() < model.p else 0.0 for _ in range(n)]
    if isinstance(model, ExponentialStraggler):
        return [rng.expovariate(model.rate) for _ in range(n)]
    raise TypeError(f"unknown straggler model {model!r}")


@dataclass(frozen=True)
class AdversaryModel:
    """Which workers corrupt their sub-responses and how.

    corrupt_set None means the worst-case placement: the A fastest workers
    of the round. Strategies: random-value, fixed-value,
    bitflip-one-coordinate.
    """

    strategy: str = "random-value"
    corrupt_set: tuple = None

    STRATEGIES = ("random-value", "fixed-value", "bitflip-one-coordinate")

    def __post_init__(self):
        if self.strategy not in self.STRATEGIES:
            raise ValueError(f"unknown adversary strategy {self.strategy!r}")


def _corrupt_values(values, strategy, rng, q):
    values = list(values)
    if strategy == "random-value":
        return tuple((v + 1 + rng.randrange(q - 1)) % q for v in values)
    if strategy == "fixed-value":
        return tuple((v + 1) % q for v in values)
    # bitflip-one-coordinate: flip one bit of one coordinate
    i = rng.randrange(len(values))
    v = values[i]
    while True:
        flipped = v ^ (1 << rng.randrange(max(q.bit_length() - 1, 1)))
        if flipped < q and flipped != v:
            break
    values[i] = flipped
    return tuple(values)


@dataclass
class RoundTranscript:
    seed: int
    base_times: list
    delays: list
    completion_times: list  # per worker, per sub-response index
    used_workers: list
    adversary_workers: list
    decode_time: float
    success: bool
    outcome: str  # "exact", "decode-failure", or "mismatch"
    outputs: list
    uploaded_elements: int
    downloaded_elements: int

    def check(self):
        for times in self.completion_times:
            last = 0.0
            for t in times:
                if t < last:
                    raise ValueError("completion times must be nondecreasing")
                last = t


def run_round(
    dataset,
    params: GlccParams,
    domain: EvaluationDomain,
    straggler=None,
    adversary=None,
    base_unit_cost: float = 0.01,
    seed: int = 0,
    streaming: bool = False,
    check_oracle: bool = True,
) -> RoundTranscript:
    """Simulate one sharing/computation/reconstruction round.

    All-or-nothing mode: a worker emits all L sub-responses at
    base + delay; the master decodes the instant the K-th fastest worker
    completes. Streaming mode: the l-th sub-response lands at
    base*(l+1)/L + delay and the master decodes as soon as enough
    sub-responses have arrived. The transcript records whether the decoded
    outputs equal direct evaluation of the program.
    """
    n, l_cnt = params.n_workers, params.subresponses
    k = params.recovery_threshold
    f = params.field
    delay_rng = random.Random(derive_seed(seed, "delays"))
    adv_rng = random.Random(derive_seed(seed, "adversary"))
    noise_rng = NoiseRng(derive_seed(seed, "noise"))

    shares = coding.encode(dataset, params, domain, noise_rng)
    honest = {s.worker_id: coding.worker_respond(s, params, domain) for s in shares}

    base = base_unit_cost * params.groups * l_cnt
    delays = sample_delays(straggler, n, delay_rng)
    base_times = [base] * n
    if streaming:
        completion = [
            [base * (li + 1) / l_cnt + delays[ni] for li in range(l_cnt)]
            for ni in range(n)
        ]
    else:
        completion = [[base + delays[ni]] * l_cnt for ni in range(n)]

    worker_done = [max(times) for times in completion]
    speed_order = sorted(range(n), key=lambda ni: (worker_done[ni], ni))

    adversary_workers = []
    if adversary is not None and params.adversaries > 0:
        if adversary.corrupt_set is None:
            adversary_workers = speed_order[: params.adversaries]
        else:
            adversary_workers = list(adversary.corrupt_set)
            if len(adversary_workers) > params.adversaries:
                raise ValueError("corrupt set larger than the adversary bound")
        for ni in adversary_workers:
            honest[ni] = [
                coding.SubResponse(
                    worker_id=sr.worker_id,
                    index=sr.index,
                    values=_corrupt_values(sr.values, adversary.strategy, adv_rng, f.q),
                )
                for sr in honest[ni]
            ]

    if streaming:
        arrivals = sorted(
            (completion[ni][li], ni, li) for ni in range(n) for li in range(l_cnt)
        )
        needed = params.response_degree + 1 + 2 * params.adversaries * l_cnt
        taken = arrivals[:needed]
        decode_time = taken[-1][0] if taken else 0.0
        ordered = [honest[ni][li] for _, ni, li in taken]
        used_workers = sorted({ni for _, ni, _ in taken})
        downloaded = len(ordered) * params.program.output_len
    else:
        used_workers = speed_order[:k]
        decode_time = worker_done[used_workers[-1]]
        ordered = [sr for ni in used_workers for sr in honest[ni]]
        downloaded = k * l_cnt * params.program.output_len

    uploaded = n * params.groups * l_cnt * params.program.input_len

    try:
        outputs = coding.decode(ordered, params, domain, streaming=streaming)
        outcome = "exact"
        success = True
    except coding.DecodeFailure:
        outputs = []
        outcome = "decode-failure"
        success = False

    if success and check_oracle:
        expected = [params.program.evaluate(f, x) for x in dataset]
        if outputs != expected:
            outcome = "mismatch"
            success = False

    transcript = RoundTranscript(
        seed=seed,
        base_times=base_times,
        delays=delays,
        completion_times=completion,
        used_workers=list(used_workers),
        adversary_workers=adversary_workers,
        decode_time=decode_time,
        success=success,
        outcome=outcome,
        outputs=outputs,
        uploaded_elements=uploaded,
        downloaded_elements=downloaded,
    )
    transcript.check()
    return transcript


def run_campaign(configs, rounds: int, seed: int = 0):
    """Run each config for the given number of rounds; per-round seeds are
    derived from (seed, config index, round index), so independent rounds
    could be executed in any order with identical results."""
    if not configs:
        raise ValueError("campaign needs at least one config")
    summaries = []
    for ci, cfg in enumerate(configs):
        params = cfg["params"]
        domain = cfg["domain"]
        dataset = cfg["dataset"]
        latencies = []
        successes = 0
        rows = []
        for ri in range(rounds):
            t = run_round(
                dataset,
                params,
                domain,
                straggler=cfg.get("straggler"),
                adversary=cfg.get("adversary"),
                base_unit_cost=cfg.get("base_unit_cost", 0.01),
                seed=derive_seed(seed, "round", ci, ri),
                streaming=cfg.get("streaming", False),
            )
            latencies.append(t.decode_time)
            successes += t.success
            rows.append(
                {
                    "config": cfg.get("name", f"config-{ci}"),
                    "round": ri,
                    "latency": t.decode_time,
                    "success": int(t.success),
                    "uploaded": t.uploaded_elements,
                    "downloaded": t.downloaded_elements,
                }
            )
        latencies_sorted = sorted(latencies)
        report = coding.cost_report(params)
        summaries.append(
            {
                "name": cfg.get("name", f"config-{ci}"),
                "rounds": rounds,
                "K": report["K"],
                "P_u": report["P_u"],
                "P_d": report["P_d"],
                "mean_latency": sum(latencies) / rounds,
                "p50_latency": _percentile(latencies_sorted, 0.5),
                "p90_latency": _percentile(latencies_sorted, 0.9),
                "success_rate": successes / rounds,
                "rows": rows,
            }
        )
    return summaries


def _percentile(sorted_values, frac):
    if not sorted_values:
        return math.nan
    idx = min(len(sorted_values) - 1, int(frac * len(sorted_values)))
    return sorted_values[idx]


def expected_kth_delay(rate: float, n: int, k: int) -> float:
    """Mean of the k-th order statistic of n i.i.d. Exp(rate) delays:
    (H_n - H_{n-k}) / rate."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    return sum(1.0 / i for i in range(n - k + 1, n + 1)) / rate
