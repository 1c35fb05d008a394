import random

import pytest

from glcc.coding import GlccParams, build_domain
from glcc.fields import PrimeField
from glcc.program import square_map
from glcc.sim import (
    AdversaryModel,
    ExponentialStraggler,
    FixedStraggler,
    expected_kth_delay,
    run_campaign,
    run_round,
    sample_delays,
)

F97 = PrimeField(97)


def _setup(n_workers=8, adversaries=1):
    params = GlccParams(
        field=F97, program=square_map(), n_workers=n_workers, n_inputs=4,
        privacy=1, adversaries=adversaries, groups=2, subresponses=2,
    )
    domain = build_domain(params)
    dataset = [{"x": v} for v in (3, 7, 11, 13)]
    return params, domain, dataset


def test_straggler_model_validation():
    with pytest.raises(ValueError):
        FixedStraggler(p=1.5, delay=1.0)
    with pytest.raises(ValueError):
        ExponentialStraggler(rate=0.0)
    with pytest.raises(TypeError):
        sample_delays(object(), 3, random.Random(0))


def test_sample_delays():
    rng = random.Random(0)
    assert sample_delays(None, 4, rng) == [0.0] * 4
    assert sample_delays(FixedStraggler(p=1.0, delay=2.5), 3, rng) == [2.5] * 3
    assert sample_delays(FixedStraggler(p=0.0, delay=2.5), 3, rng) == [0.0] * 3
    delays = sample_delays(ExponentialStraggler(rate=2.0), 100_000, rng)
    mean = sum(delays) / len(delays)
    assert abs(mean - 0.5) < 0.01  # mean of Exp(2) is 1/2


def test_adversary_model_validation():
    with pytest.raises(ValueError, match="strategy"):
        AdversaryModel(strategy="replay")


def test_round_without_stragglers_is_exact():
    params, domain, dataset = _setup()
    t = run_round(dataset, params, domain, seed=0)
    assert t.outcome == "exact" and t.success
    assert t.outputs == [[v * v % 97] for v in (3, 7, 11, 13)]
    assert len(t.used_workers) == params.recovery_threshold
    assert t.decode_time == pytest.approx(0.01 * 2 * 2)  # base compute only


def test_round_decode_time_is_kth_fastest_completion():
    params, domain, dataset = _setup()
    strag = ExponentialStraggler(rate=1.0)
    t = run_round(dataset, params, domain, straggler=strag, seed=1)
    done = sorted(max(times) for times in t.completion_times)
    assert t.decode_time == done[params.recovery_threshold - 1]
    assert t.success


def test_round_tolerates_worst_case_adversary_placement():
    params, domain, dataset = _setup()
    adv = AdversaryModel(strategy="random-value")
    strag = ExponentialStraggler(rate=3.0)
    for seed in range(10):
        t = run_round(dataset, params, domain, straggler=strag, adversary=adv, seed=seed)
        assert t.outcome == "exact"
        # default placement corrupts the fastest workers, inside the used set
        assert set(t.adversary_workers) <= set(t.used_workers)
        assert len(t.adversary_workers) == params.adversaries


def test_all_adversary_strategies_are_absorbed():
    params, domain, dataset = _setup()
    for strategy in AdversaryModel.STRATEGIES:
        t = run_round(dataset, params, domain,
                      adversary=AdversaryModel(strategy=strategy), seed=2)
        assert t.outcome == "exact"


def test_explicit_corrupt_set_and_bound():
    params, domain, dataset = _setup()
    t = run_round(dataset, params, domain,
                  adversary=AdversaryModel(corrupt_set=(5,)), seed=3)
    assert t.adversary_workers == [5] and t.outcome == "exact"
    with pytest.raises(ValueError, match="corrupt set"):
        run_round(dataset, params, domain,
                  adversary=AdversaryModel(corrupt_set=(1, 2)), seed=3)


def test_adversary_ignored_when_budget_is_zero():
    params, domain, dataset = _setup(adversaries=0)
    t = run_round(dataset, params, domain, adversary=AdversaryModel(), seed=4)
    assert t.adversary_workers == [] and t.outcome == "exact"


def test_round_determinism():
    params, domain, dataset = _setup()
    strag = ExponentialStraggler(rate=2.0)
    adv = AdversaryModel()
    t1 = run_round(dataset, params, domain, straggler=strag, adversary=adv, seed=11)
    t2 = run_round(dataset, params, domain, straggler=strag, adversary=adv, seed=11)
    assert t1 == t2
    t3 = run_round(dataset, params, domain, straggler=strag, adversary=adv, seed=12)
    assert t1.delays != t3.delays


def test_latency_monotone_in_delays():
    # coupled comparison: scaling every delay up cannot decrease decode time
    params, domain, dataset = _setup()
    slow = run_round(dataset, params, domain,
                     straggler=FixedStraggler(p=0.5, delay=3.0), seed=5)
    fast = run_round(dataset, params, domain,
                     straggler=FixedStraggler(p=0.5, delay=1.0), seed=5)
    assert slow.decode_time >= fast.decode_time
    assert slow.delays == [3.0 * (d / 1.0) for d in fast.delays]


def test_streaming_round_decodes_earlier_or_equal():
    params, domain, dataset = _setup()
    strag = ExponentialStraggler(rate=2.0)
    for seed in range(5):
        blocking = run_round(dataset, params, domain, straggler=strag, seed=seed)
        streaming = run_round(dataset, params, domain, straggler=strag,
                              seed=seed, streaming=True)
        assert streaming.outcome == "exact"
        assert streaming.decode_time <= blocking.decode_time
        for times in streaming.completion_times:
            assert times == sorted(times)


def test_transcript_counters_match_cost_formulas():
    params, domain, dataset = _setup()
    t = run_round(dataset, params, domain, seed=6)
    g, l, n = params.groups, params.subresponses, params.n_workers
    assert t.uploaded_elements == g * l * n * params.program.input_len
    assert t.downloaded_elements == params.recovery_threshold * l * params.program.output_len


def test_transcript_check_rejects_time_travel():
    params, domain, dataset = _setup()
    t = run_round(dataset, params, domain, seed=7)
    t.completion_times[0] = [2.0, 1.0]
    with pytest.raises(ValueError, match="nondecreasing"):
        t.check()


def test_campaign_aggregates_and_is_deterministic():
    params, domain, dataset = _setup()
    cfgs = [{
        "name": "demo", "params": params, "domain": domain, "dataset": dataset,
        "straggler": ExponentialStraggler(rate=2.0),
    }]
    s1 = run_campaign(cfgs, rounds=20, seed=1)
    s2 = run_campaign(cfgs, rounds=20, seed=1)
    assert s1 == s2
    (summary,) = s1
    assert summary["rounds"] == 20 and summary["success_rate"] == 1.0
    assert summary["K"] == params.recovery_threshold
    lats = [row["latency"] for row in summary["rows"]]
    assert summary["mean_latency"] == pytest.approx(sum(lats) / 20)
    assert min(lats) <= summary["p50_latency"] <= summary["p90_latency"] <= max(lats)
    with pytest.raises(ValueError):
        run_campaign([], rounds=5)


def test_expected_kth_delay_formula():
    # k=n is the maximum: H_n / rate
    assert expected_kth_delay(1.0, 3, 3) == pytest.approx(1 + 0.5 + 1 / 3)
    # k=1 is the minimum of n exponentials: 1/(n*rate)
    assert expected_kth_delay(2.0, 10, 1) == pytest.approx(1 / 20)
    with pytest.raises(ValueError):
        expected_kth_delay(1.0, 3, 4)


def test_expected_kth_delay_matches_simulation():
    rng = random.Random(42)
    n, k, rate = 20, 12, 2.0
    total = 0.0
    trials = 4000
    for _ in range(trials):
        delays = sorted(rng.expovariate(rate) for _ in range(n))
        total += delays[k - 1]
    assert total / trials == pytest.approx(expected_kth_delay(rate, n, k), rel=0.05)
