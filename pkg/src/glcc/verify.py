"""Machine-runnable property suites behind the `verify` CLI command.

Each suite returns {check name: bool}; suites are deterministic given the
seed and sized to finish in seconds.
"""

import random
from itertools import combinations

from . import coding
from .coding import GlccParams, NoiseRng, build_domain, derive_seed, privacy_certificate
from .fields import PrimeField
from .poly import DecodeFailure, Poly, lagrange_interpolate, rs_decode
from .program import perceptron_gradient, square_map
from .training import (
    QuantConfig,
    TrainConfig,
    dequantize,
    quantize,
    synthetic_dataset,
    train,
)

SUITES = ("field", "poly", "glcc", "privacy", "train")


def field_suite(seed=0) -> dict:
    results = {}
    rng = random.Random(derive_seed(seed, "field"))
    for q in (17, 97, 2**27 - 39):
        f = PrimeField(q)
        ok = True
        for _ in range(2000):
            a, b, c = (rng.randrange(q) for _ in range(3))
            ok &= (a + b) % q == f.add(a, b)
            ok &= (a * b % q * c % q) == f.mul(f.mul(a, b), c)
            ok &= f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
            if a:
                ok &= f.mul(a, f.inv(a)) == 1
                ok &= f.inv(f.inv(a)) == a
        results[f"arith_q{q}"] = ok
    f = PrimeField(97)
    vals = [rng.randrange(1, 97) for _ in range(64)]
    inv = f.batch_inv(vals)
    results["batch_inverse"] = all(v * i % 97 == 1 for v, i in zip(vals, inv))
    return results


def poly_suite(seed=0) -> dict:
    results = {}
    f = PrimeField(97)
    rng = random.Random(derive_seed(seed, "poly"))
    ok = True
    for _ in range(100):
        deg = rng.randrange(0, 65)
        coeffs = [rng.randrange(97) for _ in range(deg)] + [rng.randrange(1, 97)]
        p = Poly(coeffs, f)
        xs = rng.sample(range(97), deg + 1)
        back = lagrange_interpolate([(x, p(x)) for x in xs], f)
        ok &= back == p
    results["interpolation_roundtrip"] = ok

    ok = True
    for _ in range(200):
        k = rng.randrange(1, 30)
        e = rng.randrange(0, 4)
        n = k + 2 * e
        if n > 90:
            continue
        xs = rng.sample(range(97), n)
        p = Poly([rng.randrange(97) for _ in range(k)], f)
        ys = [p(x) for x in xs]
        for i in rng.sample(range(n), e):
            ys[i] = (ys[i] + 1 + rng.randrange(96)) % 97
        got = rs_decode(list(zip(xs, ys)), k, e, f)
        ok &= got == p
    results["rs_corrupt_and_recover"] = ok

    ok = True
    for _ in range(200):
        k = rng.randrange(1, 10)
        n = k + 2
        xs = rng.sample(range(97), n)
        p = Poly([rng.randrange(97) for _ in range(k)], f)
        ys = [p(x) for x in xs]
        for i in rng.sample(range(n), 2):
            ys[i] = (ys[i] + 1 + rng.randrange(96)) % 97
        try:
            got = rs_decode(list(zip(xs, ys)), k, 1, f)
            ok &= sum(1 for x, y in zip(xs, ys) if got(x) == y) >= n - 1
        except DecodeFailure:
            pass
    results["rs_no_silent_wrong_answers"] = ok
    return results


def glcc_suite(seed=0) -> dict:
    results = {}
    f = PrimeField(97)
    rng = random.Random(derive_seed(seed, "glcc"))
    prog = square_map()
    ok = True
    for trial in range(50):
        while True:
            g = rng.choice([1, 2])
            m = g * rng.randrange(1, 4)
            l = rng.randrange(1, 3)
            t = rng.randrange(0, 2)
            a = rng.randrange(0, 2)
            n = rng.randrange(2, 16)
            try:
                params = GlccParams(
                    field=f, program=prog, n_workers=n, n_inputs=m,
                    privacy=t, adversaries=a, groups=g, subresponses=l,
                )
                break
            except ValueError:
                continue
        dom = build_domain(params)
        data = [{"x": rng.randrange(97)} for _ in range(m)]
        shares = coding.encode(data, params, dom, NoiseRng(derive_seed(seed, "enc", trial)))
        resp = [sr for s in shares for sr in coding.worker_respond(s, params, dom)]
        out = coding.decode(resp, params, dom)
        ok &= out == [prog.evaluate(f, x) for x in data]
    results["decode_matches_direct_evaluation"] = ok

    report = coding.cost_report(
        GlccParams(field=PrimeField(2**27 - 39), program=perceptron_gradient(2, 2),
                   n_workers=50, n_inputs=5, privacy=1, groups=1, subresponses=2)
    )
    results["cost_formulas"] = report["P_u"] == 100 and report["P_d"] == 44
    return results


def privacy_suite(seed=0, n_workers=8) -> dict:
    results = {}
    f = PrimeField(97)
    ok = True
    for t in (1, 2):
        for l in (1, 2):
            for g in (1, 2):
                m = 2 * g
                params = GlccParams(
                    field=f, program=square_map(), n_workers=30, n_inputs=m,
                    privacy=t, adversaries=0, groups=g, subresponses=l,
                )
                dom = build_domain(params)
                for subset in combinations(range(n_workers), t):
                    ok &= privacy_certificate(params, dom, subset)
    results["masking_matrices_invertible"] = ok
    results["share_marginal_uniform"] = bool(share_uniformity_pvalue(seed) > 0.01)
    return results


def share_uniformity_pvalue(seed=0, draws=10_000) -> float:
    """Chi-square p-value for a single worker share coordinate being uniform
    over F_97, with the dataset held fixed and the noise redrawn."""
    from scipy.stats import chisquare

    f = PrimeField(97)
    params = GlccParams(
        field=f, program=square_map(), n_workers=8, n_inputs=2,
        privacy=1, adversaries=0, groups=1, subresponses=1,
    )
    dom = build_domain(params)
    data = [[41], [7]]
    counts = [0] * 97
    for i in range(draws):
        shares = coding.encode_vectors(data, params, dom, NoiseRng(derive_seed(seed, "u", i)))
        counts[shares[0][0][0][0]] += 1
    return chisquare(counts).pvalue


def train_suite(seed=0) -> dict:
    results = {}
    f = PrimeField(2**61 - 1)
    quant = QuantConfig(field=f, data_bits=4, weight_bits=6)
    results["quantize_roundtrip"] = all(
        abs(dequantize(quantize(x / 64.0, 6, f), 6, f) - x / 64.0) <= 2**-7
        for x in range(-64, 65)
    )
    datasets = [synthetic_dataset(40, 4, seed=derive_seed(seed, "data", i))[:2] for i in range(2)]
    cfg = TrainConfig(learning_rate=0.1, iterations=5, seed=derive_seed(seed, "train"))
    glcc_cfg = {"N": 15, "T": 1, "G": 1, "L": 1}
    coded = train(datasets, glcc_cfg, quant, cfg, coded=True)
    plain = train(datasets, glcc_cfg, quant, cfg, coded=False)
    results["coded_equals_plaintext_trajectory"] = coded.weights == plain.weights
    return results


def run_suites(names, seed=0) -> dict:
    runners = {
        "field": field_suite,
        "poly": poly_suite,
        "glcc": glcc_suite,
        "privacy": privacy_suite,
        "train": train_suite,
    }
    report = {}
    for name in names:
        if name not in runners:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
        report[name] = runners[name](seed=seed)
    return report
