"""Command-line surface: golden demo, property verification, simulation
campaigns, and coded training runs.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

import csv
import json
import os
import random
import sys

import click
import yaml

from . import coding, plots, sim, training, verify
from .coding import GlccParams, NoiseRng, build_domain, derive_seed
from .fields import PrimeField
from .program import program_from_config, square_map
from .training import QuantConfig, TrainConfig


class ConfigError(click.ClickException):
    exit_code = 2


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return cfg


def _require(cfg, key, path):
    if key not in cfg:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return cfg[key]


def _build_params(cfg, path, program=None):
    try:
        field = PrimeField(int(_require(cfg, "field_q", path)))
        if program is None:
            program = program_from_config(_require(cfg, "program", path))
        return GlccParams(
            field=field,
            program=program,
            n_workers=int(_require(cfg, "N", path)),
            n_inputs=int(_require(cfg, "M", path)),
            privacy=int(cfg.get("T", 0)),
            adversaries=int(cfg.get("A", 0)),
            groups=int(cfg.get("G", 1)),
            subresponses=int(cfg.get("L", 1)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}")


def _build_straggler(spec, path):
    if spec in (None, "none"):
        return None
    try:
        kind = spec.get("kind", "none")
        if kind == "none":
            return None
        if kind == "fixed":
            return sim.FixedStraggler(p=float(spec["p"]), delay=float(spec["delay"]))
        if kind == "exponential":
            return sim.ExponentialStraggler(rate=float(spec["rate"]))
    except (KeyError, ValueError, AttributeError) as exc:
        raise ConfigError(f"{path}: bad straggler spec: {exc}")
    raise ConfigError(f"{path}: unknown straggler kind {kind!r}")


def _build_adversary(spec, path):
    if spec in (None, "none"):
        return None
    try:
        return sim.AdversaryModel(
            strategy=spec.get("strategy", "random-value"),
            corrupt_set=tuple(spec["corrupt_set"]) if "corrupt_set" in spec else None,
        )
    except (ValueError, AttributeError) as exc:
        raise ConfigError(f"{path}: bad adversary spec: {exc}")


def _random_program_inputs(program, field, m, seed):
    rng = random.Random(derive_seed(seed, "dataset"))
    data = []
    for _ in range(m):
        tensors = {}
        for name, shape in program.inputs.items():
            if not shape:
                tensors[name] = rng.randrange(field.q)
            elif len(shape) == 1:
                tensors[name] = [rng.randrange(field.q) for _ in range(shape[0])]
            else:
                tensors[name] = [
                    [rng.randrange(field.q) for _ in range(shape[1])]
                    for _ in range(shape[0])
                ]
        data.append(tensors)
    return data


@click.group()
def main():
    """Coded distributed computing toolkit: private, straggler- and
    adversary-tolerant polynomial evaluation over simulated workers."""


@main.command()
@click.option("--q", "q", default=97, show_default=True, help="Prime field size.")
@click.option("--seed", default=0, show_default=True)
@click.option("--inputs", "inputs_csv", default=None,
              help="Comma-separated data values, e.g. '1,2,3,4'.")
def demo(q, seed, inputs_csv):
    """Golden walkthrough: square 4 inputs with G=L=2, T=A=1 on the
    classic node layout, tolerating one corrupted worker."""
    try:
        field = PrimeField(q)
        params = GlccParams(
            field=field, program=square_map(), n_workers=8, n_inputs=4,
            privacy=1, adversaries=1, groups=2, subresponses=2,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    failures = 0

    def check(name, ok):
        nonlocal failures
        click.echo(f"[{'ok' if ok else 'FAIL'}] {name}")
        failures += not ok

    k = params.recovery_threshold
    click.echo(f"K={k}")
    check("recovery threshold K=7", k == 7)

    domain = build_domain(params, layout="demo")
    check("beta grid {1,2,5,6},{3,4,7,8}",
          domain.beta == ((1, 2, 5, 6), (3, 4, 7, 8)))

    rng = random.Random(seed)
    if inputs_csv:
        try:
            values = [int(v) % q for v in inputs_csv.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --inputs: {exc}")
        if len(values) != 4:
            raise ConfigError("--inputs needs exactly 4 values")
    else:
        values = [rng.randrange(q) for _ in range(4)]
    click.echo(f"inputs X = {values}")

    dataset = [{"x": v} for v in values]
    noise = NoiseRng(derive_seed(seed, "demo-noise"))
    shares = coding.encode(dataset, params, domain, noise)

    # group polynomials hit the data at their nodes
    vectors = [[v] for v in values]
    node_ok = True
    probe = coding.encode_vectors(vectors, params, domain, NoiseRng(derive_seed(seed, "demo-noise")))
    from .poly import lagrange_eval_from_points
    # reconstruct f_g from worker evaluations and test the data nodes
    for g in range(2):
        pts = []
        for ni in range(4):
            for li in range(2):
                pts.append((domain.alpha[ni][li], probe[ni][li][g][0]))
        for r in range(2):
            want = values[g * 2 + r] % q
            got = lagrange_eval_from_points(pts, domain.beta[g][r], field)
            node_ok &= got == want
    check("f_g(beta_{g,r}) = X_{g,r} at every data node", node_ok)

    responses = [sr for s in shares for sr in coding.worker_respond(s, params, domain)]
    consts = coding.constant_factors(params, domain)
    check("interference constants (6,2,2,6)",
          [consts[0][0], consts[0][1], consts[1][0], consts[1][1]]
          == [6 % q, 2, 2, 6 % q])

    # corrupt one worker; A=1 must absorb it
    adv_rng = random.Random(derive_seed(seed, "demo-adv"))
    corrupted = []
    for sr in responses:
        if sr.worker_id == 0:
            vals = tuple((v + 1 + adv_rng.randrange(q - 1)) % q for v in sr.values)
            corrupted.append(coding.SubResponse(sr.worker_id, sr.index, vals))
        else:
            corrupted.append(sr)
    try:
        outputs = coding.decode(corrupted, params, domain)
    except coding.DecodeFailure:
        outputs = None
    expected = [[v * v % q] for v in values]
    check("recovered squares despite one corrupted worker", outputs == expected)
    if outputs is not None:
        click.echo(f"recovered phi(X) = {[o[0] for o in outputs]}")

    sys.exit(1 if failures else 0)


@main.command(name="verify")
@click.argument("suites", nargs=-1)
@click.option("--seed", default=0, show_default=True)
@click.option("--json", "json_path", default=None, help="Write the report to a file.")
def verify_cmd(suites, seed, json_path):
    """Run property suites (field, poly, glcc, privacy, train) and emit a
    machine-readable pass/fail report."""
    if not suites:
        raise ConfigError(f"no suites selected; choose from {', '.join(verify.SUITES)}")
    try:
        report = verify.run_suites(suites, seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc))
    payload = json.dumps(report, indent=2, sort_keys=True)
    if json_path:
        with open(json_path, "w") as fh:
            fh.write(payload + "\n")
    click.echo(payload)
    ok = all(v for suite in report.values() for v in suite.values())
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--output", "output_dir", default=".", show_default=True)
@click.option("--mode", type=click.Choice(["all-or-nothing", "streaming"]),
              default="all-or-nothing", show_default=True)
def bench(config_path, seed, output_dir, mode):
    """Run a virtual-time simulation campaign; writes a per-round CSV, a
    summary JSON, and a latency figure."""
    cfg = _load_config(config_path)
    seed = seed if seed is not None else int(cfg.get("seed", 0))
    rounds = int(cfg.get("rounds", 100))
    straggler = _build_straggler(cfg.get("straggler"), config_path)
    adversary = _build_adversary(cfg.get("adversary"), config_path)
    base_unit_cost = float(cfg.get("base_unit_cost", 0.01))
    streaming = mode == "streaming"

    variants = cfg.get("variants") or [
        {"name": cfg.get("name", "config-0"), "G": cfg.get("G", 1), "L": cfg.get("L", 1)}
    ]
    campaign = []
    for var in variants:
        var_cfg = dict(cfg)
        var_cfg.update(var)
        params = _build_params(var_cfg, config_path)
        domain = build_domain(params, seed=seed)
        dataset = _random_program_inputs(params.program, params.field,
                                         params.n_inputs, seed)
        campaign.append({
            "name": var.get("name", f"G{var_cfg.get('G', 1)}L{var_cfg.get('L', 1)}"),
            "params": params,
            "domain": domain,
            "dataset": dataset,
            "straggler": straggler,
            "adversary": adversary,
            "base_unit_cost": base_unit_cost,
            "streaming": streaming,
        })

    summaries = sim.run_campaign(campaign, rounds=rounds, seed=seed)

    os.makedirs(output_dir, exist_ok=True)
    rounds_path = os.path.join(output_dir, "rounds.csv")
    with open(rounds_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["config", "round", "latency", "success", "uploaded", "downloaded"]
        )
        writer.writeheader()
        for s in summaries:
            for row in s["rows"]:
                writer.writerow(row)

    summary_path = os.path.join(output_dir, "summary.json")
    slim = [{k: v for k, v in s.items() if k != "rows"} for s in summaries]
    with open(summary_path, "w") as fh:
        json.dump({"seed": seed, "mode": mode, "configs": slim}, fh, indent=2)
        fh.write("\n")

    figure_path = os.path.join(output_dir, "latency.png")
    plots.save_latency_figure(summaries, figure_path)

    for s in slim:
        click.echo(
            f"{s['name']}: K={s['K']} P_u={s['P_u']} P_d={s['P_d']} "
            f"mean latency {s['mean_latency']:.4f}s success {s['success_rate']:.2f}"
        )
    click.echo(f"wrote {rounds_path}, {summary_path}, {figure_path}")


@main.command(name="train")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--dataset", "dataset_paths", multiple=True, type=click.Path(),
              help="CSV dataset per model; overrides the config datasets.")
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--output", "output_dir", default=".", show_default=True)
@click.option("--plaintext", is_flag=True,
              help="Run the plaintext quantized-gradient reference instead of the coded pipeline.")
def train_cmd(config_path, dataset_paths, seed, output_dir, plaintext):
    """Train perceptron classifiers with coded gradient computation;
    writes history CSV, final weights JSON, and training-curve figures."""
    cfg = _load_config(config_path)
    seed = seed if seed is not None else int(cfg.get("seed", 0))

    paths = list(dataset_paths) or cfg.get("datasets") or []
    if paths:
        try:
            datasets = [training.load_csv_dataset(p) for p in paths]
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc))
    elif "synthetic" in cfg:
        syn = cfg["synthetic"]
        try:
            m = int(syn.get("models", 2))
            datasets = [
                training.synthetic_dataset(
                    int(syn["samples"]), int(syn["features"]),
                    seed=derive_seed(seed, "synthetic", i),
                )[:2]
                for i in range(m)
            ]
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{config_path}: bad synthetic spec: {exc}")
    else:
        raise ConfigError(f"{config_path}: provide datasets or a synthetic spec")

    try:
        field = PrimeField(int(_require(cfg, "field_q", config_path)))
        quant_cfg = _require(cfg, "quant", config_path)
        quant = QuantConfig(
            field=field,
            data_bits=int(quant_cfg["data_bits"]),
            weight_bits=int(quant_cfg["weight_bits"]),
        )
        quant.check_bounds(
            x_bound=float(cfg.get("x_bound", 1.0)),
            w_bound=float(cfg.get("w_bound", 1.0)),
            s=len(datasets[0][0]),
            d=len(datasets[0][0][0]),
        )
        train_cfg = TrainConfig(
            learning_rate=float(_require(cfg, "learning_rate", config_path)),
            iterations=int(_require(cfg, "iterations", config_path)),
            batch_size=int(cfg.get("batch_size", 0)),
            momentum=float(cfg.get("momentum", 0.0)),
            seed=seed,
        )
        glcc_cfg = {
            "N": int(_require(cfg, "N", config_path)),
            "T": int(cfg.get("T", 0)),
            "A": int(cfg.get("A", 0)),
            "G": int(cfg.get("G", 1)),
            "L": int(cfg.get("L", 1)),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{config_path}: {exc}")
    except OverflowError as exc:
        raise ConfigError(f"{config_path}: quantization overflow: {exc}")

    straggler = _build_straggler(cfg.get("straggler"), config_path)
    try:
        result = training.train(
            datasets, glcc_cfg, quant, train_cfg,
            coded=not plaintext, straggler=straggler,
            base_unit_cost=float(cfg.get("base_unit_cost", 0.01)),
        )
    except OverflowError as exc:
        click.echo(f"quantization overflow: {exc}", err=True)
        sys.exit(1)
    except ValueError as exc:
        raise ConfigError(str(exc))

    os.makedirs(output_dir, exist_ok=True)
    history_path = os.path.join(output_dir, "history.csv")
    training.write_history_csv(history_path, result.history)
    weights_path = os.path.join(output_dir, "weights.json")
    with open(weights_path, "w") as fh:
        json.dump({"weights": result.weights, "seed": seed}, fh, indent=2)
        fh.write("\n")
    figure_path = os.path.join(output_dir, "curves.png")
    plots.save_training_curves(result.history, figure_path)

    final = result.history[-1]
    click.echo(f"final accuracy {final['accuracy']:.4f}, loss {final['loss']:.6f}")
    click.echo(f"wrote {history_path}, {weights_path}, {figure_path}")


if __name__ == "__main__":
    main()
