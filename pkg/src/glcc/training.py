"""Simultaneous training of M single-layer perceptron binary classifiers
with coded gradient computation over quantized data.

Reals are embedded in F_q by fixed-point quantization: data at l_x bits,
weights at l_w bits, labels at l_y = 2*l_x + 2*l_w bits so that both
gradient terms X^T(Xw)^3 and X^T(Xw o y) carry the same output precision
l_out = 4*l_x + 3*l_w. Data shares are encoded once before training; only
the weights are re-encoded each iteration.
"""

import csv
import math
import random
from dataclasses import dataclass

from . import coding
from .coding import GlccParams, NoiseRng, derive_seed
from .fields import PrimeField
from .program import perceptron_gradient


def _round_half_up(x: float) -> int:
    f = math.floor(x)
    return f if x - f < 0.5 else f + 1


def quantize(x: float, bits: int, field: PrimeField) -> int:
    """Fixed-point embedding of a real into F_q; negatives wrap to the
    upper half of the field."""
    r = _round_half_up((1 << bits) * x)
    if abs(r) >= (field.q - 1) // 2:
        raise OverflowError(
            f"quantized magnitude {abs(r)} exceeds field capacity {(field.q - 1) // 2}"
        )
    return r % field.q


def dequantize(v: int, bits: int, field: PrimeField) -> float:
    """Inverse embedding: values at or above (q-1)/2 are negative."""
    v %= field.q
    if v < (field.q - 1) // 2:
        return v / (1 << bits)
    return (v - field.q) / (1 << bits)


@dataclass(frozen=True)
class QuantConfig:
    """Quantization precisions. Label and output precisions are derived,
    never free."""

    field: PrimeField
    data_bits: int  # l_x
    weight_bits: int  # l_w

    def __post_init__(self):
        if self.data_bits < 0 or self.weight_bits < 0:
            raise ValueError("precisions must be nonnegative")

    @property
    def label_bits(self) -> int:
        return 2 * self.data_bits + 2 * self.weight_bits

    @property
    def output_bits(self) -> int:
        return 4 * self.data_bits + 3 * self.weight_bits

    def check_bounds(self, x_bound: float, w_bound: float, s: int, d: int):
        """Overflow guard: the largest plausible gradient coordinate,
        scaled to output precision, must stay below (q-1)/2.

        |x| <= x_bound and |w| <= w_bound are the declared data bounds;
        labels are in {0, 1}.
        """
        xw = d * x_bound * w_bound
        grad = s * (x_bound * xw ** 3 + x_bound * xw)
        if (1 << self.output_bits) * grad >= (self.field.q - 1) // 2:
            raise OverflowError(
                f"gradient magnitude bound {grad:.3g} at {self.output_bits} "
                f"fractional bits overflows field of size {self.field.q}"
            )


def quantize_matrix(rows, bits, field):
    return [[quantize(v, bits, field) for v in row] for row in rows]


def quantize_vector(vec, bits, field):
    return [quantize(v, bits, field) for v in vec]


def plaintext_gradient(Xq, yq, wq, field: PrimeField):
    """Direct field evaluation of X^T(Xw)^3 - X^T(Xw o y) on quantized
    inputs; straight-line matrix arithmetic, independent of the program
    DAG and the coded pipeline."""
    q = field.q
    xw = [sum(a * b for a, b in zip(row, wq)) % q for row in Xq]
    cube = [v * v % q * v % q for v in xw]
    mixed = [v * y % q for v, y in zip(xw, yq)]
    d = len(wq)
    out = []
    for j in range(d):
        t1 = sum(Xq[i][j] * cube[i] for i in range(len(Xq))) % q
        t2 = sum(Xq[i][j] * mixed[i] for i in range(len(Xq))) % q
        out.append((t1 - t2) % q)
    return out


def predict_accuracy(weights, X, y) -> float:
    """Fraction of samples where the rule (x.w)^2 > 0.5 predicts the label."""
    correct = 0
    for row, label in zip(X, y):
        s = sum(a * b for a, b in zip(row, weights))
        pred = 1 if s * s > 0.5 else 0
        correct += pred == label
    return correct / len(y)


def mse_loss(weights, X, y) -> float:
    total = 0.0
    for row, label in zip(X, y):
        s = sum(a * b for a, b in zip(row, weights))
        total += (s * s - label) ** 2
    return total / len(y)


def synthetic_dataset(s: int, d: int, seed: int, margin: float = 0.15):
    """Linearly separable binary set for the quadratic-activation rule:
    label 1 iff (x.w*)^2 > 0.5 for a planted w*, with samples resampled
    away from the decision boundary."""
    rng = random.Random(seed)
    w_star = [rng.uniform(-1.0, 1.0) for _ in range(d)]
    norm = math.sqrt(sum(v * v for v in w_star))
    w_star = [v / norm for v in w_star]
    threshold = math.sqrt(0.5)
    X, y = [], []
    while len(X) < s:
        row = [rng.uniform(-1.0, 1.0) for _ in range(d)]
        # scale the projection to land clear of the boundary
        proj = sum(a * b for a, b in zip(row, w_star))
        if abs(abs(proj) - threshold) < margin:
            continue
        X.append(row)
        y.append(1 if proj * proj > 0.5 else 0)
    return X, y, w_star


@dataclass
class TrainConfig:
    learning_rate: float
    iterations: int
    batch_size: int = 0  # 0 means full batch
    momentum: float = 0.0
    seed: int = 0


@dataclass
class TrainResult:
    weights: list  # per model
    history: list  # dicts: iteration, loss, accuracy, latency


class CodedTrainer:
    """Runs the coded gradient pipeline for M models at once.

    The quantized data part of every mini-batch is encoded exactly once up
    front; each iteration re-encodes only the quantized weights with fresh
    noise and concatenates the two encodings coordinate-wise.
    """

    def __init__(self, datasets, glcc_config, quant: QuantConfig, train_cfg: TrainConfig,
                 straggler=None, base_unit_cost=0.01):
        # datasets: list of (X, y) with identical shapes
        self.datasets = datasets
        self.quant = quant
        self.cfg = train_cfg
        self.field = quant.field
        self.straggler = straggler
        self.base_unit_cost = base_unit_cost
        m = len(datasets)
        s = len(datasets[0][0])
        self.d = len(datasets[0][0][0])
        for X, y in datasets:
            if len(X) != s or any(len(row) != self.d for row in X):
                raise ValueError("datasets must share a common shape")
            if any(label not in (0, 1) for label in y):
                raise ValueError("labels must be 0 or 1")
        batch = train_cfg.batch_size or s
        self.batch = batch
        self.batches = [list(range(i, min(i + batch, s))) for i in range(0, s, batch)]
        # drop a ragged tail batch so the program shape is constant
        self.batches = [b for b in self.batches if len(b) == batch]

        program = perceptron_gradient(batch, self.d)
        self.params = GlccParams(
            field=self.field,
            program=program,
            n_workers=glcc_config["N"],
            n_inputs=m,
            privacy=glcc_config.get("T", 0),
            adversaries=glcc_config.get("A", 0),
            groups=glcc_config.get("G", 1),
            subresponses=glcc_config.get("L", 1),
        )
        self.domain = coding.build_domain(self.params, seed=train_cfg.seed)
        self.program = program

        # quantize once; data shares per batch are iteration-independent
        lx, ly = quant.data_bits, quant.label_bits
        self.Xq = [quantize_matrix(X, lx, self.field) for X, _ in datasets]
        self.yq = [quantize_vector(y, ly, self.field) for _, y in datasets]
        self._data_shares = {}
        noise = NoiseRng(derive_seed(train_cfg.seed, "data-noise"))
        for bi, rows in enumerate(self.batches):
            vectors = []
            for mi in range(m):
                flat = []
                for i in rows:
                    flat.extend(self.Xq[mi][i])
                flat.extend(self.yq[mi][i] for i in rows)
                vectors.append(flat)
            self._data_shares[bi] = coding.encode_vectors(
                vectors, self.params, self.domain, noise
            )

    def virtual_latency(self, iteration):
        """Decode instant of the round: the K-th fastest worker's base
        compute time plus its sampled delay. Identical for the coded run
        and the plaintext reference, so their histories match exactly."""
        n = self.params.n_workers
        delay_rng = random.Random(derive_seed(self.cfg.seed, "delays", iteration))
        delays = sample_delays_for(self.straggler, n, delay_rng)
        base = self.base_unit_cost * self.params.groups * self.params.subresponses
        order = sorted(range(n), key=lambda ni: (base + delays[ni], ni))
        used = order[: self.params.recovery_threshold]
        return base + delays[used[-1]], used

    def gradient(self, weights, batch_index, iteration):
        """One coded gradient evaluation: encode quantized weights, have
        every worker respond, decode from the fastest K."""
        m = self.params.n_inputs
        lw = self.quant.weight_bits
        wq = [quantize_vector(w, lw, self.field) for w in weights]
        noise = NoiseRng(derive_seed(self.cfg.seed, "w-noise", iteration))
        w_shares = coding.encode_vectors(wq, self.params, self.domain, noise)
        data_shares = self._data_shares[batch_index]

        n, l_cnt, g_cnt = (
            self.params.n_workers,
            self.params.subresponses,
            self.params.groups,
        )
        shares = []
        for ni in range(n):
            grid = tuple(
                tuple(
                    tuple(data_shares[ni][li][gi] + w_shares[ni][li][gi])
                    for gi in range(g_cnt)
                )
                for li in range(l_cnt)
            )
            shares.append(coding.WorkerShare(worker_id=ni, values=grid))

        latency, used = self.virtual_latency(iteration)
        responses = {
            ni: coding.worker_respond(shares[ni], self.params, self.domain)
            for ni in used
        }
        ordered = [sr for ni in used for sr in responses[ni]]
        decoded = coding.decode(ordered, self.params, self.domain)
        return decoded, latency

    def train(self) -> TrainResult:
        return _train_loop(self, coded=True)


def sample_delays_for(model, n, rng):
    from .sim import sample_delays

    return sample_delays(model, n, rng)


def _apply_update(weights, grad_field, quant, eta, batch_rows, velocity, momentum):
    field = quant.field
    out_bits = quant.output_bits
    scale = 4.0 * eta / batch_rows
    new_w = []
    for j, wj in enumerate(weights):
        g = dequantize(grad_field[j], out_bits, field)
        if momentum:
            velocity[j] = momentum * velocity[j] + g
            g = velocity[j]
        new_w.append(wj - scale * g)
    return new_w


def _train_loop(trainer: CodedTrainer, coded: bool) -> TrainResult:
    cfg = trainer.cfg
    m = trainer.params.n_inputs
    d = trainer.d
    init_rng = random.Random(derive_seed(cfg.seed, "init"))
    weights = [
        [init_rng.uniform(-0.5, 0.5) for _ in range(d)] for _ in range(m)
    ]
    velocities = [[0.0] * d for _ in range(m)]
    order_rng = random.Random(derive_seed(cfg.seed, "batches"))
    history = []
    for it in range(cfg.iterations):
        bi = order_rng.randrange(len(trainer.batches))
        rows = trainer.batches[bi]
        if coded:
            grads, latency = trainer.gradient(weights, bi, it)
        else:
            latency, _ = trainer.virtual_latency(it)
            lw = trainer.quant.weight_bits
            grads = []
            for mi in range(m):
                Xb = [trainer.Xq[mi][i] for i in rows]
                yb = [trainer.yq[mi][i] for i in rows]
                wq = quantize_vector(weights[mi], lw, trainer.field)
                grads.append(plaintext_gradient(Xb, yb, wq, trainer.field))
        for mi in range(m):
            weights[mi] = _apply_update(
                weights[mi],
                grads[mi],
                trainer.quant,
                cfg.learning_rate,
                len(rows),
                velocities[mi],
                cfg.momentum,
            )
        losses = [
            mse_loss(weights[mi], trainer.datasets[mi][0], trainer.datasets[mi][1])
            for mi in range(m)
        ]
        accs = [
            predict_accuracy(weights[mi], trainer.datasets[mi][0], trainer.datasets[mi][1])
            for mi in range(m)
        ]
        history.append(
            {
                "iteration": it,
                "loss": sum(losses) / m,
                "accuracy": sum(accs) / m,
                "latency": latency,
            }
        )
    return TrainResult(weights=weights, history=history)


def train(datasets, glcc_config, quant: QuantConfig, train_cfg: TrainConfig,
          coded: bool = True, straggler=None, base_unit_cost: float = 0.01) -> TrainResult:
    """Train M perceptrons; coded=False runs the plaintext quantized-gradient
    reference, which must produce a bit-identical weight trajectory."""
    trainer = CodedTrainer(
        datasets, glcc_config, quant, train_cfg,
        straggler=straggler, base_unit_cost=base_unit_cost,
    )
    return _train_loop(trainer, coded=coded)


def load_csv_dataset(path):
    """CSV with a header row; the column named 'label' holds the 0/1 labels
    and every other column is a feature (expected pre-scaled to [-1, 1])."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "label" not in reader.fieldnames:
            raise ValueError(f"{path}: expected a header with a 'label' column")
        features = [c for c in reader.fieldnames if c != "label"]
        X, y = [], []
        for row in reader:
            X.append([float(row[c]) for c in features])
            label = float(row["label"])
            if label not in (0.0, 1.0):
                raise ValueError(f"{path}: label {label} is not binary")
            y.append(int(label))
    if not X:
        raise ValueError(f"{path}: no data rows")
    return X, y


def write_history_csv(path, history):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["iteration", "loss", "accuracy", "latency"]
        )
        writer.writeheader()
        for row in history:
            writer.writerow(row)
