"""Grouped Lagrange encoding of a dataset across simulated workers, with
straggler-resilient, adversary-tolerant reconstruction and collusion
privacy.

The dataset of M inputs is split into G groups of R = M/G. Each group is
interpolated, together with L*T uniform noise points, into a polynomial
f_g of degree R + L*T - 1; every worker receives the G group polynomials
evaluated at L private points, and returns L sub-responses that combine
the program outputs across groups with vanishing-product coefficients, so
every other group's contribution cancels at a group's data nodes. Honest
sub-responses are evaluations of one response polynomial h, which the
master Reed-Solomon-decodes and evaluates back at the data nodes.
"""

import hashlib
import json
from dataclasses import dataclass

from .fields import PrimeField
from .poly import (
    DecodeFailure,
    lagrange_basis_at,
    lagrange_basis_weights,
    rs_decode,
    vanishing_eval,
)
from .program import PolyProgram

__all__ = [
    "GlccParams",
    "EvaluationDomain",
    "NoiseRng",
    "derive_seed",
    "recovery_threshold",
    "recovery_threshold_from",
    "response_poly_degree",
    "build_domain",
    "encode",
    "encode_vectors",
    "interference_coeff",
    "constant_factors",
    "worker_respond",
    "decode",
    "cost_report",
    "privacy_certificate",
    "WorkerShare",
    "SubResponse",
    "transcript_record",
    "DecodeFailure",
]


def derive_seed(seed, *labels) -> int:
    """Deterministic child seed from a parent seed and a label path."""
    h = hashlib.sha256(repr((int(seed),) + tuple(labels)).encode()).digest()
    return int.from_bytes(h[:8], "big")


class NoiseRng:
    """Seedable SHA-256 counter generator for masking noise.

    Deterministic given the seed, so transcripts are reproducible, while
    the outputs are computationally indistinguishable from uniform.
    """

    def __init__(self, seed):
        self._key = hashlib.sha256(b"noise:" + repr(int(seed)).encode()).digest()
        self._counter = 0
        self._pool = 0
        self._pool_bits = 0

    def _refill(self):
        block = hashlib.sha256(
            self._key + self._counter.to_bytes(8, "big")
        ).digest()
        self._counter += 1
        self._pool = (self._pool << 256) | int.from_bytes(block, "big")
        self._pool_bits += 256

    def getrandbits(self, k: int) -> int:
        while self._pool_bits < k:
            self._refill()
        self._pool_bits -= k
        out = self._pool >> self._pool_bits
        self._pool &= (1 << self._pool_bits) - 1
        return out

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        k = n.bit_length()
        while True:
            r = self.getrandbits(k)
            if r < n:
                return r


def recovery_threshold_from(degree, m, t, a, g, l) -> int:
    """ceil(D((M-G)/(GL) + T) + ((G-1)M + G)/(GL) + 2A) in exact integers."""
    num = degree * (m - g + g * l * t) + (g - 1) * m + g + 2 * a * g * l
    den = g * l
    return -(-num // den)


@dataclass(frozen=True)
class GlccParams:
    """System parameters: N workers, M inputs, T-collusion privacy,
    A adversaries, G groups, L sub-responses per worker."""

    field: PrimeField
    program: PolyProgram
    n_workers: int
    n_inputs: int
    privacy: int = 0
    adversaries: int = 0
    groups: int = 1
    subresponses: int = 1

    def __post_init__(self):
        n, m = self.n_workers, self.n_inputs
        t, a, g, l = self.privacy, self.adversaries, self.groups, self.subresponses
        if m < 1 or n < 1:
            raise ValueError("need at least one input and one worker")
        if t < 0 or a < 0:
            raise ValueError("privacy and adversary bounds must be nonnegative")
        if g < 1 or l < 1:
            raise ValueError("groups and sub-response count must be >= 1")
        if m % g != 0:
            raise ValueError(f"group count {g} must divide input count {m}")
        points_needed = g * (self.group_size + l * t) + l * n
        if self.field.q < points_needed:
            raise ValueError(
                f"field size {self.field.q} too small for {points_needed} distinct points"
            )
        k = self.recovery_threshold
        if n < k:
            raise ValueError(f"{n} workers below the recovery threshold {k}")

    @property
    def group_size(self) -> int:
        return self.n_inputs // self.groups

    @property
    def recovery_threshold(self) -> int:
        return recovery_threshold_from(
            self.program.degree,
            self.n_inputs,
            self.privacy,
            self.adversaries,
            self.groups,
            self.subresponses,
        )

    @property
    def response_degree(self) -> int:
        """Degree of the response polynomial h."""
        r, lt = self.group_size, self.subresponses * self.privacy
        return self.program.degree * (r + lt - 1) + (self.groups - 1) * r


def recovery_threshold(params: GlccParams) -> int:
    return params.recovery_threshold


def response_poly_degree(params: GlccParams) -> int:
    return params.response_degree


@dataclass(frozen=True)
class EvaluationDomain:
    """The interpolation nodes: beta[g][r] for data/noise, alpha[n][l] for
    worker evaluation points. All values pairwise distinct."""

    beta: tuple
    alpha: tuple
    seed: int = 0

    def __post_init__(self):
        flat = [x for row in self.beta for x in row] + [
            x for row in self.alpha for x in row
        ]
        if len(set(flat)) != len(flat):
            raise ValueError("evaluation points are not pairwise distinct")


def build_domain(params: GlccParams, seed=0, layout="default") -> EvaluationDomain:
    """Assign the G(R+LT) + LN pairwise-distinct evaluation points.

    "default" lays out consecutive field elements 0, 1, 2, ... over the
    beta grid then the alpha grid. "demo" uses the classic 2-group walkthrough
    layout beta = {1,2,5,6}, {3,4,7,8} with alphas following from 9.
    """
    g, l, n = params.groups, params.subresponses, params.n_workers
    width = params.group_size + l * params.privacy
    if layout == "demo":
        if (g, width) != (2, 4):
            raise ValueError("demo layout needs G=2 and R+LT=4")
        beta = ((1, 2, 5, 6), (3, 4, 7, 8))
        first_alpha = 9
    elif layout == "default":
        beta = tuple(
            tuple(range(gi * width, (gi + 1) * width)) for gi in range(g)
        )
        first_alpha = g * width
    else:
        raise ValueError(f"unknown domain layout {layout!r}")
    if first_alpha + l * n > params.field.q:
        raise ValueError("field too small for the requested domain")
    alpha = tuple(
        tuple(range(first_alpha + ni * l, first_alpha + (ni + 1) * l))
        for ni in range(n)
    )
    return EvaluationDomain(beta=beta, alpha=alpha, seed=int(seed))


@dataclass(frozen=True)
class WorkerShare:
    """Encoded inputs for one worker: values[l][g] is the flat U-vector
    f_g(alpha[worker_id][l])."""

    worker_id: int
    values: tuple


@dataclass(frozen=True)
class SubResponse:
    worker_id: int
    index: int
    values: tuple


def encode_vectors(vectors, params: GlccParams, domain: EvaluationDomain, rng):
    """Encode M equal-length flat vectors; returns per-worker grids
    shares[n][l][g] (each a list of ints).

    Noise draw order is fixed (group-major, then noise slot, then
    coordinate) so a seed fully determines the encoding.
    """
    f = params.field
    m, g_cnt, l_cnt = params.n_inputs, params.groups, params.subresponses
    r, lt = params.group_size, params.subresponses * params.privacy
    if len(vectors) != m:
        raise ValueError(f"expected {m} input vectors, got {len(vectors)}")
    width = len(vectors[0])
    for v in vectors:
        if len(v) != width:
            raise ValueError("input vectors must all have the same length")

    shares = [
        [[None] * g_cnt for _ in range(l_cnt)] for _ in range(params.n_workers)
    ]
    for gi in range(g_cnt):
        nodes = list(domain.beta[gi])
        rows = [vectors[gi * r + ri] for ri in range(r)]
        rows += [
            [rng.randbelow(f.q) for _ in range(width)] for _ in range(lt)
        ]
        weights = lagrange_basis_weights(nodes, f)
        for ni in range(params.n_workers):
            for li in range(l_cnt):
                basis = lagrange_basis_at(nodes, weights, domain.alpha[ni][li], f)
                shares[ni][li][gi] = [
                    sum(b * row[u] for b, row in zip(basis, rows)) % f.q
                    for u in range(width)
                ]
    return shares


def encode(dataset, params: GlccParams, domain: EvaluationDomain, rng):
    """Encode M program inputs into N worker shares."""
    vectors = [params.program.flatten(x) for x in dataset]
    grids = encode_vectors(vectors, params, domain, rng)
    return [
        WorkerShare(
            worker_id=n,
            values=tuple(tuple(tuple(v) for v in row) for row in grids[n]),
        )
        for n in range(params.n_workers)
    ]


def interference_coeff(params: GlccParams, domain: EvaluationDomain, g: int, x: int) -> int:
    """prod over other groups g' and data slots r of (x - beta[g'][r])."""
    f = params.field
    r = params.group_size
    acc = 1
    for gp in range(params.groups):
        if gp == g:
            continue
        acc = acc * vanishing_eval(domain.beta[gp][:r], x, f) % f.q
    return acc


def constant_factors(params: GlccParams, domain: EvaluationDomain):
    """The nonzero constants c[g][r] multiplying phi(X_{g,r}) in h(beta[g][r])."""
    r = params.group_size
    return [
        [
            interference_coeff(params, domain, g, domain.beta[g][ri])
            for ri in range(r)
        ]
        for g in range(params.groups)
    ]


def worker_respond(share: WorkerShare, params: GlccParams, domain: EvaluationDomain):
    """Compute the worker's L sub-responses; yields them one at a time so a
    caller may stream partial results."""
    return list(iter_subresponses(share, params, domain))


def iter_subresponses(share: WorkerShare, params: GlccParams, domain: EvaluationDomain):
    f = params.field
    prog = params.program
    n = share.worker_id
    for li in range(params.subresponses):
        x = domain.alpha[n][li]
        acc = [0] * prog.output_len
        for g in range(params.groups):
            coeff = interference_coeff(params, domain, g, x)
            out = prog.evaluate(f, prog.unflatten(list(share.values[li][g])))
            for v in range(prog.output_len):
                acc[v] = (acc[v] + coeff * out[v]) % f.q
        yield SubResponse(worker_id=n, index=li, values=tuple(acc))


def _required_subresponses(params: GlccParams) -> int:
    return params.response_degree + 1 + 2 * params.adversaries * params.subresponses


def decode(responses, params: GlccParams, domain: EvaluationDomain, streaming=False):
    """Reconstruct the M program outputs from sub-responses.

    All-or-nothing mode needs complete responses from at least K distinct
    workers (the earliest K in the given order are used; extras are
    ignored, never spent on the error budget). Streaming mode needs
    deg(h) + 1 + 2AL sub-responses in any mixture across workers.

    Raises DecodeFailure when corruption exceeds the adversary budget.
    """
    f = params.field
    k_poly = params.response_degree + 1
    budget = params.adversaries * params.subresponses

    if streaming:
        needed = _required_subresponses(params)
        if len(responses) < needed:
            raise ValueError(
                f"streaming decode needs {needed} sub-responses, got {len(responses)}"
            )
        used = responses[:needed]
    else:
        k = params.recovery_threshold
        by_worker = {}
        order = []
        for sr in responses:
            if sr.worker_id not in by_worker:
                by_worker[sr.worker_id] = []
                order.append(sr.worker_id)
            by_worker[sr.worker_id].append(sr)
        complete = [n for n in order if len(by_worker[n]) == params.subresponses]
        if len(complete) < k:
            raise ValueError(
                f"need complete responses from {k} workers, got {len(complete)}"
            )
        used = [sr for n in complete[:k] for sr in by_worker[n]]

    xs = [domain.alpha[sr.worker_id][sr.index] for sr in used]
    outputs_per_coord = []
    for v in range(params.program.output_len):
        points = [(x, sr.values[v]) for x, sr in zip(xs, used)]
        h_v = rs_decode(points, k_poly, budget, f)
        outputs_per_coord.append(h_v)

    consts = constant_factors(params, domain)
    inv_consts = [[f.inv(c) for c in row] for row in consts]
    results = []
    for g in range(params.groups):
        for ri in range(params.group_size):
            b = domain.beta[g][ri]
            results.append(
                [
                    h_v(b) * inv_consts[g][ri] % f.q
                    for h_v in outputs_per_coord
                ]
            )
    return results


def cost_report(params: GlccParams) -> dict:
    """Threshold and communication-cost formulas plus the exact element
    counts a round is expected to ship."""
    g, l, n = params.groups, params.subresponses, params.n_workers
    k = params.recovery_threshold
    return {
        "K": k,
        "P_u": g * l * n,
        "P_d": k * l,
        "uploaded_elements": g * l * n * params.program.input_len,
        "downloaded_elements": k * l * params.program.output_len,
    }


def privacy_certificate(params: GlccParams, domain: EvaluationDomain, subset) -> bool:
    """Check that every group's masking matrix for the colluding subset is
    invertible, i.e. that the noise seen by the subset is full-rank.

    The matrix entries are the Lagrange basis polynomials of the noise
    nodes evaluated at the subset's alpha points; invertibility is exactly
    the condition under which the colluders' view is uniform. A failure
    indicates a domain-construction bug, not a tunable property.
    """
    f = params.field
    t = params.privacy
    l_cnt = params.subresponses
    subset = list(subset)
    if len(subset) != t:
        raise ValueError(f"subset size {len(subset)} != privacy bound {t}")
    if t < 1:
        raise ValueError("privacy certificate needs T >= 1")
    r = params.group_size
    lt = l_cnt * t
    alphas = [domain.alpha[n][li] for n in subset for li in range(l_cnt)]
    for g in range(params.groups):
        nodes = list(domain.beta[g])
        weights = lagrange_basis_weights(nodes, f)
        rows = []
        for x in alphas:
            basis = lagrange_basis_at(nodes, weights, x, f)
            rows.append(basis[r:r + lt])
        if not _is_invertible(rows, f):
            return False
    return True


def _is_invertible(matrix, f: PrimeField) -> bool:
    """Gaussian elimination over F_q."""
    m = [row[:] for row in matrix]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix must be square")
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] % f.q != 0), None)
        if pivot is None:
            return False
        m[col], m[pivot] = m[pivot], m[col]
        inv = f.inv(m[col][col])
        m[col] = [v * inv % f.q for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] % f.q != 0:
                factor = m[r][col]
                m[r] = [
                    (a - factor * b) % f.q for a, b in zip(m[r], m[col])
                ]
    return True


def _share_hash(share: WorkerShare) -> str:
    payload = json.dumps(
        [[list(v) for v in row] for row in share.values], separators=(",", ":")
    ).encode()
    return hashlib.sha256(payload).hexdigest()


def transcript_record(params: GlccParams, domain: EvaluationDomain, shares, responses) -> dict:
    """Flat, exact-integer record of one coded round, for golden tests."""
    return {
        "q": params.field.q,
        "params": {
            "N": params.n_workers,
            "M": params.n_inputs,
            "T": params.privacy,
            "A": params.adversaries,
            "G": params.groups,
            "L": params.subresponses,
            "D": params.program.degree,
            "program": params.program.name,
        },
        "domain_seed": domain.seed,
        "share_hashes": {s.worker_id: _share_hash(s) for s in shares},
        "sub_responses": [
            {
                "worker": sr.worker_id,
                "index": sr.index,
                "values": [int(v) for v in sr.values],
            }
            for sr in responses
        ],
    }
