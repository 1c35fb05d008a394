"""Generalized Lagrange coded computing: straggler-resilient, adversary-
tolerant, collusion-private evaluation of multivariate polynomials over a
dataset, plus a quantized perceptron-training application."""

from .fields import FieldElement, PrimeField, batch_inverse, is_prime
from .poly import (
    DecodeFailure,
    Poly,
    lagrange_eval_from_points,
    lagrange_interpolate,
    poly_eval,
    rs_decode,
    vanishing_eval,
)
from .program import PolyProgram, perceptron_gradient, program_from_config, square_map
from .coding import (
    EvaluationDomain,
    GlccParams,
    NoiseRng,
    SubResponse,
    WorkerShare,
    build_domain,
    cost_report,
    decode,
    derive_seed,
    encode,
    interference_coeff,
    privacy_certificate,
    recovery_threshold,
    worker_respond,
)
from .sim import (
    AdversaryModel,
    ExponentialStraggler,
    FixedStraggler,
    expected_kth_delay,
    run_campaign,
    run_round,
    sample_delays,
)
from .training import (
    QuantConfig,
    TrainConfig,
    dequantize,
    predict_accuracy,
    quantize,
    synthetic_dataset,
    train,
)

__version__ = "0.1.0"
