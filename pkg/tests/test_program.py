import random

import pytest

from glcc.fields import PrimeField
from glcc.poly import lagrange_interpolate
from glcc.program import (
    Add,
    Cube,
    Input,
    MatVec,
    Mul,
    PolyProgram,
    ShapeError,
    perceptron_gradient,
    program_from_config,
    square_map,
)

F97 = PrimeField(97)


def test_square_map_examples():
    prog = square_map()
    assert prog.evaluate(F97, {"x": 2}) == [4]
    assert prog.evaluate(F97, {"x": 96}) == [1]  # (-1)^2
    assert prog.degree == 2 and prog.input_len == 1 and prog.output_len == 1


def test_square_map_randomized_against_field_pow():
    rng = random.Random(0)
    prog = square_map()
    for _ in range(100):
        x = rng.randrange(97)
        assert prog.evaluate(F97, {"x": x}) == [int(F97(x) ** 2)]


def test_structural_degrees():
    assert square_map().actual_degree == 2
    assert perceptron_gradient(3, 2).degree == 7
    x = Input("x", ())
    assert Add(x, x).degree == 1
    assert Mul(x, Mul(x, x)).degree == 3
    assert Cube(Mul(x, x)).degree == 6


def test_declared_degree_must_dominate():
    x = Input("x", ())
    with pytest.raises(ValueError, match="declared degree"):
        PolyProgram({"x": ()}, Mul(x, x), declared_degree=1)


def test_shape_errors():
    x = Input("x", (2,))
    y = Input("y", (3,))
    with pytest.raises(ShapeError):
        Add(x, y)
    with pytest.raises(ShapeError):
        MatVec(Input("m", (2, 3)), Input("v", (2,)))
    prog = square_map()
    with pytest.raises(ShapeError):
        prog.evaluate(F97, {"x": [1, 2]})
    with pytest.raises(ShapeError):
        prog.evaluate(F97, {"z": 3})


def _gradient_oracle(X, y, w, q):
    # straight-line reference, no Expr machinery
    s, d = len(X), len(w)
    xw = [sum(X[i][j] * w[j] for j in range(d)) % q for i in range(s)]
    out = []
    for j in range(d):
        t1 = sum(X[i][j] * pow(xw[i], 3, q) for i in range(s))
        t2 = sum(X[i][j] * xw[i] * y[i] for i in range(s))
        out.append((t1 - t2) % q)
    return out


def test_perceptron_gradient_matches_oracle():
    rng = random.Random(1)
    prog = perceptron_gradient(3, 2)
    for _ in range(50):
        X = [[rng.randrange(97) for _ in range(2)] for _ in range(3)]
        y = [rng.randrange(97) for _ in range(3)]
        w = [rng.randrange(97) for _ in range(2)]
        assert prog.evaluate(F97, {"X": X, "y": y, "w": w}) == _gradient_oracle(X, y, w, 97)


def test_perceptron_gradient_zero_weights():
    prog = perceptron_gradient(2, 2)
    out = prog.evaluate(F97, {"X": [[1, 2], [3, 4]], "y": [1, 0], "w": [0, 0]})
    assert out == [0, 0]


def test_flatten_roundtrip():
    prog = perceptron_gradient(2, 3)
    rng = random.Random(2)
    tensors = {
        "X": [[rng.randrange(97) for _ in range(3)] for _ in range(2)],
        "y": [rng.randrange(97) for _ in range(2)],
        "w": [rng.randrange(97) for _ in range(3)],
    }
    flat = prog.flatten(tensors)
    assert len(flat) == prog.input_len == 2 * 3 + 2 + 3
    assert prog.unflatten(flat) == tensors
    with pytest.raises(ShapeError):
        prog.unflatten(flat[:-1])


def test_degree_soundness_along_a_line():
    """phi(t*x0) restricted to a line is a univariate polynomial of degree
    <= D; an interpolant from D+1 samples must predict held-out samples."""
    f = PrimeField(2**27 - 39)
    rng = random.Random(3)
    for prog, base in (
        (square_map(), {"x": 7}),
        (
            perceptron_gradient(2, 2),
            {"X": [[3, 1], [4, 1]], "y": [5, 9], "w": [2, 6]},
        ),
    ):
        d = prog.degree
        def at(t):
            scaled = {
                name: _scale(base[name], t, f.q) for name in prog.inputs
            }
            return prog.evaluate(f, scaled)
        ts = rng.sample(range(1, f.q), d + 4)
        for v in range(prog.output_len):
            pts = [(t, at(t)[v]) for t in ts[: d + 1]]
            interp = lagrange_interpolate(pts, f)
            assert interp.degree <= d
            for t in ts[d + 1:]:
                assert interp(t) == at(t)[v]


def _scale(tensor, t, q):
    if isinstance(tensor, int):
        return tensor * t % q
    if tensor and isinstance(tensor[0], list):
        return [[v * t % q for v in row] for row in tensor]
    return [v * t % q for v in tensor]


def test_program_from_config():
    assert program_from_config("square_map").name == "square_map"
    prog = program_from_config({"name": "perceptron_gradient", "rows": 4, "features": 3})
    assert prog.input_len == 4 * 3 + 4 + 3
    with pytest.raises(ValueError):
        program_from_config({"name": "nope"})
    with pytest.raises(ValueError):
        program_from_config({"name": "perceptron_gradient"})
