"""Multivariate polynomial programs over a prime field.

A program maps named input tensors (U field elements total) to a vector of
V field elements, through a shallow expression DAG whose nodes are all
closed over field arithmetic. The total degree of every output coordinate
is tracked structurally at construction and must be dominated by the
declared degree, since the declared degree feeds the recovery-threshold
formula.

Tensors are plain ints (scalars), lists of ints (vectors), or lists of
lists (matrices), always reduced mod q.
"""

from .fields import PrimeField


class ShapeError(ValueError):
    pass


class Expr:
    """DAG node. shape is (), (n,), or (rows, cols); degree is the
    structural total-degree upper bound of the node's outputs."""

    __slots__ = ("shape", "degree", "args")

    def __init__(self, shape, degree, args=()):
        self.shape = shape
        self.degree = degree
        self.args = args

    def _eval(self, env, field, memo):
        key = id(self)
        if key not in memo:
            memo[key] = self._compute(env, field, memo)
        return memo[key]


class Input(Expr):
    __slots__ = ("name",)

    def __init__(self, name, shape):
        super().__init__(tuple(shape), 1)
        self.name = name

    def _compute(self, env, field, memo):
        return env[self.name]


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value, shape=()):
        super().__init__(tuple(shape), 0)
        self.value = value

    def _compute(self, env, field, memo):
        return _reduce_tensor(self.value, field.q)


def _same_shape(a, b, what):
    if a.shape != b.shape:
        raise ShapeError(f"{what} needs matching shapes, got {a.shape} and {b.shape}")


class Add(Expr):
    def __init__(self, a, b):
        _same_shape(a, b, "add")
        super().__init__(a.shape, max(a.degree, b.degree), (a, b))

    def _compute(self, env, field, memo):
        a = self.args[0]._eval(env, field, memo)
        b = self.args[1]._eval(env, field, memo)
        return _zip_tensor(a, b, self.shape, field.add)


class Sub(Expr):
    def __init__(self, a, b):
        _same_shape(a, b, "sub")
        super().__init__(a.shape, max(a.degree, b.degree), (a, b))

    def _compute(self, env, field, memo):
        a = self.args[0]._eval(env, field, memo)
        b = self.args[1]._eval(env, field, memo)
        return _zip_tensor(a, b, self.shape, field.sub)


class Mul(Expr):
    """Elementwise product; covers the scalar*scalar case for shape ()."""

    def __init__(self, a, b):
        _same_shape(a, b, "mul")
        super().__init__(a.shape, a.degree + b.degree, (a, b))

    def _compute(self, env, field, memo):
        a = self.args[0]._eval(env, field, memo)
        b = self.args[1]._eval(env, field, memo)
        return _zip_tensor(a, b, self.shape, field.mul)


class ScalarMul(Expr):
    """Multiplication by a field constant; degree-preserving."""

    __slots__ = ("scalar",)

    def __init__(self, scalar, a):
        super().__init__(a.shape, a.degree, (a,))
        self.scalar = scalar

    def _compute(self, env, field, memo):
        c = self.scalar % field.q
        a = self.args[0]._eval(env, field, memo)
        return _map_tensor(a, self.shape, lambda v: c * v % field.q)


class Cube(Expr):
    """Elementwise third power."""

    def __init__(self, a):
        super().__init__(a.shape, 3 * a.degree, (a,))

    def _compute(self, env, field, memo):
        q = field.q
        a = self.args[0]._eval(env, field, memo)
        return _map_tensor(a, self.shape, lambda v: v * v % q * v % q)


class MatVec(Expr):
    def __init__(self, m, v):
        if len(m.shape) != 2 or len(v.shape) != 1 or m.shape[1] != v.shape[0]:
            raise ShapeError(f"matvec shapes {m.shape} x {v.shape} do not conform")
        super().__init__((m.shape[0],), m.degree + v.degree, (m, v))

    def _compute(self, env, field, memo):
        q = field.q
        m = self.args[0]._eval(env, field, memo)
        v = self.args[1]._eval(env, field, memo)
        return [sum(a * b for a, b in zip(row, v)) % q for row in m]


class TransposeMatVec(Expr):
    """m^T v without materializing the transpose."""

    def __init__(self, m, v):
        if len(m.shape) != 2 or len(v.shape) != 1 or m.shape[0] != v.shape[0]:
            raise ShapeError(f"transpose-matvec shapes {m.shape} x {v.shape} do not conform")
        super().__init__((m.shape[1],), m.degree + v.degree, (m, v))

    def _compute(self, env, field, memo):
        q = field.q
        m = self.args[0]._eval(env, field, memo)
        v = self.args[1]._eval(env, field, memo)
        cols = self.shape[0]
        out = [0] * cols
        for row, vi in zip(m, v):
            if vi == 0:
                continue
            for j in range(cols):
                out[j] += row[j] * vi
        return [x % q for x in out]


def _reduce_tensor(t, q):
    if isinstance(t, int):
        return t % q
    if t and isinstance(t[0], (list, tuple)):
        return [[v % q for v in row] for row in t]
    return [v % q for v in t]


def _map_tensor(t, shape, fn):
    if not shape:
        return fn(t)
    if len(shape) == 1:
        return [fn(v) for v in t]
    return [[fn(v) for v in row] for row in t]


def _zip_tensor(a, b, shape, fn):
    if not shape:
        return fn(a, b)
    if len(shape) == 1:
        return [fn(x, y) for x, y in zip(a, b)]
    return [[fn(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _tensor_size(shape):
    n = 1
    for s in shape:
        n *= s
    return n


def _check_shape(value, shape, name):
    if not shape:
        if not isinstance(value, int):
            raise ShapeError(f"input '{name}' must be a scalar int")
        return
    if len(shape) == 1:
        if not isinstance(value, (list, tuple)) or len(value) != shape[0]:
            raise ShapeError(f"input '{name}' must be a vector of length {shape[0]}")
        return
    rows, cols = shape
    if not isinstance(value, (list, tuple)) or len(value) != rows:
        raise ShapeError(f"input '{name}' must be a {rows}x{cols} matrix")
    for row in value:
        if not isinstance(row, (list, tuple)) or len(row) != cols:
            raise ShapeError(f"input '{name}' must be a {rows}x{cols} matrix")


class PolyProgram:
    """A multivariate polynomial F_q^U -> F_q^V with declared total degree.

    inputs: ordered {name: shape} dict fixing the flattening layout.
    body: an Expr of scalar or vector shape (the V outputs).
    """

    def __init__(self, inputs, body, declared_degree, name="custom"):
        self.inputs = dict(inputs)
        self.body = body
        self.name = name
        if len(body.shape) > 1:
            raise ShapeError("program output must be a scalar or a vector")
        self.output_len = body.shape[0] if body.shape else 1
        self.actual_degree = body.degree
        if declared_degree < body.degree:
            raise ValueError(
                f"declared degree {declared_degree} below structural degree {body.degree}"
            )
        self.degree = declared_degree
        self.input_len = sum(_tensor_size(s) for s in self.inputs.values())

    def check_input(self, tensors):
        if set(tensors) != set(self.inputs):
            raise ShapeError(
                f"input names {sorted(tensors)} do not match program inputs "
                f"{sorted(self.inputs)}"
            )
        for name, shape in self.inputs.items():
            _check_shape(tensors[name], shape, name)

    def evaluate(self, field: PrimeField, tensors) -> list:
        """Exact field evaluation; returns the V output coordinates."""
        self.check_input(tensors)
        env = {n: _reduce_tensor(tensors[n], field.q) for n in self.inputs}
        out = self.body._eval(env, field, {})
        return [out] if not self.body.shape else list(out)

    def flatten(self, tensors) -> list:
        """Input tensors to a flat U-vector, in declaration order."""
        self.check_input(tensors)
        flat = []
        for name, shape in self.inputs.items():
            v = tensors[name]
            if not shape:
                flat.append(v)
            elif len(shape) == 1:
                flat.extend(v)
            else:
                for row in v:
                    flat.extend(row)
        return flat

    def unflatten(self, flat) -> dict:
        if len(flat) != self.input_len:
            raise ShapeError(f"expected {self.input_len} values, got {len(flat)}")
        tensors = {}
        pos = 0
        for name, shape in self.inputs.items():
            n = _tensor_size(shape)
            chunk = flat[pos:pos + n]
            pos += n
            if not shape:
                tensors[name] = chunk[0]
            elif len(shape) == 1:
                tensors[name] = list(chunk)
            else:
                rows, cols = shape
                tensors[name] = [list(chunk[r * cols:(r + 1) * cols]) for r in range(rows)]
        return tensors

    def __repr__(self):
        return (
            f"PolyProgram({self.name}, U={self.input_len}, "
            f"V={self.output_len}, D={self.degree})"
        )


def square_map() -> PolyProgram:
    """x -> x^2 on a single field element."""
    x = Input("x", ())
    return PolyProgram({"x": ()}, Mul(x, x), declared_degree=2, name="square_map")


def perceptron_gradient(s: int, d: int) -> PolyProgram:
    """Gradient kernel X^T (Xw)^3 - X^T (Xw o y) for an s x d design matrix.

    Total degree 7: the cubic term is degree 3*(1+1) in (X, w) plus one more
    factor of X from the outer product.
    """
    if s < 1 or d < 1:
        raise ValueError("need at least one sample and one feature")
    X = Input("X", (s, d))
    y = Input("y", (s,))
    w = Input("w", (d,))
    xw = MatVec(X, w)
    body = Sub(TransposeMatVec(X, Cube(xw)), TransposeMatVec(X, Mul(xw, y)))
    return PolyProgram(
        {"X": (s, d), "y": (s,), "w": (d,)},
        body,
        declared_degree=7,
        name=f"perceptron_gradient({s},{d})",
    )


def program_from_config(spec) -> PolyProgram:
    """Build a built-in program from a config mapping, e.g.
    {"name": "perceptron_gradient", "rows": 3, "features": 2}."""
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec.get("name")
    if name == "square_map":
        return square_map()
    if name == "perceptron_gradient":
        try:
            return perceptron_gradient(int(spec["rows"]), int(spec["features"]))
        except KeyError as exc:
            raise ValueError(f"perceptron_gradient config missing {exc}") from None
    raise ValueError(f"unknown program {name!r}")
