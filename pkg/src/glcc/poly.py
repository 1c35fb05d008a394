"""Univariate polynomials over a prime field: evaluation, Lagrange
interpolation, and Reed-Solomon decoding with errors.

Coefficients are stored lowest-degree first as canonical ints. All the
routines are quadratic in the number of points, which is plenty for the
code lengths this package works with (a few hundred evaluations at most).
"""

from .fields import PrimeField


class DecodeFailure(Exception):
    """No polynomial within the degree/error budget explains the points."""


class Poly:
    """Dense univariate polynomial; no trailing zero coefficients."""

    __slots__ = ("coeffs", "field")

    def __init__(self, coeffs, field: PrimeField):
        while coeffs and coeffs[-1] % field.q == 0:
            coeffs = coeffs[:-1]
        self.coeffs = tuple(c % field.q for c in coeffs)
        self.field = field

    @property
    def degree(self) -> int:
        # zero polynomial has degree -1 (sentinel for "minus infinity")
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        return poly_eval(self.coeffs, x, self.field)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.coeffs, self.field.q))

    def __bool__(self):
        return bool(self.coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        return Poly(_add(list(self.coeffs), list(other.coeffs), self.field), self.field)

    def __sub__(self, other: "Poly") -> "Poly":
        return Poly(_sub(list(self.coeffs), list(other.coeffs), self.field), self.field)

    def __mul__(self, other: "Poly") -> "Poly":
        return Poly(_mul(list(self.coeffs), list(other.coeffs), self.field), self.field)

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"


def _add(a, b, f):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = f.add(out[i], c)
    return out


def _sub(a, b, f):
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        av = a[i] if i < len(a) else 0
        bv = b[i] if i < len(b) else 0
        out[i] = f.sub(av, bv)
    return out


def _mul(a, b, f):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    q = f.q
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % q
    return out


def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _divmod(a, b, f):
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    quot = [0] * (len(a) - len(b) + 1)
    inv_lead = f.inv(b[-1])
    rem = list(a)
    for i in range(len(quot) - 1, -1, -1):
        c = rem[i + len(b) - 1] * inv_lead % f.q
        if c == 0:
            continue
        quot[i] = c
        for j, bj in enumerate(b):
            rem[i + j] = f.sub(rem[i + j], c * bj % f.q)
    return _trim(quot), _trim(rem)


def poly_eval(coeffs, x: int, field: PrimeField) -> int:
    """Horner evaluation at x."""
    acc = 0
    q = field.q
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def _check_distinct(xs):
    seen = set()
    for x in xs:
        if x in seen:
            raise ValueError(f"duplicate interpolation node {x}")
        seen.add(x)


def lagrange_basis_weights(nodes, field: PrimeField) -> list:
    """Barycentric weights w_j = 1 / prod_{k != j} (node_j - node_k)."""
    denoms = []
    for j, nj in enumerate(nodes):
        d = 1
        for k, nk in enumerate(nodes):
            if k != j:
                d = d * field.sub(nj, nk) % field.q
        denoms.append(d)
    return field.batch_inv(denoms)


def lagrange_basis_at(nodes, weights, x: int, field: PrimeField) -> list:
    """Values of all Lagrange basis polynomials at x, in one pass.

    Uses prefix/suffix products of (x - node_k); exact at the nodes too.
    """
    n = len(nodes)
    q = field.q
    diffs = [field.sub(x, nk) for nk in nodes]
    prefix = [1] * (n + 1)
    for i in range(n):
        prefix[i + 1] = prefix[i] * diffs[i] % q
    suffix = [1] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] * diffs[i] % q
    return [prefix[j] * suffix[j + 1] % q * weights[j] % q for j in range(n)]


def lagrange_interpolate(points, field: PrimeField) -> Poly:
    """The unique polynomial of degree < len(points) through all points."""
    if not points:
        raise ValueError("need at least one point to interpolate")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    _check_distinct(xs)
    weights = lagrange_basis_weights(xs, field)
    out = [0] * len(points)
    for j, (xj, yj) in enumerate(zip(xs, ys)):
        if yj % field.q == 0:
            continue
        # basis_j(x) = w_j * prod_{k != j} (x - x_k)
        basis = [1]
        for k, xk in enumerate(xs):
            if k != j:
                basis = _mul(basis, [field.neg(xk), 1], field)
        scale = weights[j] * yj % field.q
        for i, c in enumerate(basis):
            out[i] = (out[i] + c * scale) % field.q
    return Poly(out, field)


def lagrange_eval_from_points(points, x: int, field: PrimeField) -> int:
    """Value at x of the unique interpolant, without building coefficients."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    _check_distinct(xs)
    x %= field.q
    for xj, yj in points:
        if xj == x:
            return yj % field.q
    weights = lagrange_basis_weights(xs, field)
    basis = lagrange_basis_at(xs, weights, x, field)
    return sum(b * y for b, y in zip(basis, ys)) % field.q


def vanishing_eval(roots, x: int, field: PrimeField) -> int:
    """prod_i (x - root_i); empty product is 1."""
    acc = 1
    q = field.q
    for r in roots:
        acc = acc * ((x - r) % q) % q
    return acc


def vanishing_poly(roots, field: PrimeField) -> Poly:
    coeffs = [1]
    for r in roots:
        coeffs = _mul(coeffs, [field.neg(r % field.q), 1], field)
    return Poly(coeffs, field)


def _agreement_gap(p: Poly, points) -> int:
    return sum(1 for x, y in points if p(x) != y % p.field.q)


def rs_decode(points, degree_bound: int, max_errors: int, field: PrimeField) -> Poly:
    """Decode the unique polynomial of degree < degree_bound agreeing with
    all but at most max_errors of the points (Gao's extended-Euclid decoder).

    Raises DecodeFailure when no such polynomial exists; requires
    len(points) >= degree_bound + 2 * max_errors.
    """
    n = len(points)
    k = degree_bound
    e = max_errors
    if k < 1:
        raise ValueError("degree bound must be >= 1")
    if e < 0:
        raise ValueError("error budget must be >= 0")
    if n < k + 2 * e:
        raise ValueError(
            f"need at least {k + 2 * e} points for degree bound {k} "
            f"with {e} errors, got {n}"
        )
    xs = [p[0] for p in points]
    _check_distinct(xs)

    if e == 0:
        # interpolation restricted to degree < k, with consistency check
        p = lagrange_interpolate(points, field)
        if p.degree >= k:
            raise DecodeFailure(
                f"clean points define degree {p.degree}, bound is {k - 1}"
            )
        return p

    g0 = list(vanishing_poly(xs, field).coeffs)
    g1 = list(lagrange_interpolate(points, field).coeffs)

    # partial extended Euclid on (g0, g1), tracking the g1-cofactor;
    # stop at the first remainder of degree < (n + k) / 2
    stop = (n + k + 1) // 2  # smallest integer > (n + k) / 2 - 1
    r_prev, r_cur = g0, g1
    v_prev, v_cur = [], [1]
    while r_cur and len(_trim(list(r_cur))) - 1 >= stop:
        quot, rem = _divmod(r_prev, r_cur, field)
        r_prev, r_cur = r_cur, rem
        v_prev, v_cur = v_cur, _sub(v_prev, _mul(quot, v_cur, field), field)

    if not r_cur:
        # received word is a multiple of the locator; candidate is zero poly
        candidate = Poly([], field)
    else:
        quot, rem = _divmod(r_cur, v_cur, field)
        if rem:
            raise DecodeFailure("error locator does not divide the remainder")
        candidate = Poly(quot, field)

    if candidate.degree >= k:
        raise DecodeFailure(
            f"decoded degree {candidate.degree} exceeds bound {k - 1}"
        )
    if _agreement_gap(candidate, points) > e:
        raise DecodeFailure("candidate disagrees with more points than the error budget")
    return candidate
