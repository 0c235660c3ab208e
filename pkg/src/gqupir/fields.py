"""Arithmetic in small Galois fields GF(q), plus projective-point helpers.

Prime orders use plain modular arithmetic.  The prime-power orders needed at
desk scale (4, 8, 9) are built over fixed irreducible polynomials so element
encodings never change between runs:

    GF(4) = GF(2)[x] / (x^2 + x + 1)
    GF(8) = GF(2)[x] / (x^3 + x + 1)
    GF(9) = GF(3)[x] / (x^2 + 1)

An element is an integer in range(q) whose base-p digits are the polynomial
coefficients, least-significant digit = constant term.  So in GF(9) the
element 3*h + l stands for h*x + l.  Vectors over a field are plain tuples of
such integers; a projective point is a vector scaled so its first nonzero
coordinate is 1.
"""

from itertools import product


class NotAPrimePowerError(ValueError):
    """The requested order has at least two distinct prime factors."""


class UnsupportedOrderError(ValueError):
    """Prime-power order without a built-in irreducible polynomial."""


class ZeroVectorError(ValueError):
    """The zero vector has no projective normalization."""


# Irreducible polynomials, constant term first.
_IRREDUCIBLE = {
    4: (1, 1, 1),      # x^2 + x + 1 over GF(2)
    8: (1, 1, 0, 1),   # x^3 + x + 1 over GF(2)
    9: (1, 0, 1),      # x^2 + 1 over GF(3)
}


def _factor_prime_power(q):
    """Return (p, k) with q == p**k, or raise NotAPrimePowerError."""
    if not isinstance(q, int) or q < 2:
        raise NotAPrimePowerError(f"field order must be an integer >= 2, got {q!r}")
    m, p = q, None
    for cand in range(2, q + 1):
        if cand * cand > q and p is None:
            return q, 1  # q itself is prime
        if m % cand == 0:
            p = cand
            break
    k = 0
    while m % p == 0:
        m //= p
        k += 1
    if m != 1:
        raise NotAPrimePowerError(f"{q} has at least two distinct prime factors")
    return p, k


class GF:
    """GF(q) with element encoding stable across runs.

    Supported orders: all primes, and the prime powers 4, 8, 9.  Other prime
    powers raise UnsupportedOrderError; composite non-prime-powers raise
    NotAPrimePowerError.
    """

    def __init__(self, q):
        p, k = _factor_prime_power(q)
        if k > 1 and q not in _IRREDUCIBLE:
            raise UnsupportedOrderError(
                f"GF({q}) not supported: only primes and orders 4, 8, 9 have "
                "built-in tables"
            )
        self.q = q
        self.p = p
        self.k = k
        if k > 1:
            self._add = [[self._poly_add(a, b) for b in range(q)] for a in range(q)]
            self._mul = [[self._poly_mul(a, b) for b in range(q)] for a in range(q)]
            self._neg = [self._poly_neg(a) for a in range(q)]
            inv = [0] * q
            for a in range(1, q):
                for b in range(1, q):
                    if self._mul[a][b] == 1:
                        inv[a] = b
                        break
            self._inv = inv
            self.check_axioms()

    # -- polynomial arithmetic on base-p digit encodings (k >= 2 only) --

    def _digits(self, a):
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return out

    def _undigits(self, coeffs):
        val = 0
        for c in reversed(coeffs):
            val = val * self.p + c
        return val

    def _poly_add(self, a, b):
        da, db = self._digits(a), self._digits(b)
        return self._undigits([(x + y) % self.p for x, y in zip(da, db)])

    def _poly_neg(self, a):
        return self._undigits([(-x) % self.p for x in self._digits(a)])

    def _poly_mul(self, a, b):
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % self.p
        # reduce modulo the irreducible: x^k == -(lower coefficients)
        red = _IRREDUCIBLE[self.q]
        for deg in range(2 * self.k - 2, self.k - 1, -1):
            c = prod[deg]
            if c:
                prod[deg] = 0
                for i in range(self.k):
                    prod[deg - self.k + i] = (prod[deg - self.k + i] - c * red[i]) % self.p
        return self._undigits(prod[: self.k])

    # -- public operations --

    @property
    def elements(self):
        return range(self.q)

    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.q
        return self._add[a][b]

    def neg(self, a):
        if self.k == 1:
            return (-a) % self.q
        return self._neg[a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.q
        return self._mul[a][b]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.q})")
        if self.k == 1:
            return pow(a, self.q - 2, self.q)
        return self._inv[a]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def check_axioms(self):
        """Exhaustive field-axiom sweep; raises AssertionError on any failure.

        Cheap for the supported orders (q <= 9 needs q^3 = 729 triples; larger
        primes are swept pairwise with sampled triples by the test suite).
        """
        q = self.q
        els = range(q)
        for a in els:
            assert self.add(a, 0) == a and self.mul(a, 1) == a
            assert self.add(a, self.neg(a)) == 0
            if a:
                assert self.mul(a, self.inv(a)) == 1
            for b in els:
                s, m = self.add(a, b), self.mul(a, b)
                assert 0 <= s < q and 0 <= m < q
                assert s == self.add(b, a) and m == self.mul(b, a)
        for a, b, c in product(els, repeat=3):
            assert self.add(self.add(a, b), c) == self.add(a, self.add(b, c))
            assert self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))
            assert self.mul(a, self.add(b, c)) == self.add(self.mul(a, b), self.mul(a, c))
        return True

    def __repr__(self):
        return f"GF({self.q})"

    def __eq__(self, other):
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self):
        return hash(("GF", self.q))


_FIELD_CACHE = {}


def field(q):
    """Cached GF(q) factory."""
    if q not in _FIELD_CACHE:
        _FIELD_CACHE[q] = GF(q)
    return _FIELD_CACHE[q]


# -- vectors and projective points --


def vec_add(f, u, v):
    return tuple(f.add(a, b) for a, b in zip(u, v))


def vec_scale(f, c, u):
    return tuple(f.mul(c, a) for a in u)


def dot(f, u, v):
    acc = 0
    for a, b in zip(u, v):
        acc = f.add(acc, f.mul(a, b))
    return acc


def normalize_point(f, v):
    """Canonical projective representative: first nonzero coordinate is 1.

    Scaling invariance makes this a well-defined map on projective points:
    normalize_point(f, c*v) == normalize_point(f, v) for every nonzero c.
    Raises ZeroVectorError on the zero vector.
    """
    for a in v:
        if a:
            if a == 1:
                return tuple(v)
            s = f.inv(a)
            return vec_scale(f, s, v)
    raise ZeroVectorError(f"zero vector {v!r} has no projective point")


def projective_points(f, dim):
    """All points of PG(dim, q) as canonical tuples, in lexicographic order.

    There are (q**(dim+1) - 1) / (q - 1) of them.
    """
    pts = []
    for lead in range(dim + 1):
        head = (0,) * lead + (1,)
        for tail in product(f.elements, repeat=dim - lead):
            pts.append(head + tail)
    pts.sort()
    return pts
