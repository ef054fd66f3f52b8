"""Finite Grassmann algebras, the skew field D = C[theta] and small supermatrices.

Monomials of Lambda_N are stored as bitmasks: bit k-1 stands for the
generator h_k.  Products reorder generators into increasing order and pick
up one sign per transposition.
"""

from __future__ import annotations

from fractions import Fraction

from .symcore.scalar import ZERO, Scalar, as_scalar

__all__ = [
    "MAX_GENERATORS", "GrassmannError", "GrassmannAlgebra", "GrassmannElement",
    "gmul", "ginv", "DNumber", "dmul", "dinv", "SuperMatrix", "d_to_gl11",
    "normalize_psi", "psi_matrix", "PHI2", "phi_apply", "right_theta_action",
    "vector_parity",
]

MAX_GENERATORS = 8


class GrassmannError(ValueError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _reorder_sign(a: int, b: int) -> int:
    """Sign of h_A h_B -> h_{A+B} for disjoint masks."""
    swaps = 0
    while b:
        low = b & -b
        swaps += _popcount(a & ~((low << 1) - 1))
        b ^= low
    return -1 if swaps & 1 else 1


class GrassmannAlgebra:
    """Lambda_N on generators h1..hN."""

    _cache: dict = {}

    def __new__(cls, n: int):
        if not isinstance(n, int) or n < 0:
            raise GrassmannError("number of generators must be a non-negative integer")
        if n > MAX_GENERATORS:
            raise GrassmannError(f"at most {MAX_GENERATORS} generators are supported")
        inst = cls._cache.get(n)
        if inst is None:
            inst = super().__new__(cls)
            inst.n = n
            cls._cache[n] = inst
        return inst

    def __repr__(self):
        return f"GrassmannAlgebra({self.n})"

    def __reduce__(self):
        return (GrassmannAlgebra, (self.n,))

    @property
    def dimension(self) -> int:
        return 1 << self.n

    def element(self, terms=None) -> "GrassmannElement":
        """Build from {index tuple or mask: coefficient}; unsorted tuples are reordered with sign."""
        out = {}
        for key, c in (terms or {}).items():
            c = as_scalar(c)
            if isinstance(key, int):
                mask, sign = key, 1
            else:
                mask, sign = self._mask_of(key)
                if mask is None:
                    continue
            if mask >> self.n:
                raise GrassmannError(f"generator index out of range for N={self.n}")
            if sign < 0:
                c = -c
            v = out.get(mask, ZERO) + c
            if v:
                out[mask] = v
            else:
                out.pop(mask, None)
        return GrassmannElement(self, out)

    def _mask_of(self, indices):
        mask = 0
        sign = 1
        for k in indices:
            if not 1 <= k <= self.n:
                raise GrassmannError(f"generator h{k} not in Lambda_{self.n}")
            bit = 1 << (k - 1)
            if mask & bit:
                return None, 0
            sign *= _reorder_sign(mask, bit)
            mask |= bit
        return mask, sign

    def scalar(self, c) -> "GrassmannElement":
        c = as_scalar(c)
        return GrassmannElement(self, {0: c} if c else {})

    def one(self):
        return self.scalar(1)

    def zero(self):
        return GrassmannElement(self, {})

    def gen(self, k: int) -> "GrassmannElement":
        return self.element({(k,): 1})

    def gens(self):
        return [self.gen(k) for k in range(1, self.n + 1)]

    def parse(self, text: str) -> "GrassmannElement":
        """Read text such as ``2 + 3*h1*h2 - i*h3``."""
        from .symcore.parser import VarRegistry, parse

        names = tuple(f"h{k}" for k in range(1, self.n + 1))
        tree = parse(text, VarRegistry((), names))
        return _interpret(tree, self)

    def random(self, rng: random.Random, parity: int | None = None, density: float = 0.6,
               invertible: bool = False, bound: int = 3, gaussian: bool = True) -> "GrassmannElement":
        terms = {}
        for mask in range(self.dimension):
            if parity is not None and _popcount(mask) % 2 != parity:
                continue
            if mask and rng.random() > density:
                continue
            re = Fraction(rng.randint(-bound, bound), rng.randint(1, 3))
            im = Fraction(rng.randint(-bound, bound), rng.randint(1, 3)) if gaussian and rng.random() < 0.3 else 0
            if mask == 0 and invertible and not (re or im):
                re = Fraction(rng.choice([-2, -1, 1, 2, 3]))
            terms[mask] = Scalar(re, im)
        if invertible and parity == 1:
            raise GrassmannError("odd elements are never invertible")
        return self.element(terms)


def _interpret(tree, alg: GrassmannAlgebra) -> "GrassmannElement":
    from .symcore import expr as E

    if isinstance(tree, E.Const):
        return alg.scalar(tree.value)
    if isinstance(tree, E.Var):
        return alg.gen(int(tree.name[1:]))
    if isinstance(tree, E.Add):
        out = alg.zero()
        for a in tree.args:
            out = out + _interpret(a, alg)
        return out
    if isinstance(tree, E.Mul):
        out = alg.one()
        for a in tree.args:
            out = out * _interpret(a, alg)
        return out
    if isinstance(tree, E.Pow):
        base = _interpret(tree.base, alg)
        return base ** tree.exp
    if isinstance(tree, E.Div):
        return _interpret(tree.num, alg) * ginv(_interpret(tree.den, alg))
    raise GrassmannError(f"{type(tree).__name__} is not allowed in a Grassmann literal")


class GrassmannElement:
    __slots__ = ("alg", "terms", "_hash")

    def __init__(self, alg: GrassmannAlgebra, terms: dict):
        self.alg = alg
        self.terms = terms
        self._hash = None

    # structure --------------------------------------------------------
    @property
    def n(self):
        return self.alg.n

    @property
    def body(self) -> Scalar:
        return self.terms.get(0, ZERO)

    def nilpotent(self) -> "GrassmannElement":
        return GrassmannElement(self.alg, {m: c for m, c in self.terms.items() if m})

    def parity(self) -> int | None:
        """0 or 1 when homogeneous (zero counts as even), else None."""
        ps = {_popcount(m) & 1 for m in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def is_even(self) -> bool:
        return self.parity() == 0

    def is_odd(self) -> bool:
        return bool(self.terms) and self.parity() == 1 or not self.terms

    def is_invertible(self) -> bool:
        return bool(self.body)

    def coefficient(self, indices=()) -> Scalar:
        mask, sign = self.alg._mask_of(indices)
        c = self.terms.get(mask, ZERO)
        return -c if sign < 0 else c

    def __bool__(self):
        return bool(self.terms)

    # arithmetic -------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, GrassmannElement):
            return self.alg.scalar(other)
        if other.alg is not self.alg:
            raise GrassmannError(f"mismatched algebras Lambda_{self.n} and Lambda_{other.n}")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, ZERO) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return GrassmannElement(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, GrassmannElement):
            c = as_scalar(other)
            if not c:
                return self.alg.zero()
            return GrassmannElement(self.alg, {m: v * c for m, v in self.terms.items()})
        return gmul(self, other)

    def __rmul__(self, other):
        return self * other  # scalars are central

    def __truediv__(self, other):
        if isinstance(other, GrassmannElement):
            return self * ginv(other)
        return self * as_scalar(other).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return ginv(self) ** (-k)
        out = self.alg.one()
        for _ in range(k):
            out = out * self
        return out

    def inverse(self):
        return ginv(self)

    # identity ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, GrassmannElement):
            return self.alg is other.alg and self.terms == other.terms
        try:
            c = as_scalar(other)
        except TypeError:
            return NotImplemented
        return self.terms == ({0: c} if c else {})

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    # text -------------------------------------------------------------
    def monomials(self):
        """[(index tuple, coefficient)] in degree-then-lexicographic order."""
        items = []
        for m, c in self.terms.items():
            idx = tuple(k + 1 for k in range(self.n) if m >> k & 1)
            items.append((idx, c))
        items.sort(key=lambda ic: (len(ic[0]), ic[0]))
        return items

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for idx, c in self.monomials():
            gens = "*".join(f"h{k}" for k in idx)
            if not idx:
                text = str(c)
            elif c.is_one():
                text = gens
            elif c == -1:
                text = "-" + gens
            else:
                text = f"{c}*{gens}"
            if parts and text.startswith("-"):
                parts.append(" - " + text[1:])
            elif parts:
                parts.append(" + " + text)
            else:
                parts.append(text)
        return "".join(parts)

    def __repr__(self):
        return f"<Lambda_{self.n}: {self}>"

    def to_json(self) -> list:
        return [[list(idx), [str(c.re), str(c.im)]] for idx, c in self.monomials()]

    @staticmethod
    def from_json(n: int, data: list) -> "GrassmannElement":
        alg = GrassmannAlgebra(n)
        return alg.element({tuple(idx): Scalar(Fraction(re), Fraction(im)) for idx, (re, im) in data})


def gmul(x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    if x.alg is not y.alg:
        raise GrassmannError(f"mismatched algebras Lambda_{x.n} and Lambda_{y.n}")
    out: dict = {}
    for a, ca in x.terms.items():
        for b, cb in y.terms.items():
            if a & b:
                continue
            c = ca * cb
            if _reorder_sign(a, b) < 0:
                c = -c
            m = a | b
            v = out.get(m)
            v = c if v is None else v + c
            if v:
                out[m] = v
            else:
                del out[m]
    return GrassmannElement(x.alg, out)


def ginv(x: GrassmannElement) -> GrassmannElement:
    """body^-1 * sum_k (-n/body)^k with n the nilpotent part."""
    b = x.body
    if not b:
        raise GrassmannError("element with zero body is not invertible")
    binv = b.inverse()
    step = x.nilpotent() * (-binv)
    out = x.alg.one()
    power = x.alg.one()
    for _ in range(x.n):
        power = power * step
        if not power:
            break
        out = out + power
    return out * binv


# ---------------------------------------------------------------------------
# D = C[theta], theta odd, theta^2 = -1


class DNumber:
    """a + theta*alpha with a even and alpha odd in a host Lambda_N."""

    __slots__ = ("a", "alpha")

    def __init__(self, a: GrassmannElement, alpha: GrassmannElement | None = None):
        if alpha is None:
            alpha = a.alg.zero()
        if a.alg is not alpha.alg:
            raise GrassmannError("even and odd parts live in different algebras")
        if not a.is_even():
            raise GrassmannError("the even part of a D-number must be even")
        if alpha and alpha.parity() != 1:
            raise GrassmannError("the odd part of a D-number must be odd")
        self.a = a
        self.alpha = alpha

    @property
    def alg(self):
        return self.a.alg

    def is_invertible(self) -> bool:
        return self.a.is_invertible()

    def __eq__(self, other):
        return isinstance(other, DNumber) and self.a == other.a and self.alpha == other.alpha

    def __hash__(self):
        return hash((self.a, self.alpha))

    def __mul__(self, other):
        return dmul(self, other)

    def __repr__(self):
        return f"DNumber({self.a}, {self.alpha})"


def dmul(x: DNumber, y: DNumber) -> DNumber:
    """(a, alpha)(a', alpha') = (a a' + alpha alpha', a alpha' + alpha a')."""
    if x.alg is not y.alg:
        raise GrassmannError("mismatched host algebras")
    return DNumber(x.a * y.a + x.alpha * y.alpha, x.a * y.alpha + x.alpha * y.a)


def dinv(x: DNumber) -> DNumber:
    if not x.is_invertible():
        raise GrassmannError("D-number with zero body is not invertible")
    # (a, alpha)^-1 = (a^-1 + alpha^2 a^-3 ..., -alpha a^-2); alpha^2 = 0 for odd alpha
    ainv = ginv(x.a)
    return DNumber(ainv, -(x.alpha * ainv * ainv))


# ---------------------------------------------------------------------------
# supermatrices


class SuperMatrix:
    """Block matrix of shape (p|q) x (p|q) with Lambda_N entries.

    Rows and columns 0..p-1 are even, p..p+q-1 odd.  ``parity`` is 0 when
    diagonal blocks are even and off-diagonal blocks odd, 1 for the reverse.
    """

    __slots__ = ("alg", "p", "q", "rows", "parity")

    def __init__(self, rows, p: int, q: int, parity: int | None = None, check: bool = True):
        if p not in (1, 2) or q not in (1, 2):
            raise GrassmannError("block sizes must be 1 or 2")
        size = p + q
        if len(rows) != size or any(len(r) != size for r in rows):
            raise GrassmannError("matrix shape does not match the block sizes")
        alg = rows[0][0].alg
        self.alg, self.p, self.q = alg, p, q
        self.rows = tuple(tuple(e if isinstance(e, GrassmannElement) else alg.scalar(e) for e in r) for r in rows)
        if parity is None:
            parity = self._detect_parity()
        self.parity = parity
        if check and not self._respects(parity):
            raise GrassmannError("entries do not respect the block parity pattern")

    def _index_parity(self, i):
        return 0 if i < self.p else 1

    def _respects(self, parity):
        for i, r in enumerate(self.rows):
            for j, e in enumerate(r):
                want = (self._index_parity(i) + self._index_parity(j) + parity) & 1
                if e and e.parity() != want:
                    return False
        return True

    def _detect_parity(self):
        if self._respects(0):
            return 0
        if self._respects(1):
            return 1
        raise GrassmannError("entries do not respect a block parity pattern")

    @property
    def size(self):
        return self.p + self.q

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, SuperMatrix) and (self.p, self.q) == (other.p, other.q) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        if (self.p, self.q) != (other.p, other.q):
            raise GrassmannError("block sizes differ")
        n = self.size
        rows = []
        for i in range(n):
            row = []
            for k in range(n):
                acc = self.alg.zero()
                for j in range(n):
                    acc = acc + self.rows[i][j] * other.rows[j][k]
                row.append(acc)
            rows.append(row)
        return SuperMatrix(rows, self.p, self.q, (self.parity + other.parity) & 1)

    __mul__ = __matmul__

    @classmethod
    def identity(cls, alg, p, q):
        n = p + q
        return cls([[alg.one() if i == j else alg.zero() for j in range(n)] for i in range(n)], p, q, 0)

    def is_invertible(self) -> bool:
        if self.parity:
            return False if self.p != self.q else self._odd_invertible()
        return _block_body_det(self, 0, self.p) != 0 and _block_body_det(self, self.p, self.q) != 0

    def _odd_invertible(self):
        return _off_body_det(self) != 0

    def inverse(self) -> "SuperMatrix":
        """Inverse by Gauss-Jordan elimination pivoting on unit entries."""
        n = self.size
        a = [list(r) + [self.alg.one() if i == j else self.alg.zero() for j in range(n)]
             for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col].is_invertible()), None)
            if piv is None:
                raise GrassmannError("supermatrix is not invertible")
            a[col], a[piv] = a[piv], a[col]
            inv = ginv(a[col][col])
            a[col] = [inv * e for e in a[col]]
            for r in range(n):
                if r != col and a[r][col]:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return SuperMatrix([row[n:] for row in a], self.p, self.q, self.parity)

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in r) for r in self.rows)
        return f"SuperMatrix({self.p}|{self.q}: [{body}])"


def _block_body_det(m, start, size):
    b = [[m.rows[start + i][start + j].body for j in range(size)] for i in range(size)]
    if size == 1:
        return b[0][0]
    return b[0][0] * b[1][1] - b[0][1] * b[1][0]


def _off_body_det(m):
    p = m.p
    b = [[m.rows[i][p + j].body for j in range(m.q)] for i in range(p)]
    c = [[m.rows[p + i][j].body for j in range(p)] for i in range(m.q)]
    det = lambda x: x[0][0] if len(x) == 1 else x[0][0] * x[1][1] - x[0][1] * x[1][0]
    return det(b) * det(c)


def d_to_gl11(x: DNumber) -> SuperMatrix:
    """(a, alpha) -> [[a, alpha], [alpha, a]]."""
    if not x.is_invertible():
        raise GrassmannError("only invertible D-numbers embed into GL(1|1)")
    return SuperMatrix([[x.a, x.alpha], [x.alpha, x.a]], 1, 1, 0)


def psi_matrix(a: GrassmannElement, alpha: GrassmannElement) -> SuperMatrix:
    """The odd involution [[alpha, a], [a^-1, -alpha]]."""
    return SuperMatrix([[alpha, a], [ginv(a), -alpha]], 1, 1, 1)


def PHI2(alg: GrassmannAlgebra) -> SuperMatrix:
    return SuperMatrix([[alg.zero(), alg.one()], [alg.one(), alg.zero()]], 1, 1, 1)


def normalize_psi(psi: SuperMatrix) -> SuperMatrix:
    """Change of basis P with P psi P^-1 = [[0, 1], [1, 0]].

    ``psi`` must be an odd involution [[alpha, a], [a^-1, -alpha]] with a
    an invertible even element.  With the plain matrix product the
    conjugating matrix is [[a^-1, 0], [a^-1 alpha, 1]].
    """
    if (psi.p, psi.q) != (1, 1):
        raise GrassmannError("expected a (1|1) matrix")
    alpha, a = psi[0, 0], psi[0, 1]
    alg = psi.alg
    if not a.is_even() or not a.is_invertible():
        raise GrassmannError("off-diagonal entry a must be even and invertible")
    if alpha and alpha.parity() != 1:
        raise GrassmannError("diagonal entry alpha must be odd")
    ainv = ginv(a)
    if psi[1, 0] != ainv or psi[1, 1] != -alpha:
        raise GrassmannError("matrix is not of the form [[alpha, a], [a^-1, -alpha]]")
    if psi @ psi != SuperMatrix.identity(alg, 1, 1):
        raise GrassmannError("matrix does not square to the identity")
    return SuperMatrix([[ainv, alg.zero()], [ainv * alpha, alg.one()]], 1, 1, 0)


# ---------------------------------------------------------------------------
# the odd involution on C^{2|2}; vectors are (e0, e1, E0, E1) components


def _vector(v):
    v = tuple(v)
    if len(v) != 4:
        raise GrassmannError("expected four components (e0, e1, E0, E1)")
    return v


def phi_apply(v):
    """Swap the even slots with the odd slots: (s0, s1, S0, S1) -> (S0, S1, s0, s1)."""
    s0, s1, t0, t1 = _vector(v)
    return (t0, t1, s0, s1)


def vector_parity(v) -> int | None:
    """0 for even vectors (even e-components, odd E-components), 1 for odd, None otherwise."""
    v = _vector(v)
    for par in (0, 1):
        ok = True
        for k, c in enumerate(v):
            want = par if k < 2 else 1 - par
            if c and c.parity() != want:
                ok = False
                break
        if ok:
            return par
    return None


def right_theta_action(v):
    """v . theta = (-1)^|v| phi(v) for a homogeneous vector v."""
    par = vector_parity(v)
    if par is None:
        raise GrassmannError("right action of theta needs a homogeneous vector")
    w = phi_apply(v)
    return w if par == 0 else tuple(-c for c in w)
