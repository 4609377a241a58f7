"""Exact linear algebra over F2[tau].

Scalars are polynomials in tau with mod-2 coefficients, stored as int
bitmasks (bit k is the coefficient of tau^k).  The low-level helpers
(`_pdeg`, `_pmul`, `_pdivmod`, `_snf_core`) only use integer arithmetic
and plain indexing so they can also be compiled with numba for bulk
checks; the public API wraps them in TauScalar / TauMatrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


# ---------------------------------------------------------------------------
# integer-level polynomial arithmetic


def _pdeg(a):
    """tau-degree of a bitmask polynomial, -1 for zero."""
    d = -1
    while a:
        a >>= 1
        d += 1
    return d


def _pmul(a, b):
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _pdivmod(a, b):
    db = _pdeg(b)
    q = 0
    da = _pdeg(a)
    while da >= db:
        sh = da - db
        q ^= 1 << sh
        a ^= b << sh
        da = _pdeg(a)
    return q, a


def _pgcd(a, b):
    while b:
        a, b = b, _pdivmod(a, b)[1]
    return a


def _is_tau_power(a):
    return a != 0 and (a & (a - 1)) == 0


# ---------------------------------------------------------------------------
# scalars


class TauScalar:
    """Element of F2[tau]."""

    __slots__ = ("bits",)

    def __init__(self, bits: int = 0):
        if bits < 0:
            raise ValueError("negative bitmask")
        self.bits = int(bits)

    @classmethod
    def tau_power(cls, k: int) -> "TauScalar":
        if k < 0:
            raise ValueError("negative tau exponent")
        return cls(1 << k)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[int]) -> "TauScalar":
        bits = 0
        for i, c in enumerate(coeffs):
            if c % 2:
                bits |= 1 << i
        return cls(bits)

    @property
    def coefficients(self) -> tuple:
        return tuple((self.bits >> i) & 1 for i in range(self.degree + 1))

    @property
    def degree(self) -> int:
        return self.bits.bit_length() - 1

    def is_zero(self) -> bool:
        return self.bits == 0

    def is_tau_power(self) -> bool:
        return _is_tau_power(self.bits)

    def tau_valuation(self) -> Optional[int]:
        if not self.bits:
            return None
        return (self.bits & -self.bits).bit_length() - 1

    def __add__(self, other):
        return TauScalar(self.bits ^ _coerce(other))

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __mul__(self, other):
        return TauScalar(_pmul(self.bits, _coerce(other)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        r = 1
        for _ in range(k):
            r = _pmul(r, self.bits)
        return TauScalar(r)

    def __divmod__(self, other):
        return scalar_divmod(self, other)

    def __eq__(self, other):
        if isinstance(other, TauScalar):
            return self.bits == other.bits
        if isinstance(other, int):
            return self.bits == (other % 2)
        return NotImplemented

    def __hash__(self):
        return hash(("tau", self.bits))

    def __bool__(self):
        return self.bits != 0

    def __repr__(self):
        return f"TauScalar({self})"

    def __str__(self):
        if not self.bits:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            if (self.bits >> k) & 1:
                parts.append("1" if k == 0 else ("tau" if k == 1 else f"tau^{k}"))
        return " + ".join(parts)


def _coerce(x) -> int:
    if isinstance(x, TauScalar):
        return x.bits
    if isinstance(x, int):
        # integers act through F2
        return x % 2
    raise TypeError(f"cannot use {type(x).__name__} as an F2[tau] scalar")


TAU = TauScalar(2)
ONE = TauScalar(1)
ZERO = TauScalar(0)


def scalar_divmod(a: TauScalar, b: TauScalar):
    """Euclidean division a = q*b + r with deg r < deg b."""
    ai, bi = _coerce(a), _coerce(b)
    if bi == 0:
        raise ZeroDivisionError("division by the zero scalar")
    q, r = _pdivmod(ai, bi)
    return TauScalar(q), TauScalar(r)


def scalar_gcd(a: TauScalar, b: TauScalar) -> TauScalar:
    return TauScalar(_pgcd(_coerce(a), _coerce(b)))


# ---------------------------------------------------------------------------
# matrices


class TauMatrix:
    """Dense matrix over F2[tau].  Entries are kept as int bitmasks."""

    __slots__ = ("rows", "cols", "_e")

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = rows
        self.cols = cols
        if entries is None:
            self._e = [[0] * cols for _ in range(rows)]
        else:
            e = [[_coerce(x) for x in row] for row in entries]
            if len(e) != rows or any(len(r) != cols for r in e):
                raise ValueError("entries do not match the stated shape")
            self._e = e

    @classmethod
    def _from_raw(cls, rows: int, cols: int, raw) -> "TauMatrix":
        # raw: nested lists of bitmasks, taken without copying
        m = cls.__new__(cls)
        m.rows, m.cols, m._e = rows, cols, raw
        return m

    @classmethod
    def from_rows(cls, rows, cols: Optional[int] = None) -> "TauMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, rows)

    @classmethod
    def from_columns(cls, columns, nrows: int) -> "TauMatrix":
        columns = [list(c) for c in columns]
        m = cls(nrows, len(columns))
        for j, c in enumerate(columns):
            if len(c) != nrows:
                raise ValueError("column length mismatch")
            for i, x in enumerate(c):
                m._e[i][j] = _coerce(x)
        return m

    @classmethod
    def identity(cls, n: int) -> "TauMatrix":
        m = cls(n, n)
        for i in range(n):
            m._e[i][i] = 1
        return m

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij) -> TauScalar:
        i, j = ij
        return TauScalar(self._e[i][j])

    def __setitem__(self, ij, value):
        i, j = ij
        self._e[i][j] = _coerce(value)

    def raw(self):
        """Copy of the entries as nested lists of bitmasks."""
        return [list(r) for r in self._e]

    def column(self, j: int) -> list:
        return [TauScalar(self._e[i][j]) for i in range(self.rows)]

    def columns(self) -> list:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "TauMatrix":
        return TauMatrix._from_raw(self.cols, self.rows, [[self._e[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def __matmul__(self, other: "TauMatrix") -> "TauMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = TauMatrix(self.rows, other.cols)
        for i in range(self.rows):
            ri = self._e[i]
            oi = out._e[i]
            for k in range(self.cols):
                a = ri[k]
                if not a:
                    continue
                ok = other._e[k]
                for j in range(other.cols):
                    if ok[j]:
                        oi[j] ^= _pmul(a, ok[j])
        return out

    def apply(self, vec) -> list:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        return [TauScalar(x) for x in self._apply_raw([_coerce(x) for x in vec])]

    def _apply_raw(self, v) -> list:
        out = []
        for i in range(self.rows):
            acc = 0
            for k, a in enumerate(self._e[i]):
                if a and v[k]:
                    acc ^= _pmul(a, v[k])
            out.append(acc)
        return out

    def __eq__(self, other):
        return isinstance(other, TauMatrix) and self.shape == other.shape and self._e == other._e

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(map(tuple, self._e))))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._e for x in r)

    def diagonal(self) -> list:
        return [TauScalar(self._e[i][i]) for i in range(min(self.rows, self.cols))]

    def __repr__(self):
        body = "; ".join(", ".join(str(TauScalar(x)) for x in r) for r in self._e)
        return f"TauMatrix({self.rows}x{self.cols}: [{body}])"


def determinant(m: TauMatrix) -> TauScalar:
    """Determinant by cofactor-free fraction-free elimination (Laplace for tiny sizes)."""
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    return TauScalar(_det_raw(m.raw()))


def _det_raw(a) -> int:
    n = len(a)
    if n == 0:
        return 1
    if n == 1:
        return a[0][0]
    # expansion along the first row; char 2 so no signs
    total = 0
    for j in range(n):
        if a[0][j]:
            minor = [row[:j] + row[j + 1:] for row in a[1:]]
            total ^= _pmul(a[0][j], _det_raw(minor))
    return total


# ---------------------------------------------------------------------------
# Smith normal form


def _snf_core(A, U, Ui, V, Vi, n, m, track):
    """In-place Smith normal form of the n x m matrix A.

    Maintains U*A0*V = A, Ui = U^-1, Vi = V^-1 when track is true.
    Pivot: nonzero entry of least tau-degree, ties to smallest (row, col).
    Returns the rank.
    """
    t = 0
    while t < n and t < m:
        # pick pivot
        bi = -1
        bj = -1
        bd = 1 << 30
        for i in range(t, n):
            for j in range(t, m):
                x = A[i][j]
                if x != 0:
                    dx = _pdeg(x)
                    if dx < bd:
                        bd = dx
                        bi = i
                        bj = j
        if bi < 0:
            break
        _swap_rows(A, U, Ui, t, bi, m, n, track)
        _swap_cols(A, V, Vi, t, bj, n, m, track)
        while True:
            moved = False
            p = A[t][t]
            # clear column t
            for i in range(t + 1, n):
                x = A[i][t]
                if x != 0:
                    q, r = _pdivmod(x, p)
                    _add_row(A, U, Ui, i, t, q, m, n, track)
                    if r != 0:
                        _swap_rows(A, U, Ui, t, i, m, n, track)
                        moved = True
                        break
            if moved:
                continue
            # clear row t
            for j in range(t + 1, m):
                x = A[t][j]
                if x != 0:
                    q, r = _pdivmod(x, p)
                    _add_col(A, V, Vi, j, t, q, n, m, track)
                    if r != 0:
                        _swap_cols(A, V, Vi, t, j, n, m, track)
                        moved = True
                        break
            if moved:
                continue
            # divisibility of the remaining block
            for i in range(t + 1, n):
                for j in range(t + 1, m):
                    x = A[i][j]
                    if x != 0:
                        r = _pdivmod(x, p)[1]
                        if r != 0:
                            _add_row(A, U, Ui, t, i, 1, m, n, track)
                            moved = True
                            break
                if moved:
                    break
            if not moved:
                break
        t += 1
    return t


def _swap_rows(A, U, Ui, a, b, m, n, track):
    if a == b:
        return
    for j in range(m):
        x = A[a][j]
        A[a][j] = A[b][j]
        A[b][j] = x
    if track:
        for j in range(n):
            x = U[a][j]
            U[a][j] = U[b][j]
            U[b][j] = x
            # Ui picks up the same transposition on columns
            y = Ui[j][a]
            Ui[j][a] = Ui[j][b]
            Ui[j][b] = y


def _swap_cols(A, V, Vi, a, b, n, m, track):
    if a == b:
        return
    for i in range(n):
        x = A[i][a]
        A[i][a] = A[i][b]
        A[i][b] = x
    if track:
        for i in range(m):
            x = V[i][a]
            V[i][a] = V[i][b]
            V[i][b] = x
            y = Vi[a][i]
            Vi[a][i] = Vi[b][i]
            Vi[b][i] = y


def _add_row(A, U, Ui, dst, src, q, m, n, track):
    # row_dst += q * row_src
    for j in range(m):
        if A[src][j] != 0:
            A[dst][j] ^= _pmul(q, A[src][j])
    if track:
        for j in range(n):
            if U[src][j] != 0:
                U[dst][j] ^= _pmul(q, U[src][j])
        # inverse: col_src += q * col_dst
        for i in range(n):
            if Ui[i][dst] != 0:
                Ui[i][src] ^= _pmul(q, Ui[i][dst])


def _add_col(A, V, Vi, dst, src, q, n, m, track):
    # col_dst += q * col_src
    for i in range(n):
        if A[i][src] != 0:
            A[i][dst] ^= _pmul(q, A[i][src])
    if track:
        for i in range(m):
            if V[i][src] != 0:
                V[i][dst] ^= _pmul(q, V[i][src])
        # inverse: row_src += q * row_dst
        for j in range(m):
            if Vi[dst][j] != 0:
                Vi[src][j] ^= _pmul(q, Vi[dst][j])


@dataclass(frozen=True)
class SNF:
    """U * m * V = D.  Uinv, Vinv are the inverses, rank the number of nonzero d_i."""

    U: TauMatrix
    D: TauMatrix
    V: TauMatrix
    Uinv: TauMatrix
    Vinv: TauMatrix
    rank: int

    def __iter__(self):
        # allow  U, D, V = smith_normal_form(m)
        return iter((self.U, self.D, self.V))

    @property
    def invariant_factors(self) -> list:
        return [self.D[i, i] for i in range(self.rank)]


def _ident_raw(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(m: TauMatrix) -> SNF:
    n, k = m.rows, m.cols
    A = m.raw()
    U, Ui, V, Vi = _ident_raw(n), _ident_raw(n), _ident_raw(k), _ident_raw(k)
    r = _snf_core(A, U, Ui, V, Vi, n, k, True)
    return SNF(
        U=TauMatrix._from_raw(n, n, U),
        D=TauMatrix._from_raw(n, k, A),
        V=TauMatrix._from_raw(k, k, V),
        Uinv=TauMatrix._from_raw(n, n, Ui),
        Vinv=TauMatrix._from_raw(k, k, Vi),
        rank=r,
    )


def snf_diagonal(m: TauMatrix) -> list:
    """Invariant factors only (no transforms tracked)."""
    A = m.raw()
    r = _snf_core(A, None, None, None, None, m.rows, m.cols, False)
    return [TauScalar(A[i][i]) for i in range(r)]


def rank(m: TauMatrix) -> int:
    A = m.raw()
    return _snf_core(A, None, None, None, None, m.rows, m.cols, False)


# ---------------------------------------------------------------------------
# linear systems, kernels


def solve_linear(m: TauMatrix, target) -> Optional[list]:
    """Some x with m x = target, or None when no solution exists over F2[tau]."""
    if len(target) != m.rows:
        raise ValueError("target length must equal the row count")
    s = smith_normal_form(m)
    ub = [x.bits for x in s.U.apply(target)]
    y = [0] * m.cols
    for i in range(m.rows):
        if i < s.rank:
            q, r = _pdivmod(ub[i], s.D._e[i][i])
            if r:
                return None
            y[i] = q
        elif ub[i]:
            return None
    return [TauScalar(x) for x in s.V._apply_raw(y)]


def kernel_basis(m: TauMatrix) -> list:
    """Basis of the kernel of m (columns of V beyond the rank)."""
    s = smith_normal_form(m)
    return [s.V.column(j) for j in range(s.rank, m.cols)]


# ---------------------------------------------------------------------------
# cyclic decompositions


@dataclass(frozen=True)
class TorsionModule:
    """Cyclic F2[tau]-module: free (order None) or M2/tau^order."""

    order: Optional[int] = None

    def __post_init__(self):
        if self.order is not None and self.order < 1:
            raise ValueError("torsion order must be positive")

    @property
    def is_free(self) -> bool:
        return self.order is None

    def __str__(self):
        if self.order is None:
            return "M2"
        return "M2/tau" if self.order == 1 else f"M2/tau^{self.order}"

    @classmethod
    def parse(cls, text: str) -> "TorsionModule":
        t = text.strip().replace(" ", "")
        if t in ("M2", "free"):
            return cls(None)
        if t == "M2/tau":
            return cls(1)
        if t.startswith("M2/tau^"):
            return cls(int(t[len("M2/tau^"):]))
        raise ValueError(f"not a cyclic module name: {text!r}")


class InconsistentInput(ValueError):
    """Boundaries not contained in cycles."""


def _columns_matrix(cols, nrows=None) -> TauMatrix:
    cols = [list(c) for c in cols]
    if nrows is None:
        nrows = len(cols[0]) if cols else 0
    return TauMatrix.from_columns(cols, nrows)


def subquotient_decomposition(cycles: Iterable, boundaries: Iterable, ambient_dim: Optional[int] = None):
    """Cyclic decomposition of span(cycles) / span(boundaries).

    Returns a list of (TorsionModule, representative column).  Invariant
    factors that are units are dropped.  A non-unit factor that is not a
    power of tau means the input was not homogeneous and is rejected.
    """
    cycles = [list(c) for c in cycles]
    boundaries = [list(b) for b in boundaries]
    if ambient_dim is None:
        ambient_dim = len(cycles[0]) if cycles else (len(boundaries[0]) if boundaries else 0)
    C = _columns_matrix(cycles, ambient_dim)
    s = smith_normal_form(C)
    r = s.rank
    if r == 0:
        for b in boundaries:
            if any(_coerce(x) for x in b):
                raise InconsistentInput("boundary outside the span of the cycles")
        return []
    # basis z_i = d_i * (column i of U^-1)
    d = [s.D._e[i][i] for i in range(r)]
    coords = []
    for b in boundaries:
        ub = [x.bits for x in s.U.apply(b)]
        c = []
        for i in range(ambient_dim):
            if i < r:
                q, rem = _pdivmod(ub[i], d[i])
                if rem:
                    raise InconsistentInput("boundary outside the span of the cycles")
                c.append(q)
            elif ub[i]:
                raise InconsistentInput("boundary outside the span of the cycles")
        coords.append(c)
    K = TauMatrix._from_raw(r, len(coords), [[c[i] for c in coords] for i in range(r)])
    s2 = smith_normal_form(K)
    out = []
    for i in range(r):
        f = s2.D._e[i][i] if i < min(K.rows, K.cols) and i < s2.rank else 0
        if f == 1:
            continue
        if f == 0:
            mod = TorsionModule(None)
        elif _is_tau_power(f):
            mod = TorsionModule(_pdeg(f))
        else:
            raise ValueError(f"invariant factor {TauScalar(f)} is not a power of tau; input is not graded")
        # generator: sum_j Uinv2[j][i] * z_j
        rep = [0] * ambient_dim
        for j in range(r):
            cj = s2.Uinv._e[j][i]
            if not cj:
                continue
            w = _pmul(cj, d[j])
            for a in range(ambient_dim):
                u = s.Uinv._e[a][j]
                if u:
                    rep[a] ^= _pmul(w, u)
        out.append((mod, [TauScalar(x) for x in rep]))
    return out
