"""
Exact rational scalars and dense matrices.

Every entry is a ``fractions.Fraction``; nothing in this module ever touches
floating point. Matrices are immutable so they can be shared between Celery
chunks, cached on algebras and used as dictionary keys.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Optional, Sequence, Tuple, Union

from .exceptions import DimensionMismatch, OffCell, SingularMatrix

logger = logging.getLogger(__name__)

Rat = Fraction

RatLike = Union[Fraction, int, str]


def parse_rat(value: RatLike) -> Fraction:
    """
    Parse the JSON encoding of a rational.

    Accepts ints, Fractions and strings of the form "p" or "p/q".
    """
    if isinstance(value, bool):
        raise ValueError(f"Not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if '.' in text or 'e' in text.lower():
            raise ValueError(f"Decimal notation is not accepted: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Not a rational: {value!r}") from e
    raise ValueError(f"Not a rational: {value!r}")


def format_rat(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class Mat:
    """Immutable dense matrix over the rationals, stored row-major."""

    __slots__ = ('rows', 'cols', 'entries', '_hash')

    def __init__(self, rows: int, cols: int, entries: Iterable[RatLike]):
        values = tuple(parse_rat(v) for v in entries)
        if len(values) != rows * cols:
            raise DimensionMismatch(
                f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(values)}"
            )
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'cols', cols)
        object.__setattr__(self, 'entries', values)
        object.__setattr__(self, '_hash', None)

    def __setattr__(self, name, value):
        raise AttributeError("Mat is immutable")

    # Constructors

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RatLike]]) -> 'Mat':
        if not rows:
            return cls(0, 0, ())
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionMismatch("Ragged rows")
        return cls(len(rows), width, (v for r in rows for v in r))

    @classmethod
    def column(cls, values: Sequence[RatLike]) -> 'Mat':
        return cls(len(values), 1, values)

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> 'Mat':
        cols = rows if cols is None else cols
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> 'Mat':
        return cls(n, n, (1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def diag(cls, values: Sequence[RatLike]) -> 'Mat':
        n = len(values)
        return cls(n, n, (values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def unit(cls, n: int, i: int, j: int) -> 'Mat':
        """Elementary matrix E_ij of size n."""
        return cls(n, n, (1 if (r, c) == (i, j) else 0 for r in range(n) for c in range(n)))

    @classmethod
    def block_diag(cls, blocks: Sequence['Mat']) -> 'Mat':
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        grid = [[Fraction(0)] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    grid[r0 + i][c0 + j] = b[i, j]
            r0 += b.rows
            c0 += b.cols
        return cls.from_rows(grid)

    # Access

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key: Tuple[int, int]) -> Fraction:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) outside a {self.rows}x{self.cols} matrix")
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def block(self, r0: int, r1: int, c0: int, c1: int) -> 'Mat':
        """Submatrix with rows r0..r1-1 and columns c0..c1-1."""
        return Mat(r1 - r0, c1 - c0, (self[i, j] for i in range(r0, r1) for j in range(c0, c1)))

    def replace(self, updates) -> 'Mat':
        """Copy with the given {(i, j): value} entries overwritten."""
        values = list(self.entries)
        for (i, j), v in updates.items():
            values[i * self.cols + j] = parse_rat(v)
        return Mat(self.rows, self.cols, values)

    @property
    def T(self) -> 'Mat':
        return Mat(self.cols, self.rows, (self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def trace(self) -> Fraction:
        return sum((self[i, i] for i in range(min(self.rows, self.cols))), Fraction(0))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def first_nonzero(self, column_major: bool = False) -> Optional[Fraction]:
        order = self.T.entries if column_major else self.entries
        return next((v for v in order if v != 0), None)

    # Arithmetic

    def _check_same_shape(self, other: 'Mat'):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: 'Mat') -> 'Mat':
        self._check_same_shape(other)
        return Mat(self.rows, self.cols, (a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: 'Mat') -> 'Mat':
        self._check_same_shape(other)
        return Mat(self.rows, self.cols, (a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> 'Mat':
        return Mat(self.rows, self.cols, (-a for a in self.entries))

    def __mul__(self, scalar: RatLike) -> 'Mat':
        if isinstance(scalar, Mat):
            return NotImplemented
        s = parse_rat(scalar)
        return Mat(self.rows, self.cols, (s * a for a in self.entries))

    __rmul__ = __mul__

    def __matmul__(self, other: 'Mat') -> 'Mat':
        return mat_mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, '_hash', hash((self.rows, self.cols, self.entries)))
        return self._hash

    def __repr__(self) -> str:
        body = '; '.join(' '.join(format_rat(v) for v in self.row(i)) for i in range(self.rows))
        return f"Mat([{body}])"


def mat_mul(a: Mat, b: Mat) -> Mat:
    if a.cols != b.rows:
        raise DimensionMismatch(f"Cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    b_cols = [b.col(j) for j in range(b.cols)]
    out = []
    for i in range(a.rows):
        row = a.row(i)
        for col in b_cols:
            out.append(sum((x * y for x, y in zip(row, col) if x and y), Fraction(0)))
    return Mat(a.rows, b.cols, out)


def mat_inverse(a: Mat) -> Mat:
    """Inverse through fraction-free elimination of [a | I]; raises SingularMatrix."""
    if not a.is_square:
        raise DimensionMismatch(f"Cannot invert a {a.rows}x{a.cols} matrix")
    solution = solve_linear(a, Mat.identity(a.rows))
    if solution is None or not solution.is_unique:
        raise SingularMatrix(f"Matrix is not invertible: {a!r}")
    return solution.particular


def determinant(a: Mat) -> Fraction:
    """
    Fraction-free (Bareiss) determinant.

    Rows are first scaled to integers; the scale factors are divided out at
    the end so every intermediate value stays an integer.
    """
    if not a.is_square:
        raise DimensionMismatch(f"No determinant for a {a.rows}x{a.cols} matrix")
    n = a.rows
    if n == 0:
        return Fraction(1)
    scale = 1
    m = []
    for i in range(n):
        row = a.row(i)
        d = lcm(*(v.denominator for v in row))
        scale *= d
        m.append([int(v * d) for v in row])

    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return Fraction(0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return Fraction(sign * m[n - 1][n - 1], scale)


@dataclass(frozen=True)
class LinearSolution:
    """Solution set of a x = b: particular + span(null_space)."""
    particular: Mat
    null_space: Tuple[Mat, ...]

    @property
    def is_unique(self) -> bool:
        return not self.null_space


def _row_echelon(m, t, n_cols):
    """
    In-place fraction-free forward elimination; returns the free column indices.

    Each row of ``m`` and of ``t`` is first scaled so ``m`` holds integers, then
    eliminated Bareiss-style: every division by the previous pivot is exact.
    """
    n_rows = len(m)
    for r in range(n_rows):
        d = lcm(*(v.denominator for v in m[r])) if m[r] else 1
        m[r] = [int(v * d) for v in m[r]]
        if t is not None:
            t[r] = [v * d for v in t[r]]

    free_vars = []
    piv_r = 0
    prev = 1
    for piv_c in range(n_cols):
        i_row = next((r for r in range(piv_r, n_rows) if m[r][piv_c] != 0), None)
        if i_row is None:
            free_vars.append(piv_c)
            continue
        if i_row != piv_r:
            m[piv_r], m[i_row] = m[i_row], m[piv_r]
            if t is not None:
                t[piv_r], t[i_row] = t[i_row], t[piv_r]
        fp = m[piv_r][piv_c]
        for r in range(piv_r + 1, n_rows):
            fr = m[r][piv_c]
            for c in range(piv_c, n_cols):
                m[r][c] = (m[r][c] * fp - m[piv_r][c] * fr) // prev
            if t is not None:
                t[r] = [(u * fp - v * fr) / prev for u, v in zip(t[r], t[piv_r])]
        prev = fp
        piv_r += 1
    return free_vars


def _back_substitute(m, t, pivot_cols, free_values, n_cols):
    sol = [Fraction(0)] * n_cols
    for c, v in free_values.items():
        sol[c] = v
    for r in range(len(pivot_cols) - 1, -1, -1):
        piv_c = pivot_cols[r]
        s = -t[r] if t is not None else Fraction(0)
        for c in range(piv_c + 1, n_cols):
            s += m[r][c] * sol[c]
        sol[piv_c] = -s / m[r][piv_c]
    return sol


def solve_linear(a: Mat, b: Mat) -> Optional[LinearSolution]:
    """
    Solve a x = b exactly.

    ``b`` may hold several right-hand sides as columns; the particular
    solution then has as many columns. Returns None when the system is
    inconsistent.
    """
    if a.rows != b.rows:
        raise DimensionMismatch(f"{a.rows} equations but {b.rows} right-hand side rows")
    n_cols = a.cols
    m = a.to_rows()
    t = b.to_rows()
    free_vars = _row_echelon(m, t, n_cols)
    rank = n_cols - len(free_vars)

    for r in range(rank, a.rows):
        if any(t[r]):
            logger.debug(f"Inconsistent system: residual row {r}")
            return None

    free_set = set(free_vars)
    pivot_cols = [c for c in range(n_cols) if c not in free_set]
    zero_free = {c: Fraction(0) for c in free_vars}

    columns = []
    for k in range(b.cols):
        rhs = [[row[k]] for row in t[:rank]]
        columns.append(_back_substitute(m, [r[0] for r in rhs], pivot_cols, zero_free, n_cols))
    particular = Mat(n_cols, b.cols, (columns[k][i] for i in range(n_cols) for k in range(b.cols)))

    null_space = []
    for f in free_vars:
        values = {c: Fraction(1 if c == f else 0) for c in free_vars}
        null_space.append(Mat.column(_back_substitute(m, None, pivot_cols, values, n_cols)))

    return LinearSolution(particular=particular, null_space=tuple(null_space))


def _normalize_splits(n: int, split: Union[int, Sequence[int]]) -> Tuple[int, ...]:
    splits = (split,) if isinstance(split, int) else tuple(split)
    if not splits or any(s <= 0 or s >= n for s in splits) or list(splits) != sorted(set(splits)):
        raise DimensionMismatch(f"Invalid split {split!r} for size {n}")
    return splits


def block_ldu(a: Mat, split: Union[int, Sequence[int]]) -> Tuple[Mat, Mat, Mat]:
    """
    Block LDU factorization a = L·D·U with respect to the given split(s).

    L is block-lower-unipotent, D block-diagonal and U block-upper-unipotent.
    Raises OffCell when a leading block (or a Schur complement standing in for
    one) is singular.
    """
    if not a.is_square:
        raise DimensionMismatch(f"block_ldu needs a square matrix, got {a.shape}")
    n = a.rows
    splits = _normalize_splits(n, split)

    s = splits[0]
    a11 = a.block(0, s, 0, s)
    a12 = a.block(0, s, s, n)
    a21 = a.block(s, n, 0, s)
    a22 = a.block(s, n, s, n)
    try:
        a11_inv = mat_inverse(a11)
    except SingularMatrix:
        raise OffCell(f"Leading {s}x{s} block is singular")

    l21 = a21 @ a11_inv
    u12 = a11_inv @ a12
    schur = a22 - a21 @ u12

    rest = tuple(x - s for x in splits[1:])
    if rest:
        l_s, d_s, u_s = block_ldu(schur, rest)
    else:
        size = n - s
        l_s, d_s, u_s = Mat.identity(size), schur, Mat.identity(size)

    lower = _assemble(Mat.identity(s), Mat.zeros(s, n - s), l21, l_s)
    diag = Mat.block_diag([a11, d_s])
    upper = _assemble(Mat.identity(s), u12, Mat.zeros(n - s, s), u_s)
    return lower, diag, upper


def _assemble(tl: Mat, tr: Mat, bl: Mat, br: Mat) -> Mat:
    rows = [list(tl.row(i)) + list(tr.row(i)) for i in range(tl.rows)]
    rows += [list(bl.row(i)) + list(br.row(i)) for i in range(bl.rows)]
    return Mat.from_rows(rows)
