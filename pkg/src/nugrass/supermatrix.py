"""Block supermatrices over a supercommutative ring, with the formal odd unit.

A matrix carries a row split r0|r1 and a column split c0|c1.  Blocks B1
(even rows x even cols) and B4 (odd x odd) hold even entries, B2 and B3 hold
odd entries.  Besides plain ring elements an entry may be the formal symbol
1nu, which multiplies by the rule  z * 1nu = nu(z)  (extended two-sidedly,
see act and the pasting machinery).

Entries are duck-typed: SuperFunction and GrassmannNumber both provide the
required +, -, *, parity(), nu(), inv(), body(), is_zero(), ring_one(),
ring_zero().
"""

from __future__ import annotations

from .errors import (
    DoubleNu,
    NotInvertible,
    NuEntriesPresent,
    ResidualNuSymbol,
)


class NuSymbol:
    """The formal odd unit 1nu appearing in non-standard identities."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "1nu"


NU = NuSymbol()


def is_nu(entry) -> bool:
    return entry is NU


class SuperMatrix:
    __slots__ = ("row_split", "col_split", "entries", "proto")

    def __init__(self, row_split, col_split, entries, proto, validate=True):
        """proto: any zero element of the entry ring (used to mint 0 and 1)."""
        self.row_split = (int(row_split[0]), int(row_split[1]))
        self.col_split = (int(col_split[0]), int(col_split[1]))
        self.entries = [list(row) for row in entries]
        self.proto = proto
        if validate:
            self._validate()

    @property
    def nrows(self) -> int:
        return self.row_split[0] + self.row_split[1]

    @property
    def ncols(self) -> int:
        return self.col_split[0] + self.col_split[1]

    def block_parity(self, i: int, j: int) -> int:
        return int((i >= self.row_split[0]) ^ (j >= self.col_split[0]))

    def _validate(self):
        if len(self.entries) != self.nrows:
            raise ValueError("row count mismatch")
        for i, row in enumerate(self.entries):
            if len(row) != self.ncols:
                raise ValueError("column count mismatch")
            for j, e in enumerate(row):
                want = self.block_parity(i, j)
                if is_nu(e):
                    if want != 1:
                        raise ValueError(f"1nu in an even block at ({i},{j})")
                    continue
                p = e.parity()
                if p is None or (p != want and not e.is_zero()):
                    raise ValueError(
                        f"entry at ({i},{j}) has parity {p}, block wants {want}"
                    )

    # -- constructors --------------------------------------------------------

    @classmethod
    def identity(cls, n0: int, n1: int, proto) -> "SuperMatrix":
        one = proto.ring_one()
        zero = proto.ring_zero()
        n = n0 + n1
        entries = [[one if i == j else zero for j in range(n)] for i in range(n)]
        return cls((n0, n1), (n0, n1), entries, proto, validate=False)

    @classmethod
    def zero(cls, row_split, col_split, proto) -> "SuperMatrix":
        z = proto.ring_zero()
        entries = [[z] * (col_split[0] + col_split[1]) for _ in range(row_split[0] + row_split[1])]
        return cls(row_split, col_split, entries, proto, validate=False)

    # -- basic structure -----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        if self.row_split != other.row_split or self.col_split != other.col_split:
            return False
        for ra, rb in zip(self.entries, other.entries):
            for a, b in zip(ra, rb):
                if is_nu(a) != is_nu(b):
                    return False
                if not is_nu(a) and a != b:
                    return False
        return True

    def has_nu(self) -> bool:
        return any(is_nu(e) for row in self.entries for e in row)

    def column(self, j: int) -> list:
        return [row[j] for row in self.entries]

    def take_columns(self, indices, col_split) -> "SuperMatrix":
        entries = [[row[j] for j in indices] for row in self.entries]
        return SuperMatrix(self.row_split, col_split, entries, self.proto, validate=False)

    def map_entries(self, fn) -> "SuperMatrix":
        entries = [[e if is_nu(e) else fn(e) for e in row] for row in self.entries]
        return SuperMatrix(self.row_split, self.col_split, entries, self.proto, validate=False)

    # -- arithmetic ----------------------------------------------------------

    def __mul__(self, other: "SuperMatrix") -> "SuperMatrix":
        return smat_mul(self, other)

    def __repr__(self):
        return format_blocked(
            [[repr(e) for e in row] for row in self.entries],
            self.row_split[0],
            self.col_split[0],
        )

    # -- serialization -------------------------------------------------------

    def to_dict(self, entry_to_dict) -> dict:
        return {
            "row_split": list(self.row_split),
            "col_split": list(self.col_split),
            "entries": [
                ["1nu" if is_nu(e) else entry_to_dict(e) for e in row]
                for row in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, entry_from_dict, proto) -> "SuperMatrix":
        entries = [
            [NU if e == "1nu" else entry_from_dict(e) for e in row]
            for row in data["entries"]
        ]
        return cls(tuple(data["row_split"]), tuple(data["col_split"]), entries, proto)


def smat_mul(A: SuperMatrix, B: SuperMatrix) -> SuperMatrix:
    """Row-by-column product; 1nu factors resolve through the involution."""
    if A.col_split != B.row_split:
        raise ValueError(f"split mismatch: {A.col_split} vs {B.row_split}")
    zero = A.proto.ring_zero()
    n = B.ncols
    out = []
    for i in range(A.nrows):
        arow = A.entries[i]
        row = []
        for j in range(n):
            acc = zero
            for k in range(A.ncols):
                a = arow[k]
                b = B.entries[k][j]
                if is_nu(a):
                    if is_nu(b):
                        raise DoubleNu(f"two odd units meet at ({i},{j})")
                    if b.is_zero():
                        continue
                    acc = acc + b.nu()
                elif is_nu(b):
                    if a.is_zero():
                        continue
                    acc = acc + a.nu()
                else:
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc + a * b
            row.append(acc)
        out.append(row)
    return SuperMatrix(A.row_split, B.col_split, out, A.proto, validate=False)


def smat_inv(A: SuperMatrix) -> SuperMatrix:
    """Exact two-sided inverse by Gauss-Jordan with body-invertible pivots."""
    if A.row_split != A.col_split:
        raise ValueError("inversion needs matching row and column splits")
    if A.has_nu():
        raise NuEntriesPresent("route odd units away before inverting")
    n = A.nrows
    one = A.proto.ring_one()
    zero = A.proto.ring_zero()
    M = [list(A.entries[i]) + [one if j == i else zero for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            e = M[i][col]
            if not is_nu(e) and e.body():
                piv = i
                break
        if piv is None:
            raise NotInvertible(f"no body-invertible pivot in column {col}")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
        pinv = M[col][col].inv()
        M[col] = [pinv * e for e in M[col]]
        for i in range(n):
            if i == col:
                continue
            f = M[i][col]
            if f.is_zero():
                continue
            prow = M[col]
            M[i] = [e - f * p for e, p in zip(M[i], prow)]
    inv_entries = [row[n:] for row in M]
    return SuperMatrix(A.row_split, A.col_split, inv_entries, A.proto, validate=False)


def minor_M(A: SuperMatrix, J, S) -> SuperMatrix:
    """Columns of A with even indices in J and odd indices in S, sides kept."""
    c0, c1 = A.col_split
    J = sorted(J)
    S = sorted(S)
    for j in J:
        if not 1 <= j <= c0:
            raise IndexError(f"even column {j} out of range")
    for s in S:
        if not 1 <= s <= c1:
            raise IndexError(f"odd column {s} out of range")
    indices = [j - 1 for j in J] + [c0 + s - 1 for s in S]
    return A.take_columns(indices, (len(J), len(S)))


def remainder_D(A: SuperMatrix, J, S) -> SuperMatrix:
    """A with the J|S columns omitted, remaining columns keeping order and sides."""
    c0, c1 = A.col_split
    Jset = set(J)
    Sset = set(S)
    even_keep = [j for j in range(c0) if (j + 1) not in Jset]
    odd_keep = [c0 + s for s in range(c1) if (s + 1) not in Sset]
    return A.take_columns(even_keep + odd_keep, (len(even_keep), len(odd_keep)))


def minor_Mprime(A: SuperMatrix, J, S, target) -> SuperMatrix:
    """The divider-adjusted minor for pasting into the chart indexed by target.

    target is the IndexPair of the destination chart; its non-standard
    identity dictates which selected columns cross the divider line and pick
    up the involution.  For a standard target this is minor_M.
    """
    k, l = target.k, target.l
    p, q = target.p, target.q
    M = minor_M(A, J, S)
    if p == k:
        return M
    one = A.proto.ring_one()

    def nu_entry(e):
        return one if is_nu(e) else e.nu()

    cols = [M.column(j) for j in range(M.ncols)]
    if p > k:
        moved = [[nu_entry(e) for e in cols[j]] for j in range(k, p)]
        even_cols = cols[:k]
        odd_cols = moved + cols[p:]
    else:
        moved = [[nu_entry(e) for e in cols[p + j]] for j in range(k - p)]
        even_cols = cols[:p] + moved
        odd_cols = cols[p + (k - p):]
    all_cols = even_cols + odd_cols
    entries = [[all_cols[j][i] for j in range(len(all_cols))] for i in range(M.nrows)]
    out = SuperMatrix(M.row_split, (k, l), entries, A.proto, validate=False)
    if out.has_nu():
        raise ResidualNuSymbol("an odd unit survives in an unmoved column")
    return out


def format_blocked(tokens, r0: int, c0: int) -> str:
    """Bracket-and-divider layout mirroring the block structure."""
    if not tokens:
        return "[]"
    ncols = len(tokens[0])
    widths = [max(len(row[j]) for row in tokens) for j in range(ncols)]
    lines = []
    for i, row in enumerate(tokens):
        cells = []
        for j, tok in enumerate(row):
            cells.append(tok.rjust(widths[j]))
            if j + 1 == c0 and c0 < ncols:
                cells.append("|")
        lines.append("[ " + " ".join(cells) + " ]")
        if i + 1 == r0 and r0 < len(tokens):
            lines.append("-" * len(lines[-1]))
    return "\n".join(lines)
