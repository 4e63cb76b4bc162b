"""The right GL(m|n) action on Lambda_r-valued points of the atlas.

A group point is an invertible even m|n x m|n supermatrix over Lambda_r.
Acting on a chart point X means multiplying its realized matrix by the
group matrix on the right and re-normalizing into some chart of the refined
cover: the first chart (standard charts first) whose adjusted minor is
body-invertible.  Well-definedness across chart choices is what
verify_action_gluing samples, not an assumption.
"""

from __future__ import annotations

import random

from sympy.external.gmpy import MPQ

from .errors import (
    MinorNotInvertible,
    NoChartFound,
    NotInvertible,
    RankDeficient,
)
from .superalgebra import EVEN, GrassmannNumber, lambda_sample
from .supermatrix import is_nu
from .atlas import (
    Atlas,
    Chart,
    GrassPoint,
    _lam_gauss_inv,
    get_atlas,
    point_transition,
    sample_point,
)
from .reports import CheckResult, Report


class GLPoint:
    """An invertible even m|n x m|n supermatrix over Lambda_r."""

    __slots__ = ("m", "n", "r", "entries")

    def __init__(self, m: int, n: int, r: int, entries, validate: bool = True):
        self.m = m
        self.n = n
        self.r = r
        self.entries = [list(row) for row in entries]
        if validate:
            self._validate()

    def _validate(self):
        d = self.m + self.n
        if len(self.entries) != d or any(len(row) != d for row in self.entries):
            raise ValueError("shape mismatch")
        for i in range(d):
            for j in range(d):
                want = int((i >= self.m) ^ (j >= self.m))
                e = self.entries[i][j]
                p = e.parity()
                if p is None or (p != want and not e.is_zero()):
                    raise ValueError(f"entry ({i},{j}) has parity {p}, block wants {want}")
        _lam_gauss_inv(self.entries, self.r)  # raises NotInvertible if singular

    @classmethod
    def identity(cls, m: int, n: int, r: int) -> "GLPoint":
        one = GrassmannNumber.scalar(r, 1)
        zero = GrassmannNumber(r, {})
        d = m + n
        return cls(m, n, r, [[one if i == j else zero for j in range(d)] for i in range(d)],
                   validate=False)

    def __mul__(self, other: "GLPoint") -> "GLPoint":
        if (self.m, self.n, self.r) != (other.m, other.n, other.r):
            raise ValueError("group context mismatch")
        d = self.m + self.n
        zero = GrassmannNumber(self.r, {})
        out = []
        for i in range(d):
            row = []
            for j in range(d):
                acc = zero
                for u in range(d):
                    a = self.entries[i][u]
                    if a.is_zero():
                        continue
                    b = other.entries[u][j]
                    if b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return GLPoint(self.m, self.n, self.r, out, validate=False)

    def inv(self) -> "GLPoint":
        return GLPoint(self.m, self.n, self.r, _lam_gauss_inv(self.entries, self.r),
                       validate=False)

    def __eq__(self, other):
        if not isinstance(other, GLPoint):
            return NotImplemented
        return (self.m, self.n, self.r) == (other.m, other.n, other.r) and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "r": self.r,
            "entries": [[e.to_dict() for e in row] for row in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GLPoint":
        r = data["r"]
        entries = [
            [GrassmannNumber.from_dict(r, e) for e in row] for row in data["entries"]
        ]
        return cls(data["m"], data["n"], r, entries)


def sample_gl(m: int, n: int, r: int, rng: random.Random) -> GLPoint:
    """Random group point built as (unit lower) * diag(units) * (unit upper),
    hence invertible by construction."""
    d = m + n

    def entry(parity, diag_unit=False):
        if diag_unit:
            g = lambda_sample(r, EVEN, rng, lo=-2, hi=2)
            return g
        terms = {}
        for mask in range(1 << r):
            if mask.bit_count() & 1 != parity:
                continue
            c = rng.randint(-2, 2)
            if c:
                terms[mask] = MPQ(c)
        return GrassmannNumber(r, terms)

    one = GrassmannNumber.scalar(r, 1)
    zero = GrassmannNumber(r, {})

    def unit_triangular(upper: bool):
        rows = []
        for i in range(d):
            row = []
            for j in range(d):
                if i == j:
                    row.append(one)
                elif (j > i) == upper:
                    row.append(entry((i >= m) ^ (j >= m)))
                else:
                    row.append(zero)
            rows.append(row)
        return GLPoint(m, n, r, rows, validate=False)

    diag = GLPoint(
        m, n, r,
        [[entry(0, diag_unit=True) if i == j else zero for j in range(d)] for i in range(d)],
        validate=False,
    )
    return unit_triangular(False) * diag * unit_triangular(True)


# ---------------------------------------------------------------------------
# the action
# ---------------------------------------------------------------------------


def _acted_matrix(X: GrassPoint, P: GLPoint):
    """W = [X] P, with the odd-unit rule resolving left factors."""
    chart = X.chart
    if (chart.index.m, chart.index.n) != (P.m, P.n) or X.r != P.r:
        raise ValueError("group context mismatch")
    A = chart.realize(X.values, X.r)
    d = P.m + P.n
    s = len(A)
    zero = GrassmannNumber(X.r, {})
    W = []
    for i in range(s):
        Ai = A[i]
        row = []
        for c in range(d):
            acc = zero
            for u in range(d):
                a = Ai[u]
                if is_nu(a):
                    b = P.entries[u][c]
                    if not b.is_zero():
                        acc = acc + b.nu()
                elif not a.is_zero():
                    b = P.entries[u][c]
                    if not b.is_zero():
                        acc = acc + a * b
            row.append(acc)
        W.append(row)
    return W


def grass_point_from_matrix(W, atlas: Atlas, r: int, target: Chart | None = None) -> GrassPoint:
    """Normalize a plain k|l x m|n matrix over Lambda_r into a chart point."""
    candidates = [target] if target is not None else atlas.act_order
    s = len(W)
    for dst in candidates:
        zsel, dcols, read = dst.dst_plan
        Z = [[W[i][c].nu() if moved else W[i][c] for c, moved in zsel] for i in range(s)]
        try:
            Zinv = _lam_gauss_inv(Z, r)
        except NotInvertible:
            if target is not None:
                raise MinorNotInvertible(f"minor for {dst.index} is singular here")
            continue
        values = {}
        for row, dpos, name, marked in read:
            c = dcols[dpos]
            acc = None
            zi = Zinv[row]
            for j in range(s):
                e = W[j][c]
                if e.is_zero():
                    continue
                t = zi[j] * e
                acc = t if acc is None else acc + t
            v = acc if acc is not None else GrassmannNumber(r, {})
            values[name] = v.nu() if marked else v
        return GrassPoint(dst, r, values)
    raise NoChartFound("no chart admits this matrix")


def act(X: GrassPoint, P: GLPoint, target: Chart | None = None) -> GrassPoint:
    """Right action: normalize [X] P into a chart of the refined cover."""
    idx = X.chart.index
    atlas = get_atlas(idx.k, idx.l, idx.m, idx.n)
    W = _acted_matrix(X, P)
    return grass_point_from_matrix(W, atlas, X.r, target)


# ---------------------------------------------------------------------------
# the base point of the transitivity argument
# ---------------------------------------------------------------------------


class BasePoint:
    """A reduced point: full-row-rank rational matrices p1 (k x m), p2 (l x n).

    Pass m or n explicitly when the corresponding block has no rows.
    """

    def __init__(self, p1, p2, m: int | None = None, n: int | None = None):
        self.p1 = [[MPQ(e) for e in row] for row in p1]
        self.p2 = [[MPQ(e) for e in row] for row in p2]
        self._m = len(self.p1[0]) if self.p1 else m
        self._n = len(self.p2[0]) if self.p2 else n
        if self._m is None or self._n is None:
            raise ValueError("pass m and n explicitly for empty blocks")
        if _rational_rank(self.p1) != len(self.p1):
            raise RankDeficient("p1 is not of full row rank")
        if _rational_rank(self.p2) != len(self.p2):
            raise RankDeficient("p2 is not of full row rank")

    @property
    def k(self) -> int:
        return len(self.p1)

    @property
    def l(self) -> int:
        return len(self.p2)

    @property
    def m(self) -> int:
        return self._m

    @property
    def n(self) -> int:
        return self._n

    def matrix(self, r: int):
        """p-hat as a plain k|l x m|n matrix over Lambda_r."""
        k, l, m, n = self.k, self.l, self.m, self.n
        zero = GrassmannNumber(r, {})
        W = [[zero] * (m + n) for _ in range(k + l)]
        for i in range(k):
            for j in range(m):
                W[i][j] = GrassmannNumber.scalar(r, self.p1[i][j])
        for i in range(l):
            for j in range(n):
                W[k + i][m + j] = GrassmannNumber.scalar(r, self.p2[i][j])
        return W

    def as_point(self, r: int) -> GrassPoint:
        atlas = get_atlas(self.k, self.l, self.m, self.n)
        return grass_point_from_matrix(self.matrix(r), atlas, r)


def _rational_rank(rows) -> int:
    M = [list(map(MPQ, row)) for row in rows]
    if not M:
        return 0
    ncols = len(M[0])
    rank = 0
    for c in range(ncols):
        piv = None
        for i in range(rank, len(M)):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        pr = M[rank]
        inv = MPQ(1) / pr[c]
        M[rank] = [e * inv for e in pr]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [e - f * p for e, p in zip(M[i], M[rank])]
        rank += 1
    return rank


def _complete_to_invertible(rows, width: int):
    """Append standard basis rows so the rational matrix becomes invertible."""
    M = [list(map(MPQ, row)) for row in rows]
    pivots = set()
    E = [list(row) for row in M]
    rank = 0
    for c in range(width):
        piv = None
        for i in range(rank, len(E)):
            if E[i][c]:
                piv = i
                break
        if piv is None:
            continue
        E[rank], E[piv] = E[piv], E[rank]
        inv = MPQ(1) / E[rank][c]
        E[rank] = [e * inv for e in E[rank]]
        for i in range(len(E)):
            if i != rank and E[i][c]:
                f = E[i][c]
                E[i] = [e - f * p for e, p in zip(E[i], E[rank])]
        pivots.add(c)
        rank += 1
    if rank != len(rows):
        raise RankDeficient("rows are not independent")
    out = [list(row) for row in M]
    for c in range(width):
        if c not in pivots:
            out.append([MPQ(1) if j == c else MPQ(0) for j in range(width)])
    return out


def _rational_inv(rows):
    n = len(rows)
    M = [list(map(MPQ, rows[i])) + [MPQ(1) if j == i else MPQ(0) for j in range(n)]
         for i in range(n)]
    for c in range(n):
        piv = None
        for i in range(c, n):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            raise RankDeficient("completion is singular")
        M[c], M[piv] = M[piv], M[c]
        inv = MPQ(1) / M[c][c]
        M[c] = [e * inv for e in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [e - f * p for e, p in zip(M[i], M[c])]
    return [row[n:] for row in M]


def _rat_times_lambda(Q, L, r):
    """Product of a rational matrix with a Lambda-valued matrix."""
    rows = len(Q)
    inner = len(L)
    cols = len(L[0]) if L else 0
    zero = GrassmannNumber(r, {})
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = zero
            for u in range(inner):
                q = Q[i][u]
                if not q:
                    continue
                e = L[u][j]
                if e.is_zero():
                    continue
                acc = acc + e * q
            row.append(acc)
        out.append(row)
    return out


def transitivity_witness(W: GrassPoint, p: BasePoint) -> GLPoint:
    """A group point V with  p-hat V = [W]  exactly, built by completing the
    base blocks to invertible matrices and solving row by row."""
    chart = W.chart
    if not chart.index.standard:
        raise ValueError("witness construction expects the target in a standard chart")
    k, l, m, n = chart.index.k, chart.index.l, chart.index.m, chart.index.n
    if (p.k, p.l, p.m, p.n) != (k, l, m, n):
        raise ValueError("base point has the wrong shape")
    r = W.r
    zero = GrassmannNumber(r, {})
    Wmat = chart.realize(W.values, r)
    Ablk = [row[:m] for row in Wmat[:k]]
    Bblk = [row[m:] for row in Wmat[:k]]
    Cblk = [row[:m] for row in Wmat[k:]]
    Dblk = [row[m:] for row in Wmat[k:]]

    P1c_inv = _rational_inv(_complete_to_invertible(p.p1, m))
    P2c_inv = _rational_inv(_complete_to_invertible(p.p2, n))

    # complete the body of the even blocks by basis rows, keep soul rows intact
    Abody = [[e.body() for e in row] for row in Ablk]
    Acompl_rows = _complete_to_invertible(Abody, m)[k:]
    Atilde = Ablk + [[GrassmannNumber.scalar(r, e) for e in row] for row in Acompl_rows]
    Dbody = [[e.body() for e in row] for row in Dblk]
    Dcompl_rows = _complete_to_invertible(Dbody, n)[l:]
    Dtilde = Dblk + [[GrassmannNumber.scalar(r, e) for e in row] for row in Dcompl_rows]

    H = _rat_times_lambda(P1c_inv, Atilde, r)
    Q = _rat_times_lambda(P2c_inv, Dtilde, r)
    Bpad = Bblk + [[zero] * n for _ in range(m - k)]
    Cpad = Cblk + [[zero] * m for _ in range(n - l)]
    M = _rat_times_lambda(P1c_inv, Bpad, r)
    N = _rat_times_lambda(P2c_inv, Cpad, r)

    entries = [H[i] + M[i] for i in range(m)] + [N[i] + Q[i] for i in range(n)]
    V = GLPoint(m, n, r, entries)  # validates parity and invertibility

    # exact post-checks: the matrix equation and the acted point
    phatV = _rat_lambda_block_product(p, V, r)
    for i in range(k + l):
        for j in range(m + n):
            if phatV[i][j] != Wmat[i][j]:
                raise RankDeficient("witness post-check failed on the matrix equation")
    base = p.as_point(r)
    if act(base, V, target=chart) != W:
        raise RankDeficient("witness post-check failed on the acted point")
    return V


def _rat_lambda_block_product(p: BasePoint, V: GLPoint, r: int):
    phat = p.matrix(r)
    d = V.m + V.n
    s = len(phat)
    zero = GrassmannNumber(r, {})
    out = []
    for i in range(s):
        row = []
        for j in range(d):
            acc = zero
            for u in range(d):
                a = phat[i][u]
                if a.is_zero():
                    continue
                b = V.entries[u][j]
                if b.is_zero():
                    continue
                acc = acc + a * b
            row.append(acc)
        out.append(row)
    return out


def stabilizer_membership(P: GLPoint, p: BasePoint) -> bool:
    """True iff the group point fixes the base point exactly."""
    if (p.m, p.n) != (P.m, P.n):
        raise ValueError("base point and group point have mismatched shapes")
    base = p.as_point(P.r)
    try:
        moved = act(base, P)
        back = moved if moved.chart == base.chart else point_transition(moved, base.chart)
    except (MinorNotInvertible, NoChartFound, NotInvertible):
        return False
    return back == base


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------


def _sample_standard_point(atlas: Atlas, r: int, rng: random.Random) -> GrassPoint:
    chart = rng.choice(atlas.standard_charts)
    return sample_point(chart, r, rng)


def verify_action_gluing(k: int, l: int, m: int, n: int, r: int = 2,
                         samples: int = 100, seed: int = 0) -> Report:
    """Sample the commuting square: transition after action equals action
    after transition, both equal to the direct normalization, on quadruples
    of standard charts."""
    atlas = get_atlas(k, l, m, n)
    rng = random.Random(seed)
    std = atlas.standard_charts
    report = Report(
        suite="action-gluing",
        config={"k": k, "l": l, "m": m, "n": n, "r": r, "samples": samples, "seed": seed},
    )
    passed = failed = 0
    quadruples = set()
    counterexamples = []
    for _ in range(samples):
        for _attempt in range(400):
            X = _sample_standard_point(atlas, r, rng)
            P = sample_gl(m, n, r, rng)
            J, K, H = (rng.choice(std) for _ in range(3))
            try:
                via_J = point_transition(act(X, P, target=J), H)
                via_K = act(point_transition(X, K), P, target=H)
                direct = act(X, P, target=H)
            except (MinorNotInvertible, NotInvertible):
                continue
            quadruples.add((X.chart.index, J.index, K.index, H.index))
            if via_J == via_K == direct:
                passed += 1
            else:
                failed += 1
                if len(counterexamples) < 3:
                    counterexamples.append(
                        {"X": X.to_dict(), "P": P.to_dict(),
                         "quadruple": [str(c.index) for c in (X.chart, J, K, H)]}
                    )
            break
        else:
            raise RuntimeError("could not sample a defined gluing instance")
    report.results.append(
        CheckResult(
            "gluing-square", f"standard quadruples of {k}|{l}({m}|{n})",
            passed + failed, passed, failed, counterexamples,
            note=f"{len(quadruples)} distinct quadruples exercised",
        )
    )
    return report


def verify_action_axioms(k: int, l: int, m: int, n: int, r: int = 2,
                         samples: int = 100, seed: int = 0) -> Report:
    """Unit, associativity against group multiplication, and inverse
    compatibility, all exact at sampled points."""
    atlas = get_atlas(k, l, m, n)
    rng = random.Random(seed)
    report = Report(
        suite="action-axioms",
        config={"k": k, "l": l, "m": m, "n": n, "r": r, "samples": samples, "seed": seed},
    )
    ident = GLPoint.identity(m, n, r)

    stats = {"unit": [0, 0], "associativity": [0, 0], "inverse": [0, 0]}
    examples = {key: [] for key in stats}
    for _ in range(samples):
        X = _sample_standard_point(atlas, r, rng)
        ok = act(X, ident, target=X.chart) == X
        stats["unit"][0 if ok else 1] += 1
        if not ok and len(examples["unit"]) < 3:
            examples["unit"].append({"X": X.to_dict()})

        for _attempt in range(400):
            X = _sample_standard_point(atlas, r, rng)
            P1 = sample_gl(m, n, r, rng)
            P2 = sample_gl(m, n, r, rng)
            try:
                lhs = act(act(X, P1), P2)
                rhs = act(X, P1 * P2)
                rhs_t = rhs if rhs.chart == lhs.chart else point_transition(rhs, lhs.chart)
            except (MinorNotInvertible, NotInvertible):
                continue
            ok = lhs == rhs_t
            stats["associativity"][0 if ok else 1] += 1
            if not ok and len(examples["associativity"]) < 3:
                examples["associativity"].append({"X": X.to_dict(), "P1": P1.to_dict(),
                                                  "P2": P2.to_dict()})
            break
        else:
            raise RuntimeError("could not sample a defined associativity instance")

        for _attempt in range(400):
            X = _sample_standard_point(atlas, r, rng)
            P = sample_gl(m, n, r, rng)
            try:
                Y = act(act(X, P), P.inv())
                Y_t = Y if Y.chart == X.chart else point_transition(Y, X.chart)
            except (MinorNotInvertible, NotInvertible):
                continue
            ok = Y_t == X
            stats["inverse"][0 if ok else 1] += 1
            if not ok and len(examples["inverse"]) < 3:
                examples["inverse"].append({"X": X.to_dict(), "P": P.to_dict()})
            break
        else:
            raise RuntimeError("could not sample a defined inverse instance")

    for key, (p, f) in stats.items():
        report.results.append(
            CheckResult(f"axiom-{key}", f"{k}|{l}({m}|{n})", p + f, p, f, examples[key])
        )
    return report


def verify_transitivity(k: int, l: int, m: int, n: int, r: int, count: int = 50,
                        seed: int = 0, base: BasePoint | None = None) -> Report:
    """Construct and post-check a witness for `count` random chart points."""
    atlas = get_atlas(k, l, m, n)
    rng = random.Random(seed)
    if base is None:
        base = BasePoint(
            [[1 if j == i else 0 for j in range(m)] for i in range(k)],
            [[1 if j == i else 0 for j in range(n)] for i in range(l)],
            m=m, n=n,
        )
    report = Report(
        suite="transitivity",
        config={"k": k, "l": l, "m": m, "n": n, "r": r, "count": count, "seed": seed},
    )
    passed = failed = 0
    counterexamples = []
    for _ in range(count):
        W = _sample_standard_point(atlas, r, rng)
        try:
            transitivity_witness(W, base)
            passed += 1
        except (RankDeficient, NotInvertible, ValueError) as exc:
            failed += 1
            if len(counterexamples) < 3:
                counterexamples.append({"W": W.to_dict(), "error": str(exc)})
    report.results.append(
        CheckResult("witness", f"{k}|{l}({m}|{n}) over Lambda_{r}",
                    passed + failed, passed, failed, counterexamples)
    )
    return report
