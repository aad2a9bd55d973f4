"""Exact dense linear algebra over a FieldSpec.

Matrices are lists of row lists of canonical field elements.  Everything
here is plain Gaussian elimination; the sizes that show up in practice
(hundreds of rows, columns bounded by C(n+d, d)) keep this comfortably
interactive.  ``IncrementalRowReducer`` maintains a persistent pivot
structure so that the ledger construction can stream rows one at a time
without re-solving from scratch.
"""

from __future__ import annotations

from .field import FieldSpec


def mat_vec(F: FieldSpec, A, v):
    return [
        _dot(F, row, v)
        for row in A
    ]


def _dot(F: FieldSpec, row, v):
    acc = F.zero
    for a, b in zip(row, v):
        if a and b:
            acc = F.add(acc, F.mul(a, b))
    return acc


def mat_mul(F: FieldSpec, A, B):
    cols = list(zip(*B))
    return [[_dot(F, row, col) for col in cols] for row in A]


def identity(F: FieldSpec, n: int):
    return [[F.one if i == j else F.zero for j in range(n)] for i in range(n)]


def rank(F: FieldSpec, rows) -> int:
    red = IncrementalRowReducer(F)
    for r in rows:
        red.insert(r)
    return red.rank


def determinant(F: FieldSpec, A):
    n = len(A)
    M = [list(row) for row in A]
    det = F.one
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return F.zero
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = F.neg(det)
        det = F.mul(det, M[c][c])
        inv = F.inv(M[c][c])
        for i in range(c + 1, n):
            if M[i][c]:
                f = F.mul(M[i][c], inv)
                M[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(M[i], M[c])]
    return det


def inverse(F: FieldSpec, A):
    """Inverse of a square matrix, or None if singular."""
    n = len(A)
    M = [list(row) + list(e) for row, e in zip(A, identity(F, n))]
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, n) if M[i][c]), None)
        if piv is None:
            return None
        M[r], M[piv] = M[piv], M[r]
        inv = F.inv(M[r][c])
        M[r] = [F.mul(inv, a) for a in M[r]]
        for i in range(n):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(M[i], M[r])]
        r += 1
    return [row[n:] for row in M]


def solve(F: FieldSpec, A, b):
    """One solution of A x = b, or None if inconsistent.

    Free variables are set to zero, which keeps the output deterministic.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    M = [list(row) + [bv] for row, bv in zip(A, b)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = F.inv(M[r][c])
        M[r] = [F.mul(inv, a) for a in M[r]]
        for i in range(m):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [F.sub(a, F.mul(f, v)) for a, v in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n]:
            return None
    x = [F.zero] * n
    for row_idx, c in enumerate(pivots):
        x[c] = M[row_idx][n]
    return x


def nullspace(F: FieldSpec, A):
    """Basis of the right nullspace of A (deterministic)."""
    m = len(A)
    n = len(A[0]) if m else 0
    M = [list(row) for row in A]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = F.inv(M[r][c])
        M[r] = [F.mul(inv, a) for a in M[r]]
        for i in range(m):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [F.sub(a, F.mul(f, v)) for a, v in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    basis = []
    free = [c for c in range(n) if c not in pivots]
    for fc in free:
        v = [F.zero] * n
        v[fc] = F.one
        for row_idx, pc in enumerate(pivots):
            v[pc] = F.neg(M[row_idx][fc])
        basis.append(v)
    return basis


def complete_basis(F: FieldSpec, vectors, n: int):
    """Extend independent vectors to a basis of F^n with standard basis
    vectors, chosen greedily in index order."""
    red = IncrementalRowReducer(F)
    out = [list(v) for v in vectors]
    for v in out:
        if not red.insert(v):
            raise ValueError("input vectors are dependent")
    for j in range(n):
        e = [F.zero] * n
        e[j] = F.one
        if red.insert(e):
            out.append(e)
    if len(out) != n:
        raise ValueError("could not complete basis")
    return out


class IncrementalRowReducer:
    """Row-echelon pivot store supporting streaming inserts.

    Each stored pivot row is normalized to a leading 1; inserted rows are
    reduced against all existing pivots before deciding independence.
    """

    def __init__(self, F: FieldSpec):
        self.F = F
        self.pivots: dict[int, list] = {}  # pivot column -> normalized row

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row):
        """Return row reduced against the current pivots (copy)."""
        F = self.F
        row = list(row)
        for c in sorted(self.pivots):
            if row[c]:
                f = row[c]
                prow = self.pivots[c]
                row = [F.sub(a, F.mul(f, b)) for a, b in zip(row, prow)]
        return row

    def insert(self, row) -> bool:
        """Insert a row; True iff it increased the rank."""
        F = self.F
        row = self.reduce(row)
        lead = next((c for c, a in enumerate(row) if a), None)
        if lead is None:
            return False
        inv = F.inv(row[lead])
        row = [F.mul(inv, a) for a in row]
        # Keep the store fully reduced: clear the new pivot column from
        # every existing pivot row so that sequential reduction is exact.
        for c, prow in self.pivots.items():
            if prow[lead]:
                f = prow[lead]
                self.pivots[c] = [F.sub(a, F.mul(f, b)) for a, b in zip(prow, row)]
        self.pivots[lead] = row
        return True

    def in_span(self, row) -> bool:
        return all(not a for a in self.reduce(row))
