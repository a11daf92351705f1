"""Exact rational linear algebra and bounded convex polytopes.

Matrices are lists of lists of Fractions.  Polytopes are given by
equality and inequality constraints over a fixed variable order; vertices
are enumerated exactly by solving square subsystems in the reduced
coordinates of the equality solution space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

ZERO = Fraction(0)
ONE = Fraction(1)


def rref(rows):
    """Reduced row echelon form; returns (rows, pivot column list)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def mat_rank(rows) -> int:
    return len(rref(rows)[1])


def det(rows) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return ONE
    sign = ONE
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return ZERO
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            sign = -sign
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    out = sign
    for i in range(n):
        out *= m[i][i]
    return out


def solve_affine(A, b):
    """Solve A x = b; returns (particular solution, nullspace basis) or None.

    The nullspace basis is deterministic: one vector per free column in
    column order, with unit entry at the free column.
    """
    if not A:
        raise ValueError("empty system needs an explicit variable count")
    n = len(A[0])
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    red, pivots = rref(aug)
    if n in pivots:
        return None
    free = [c for c in range(n) if c not in pivots]
    x0 = [ZERO] * n
    for r, c in enumerate(pivots):
        x0[c] = red[r][n]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(tuple(v))
    return tuple(x0), basis


def solve_square(rows, rhs):
    """Solve a square nonsingular system exactly; None if singular."""
    n = len(rows)
    aug = [list(r) + [v] for r, v in zip(rows, rhs)]
    red, pivots = rref(aug)
    if len(pivots) != n or any(p >= n for p in pivots):
        return None
    x = [ZERO] * n
    for r, c in enumerate(pivots):
        x[c] = red[r][n]
    return tuple(x)


def solve_in_basis(basis, targets):
    """Coordinates of each target vector in the span of the basis vectors.

    basis: list of k vectors of length n (independent); targets: list of
    vectors in their span.  Returns a k x len(targets) coefficient matrix.
    """
    k = len(basis)
    if k == 0:
        return []
    n = len(basis[0])
    A = [[basis[j][i] for j in range(k)] for i in range(n)]
    red, pivots = rref([row + [t[i] for t in targets]
                        for i, row in enumerate(A)])
    coeff = [[ZERO] * len(targets) for _ in range(k)]
    for r, c in enumerate(pivots):
        if c >= k:
            raise ValueError("target vector outside the span of the basis")
        for t in range(len(targets)):
            coeff[c][t] = red[r][k + t]
    # consistency: rows beyond the pivots must vanish
    for r in range(len(pivots), len(red)):
        if any(x != 0 for x in red[r][k:]):
            raise ValueError("target vector outside the span of the basis")
    return coeff


def dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


@dataclass
class Polytope:
    """A bounded convex polytope { x : Ax = b, Cx <= d } with tagged inequalities."""
    n: int
    eqs: list = field(default_factory=list)     # (coeffs, rhs)
    ineqs: list = field(default_factory=list)   # (coeffs, rhs, tag)

    @cached_property
    def _affine(self):
        if not self.eqs:
            return tuple([ZERO] * self.n), [tuple(ONE if j == i else ZERO for j in range(self.n))
                                            for i in range(self.n)]
        sol = solve_affine([list(c) for c, _ in self.eqs], [r for _, r in self.eqs])
        return sol

    @cached_property
    def vertices(self) -> tuple[tuple[Fraction, ...], ...]:
        if self._affine is None:
            return ()
        x0, basis = self._affine
        d = len(basis)
        rows = []
        consts = []
        for coeffs, rhs, _tag in self.ineqs:
            row = tuple(dot(coeffs, bv) for bv in basis)
            c = rhs - dot(coeffs, x0)
            if all(x == 0 for x in row):
                if c < 0:
                    return ()
                continue
            rows.append(row)
            consts.append(c)
        if d == 0:
            return (tuple(x0),)
        seen = set()
        verts = []
        uniq = sorted(set(zip(rows, consts)))
        for combo in itertools.combinations(range(len(uniq)), d):
            sub = [uniq[i][0] for i in combo]
            rhs = [uniq[i][1] for i in combo]
            t = solve_square([list(r) for r in sub], rhs)
            if t is None:
                continue
            if any(dot(r, t) > c for r, c in zip(rows, consts)):
                continue
            x = tuple(x0[i] + sum((bv[i] * tj for bv, tj in zip(basis, t)), ZERO)
                      for i in range(self.n))
            if x not in seen:
                seen.add(x)
                verts.append(x)
        verts.sort()
        return tuple(verts)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @cached_property
    def dim(self) -> int:
        vs = self.vertices
        if not vs:
            return -1
        v0 = vs[0]
        diffs = [[v[i] - v0[i] for i in range(self.n)] for v in vs[1:]]
        return mat_rank(diffs) if diffs else 0

    @cached_property
    def barycenter(self) -> tuple[Fraction, ...]:
        vs = self.vertices
        k = Fraction(len(vs))
        return tuple(sum((v[i] for v in vs), ZERO) / k for i in range(self.n))

    def _tight_vertices(self, i: int) -> frozenset[int]:
        coeffs, rhs, _ = self.ineqs[i]
        return frozenset(k for k, v in enumerate(self.vertices) if dot(coeffs, v) == rhs)

    def _face_rank(self, vset) -> int:
        vs = [self.vertices[k] for k in sorted(vset)]
        if not vs:
            return -1
        diffs = [[v[i] - vs[0][i] for i in range(self.n)] for v in vs[1:]]
        return mat_rank(diffs) if diffs else 0

    @cached_property
    def facets(self) -> list[dict]:
        """Codimension-one faces, each with its tags and tight vertex set."""
        byface: dict[frozenset[int], list] = {}
        for i in range(len(self.ineqs)):
            tv = self._tight_vertices(i)
            if not tv or len(tv) == len(self.vertices):
                continue
            byface.setdefault(tv, []).append(self.ineqs[i][2])
        out = []
        for tv, tags in sorted(byface.items(), key=lambda kv: sorted(kv[0])):
            if self._face_rank(tv) == self.dim - 1:
                out.append({'vertices': tv, 'tags': tuple(tags)})
        return out

    @cached_property
    def flagged_degenerations(self) -> list:
        """Tags of nonempty constraint faces of codimension at least two."""
        out = []
        for i, (coeffs, rhs, tag) in enumerate(self.ineqs):
            tv = self._tight_vertices(i)
            if tv and len(tv) != len(self.vertices) and self._face_rank(tv) < self.dim - 1:
                out.append(tag)
        return out

    def identically_tight(self, i: int) -> bool:
        return len(self._tight_vertices(i)) == len(self.vertices)

    @cached_property
    def strict_interior(self) -> bool:
        """True iff no inequality is identically tight on the polytope."""
        if self.is_empty:
            return False
        b = self.barycenter
        return all(dot(coeffs, b) < rhs for coeffs, rhs, _ in self.ineqs)

    def face_barycenter(self, vset) -> tuple[Fraction, ...]:
        vs = [self.vertices[k] for k in sorted(vset)]
        k = Fraction(len(vs))
        return tuple(sum((v[i] for v in vs), ZERO) / k for i in range(self.n))

    @cached_property
    def codim2_faces(self) -> list[dict]:
        """Codimension-two faces with the facets containing each."""
        faces: dict[frozenset[int], set[int]] = {}
        fs = self.facets
        for i in range(len(fs)):
            for j in range(i + 1, len(fs)):
                tv = fs[i]['vertices'] & fs[j]['vertices']
                if tv and self._face_rank(tv) == self.dim - 2:
                    faces.setdefault(tv, set()).update((i, j))
        return [{'vertices': tv, 'facets': tuple(sorted(ix))}
                for tv, ix in sorted(faces.items(), key=lambda kv: sorted(kv[0]))]

    @cached_property
    def orientation_basis(self):
        """Deterministic ordered basis of the direction space of the affine hull."""
        if self._affine is None:
            return []
        return list(self._affine[1])
