"""Cellular homology over Z, Q and Z/p via Smith normal form.

Boundary matrices come from the incidence signs of an enumerated complex.
The reduction is exact over arbitrary-precision integers with pivoting by
least absolute value.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagrams import DiagramError


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(m):
    """Smith normal form with transforms: returns (D, U, V) with D = U m V.

    D is diagonal with nonnegative entries in a divisibility chain; U and
    V are unimodular.
    """
    a = [list(r) for r in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    U = _identity(rows)
    V = _identity(cols)

    def row_op(i, j, q):
        # row i -= q * row j
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        U[i] = [x - q * y for x, y in zip(U[i], U[j])]

    def col_op(i, j, q):
        # col i -= q * col j
        for r in range(rows):
            a[r][i] -= q * a[r][j]
        for r in range(cols):
            V[r][i] -= q * V[r][j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in range(rows):
            a[r][i], a[r][j] = a[r][j], a[r][i]
        for r in range(cols):
            V[r][i], V[r][j] = V[r][j], V[r][i]

    t = 0
    while True:
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < best):
                    best = abs(a[i][j])
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        clean = False
        while not clean:
            clean = True
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    row_op(i, t, q)
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        clean = False
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    col_op(j, t, q)
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        clean = False
            if clean:
                # enforce divisibility of the remaining block
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if a[i][j] % a[t][t] != 0:
                            row_op(t, i, -1)
                            clean = False
                            break
                    if not clean:
                        break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
        if t == min(rows, cols):
            break
    return a, U, V


def elementary_divisors(m):
    d, _u, _v = smith_normal_form(m)
    out = []
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i] != 0:
            out.append(abs(d[i][i]))
    return out


def matrix_rank_over_field(m, p=None):
    """Rank over Q (p is None) or over Z/p."""
    divs = elementary_divisors(m)
    if p is None:
        return len(divs)
    return sum(1 for d in divs if d % p != 0)


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple[int, ...]

    def __str__(self):
        parts = []
        if self.betti == 1:
            parts.append("Z")
        elif self.betti > 1:
            parts.append(f"Z^{self.betti}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def homology(cx, n: int, coefficients="Z") -> HomologyGroup:
    """Homology of an enumerated complex in one dimension.

    coefficients: "Z", "Q", or "Zp" with p prime (e.g. "Z2").  The complex
    must pass its codimension-two consistency check; a failed check means
    the attaching data does not define a chain complex and homology is
    refused.
    """
    if not cx.is_consistent:
        raise DiagramError("complex failed the codimension-two consistency check")
    dn = cx.boundary_matrix(n)
    dn1 = cx.boundary_matrix(n + 1)
    n_cells = len(cx.cells_of_dim(n))
    if coefficients == "Z":
        rank_dn = matrix_rank_over_field(dn) if dn else 0
        rank_dn1 = matrix_rank_over_field(dn1) if dn1 and dn1[0] else 0
        betti = n_cells - rank_dn - rank_dn1
        torsion = tuple(d for d in (elementary_divisors(dn1) if dn1 and dn1[0] else [])
                        if d > 1)
        return HomologyGroup(betti, torsion)
    if coefficients == "Q":
        rank_dn = matrix_rank_over_field(dn) if dn else 0
        rank_dn1 = matrix_rank_over_field(dn1) if dn1 and dn1[0] else 0
        return HomologyGroup(n_cells - rank_dn - rank_dn1, ())
    if coefficients.startswith("Z") and coefficients[1:].isdigit():
        p = int(coefficients[1:])
        rank_dn = matrix_rank_over_field(dn, p) if dn else 0
        rank_dn1 = matrix_rank_over_field(dn1, p) if dn1 and dn1[0] else 0
        return HomologyGroup(n_cells - rank_dn - rank_dn1, ())
    raise DiagramError(f"unknown coefficient system {coefficients!r}")


def all_homology(cx, coefficients="Z") -> dict[int, HomologyGroup]:
    return {n: homology(cx, n, coefficients) for n in range(cx.max_dim + 1)}
