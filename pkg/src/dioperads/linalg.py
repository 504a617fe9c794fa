"""Exact sparse row reduction over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence

Row = Dict[Hashable, Fraction]


class RowReducer:
    """Incremental echelon basis of a span of sparse rows.

    Pivot columns are chosen as the smallest column (in the given column order)
    with a nonzero entry; stored rows are normalized to pivot coefficient 1.
    """

    def __init__(self, order: Optional[Dict[Hashable, int]] = None):
        self.order = order
        self.pivots: Dict[Hashable, Row] = {}

    def _rank_of(self, col) -> object:
        return self.order[col] if self.order is not None else col

    def reduce(self, row: Row) -> Row:
        """Reduce a row against the current pivots (full reduction on pivot columns)."""
        row = {k: Fraction(v) for k, v in row.items() if v}
        pivots = self.pivots
        while True:
            hit = [k for k in row if k in pivots]
            if not hit:
                return row
            k = min(hit, key=self._rank_of)
            c = row[k]
            for kk, vv in pivots[k].items():
                nv = row.get(kk, 0) - c * vv
                if nv:
                    row[kk] = nv
                else:
                    row.pop(kk, None)

    def add(self, row: Row) -> bool:
        """Insert a row; returns True if it enlarged the span."""
        r = self.reduce(row)
        if not r:
            return False
        p = min(r, key=self._rank_of)
        inv = 1 / r[p]
        r = {k: v * inv for k, v in r.items()}
        # keep stored rows reduced with respect to the new pivot
        for q, other in self.pivots.items():
            c = other.get(p)
            if c:
                for kk, vv in r.items():
                    nv = other.get(kk, 0) - c * vv
                    if nv:
                        other[kk] = nv
                    else:
                        other.pop(kk, None)
        self.pivots[p] = r
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def contains(self, row: Row) -> bool:
        return not self.reduce(row)

    def basis(self) -> List[Row]:
        """Reduced echelon rows sorted by pivot."""
        return [self.pivots[p] for p in sorted(self.pivots, key=self._rank_of)]


def rank(rows: Iterable[Row], order: Optional[Dict[Hashable, int]] = None) -> int:
    rr = RowReducer(order)
    for r in rows:
        rr.add(r)
    return rr.rank


def annihilator(rows: Sequence[Row], columns: Sequence[Hashable],
                weights: Optional[Dict[Hashable, int]] = None) -> List[Row]:
    """Basis of {y : sum_c w(c) x_c y_c = 0 for every x in rows}, reduced echelon form.

    ``weights`` gives a per-column sign for a diagonal pairing (default 1).
    """
    order = {c: i for i, c in enumerate(columns)}
    rr = RowReducer(order)
    for r in rows:
        rr.add(r)
    basis = rr.basis()
    pivot_cols = {min(r, key=lambda k: order[k]) for r in basis}
    free = [c for c in columns if c not in pivot_cols]
    w = weights or {}
    out = []
    # y is determined by free coordinates: y_p = -sum_free x_f y_f (per reduced row with pivot p)
    # after rescaling by the diagonal pairing weights.
    for f in free:
        y: Row = {f: Fraction(1)}
        for r in basis:
            p = min(r, key=lambda k: order[k])
            c = r.get(f)
            if c:
                # w_p x_p y_p + w_f x_f y_f = 0 with x_p = 1
                y[p] = -Fraction(c) * w.get(f, 1) / w.get(p, 1)
        out.append(y)
    rr2 = RowReducer(order)
    for y in out:
        rr2.add(y)
    return rr2.basis()
