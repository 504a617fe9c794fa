"""Bracket families, polyvector fields and the homotopy brackets they induce.

A family stores coefficients kG^{a_1..a_m}_{b_1..b_n} of maps
k_mu^n_m(e_{b_1} . ... . e_{b_n}) = kG^{a}_{b} e_{a_1} ^ ... ^ e_{a_m}.
Output indices carry the parity of psi_a (|e_a| + 1), input indices the
parity of t^b (|e_b|); slots are stored with sorted indices and the Koszul
sign folded into the value.

The n-ary bracket at level k contracts the weight-n, hbar^(k-1) part of a
polyvector with df_1, ..., df_n by iterated Schouten brackets with the f_i,
then applies the decalage sign (-1)^{sum_i (n-i)|f_i|}, which turns the
graded symmetric derived brackets into graded skew ones of degree 2-n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .polyvector import (ParseError, PolyVector, VSpace, bullet, grade_info, in_gV,
                         schouten_hbar)
from .symmetry import enumerate_unshuffles, koszul_sign, perm_sign, sort_with_sign

Slot = Tuple[int, Tuple[int, ...], Tuple[int, ...]]  # (k, outputs, inputs)


def normalize_slot(V: VSpace, outs: Sequence[int], ins: Sequence[int]):
    """Sorted (outs, ins) and the sign of sorting; sign 0 if the slot vanishes."""
    for a in list(outs) + list(ins):
        if not 1 <= a <= V.dim:
            raise ValueError(f"index {a} outside 1..{V.dim}")
    so, s1 = sort_with_sign(list(outs), [V.psi_degree(a) for a in outs])
    si, s2 = sort_with_sign(list(ins), [V.t_degree(b) for b in ins])
    for seq, deg in ((so, V.psi_degree), (si, V.t_degree)):
        for x, y in zip(seq, seq[1:]):
            if x == y and deg(x) & 1:
                return tuple(so), tuple(si), 0
    return tuple(so), tuple(si), s1 * s2


def _mult_factor(idx: Sequence[int]) -> int:
    out = 1
    for a in set(idx):
        out *= factorial(idx.count(a))
    return out


class BracketFamily:
    """Sparse coefficients of the maps k_mu^n_m for m, n >= 1 and 0 <= k <= m-1."""

    def __init__(self, V: VSpace, entries: Optional[Dict[Slot, Fraction]] = None):
        self.V = V
        self.coeffs: Dict[Slot, Fraction] = {}
        for (k, outs, ins), c in (entries or {}).items():
            self.add(k, outs, ins, c)
        if V.D:
            D = dict(V.D)
            for a in range(1, V.dim + 1):
                for b in range(1, V.dim + 1):
                    want = -D.get((a, b), Fraction(0))
                    have = self.get(0, (a,), (b,))
                    if have and have != want:
                        raise ValueError(f"slot 0 (1,1) {a},{b} is {have}, expected -D = {want}")
                    if want and not have:
                        self.coeffs[(0, (a,), (b,))] = want

    def _slot(self, k: int, outs, ins):
        m, n = len(outs), len(ins)
        if m < 1 or n < 1:
            raise ValueError(f"slot arities must be positive, got ({m},{n})")
        if not 0 <= k <= m - 1:
            raise ValueError(f"level {k} outside 0..{m - 1} at ({m},{n})")
        return normalize_slot(self.V, outs, ins)

    def add(self, k: int, outs, ins, value) -> None:
        so, si, s = self._slot(k, outs, ins)
        value = Fraction(value)
        if s == 0:
            if value:
                raise ValueError(f"slot {k} {tuple(outs)} {tuple(ins)} is forced to vanish")
            return
        key = (k, so, si)
        v = self.coeffs.get(key, 0) + s * value
        if v:
            self.coeffs[key] = v
        else:
            self.coeffs.pop(key, None)

    def get(self, k: int, outs, ins) -> Fraction:
        so, si, s = self._slot(k, outs, ins)
        return s * self.coeffs.get((k, so, si), Fraction(0))

    def differential(self) -> Dict[Tuple[int, int], Fraction]:
        """D with d(e_b) = sum_a D[a,b] e_a, read off the slot 0 (1,1) = -D."""
        return {(o[0], i[0]): -c for (k, o, i), c in self.coeffs.items() if len(o) == len(i) == 1}

    def slots(self) -> List[Slot]:
        return sorted(self.coeffs, key=lambda s: (s[0], len(s[1]), len(s[2]), s[1], s[2]))

    def __eq__(self, other) -> bool:
        return isinstance(other, BracketFamily) and self.V == other.V and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"BracketFamily({len(self.coeffs)} slots over {self.V.degrees})"


def gamma_from_mu(f: BracketFamily) -> PolyVector:
    """Sum of (1/m!n!) kG^{a}_{b} t^{b_1}..t^{b_n} psi_{a_1}..psi_{a_m} hbar^k over all index tuples."""
    V = f.V
    out = PolyVector(V)
    for k, outs, ins in f.slots():
        c = f.coeffs[(k, outs, ins)] / (_mult_factor(outs) * _mult_factor(ins))
        exps = [0] * (2 * V.dim)
        for b in ins:
            exps[b - 1] += 1
        for a in outs:
            exps[V.dim + a - 1] += 1
        out = out + PolyVector(V, {(tuple(exps), k): c})
    return out


def mu_from_gamma(G: PolyVector) -> BracketFamily:
    """Inverse of gamma_from_mu; every term needs t-degree >= 1 and psi-weight >= hbar power + 1."""
    if not in_gV(G):
        raise ValueError("polyvector is not in g_V")
    V, N = G.V, G.V.dim
    entries: Dict[Slot, Fraction] = {}
    for (e, h), c in G.terms.items():
        ins = tuple(b for b in range(1, N + 1) for _ in range(e[b - 1]))
        outs = tuple(a for a in range(1, N + 1) for _ in range(e[N + a - 1]))
        if not ins:
            raise ValueError("term without t factors has no slot (inputs must be nonempty)")
        entries[(h, outs, ins)] = c * _mult_factor(outs) * _mult_factor(ins)
    return BracketFamily(V, entries)


# brackets on functions

def _check_function(f: PolyVector) -> None:
    if any(h for (_, h) in f.terms) or any(f.key_weight(k) for k in f.terms):
        raise ValueError("bracket inputs must be functions of t only")


def homogeneous_parts(f: PolyVector) -> List[Tuple[int, PolyVector]]:
    parts: Dict[int, Dict] = {}
    for key, c in f.terms.items():
        parts.setdefault(f.key_degree(key), {})[key] = c
    return [(d, PolyVector(f.V, t)) for d, t in sorted(parts.items())]


def weight_part(G: PolyVector, w: int) -> PolyVector:
    return PolyVector(G.V, {k: c for k, c in G.terms.items() if G.key_weight(k) == w})


def _contract(part: PolyVector, fs: Sequence[PolyVector]) -> PolyVector:
    acc = part
    for f in fs:
        if acc.is_zero():
            break
        acc = bullet(acc, f)
    return acc


def extract_brackets(G: PolyVector, k: int, n: int, inputs: Sequence[PolyVector]) -> PolyVector:
    """The bracket kL_n(f_1, ..., f_n) built from the hbar^(k-1), weight-n part of G."""
    if len(inputs) != n:
        raise ValueError(f"expected {n} inputs, got {len(inputs)}")
    if not 1 <= k <= n:
        raise ValueError(f"level {k} outside 1..{n}")
    for f in inputs:
        G._check(f)
        _check_function(f)
    part = weight_part(G.hbar_part(k - 1), n)
    out = PolyVector(G.V)
    if part.is_zero():
        return out
    for combo in product(*(homogeneous_parts(f) for f in inputs)):
        degs = [d for d, _ in combo]
        val = _contract(part, [p for _, p in combo])
        if sum((n - i) * d for i, d in enumerate(degs, start=1)) & 1:
            val = -val
        out = out + val
    return out


Bracket = Callable[[PolyVector, int, int, Sequence[PolyVector]], PolyVector]


def leibniz_defect(G: PolyVector, k: int, others: Sequence[PolyVector], j: int,
                   g: PolyVector, h: PolyVector, bracket: Bracket = extract_brackets) -> PolyVector:
    """L(.., gh, ..) - L(.., g, ..)h (+-) g L(.., h, ..) at argument j (one-based).

    Signs follow the Koszul rule: h moves past the arguments after position j,
    g moves past the bracket (degree 2-n) and the arguments before it.
    """
    n = len(others) + 1
    if not 1 <= j <= n:
        raise ValueError(f"position {j} outside 1..{n}")
    before, after = list(others[: j - 1]), list(others[j - 1:])
    out = bracket(G, k, n, before + [g * h] + after)
    for dg, gp in homogeneous_parts(g):
        for dh, hp in homogeneous_parts(h):
            for fs_b in product(*(homogeneous_parts(f) for f in before)):
                for fs_a in product(*(homogeneous_parts(f) for f in after)):
                    db = sum(d for d, _ in fs_b)
                    da = sum(d for d, _ in fs_a)
                    bp = [p for _, p in fs_b]
                    ap = [p for _, p in fs_a]
                    t1 = bracket(G, k, n, bp + [gp] + ap) * hp
                    if (dh * da) & 1:
                        t1 = -t1
                    t2 = gp * bracket(G, k, n, bp + [hp] + ap)
                    if (dg * (n + db)) & 1:
                        t2 = -t2
                    out = out - t1 - t2
    return out


# the homotopy identities

@dataclass(frozen=True)
class Defect:
    identity: str
    inputs: Tuple[str, ...]
    residual: PolyVector


@dataclass
class DefectReport:
    entries: List[Defect] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def lines(self) -> List[str]:
        from .polyvector import format_terms
        return [f"{d.identity}\t{' , '.join(d.inputs)}\t{format_terms(d.residual)}" for d in self.entries]


def _monomial_name(f: PolyVector) -> str:
    (e, _), = f.terms
    parts = [f"t{a + 1}" + (f"^{x}" if x > 1 else "") for a, x in enumerate(e[: f.V.dim]) if x]
    return "*".join(parts)


def monomial_inputs(V: VSpace, bound: int) -> List[PolyVector]:
    """Nonzero monomials t^e with 1 <= |e| <= bound, in a fixed order."""
    out = []
    for deg in range(1, bound + 1):
        for idx in combinations_with_replacement(range(1, V.dim + 1), deg):
            f = PolyVector.monomial(V, 1, {a: idx.count(a) for a in set(idx)})
            if not f.is_zero():
                out.append(f)
    return out


def homotopy_lhs(G: PolyVector, k: int, fs: Sequence[PolyVector]) -> PolyVector:
    """Left side of the level-k identity on homogeneous inputs v_1..v_n.

    Sum over r+s = n+1, i+j = k and (s, n-s)-unshuffles sigma of
    e(sigma) sgn(sigma) (-1)^{r(s-1)} iL_r(jL_s(v_sigma(1..s)), v_sigma(s+1..n)).
    """
    n = len(fs)
    degs = [f.degree() or 0 for f in fs]
    inner_cache: Dict = {}
    total = PolyVector(G.V)
    for s in range(1, n + 1):
        r = n + 1 - s
        for sigma in enumerate_unshuffles(s, n - s):
            sign = koszul_sign(degs, sigma) * perm_sign(sigma)
            if (r * (s - 1)) & 1:
                sign = -sign
            head = sigma[:s]
            rest = [fs[x - 1] for x in sigma[s:]]
            for j in range(1, s + 1):
                i = k - j
                if not 1 <= i <= r:
                    continue
                key = (j, head)
                if key not in inner_cache:
                    inner_cache[key] = extract_brackets(G, j, s, [fs[x - 1] for x in head])
                inner = inner_cache[key]
                if inner.is_zero():
                    continue
                total = total + extract_brackets(G, i, r, [inner] + rest).scale(sign)
    return total


MAX_TUPLES = 200_000


def sh_defect(G: PolyVector, max_arity: Optional[int] = None, input_degree_bound: int = 1) -> DefectReport:
    """Residuals of the two-level homotopy Lie identities on monomial inputs.

    Every arity n <= max_arity and level 2 <= k <= n+1 is checked on all
    multisets of test monomials; the default arity reaches the top weight of
    [G, G].  An hbar-free G only has level-1 brackets, so this is the plain
    homotopy Lie check.
    """
    if not in_gV(G):
        raise ValueError("polyvector is not in g_V")
    G.degree()
    if max_arity is None:
        w = max((G.key_weight(key) for key in G.terms), default=0)
        max_arity = max(2 * w - 1, 1)
    mons = monomial_inputs(G.V, input_degree_bound)
    count = sum(1 for n in range(1, max_arity + 1) for _ in combinations_with_replacement(mons, n))
    if count > MAX_TUPLES:
        raise ValueError(f"{count} input tuples exceed the limit {MAX_TUPLES}")
    report = DefectReport()
    levels = sorted(G.hbar_powers())
    top = (max(levels) + 1) if levels else 1
    for n in range(1, max_arity + 1):
        for fs in combinations_with_replacement(mons, n):
            for k in range(2, min(n + 1, 2 * top) + 1):
                res = homotopy_lhs(G, k, list(fs))
                if not res.is_zero():
                    report.entries.append(Defect(f"n={n} k={k}", tuple(_monomial_name(f) for f in fs), res))
    return report


# verdicts

def bracket_bilinear(A: PolyVector, B: PolyVector) -> PolyVector:
    """schouten_hbar extended bilinearly over homogeneous components."""
    out = PolyVector(A.V)
    for _, a in homogeneous_parts(A):
        for _, b in homogeneous_parts(B):
            out = out + schouten_hbar(a, b)
    return out


@dataclass
class BihamVerdict:
    degree_ok: bool
    schouten_zero: bool
    pointed: bool
    in_gV: bool
    report: Optional[DefectReport] = None

    @property
    def ok(self) -> bool:
        return self.degree_ok and self.schouten_zero and self.pointed and self.in_gV

    def rows(self) -> List[Tuple[str, bool]]:
        return [("degree_ok", self.degree_ok), ("schouten_zero", self.schouten_zero),
                ("pointed", self.pointed), ("in_gV", self.in_gV)]


def check_extended_biham(G: PolyVector, with_defects: bool = False, input_degree_bound: int = 1) -> BihamVerdict:
    """Degree two, [G,G] = 0, G|_0 = 0 and G in g_V; optionally the bracket defects too."""
    degree_ok = G.degrees() <= {2}
    v = BihamVerdict(
        degree_ok=degree_ok,
        schouten_zero=bracket_bilinear(G, G).is_zero(),
        pointed=not grade_info(G)["value_at_0"],
        in_gV=in_gV(G),
    )
    if with_defects and degree_ok and v.in_gV:
        v.report = sh_defect(G, input_degree_bound=input_degree_bound)
    return v


def classical_biham_check(G0: PolyVector, G1: PolyVector) -> Tuple[bool, bool, bool]:
    """([G0,G0] = 0, [G1,G1] = 0, [G0,G1] + [G1,G0] = 0) for bivector fields on degree-zero V."""
    G0._check(G1)
    if any(G0.V.degrees):
        raise ValueError("classical check needs V concentrated in degree zero")
    for name, G in (("G0", G0), ("G1", G1)):
        if G.hbar_powers() - {0}:
            raise ValueError(f"{name} must be hbar-free")
        if any(G.key_weight(key) != 2 for key in G.terms):
            raise ValueError(f"{name} must be a bivector field")
    return (schouten_hbar(G0, G0).is_zero(), schouten_hbar(G1, G1).is_zero(),
            (schouten_hbar(G0, G1) + schouten_hbar(G1, G0)).is_zero())


# text format

def serialize_family(f: BracketFamily) -> str:
    lines = [f"V: {f.V.dim}; degrees: " + " ".join(str(d) for d in f.V.degrees)]
    for k, outs, ins in f.slots():
        c = f.coeffs[(k, outs, ins)]
        lines.append(f"mu {k} ({len(outs)},{len(ins)}) out: {' '.join(map(str, outs))} "
                     f"in: {' '.join(map(str, ins))} = {c}")
    return "\n".join(lines) + "\n"


def _ints(body: str, src: str, ln: int, what: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in body.split())
    except ValueError:
        raise ParseError(src, ln, f"integer indices after '{what}'", body.strip()) from None


def parse_family(text: str, source: str = "<string>") -> BracketFamily:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("V: "):
        raise ParseError(source, 1, "header 'V: N; degrees: ...'", lines[0] if lines else "")
    try:
        nstr, dstr = lines[0][3:].split("; degrees:", 1)
        n = int(nstr)
        degs = tuple(int(x) for x in dstr.split())
    except ValueError:
        raise ParseError(source, 1, "'V: N; degrees: d1 ... dN'", lines[0]) from None
    if len(degs) != n:
        raise ParseError(source, 1, f"{n} degrees", str(len(degs)))
    V = VSpace(degs)
    entries: Dict[Slot, Fraction] = {}
    seen = set()
    for ln, line in enumerate(lines[1:], start=2):
        if not line.startswith("mu "):
            raise ParseError(source, ln, "'mu k (m,n) out: ... in: ... = p/q'", line)
        head, eq, coeff = line.partition(" = ")
        if not eq:
            raise ParseError(source, ln, "' = p/q'", line)
        try:
            value = Fraction(coeff.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(source, ln, "rational coefficient p/q", coeff.strip()) from None
        parts = head[3:].split(" ", 2)
        if len(parts) != 3 or not parts[2].startswith("out: ") or " in: " not in parts[2]:
            raise ParseError(source, ln, "'k (m,n) out: ... in: ...'", head)
        try:
            k = int(parts[0])
            m, nn = (int(x) for x in parts[1].strip("()").split(","))
        except ValueError:
            raise ParseError(source, ln, "level and '(m,n)'", " ".join(parts[:2])) from None
        ob, ib = parts[2][5:].split(" in: ", 1)
        outs, ins = _ints(ob, source, ln, "out:"), _ints(ib, source, ln, "in:")
        if (len(outs), len(ins)) != (m, nn):
            raise ParseError(source, ln, f"{m} outputs and {nn} inputs", f"{len(outs)} and {len(ins)}")
        try:
            so, si, s = normalize_slot(V, outs, ins)
        except ValueError as exc:
            raise ParseError(source, ln, f"indices in 1..{V.dim}", str(exc)) from None
        if (k, so, si) in seen:
            raise ParseError(source, ln, "each slot at most once", line)
        seen.add((k, so, si))
        entries[(k, outs, ins)] = value
    try:
        return BracketFamily(V, entries)
    except ValueError as exc:
        raise ParseError(source, len(lines), "valid slot data", str(exc)) from None
