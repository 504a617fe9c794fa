"""Polyvector fields on a formal graded manifold.

A monomial is a product of symbols t^1..t^N, psi_1..psi_N in that fixed order,
times a power of the central parameter hbar.  With |e_a| = d_a we use
|t^a| = -d_a and |psi_a| = d_a + 1; hbar has degree 0.  Odd symbols square to
zero, even ones carry exponents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple

Exps = Tuple[int, ...]
Key = Tuple[Exps, int]  # (exponents over the 2N symbols, hbar power)


class ParseError(ValueError):
    """Text-format error carrying file, line and the expected token."""

    def __init__(self, source: str, line: int, expected: str, got: str = ""):
        self.source = source
        self.line = line
        self.expected = expected
        msg = f"{source}:{line}: expected {expected}"
        if got:
            msg += f", got {got!r}"
        super().__init__(msg)


@dataclass(frozen=True)
class VSpace:
    """Graded basis e_1..e_N with optional differential d(e_b) = sum_a D[a,b] e_a."""

    degrees: Tuple[int, ...]
    D: Tuple[Tuple[Tuple[int, int], Fraction], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        D = tuple(sorted((tuple(k), Fraction(v)) for k, v in dict(self.D).items() if v != 0))
        object.__setattr__(self, "D", D)
        n = self.dim
        for (a, b), _ in D:
            if not (1 <= a <= n and 1 <= b <= n):
                raise ValueError(f"D index out of range: {(a, b)}")
            if self.degrees[a - 1] != self.degrees[b - 1] + 1:
                raise ValueError(f"D[{a},{b}] does not raise degree by one")
        Dm = dict(D)
        for a in range(1, n + 1):
            for c in range(1, n + 1):
                s = sum(Dm.get((a, b), 0) * Dm.get((b, c), 0) for b in range(1, n + 1))
                if s != 0:
                    raise ValueError("D does not square to zero")

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def t_degree(self, a: int) -> int:
        return -self.degrees[a - 1]

    def psi_degree(self, a: int) -> int:
        return self.degrees[a - 1] + 1

    def symbol_degrees(self) -> Tuple[int, ...]:
        n = self.dim
        return tuple(self.t_degree(a) for a in range(1, n + 1)) + tuple(
            self.psi_degree(a) for a in range(1, n + 1)
        )

    @staticmethod
    def zero_graded(n: int) -> "VSpace":
        return VSpace((0,) * n)


def _merge_sign(a: Exps, b: Exps, odd: Sequence[bool]) -> int:
    """Sign of rewriting (monomial a)(monomial b) in canonical order, 0 if it vanishes."""
    sign = 1
    odd_after = 0  # odd symbols of a strictly after the current position
    # walk from the right so odd_after counts symbols of a to the right of s
    for s in range(len(a) - 1, -1, -1):
        if odd[s]:
            if b[s] and a[s]:
                return 0
            if b[s] and odd_after & 1:
                sign = -sign
            if a[s]:
                odd_after += 1
    return sign


class PolyVector:
    """Sparse exact-rational element of K[t, psi, hbar] over a VSpace."""

    __slots__ = ("V", "terms", "_odd")

    def __init__(self, V: VSpace, terms: Optional[Dict[Key, Fraction]] = None):
        self.V = V
        self._odd = tuple(d & 1 == 1 for d in V.symbol_degrees())
        self.terms: Dict[Key, Fraction] = {}
        if terms:
            for k, c in terms.items():
                if c != 0:
                    self.terms[k] = Fraction(c)

    # construction

    @classmethod
    def zero(cls, V: VSpace) -> "PolyVector":
        return cls(V)

    @classmethod
    def constant(cls, V: VSpace, c=1, h: int = 0) -> "PolyVector":
        return cls(V, {((0,) * (2 * V.dim), h): Fraction(c)})

    @classmethod
    def t(cls, V: VSpace, a: int) -> "PolyVector":
        e = [0] * (2 * V.dim)
        e[a - 1] = 1
        return cls(V, {(tuple(e), 0): Fraction(1)})

    @classmethod
    def psi(cls, V: VSpace, a: int) -> "PolyVector":
        e = [0] * (2 * V.dim)
        e[V.dim + a - 1] = 1
        return cls(V, {(tuple(e), 0): Fraction(1)})

    @classmethod
    def hbar(cls, V: VSpace, k: int = 1) -> "PolyVector":
        return cls.constant(V, 1, k)

    @classmethod
    def monomial(cls, V: VSpace, coeff, t: Dict[int, int] = None, psi: Sequence[int] = (),
                 h: int = 0) -> "PolyVector":
        """coeff * prod (t^a)^e * psi_{a1} psi_{a2} ... (in the given order) * hbar^h."""
        out = cls.constant(V, coeff, h)
        for a, e in sorted((t or {}).items()):
            for _ in range(e):
                out = out * cls.t(V, a)
        for a in psi:
            out = out * cls.psi(V, a)
        return out

    # arithmetic

    def _check(self, other: "PolyVector"):
        if self.V != other.V:
            raise ValueError("polyvectors over different VSpaces")

    def copy(self) -> "PolyVector":
        out = PolyVector(self.V)
        out.terms = dict(self.terms)
        return out

    def __add__(self, other: "PolyVector") -> "PolyVector":
        self._check(other)
        out = self.copy()
        for k, c in other.terms.items():
            v = out.terms.get(k, 0) + c
            if v:
                out.terms[k] = v
            else:
                out.terms.pop(k, None)
        return out

    def __neg__(self) -> "PolyVector":
        out = PolyVector(self.V)
        out.terms = {k: -c for k, c in self.terms.items()}
        return out

    def __sub__(self, other: "PolyVector") -> "PolyVector":
        return self + (-other)

    def scale(self, c) -> "PolyVector":
        c = Fraction(c)
        out = PolyVector(self.V)
        if c:
            out.terms = {k: v * c for k, v in self.terms.items()}
        return out

    def __mul__(self, other):
        if not isinstance(other, PolyVector):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other) -> bool:
        if isinstance(other, PolyVector):
            return self.V == other.V and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.V, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    # grading

    def key_degree(self, key: Key) -> int:
        sd = self.V.symbol_degrees()
        return sum(e * d for e, d in zip(key[0], sd))

    def key_weight(self, key: Key) -> int:
        return sum(key[0][self.V.dim:])

    def key_tdegree(self, key: Key) -> int:
        return sum(key[0][: self.V.dim])

    def degrees(self) -> set:
        return {self.key_degree(k) for k in self.terms}

    def degree(self) -> Optional[int]:
        """The degree if homogeneous (None for zero); raises if inhomogeneous."""
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError(f"inhomogeneous polyvector, degrees {sorted(ds)}")
        return next(iter(ds)) if ds else None

    def hbar_part(self, k: int) -> "PolyVector":
        return PolyVector(self.V, {(e, 0): c for (e, h), c in self.terms.items() if h == k})

    def hbar_powers(self) -> set:
        return {h for (_, h) in self.terms}

    def times_hbar(self, k: int) -> "PolyVector":
        return PolyVector(self.V, {(e, h + k): c for (e, h), c in self.terms.items()})

    def __repr__(self) -> str:
        return f"PolyVector({format_terms(self)})"


def multiply(A: PolyVector, B: PolyVector) -> PolyVector:
    """Graded-commutative product with Koszul signs."""
    A._check(B)
    odd = A._odd
    out: Dict[Key, Fraction] = {}
    for (ea, ha), ca in A.terms.items():
        for (eb, hb), cb in B.terms.items():
            s = _merge_sign(ea, eb, odd)
            if not s:
                continue
            k = (tuple(x + y for x, y in zip(ea, eb)), ha + hb)
            v = out.get(k, 0) + s * ca * cb
            if v:
                out[k] = v
            else:
                out.pop(k, None)
    res = PolyVector(A.V)
    res.terms = out
    return res


def _symbol_index(V: VSpace, kind: str, a: int) -> int:
    if not 1 <= a <= V.dim:
        raise ValueError(f"symbol index out of range: {kind}{a}")
    if kind == "t":
        return a - 1
    if kind == "psi":
        return V.dim + a - 1
    raise ValueError(f"unknown symbol kind {kind!r}")


def partial(P: PolyVector, kind: str, a: int) -> PolyVector:
    """Left derivative: bring one copy of the symbol to the front, then strip it."""
    s = _symbol_index(P.V, kind, a)
    odd = P._odd
    out: Dict[Key, Fraction] = {}
    for (e, h), c in P.terms.items():
        if not e[s]:
            continue
        coeff = c * e[s]
        if odd[s] and sum(e[i] for i in range(s) if odd[i]) & 1:
            coeff = -coeff
        ne = list(e)
        ne[s] -= 1
        k = (tuple(ne), h)
        v = out.get(k, 0) + coeff
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    res = PolyVector(P.V)
    res.terms = out
    return res


def partial_right(P: PolyVector, kind: str, a: int) -> PolyVector:
    """Right derivative: bring one copy of the symbol to the back, then strip it."""
    s = _symbol_index(P.V, kind, a)
    odd = P._odd
    out: Dict[Key, Fraction] = {}
    for (e, h), c in P.terms.items():
        if not e[s]:
            continue
        coeff = c * e[s]
        if odd[s] and sum(e[i] for i in range(s + 1, len(e)) if odd[i]) & 1:
            coeff = -coeff
        ne = list(e)
        ne[s] -= 1
        k = (tuple(ne), h)
        v = out.get(k, 0) + coeff
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    res = PolyVector(P.V)
    res.terms = out
    return res


def bullet(A: PolyVector, B: PolyVector) -> PolyVector:
    """A . B = sum_a (A d<-/dpsi_a)(d->/dt^a B).

    The psi-derivative of the left factor acts from the right; with a left
    derivative there the bracket fails the Jacobi identity once psi symbols of
    both parities occur.
    """
    out = PolyVector(A.V)
    for a in range(1, A.V.dim + 1):
        da = partial_right(A, "psi", a)
        if da.is_zero():
            continue
        db = partial(B, "t", a)
        if db.is_zero():
            continue
        out = out + multiply(da, db)
    return out


def schouten(A: PolyVector, B: PolyVector) -> PolyVector:
    """Odd Schouten bracket [A,B] = A.B + (-1)^{|A||B|+|A|+|B|} B.A (hbar-free inputs)."""
    A._check(B)
    if any(h for (_, h) in A.terms) or any(h for (_, h) in B.terms):
        raise ValueError("schouten takes hbar-free inputs; use schouten_hbar")
    return _schouten_raw(A, B)


def _schouten_raw(A: PolyVector, B: PolyVector) -> PolyVector:
    da, db = A.degree(), B.degree()
    if da is None or db is None:
        return PolyVector(A.V)
    first = bullet(A, B)
    second = bullet(B, A)
    if (da * db + da + db) & 1:
        second = -second
    return first + second


def schouten_hbar(A: PolyVector, B: PolyVector) -> PolyVector:
    """Bracket with hbar as a central degree-0 scalar: [A h^p, B h^q] = [A,B] h^{p+q}."""
    A._check(B)
    A.degree()
    B.degree()
    return _schouten_raw(A, B)


def grade_info(P: PolyVector) -> dict:
    """Degrees, weights and hbar powers present, and the value at the origin per hbar power."""
    at0: Dict[int, Fraction] = {}
    zero = (0,) * (2 * P.V.dim)
    for (e, h), c in P.terms.items():
        if e == zero:
            at0[h] = at0.get(h, 0) + c
    return {
        "degrees": sorted(P.degrees()),
        "weights": sorted({P.key_weight(k) for k in P.terms}),
        "hbar_powers": sorted(P.hbar_powers()),
        "value_at_0": {h: c for h, c in sorted(at0.items()) if c},
    }


def in_gV(P: PolyVector) -> bool:
    """True iff every hbar^k part has psi-weight at least k+1."""
    return all(P.key_weight(k) >= k[1] + 1 for k in P.terms)


# text format

def _fmt_coeff(c: Fraction) -> str:
    s = "+" if c > 0 else "-"
    a = abs(c)
    return f"{s}{a.numerator}" if a.denominator == 1 else f"{s}{a.numerator}/{a.denominator}"


def _fmt_list(pairs: Iterable[Tuple[int, int]], show_one: bool) -> str:
    items = []
    for a, e in pairs:
        if e == 0:
            continue
        items.append(f"{a}^{e}" if (show_one or e != 1) else f"{a}")
    return " ".join(items) if items else "-"


def format_term(P: PolyVector, key: Key, c: Fraction) -> str:
    n = P.V.dim
    e, h = key
    t = _fmt_list(((a, e[a - 1]) for a in range(1, n + 1)), True)
    psi = _fmt_list(((a, e[n + a - 1]) for a in range(1, n + 1)), False)
    return f"{_fmt_coeff(c)} ; t: {t}; psi: {psi}; h: {h}"


def sorted_keys(P: PolyVector) -> list:
    n = P.V.dim
    return sorted(P.terms, key=lambda k: (k[1], sum(k[0][n:]), sum(k[0][:n]), tuple(-x for x in k[0])))


def format_terms(P: PolyVector) -> str:
    if P.is_zero():
        return "0"
    return " | ".join(format_term(P, k, P.terms[k]) for k in sorted_keys(P))


def serialize(P: PolyVector) -> str:
    lines = [f"V: {P.V.dim}; degrees: " + " ".join(str(d) for d in P.V.degrees)]
    for k in sorted_keys(P):
        lines.append(format_term(P, k, P.terms[k]))
    return "\n".join(lines) + "\n"


def _parse_coeff(tok: str, src: str, ln: int) -> Fraction:
    tok = tok.strip()
    if not tok or tok[0] not in "+-":
        raise ParseError(src, ln, "signed coefficient '+p/q' or '-p/q'", tok)
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(src, ln, "rational coefficient p/q", tok) from None


def _parse_symbols(body: str, n: int, src: str, ln: int, field_name: str) -> Dict[int, int]:
    body = body.strip()
    out: Dict[int, int] = {}
    if body == "-":
        return out
    if not body:
        raise ParseError(src, ln, f"index list or '-' after '{field_name}:'")
    for tok in body.split():
        a, _, e = tok.partition("^")
        try:
            ai = int(a)
            ei = int(e) if e else 1
        except ValueError:
            raise ParseError(src, ln, f"index 'a' or 'a^e' in {field_name}", tok) from None
        if not 1 <= ai <= n or ei < 1:
            raise ParseError(src, ln, f"index in 1..{n} with positive exponent", tok)
        out[ai] = out.get(ai, 0) + ei
    return out


def parse(text: str, source: str = "<string>") -> PolyVector:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(source, 1, "header 'V: N; degrees: ...'")
    head = lines[0]
    if not head.startswith("V: "):
        raise ParseError(source, 1, "'V: '", head[:3])
    try:
        nstr, dstr = head[3:].split("; degrees:", 1)
        n = int(nstr)
        degs = tuple(int(x) for x in dstr.split())
    except ValueError:
        raise ParseError(source, 1, "'V: N; degrees: d1 ... dN'", head) from None
    if len(degs) != n:
        raise ParseError(source, 1, f"{n} degrees", str(len(degs)))
    V = VSpace(degs)
    P = PolyVector(V)
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(";")
        if len(parts) != 4:
            raise ParseError(source, ln, "'coeff ; t: ...; psi: ...; h: k'", line)
        c = _parse_coeff(parts[0], source, ln)
        tp, pp, hp = (p.strip() for p in parts[1:])
        if not tp.startswith("t:"):
            raise ParseError(source, ln, "'t:'", tp)
        if not pp.startswith("psi:"):
            raise ParseError(source, ln, "'psi:'", pp)
        if not hp.startswith("h:"):
            raise ParseError(source, ln, "'h:'", hp)
        t = _parse_symbols(tp[2:], n, source, ln, "t")
        psi = _parse_symbols(pp[4:], n, source, ln, "psi")
        try:
            h = int(hp[2:])
        except ValueError:
            raise ParseError(source, ln, "integer hbar power", hp) from None
        if h < 0:
            raise ParseError(source, ln, "nonnegative hbar power", hp)
        e = [0] * (2 * n)
        for a, k in t.items():
            e[a - 1] = k
        for a, k in psi.items():
            e[n + a - 1] = k
        odd = P._odd
        if any(odd[i] and e[i] > 1 for i in range(2 * n)):
            raise ParseError(source, ln, "odd symbols with exponent at most 1", line)
        key = (tuple(e), h)
        if key in P.terms:
            raise ParseError(source, ln, "each monomial at most once", line)
        if c == 0:
            raise ParseError(source, ln, "nonzero coefficient", parts[0].strip())
        P.terms[key] = c
    return P
