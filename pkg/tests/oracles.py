"""Brute-force oracles written independently of the library's sign machinery."""

from itertools import product

from dioperads.polyvector import PolyVector, partial, partial_right


# Schouten bracket on degree-zero spaces: psi monomials are sorted index
# tuples, t monomials exponent tuples, signs counted by hand.


def oracle_terms(P):
    n = P.V.dim
    out = {}
    for (e, h), c in P.terms.items():
        psi = tuple(a for a in range(1, n + 1) if e[n + a - 1])
        out[(e[:n], psi)] = c
    return out


def _oracle_mul(x, y):
    out = {}
    for (ta, pa), ca in x.items():
        for (tb, pb), cb in y.items():
            if set(pa) & set(pb):
                continue
            seq = pa + pb
            inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
            key = (tuple(u + v for u, v in zip(ta, tb)), tuple(sorted(seq)))
            out[key] = out.get(key, 0) + ca * cb * (-1) ** inv
    return {k: v for k, v in out.items() if v}


def _oracle_dpsi_right(x, a):
    out = {}
    for (t, p), c in x.items():
        if a in p:
            i = p.index(a)
            out[(t, p[:i] + p[i + 1:])] = c * (-1) ** (len(p) - 1 - i)
    return out


def _oracle_dt(x, a):
    out = {}
    for (t, p), c in x.items():
        if t[a - 1]:
            t2 = list(t)
            t2[a - 1] -= 1
            out[(tuple(t2), p)] = c * t[a - 1]
    return out


def _oracle_bullet(x, y, n):
    total = {}
    for a in range(1, n + 1):
        for k, v in _oracle_mul(_oracle_dpsi_right(x, a), _oracle_dt(y, a)).items():
            total[k] = total.get(k, 0) + v
    return {k: v for k, v in total.items() if v}


def oracle_schouten(A, B):
    n = A.V.dim
    x, y = oracle_terms(A), oracle_terms(B)
    s = -1 if (A.degree() - 1) * (B.degree() - 1) % 2 else 1
    out = dict(_oracle_bullet(x, y, n))
    for k, v in _oracle_bullet(y, x, n).items():
        out[k] = out.get(k, 0) - s * v
    return {k: v for k, v in out.items() if v}


def tensor_bracket(G, n, fs):
    """Level-one n-ary bracket from the coefficient tensor of the weight-n part.

    T^b is the coefficient of psi_{b_1} ... psi_{b_n} written to the left of
    the psi's: right derivatives in psi_{b_n}, then psi_{b_{n-1}}, and so on.  The sign is the decalage sign times (-1)^e with
    e = sum_{j>=2} |psi_{b_j}| (|f_1| + ... + |f_{j-1}| + j - 1).
    """
    V = G.V
    part = PolyVector(V, {k: c for k, c in G.hbar_part(0).terms.items() if G.key_weight(k) == n})
    degs = [f.degree() or 0 for f in fs]
    pre = sum((n - i) * d for i, d in enumerate(degs, start=1))
    total = PolyVector.zero(V)
    for b in product(range(1, V.dim + 1), repeat=n):
        T = part
        for a in reversed(b):
            T = partial_right(T, "psi", a)
        for f, a in zip(fs, b):
            T = T * partial(f, "t", a)
        eps = sum(V.psi_degree(b[j]) * (sum(degs[:j]) + j) for j in range(1, n))
        total = total + T.scale((-1) ** ((eps + pre) % 2))
    return total
