"""The nine acceptance criteria, one test each.

Every test records a PASS or FAIL line, shown in the pytest terminal summary
and printed directly when this file is run as a script.
"""

import random
import sys
import time
from itertools import permutations
from math import comb
from pathlib import Path

from conftest import ACCEPTANCE_LINES
from dioperads.cli import main
from dioperads.dioperad import (box_product_dim, builtin, full_relation_span, koszul_pairing,
                                orthogonal_complement, quotient_dim, total_quotient_dim)
from dioperads.polyvector import PolyVector, VSpace, schouten, schouten_hbar
from dioperads.representation import (BracketFamily, check_extended_biham, classical_biham_check,
                                      gamma_from_mu, mu_from_gamma, normalize_slot, sh_defect)
from dioperads.resolution import (ResolutionGenerator, d2_table, differential, generators,
                                  raw_term_count)
from polygen import (gamma_terms, random_flat_gamma, random_gamma, random_homogeneous,
                     random_space)

DATA = Path(__file__).resolve().parents[1] / "src" / "dioperads" / "data"


def record(number, title, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_dual_dimensions():
    dual = builtin("lie2-1-bi-dual")
    t0 = time.time()
    bad = []
    checked = 0
    for m in range(1, 5):
        for n in range(1, 5):
            if m + n < 3:
                continue
            d = quotient_dim(dual, m, n, m + n - 2)
            checked += 1
            if d != m:
                bad.append((m, n, d))
    record(1, "dual quotient dimension equals m", not bad,
           f"{checked} components, mismatches {bad}, {time.time() - t0:.1f}s")


def test_criterion_2_orthogonality():
    bi, dual = builtin("lie2-1-bi"), builtin("lie2-1-bi-dual")
    expected = {(1, 3): (1, 2, 3), (3, 1): (3, 9, 12), (2, 2): (2, 8, 10)}
    problems = []
    for (m, n), (r, s, f) in expected.items():
        rs = [x.relabel(a, b) for x in bi.relations_at(m, n)
              for a in permutations(range(1, m + 1)) for b in permutations(range(1, n + 1))]
        if any(koszul_pairing(x, y) for x in rs for y in dual.relations_at(m, n)):
            problems.append(f"nonzero pairing at {(m, n)}")
        got = (full_relation_span(bi, m, n).dim, full_relation_span(dual, m, n).dim,
               len(full_relation_span(bi, m, n).columns))
        if got != (r, s, f) or orthogonal_complement(bi, m, n).dim != s:
            problems.append(f"dims at {(m, n)}: {got}")
    record(2, "R and S are orthogonal with complementary dimensions", not problems,
           "; ".join(problems) or "1+2=3, 3+9=12, 2+8=10")


def test_criterion_3_distributive_law():
    bi, lie1, lie2 = builtin("lie2-1-bi"), builtin("lie1"), builtin("lie2")
    rows = [(m, n, total_quotient_dim(bi, m, n), box_product_dim(lie1, lie2, m, n))
            for m, n in ((2, 2), (2, 3), (3, 2))]
    record(3, "box product dimension equals quotient dimension", all(q == b for _, _, q, b in rows),
           ", ".join(f"{(m, n)}: {q} vs {b}" for m, n, q, b in rows))


def test_criterion_4_d_squared():
    t0 = time.time()
    rows = d2_table(7, 7)
    bad = [r[0] for r in rows if not r[3]]
    record(4, "delta squared vanishes up to m+n <= 7 and n <= 7", not bad,
           f"{len(rows)} generators, failures {bad}, {time.time() - t0:.1f}s")


def test_criterion_5_spot_checks():
    problems = []
    if len(differential(ResolutionGenerator(1, 3, 0)).terms) != 3:
        problems.append("d(1,3,0) term count")
    for g in generators(2, 1) + generators(1, 2):
        if raw_term_count(g) or not differential(g).is_zero():
            problems.append(f"{g.name} nonzero")
    for g in generators(2, 2):
        # (j,k) = (0,2): 1 x 1 unshuffles; (1,1): 2 x 2 unshuffles, one black split each
        independent = comb(2, 0) * comb(2, 2) + comb(2, 1) * comb(2, 1)
        if raw_term_count(g) != independent or len(differential(g).terms) != independent:
            problems.append(f"{g.name} count")
    record(5, "differential spot checks", not problems, "; ".join(problems) or "3 terms, zeros, 5 and 5")


def test_criterion_6_schouten_suite():
    rng = random.Random(20240601)
    failures = 0
    triples = 600
    for _ in range(triples):
        V = random_space(rng, degrees=(-1, 0, 1))
        A, B, C = (random_homogeneous(rng, V) for _ in range(3))
        a, b = A.degree(), B.degree()
        tw = -1 if (a - 1) * (b - 1) % 2 else 1
        if schouten(A, B) != schouten(B, A).scale(-tw):
            failures += 1
        if schouten(A, schouten(B, C)) != schouten(schouten(A, B), C) + schouten(B, schouten(A, C)).scale(tw):
            failures += 1
    record(6, "Schouten antisymmetry and Jacobi", failures == 0, f"{triples} triples, {failures} failures")


def _perturb(rng, G):
    """Add one degree-2 g_V monomial so that the square stops vanishing, or None."""
    pool = gamma_terms(rng, G.V)
    rng.shuffle(pool)
    for m in pool:
        P = G + m
        if not P.is_zero() and not schouten_hbar(P, P).is_zero():
            return P
    return None


def test_criterion_7_equivalence():
    rng = random.Random(7)
    counts = {"zero": 0, "nonzero": 0, "perturbed": 0}
    mismatches = 0
    total = 0
    while total < 60 or counts["zero"] < 20 or counts["perturbed"] < 20:
        V = random_space(rng)
        G = (random_flat_gamma if total % 2 else random_gamma)(rng, V, max_tdeg=2, max_h=2)
        if G is None:
            continue
        total += 1
        zero = schouten_hbar(G, G).is_zero()
        counts["zero" if zero else "nonzero"] += 1
        if sh_defect(G).ok != zero:
            mismatches += 1
        if zero:
            P = _perturb(rng, G)
            if P is not None:
                counts["perturbed"] += 1
                if sh_defect(P).ok:
                    mismatches += 1
    record(7, "defects vanish iff the square vanishes", mismatches == 0,
           f"{total} random elements, {counts}, {mismatches} mismatches")


def test_criterion_8_desk_check():
    rng = random.Random(8)
    R2, R3 = VSpace.zero_graded(2), VSpace.zero_graded(3)
    problems = []

    def mono(V, c, t, psi):
        return PolyVector.monomial(V, c, t, psi)

    for _ in range(50):
        G0 = sum((mono(R2, rng.randint(-3, 3), {rng.randint(1, 2): rng.randint(0, 2)}, [1, 2])
                  for _ in range(3)), PolyVector.zero(R2))
        G1 = sum((mono(R2, rng.randint(-3, 3), {rng.randint(1, 2): rng.randint(0, 2)}, [1, 2])
                  for _ in range(3)), PolyVector.zero(R2))
        if not check_extended_biham(G0 + G1.times_hbar(1)).ok:
            problems.append("R2 pair failed")

    def linear_bivector():
        G = PolyVector.zero(R3)
        for _ in range(rng.randint(1, 3)):
            a, b = rng.sample([1, 2, 3], 2)
            t = {rng.randint(1, 3): 1} if rng.random() < 0.8 else {}
            G = G + mono(R3, rng.randint(-2, 2), t, [a, b])
        return G

    pairs = [(mono(R3, 1, {}, [1, 2]), mono(R3, 1, {3: 1}, [1, 2]))]
    so3 = mono(R3, 1, {1: 1}, [2, 3]) + mono(R3, 1, {2: 1}, [3, 1]) + mono(R3, 1, {3: 1}, [1, 2])
    pairs.append((so3, so3 + mono(R3, 1, {1: 1}, [1, 2])))
    pairs += [(linear_bivector(), linear_bivector()) for _ in range(150)]
    passed = failed = 0
    for G0, G1 in pairs:
        classical = all(classical_biham_check(G0, G1))
        extended = check_extended_biham(G0 + G1.times_hbar(1)).ok
        passed += classical
        failed += not classical
        if classical != extended:
            problems.append("R3 disagreement")
    if not all(classical_biham_check(*pairs[0])) or all(classical_biham_check(*pairs[1])):
        problems.append("known examples")
    record(8, "classical and extended checks agree", not problems and passed and failed,
           f"{len(pairs)} R3 pairs ({passed} good, {failed} failing), 50 R2 pairs; {sorted(set(problems))}")


def _random_family(rng, V):
    f = BracketFamily(V)
    for _ in range(rng.randint(1, 5)):
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        outs = [rng.randint(1, V.dim) for _ in range(m)]
        ins = [rng.randint(1, V.dim) for _ in range(n)]
        if normalize_slot(V, outs, ins)[2]:
            f.add(rng.randint(0, m - 1), outs, ins, rng.randint(-4, 4))
    return f


def test_criterion_9_round_trips(capsys):
    rng = random.Random(9)
    bad = 0
    for _ in range(100):
        V = random_space(rng)
        f = _random_family(rng, V)
        G = gamma_from_mu(f)
        if mu_from_gamma(G) != f or gamma_from_mu(mu_from_gamma(G)) != G:
            bad += 1
    fixtures = sorted(DATA.iterdir())
    cli_bad = []
    for path in fixtures:
        code = main(["normalize", str(path)])
        out = capsys.readouterr().out
        if code != 0 or out != path.read_text():
            cli_bad.append(path.name)
    with capsys.disabled():
        record(9, "family/polyvector round trips and byte-identical fixtures", bad == 0 and not cli_bad,
               f"100 families, {bad} failures; {len(fixtures)} fixtures, mismatches {cli_bad}")


if __name__ == "__main__":
    import pytest
    sys.exit(pytest.main([__file__, "-q"]))
