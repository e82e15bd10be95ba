"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary.  Run alone with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
Fleet generation happens in a fixture and is excluded from the timings.
"""

import random
import sys
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from plumbed.asymptotic import (
    bbB,
    bernoulli_poly,
    c0_closed_form,
    cn_ledger,
    em_asymptotic_1d,
    exp_derivative,
    verify_main,
)
from plumbed.chardata import eps_moment, half_char, product_char
from plumbed.fleet import default_fleet
from plumbed.gausswrt import random_reciprocity_instance, reciprocity_check, wrt_gppv, wrt_reduced
from plumbed.graph import h_graph, sigma237, single_vertex
from plumbed.hblock import pv_residue, radial_limit, zhat_by_pv, zhat_false_theta
from plumbed.hp import e_frac
from plumbed.lattice import (
    det_bareiss,
    det_rational,
    is_positive_definite,
    linking_data,
    reassemble_inverse,
)
from plumbed.ratfunc import binomial_ext

RESULTS = {}


def report(num, ok, seconds, limit, detail):
    status = "PASS" if ok and seconds < limit else "FAIL"
    line = f"criterion {num:>2}: {status}  {seconds:7.1f}s (limit {limit:g}s)  {detail}"
    RESULTS[num] = line
    return status == "PASS"


@pytest.fixture(scope="module")
def acc_fleet():
    return default_fleet(60, 1)


@pytest.fixture(autouse=True)
def _dps():
    with mpmath.workdps(64):
        yield


# 1 ----------------------------------------------------------------------------


def block_identities(ld):
    """Exact checks of the V1 | V>=2 block data."""
    if reassemble_inverse(ld) != ld.Winv:
        return False
    if not is_positive_definite(ld.S):
        return False
    ld.S_int()
    idx = ld.graph.index
    for a, v in enumerate(ld.vge2):
        for b, u in enumerate(ld.vge2):
            want = Fraction(-ld.W[idx[v]][idx[u]])
            if a == b:
                want += sum(Fraction(1, ld.weight(i)) for i in ld.partition.leaf_nbrs[v])
            if ld.Sinv[a][b] != want:
                return False
    # det W = det W1 * det(-Sinv)
    n2 = len(ld.vge2)
    dW1 = det_bareiss(ld.W1) if ld.W1 else 1
    if Fraction(ld.detW) != dW1 * (-1) ** n2 * (det_rational(ld.Sinv) if n2 else 1):
        return False
    return ld.detS * (det_rational(ld.Sinv) if n2 else 1) == 1


def test_criterion_01_block_identities(acc_fleet):
    t = time.perf_counter()
    bad = [e.name for e in acc_fleet if not block_identities(linking_data(e.graph))]
    dt = time.perf_counter() - t
    ok = len(acc_fleet) >= 50 and not bad
    assert report(1, ok, dt, 10, f"{len(acc_fleet)} graphs, failures={bad}")


# 2 ----------------------------------------------------------------------------


def character_laws(ld):
    for v in ld.vge2:
        hc = half_char(ld, v)
        nb = hc.n_leaves
        if any(eps_moment(hc, n) != 0 for n in range(nb)):
            return False
        if nb and sum(x.sign for x in hc.entries) != 0:
            return False
        if len({(hc.M * x.alpha) % 1 for x in hc.entries}) != 1:
            return False
        if len({(hc.M * x.alpha**2) % 1 for x in hc.entries}) != 1:
            return False
        if len({x.alpha for x in hc.entries}) != 2**nb:
            return False
    return True


def test_criterion_02_character_laws(acc_fleet):
    t = time.perf_counter()
    bad = [e.name for e in acc_fleet if not character_laws(linking_data(e.graph))]
    dt = time.perf_counter() - t
    assert report(2, not bad, dt, 10, f"{len(acc_fleet)} graphs, failures={bad}")


# 3 ----------------------------------------------------------------------------


def test_criterion_03_two_wrt_forms(acc_fleet):
    t = time.perf_counter()
    worst, count = mpmath.mpf(0), 0
    cases = []
    for e in acc_fleet:
        ld = linking_data(e.graph)
        cases += [(e.name, ld, k) for k in range(2, 9) if (2 * k) ** len(ld.W) <= 10**7]
    ld237 = linking_data(sigma237())
    cases += [("sigma237", ld237, k) for k in range(2, 13)]
    for name, ld, k in cases:
        d = abs(wrt_gppv(ld, k).value - wrt_reduced(ld, k).value)
        worst = max(worst, d)
        count += 1
    dt = time.perf_counter() - t
    assert report(3, worst < 1e-30, dt, 600, f"{count} (graph, k) pairs, max |delta| = {mpmath.nstr(worst, 3)}")


# 4 ----------------------------------------------------------------------------


def test_criterion_04_pv_equals_false_theta(acc_fleet):
    t = time.perf_counter()
    bad = []
    for e in acc_fleet:
        ld = linking_data(e.graph)
        if zhat_by_pv(ld, 8).core != zhat_false_theta(ld, product_char(ld), 8).core:
            bad.append(e.name)
    dt = time.perf_counter() - t
    assert report(4, not bad, dt, 300, f"bound 8, {len(acc_fleet)} graphs, mismatches={bad}")


# 5 ----------------------------------------------------------------------------


def contour_pv(d, l, nodes=4096):
    total = 0.0
    for R in (0.5, 2.0):
        z = R * np.exp(2j * np.pi * np.arange(nodes) / nodes)
        total += np.mean(z ** (l - 1) * (z - 1 / z) ** (2 - d) * z)
    return total


def test_criterion_05_pv_residue_quadrature():
    t = time.perf_counter()
    worst = max(abs(contour_pv(d, l) - pv_residue(d, l)) for d in range(0, 7) for l in range(-12, 13))
    dt = time.perf_counter() - t
    assert report(5, worst < 1e-6, dt, 60, f"d <= 6, |l| <= 12, max error {worst:.2e}")


# 6 ----------------------------------------------------------------------------


def test_criterion_06_reciprocity():
    t = time.perf_counter()
    rng = random.Random(20240601)
    worst = mpmath.mpf(0)
    for _ in range(200):
        G, k, H, u = random_reciprocity_instance(rng, max_rank=3, max_k=8)
        lhs, rhs = reciprocity_check(G, k, H, u)
        worst = max(worst, abs(lhs - rhs))
    dt = time.perf_counter() - t
    assert report(6, worst < 1e-40, dt, 120, f"200 trials, max error {mpmath.nstr(worst, 3)}")


# 7 ----------------------------------------------------------------------------


def _exact_expansion(kind, n):
    """t^n coefficient of sum e^{-tn} or sum n e^{-tn} from the Bernoulli generating function.

    x/(e^x - 1) = sum B_j x^j / j!, so 1/(1 - e^{-t}) = sum (-1)^j B_j t^{j-1}/j!,
    and sum n e^{-tn} is minus its t-derivative.
    """
    B = lambda j: bernoulli_poly(j, 0)
    from math import factorial

    if kind == 0:
        j = n + 1
        return (-1) ** j * B(j) / factorial(j) if j >= 0 else Fraction(0)
    j = n + 2
    return -(n + 1) * (-1) ** j * B(j) / factorial(j) if j >= 0 else Fraction(0)


def test_criterion_07_euler_maclaurin():
    t = time.perf_counter()
    err = Fraction(0)
    for kind, p in ((0, [Fraction(1)]), (1, [Fraction(0), Fraction(1)])):
        orders = range(-2, 5)
        got = em_asymptotic_1d(exp_derivative, p, 0, 0, orders)
        err = max([err] + [abs(g - _exact_expansion(kind, n)) for g, n in zip(got, orders)])
    rng = random.Random(7)
    bad = 0
    for m in range(13):
        for n in range(-12, 13):
            a = Fraction(rng.randint(-40, 40), rng.randint(1, 15))
            l = Fraction(rng.randint(-40, 40), rng.randint(1, 15))
            if bbB(m, n, -a, 1 - l) != (-1) ** (m + n + 1) * bbB(m, n, a, l):
                bad += 1
            if n >= 0:
                from math import factorial

                rhs = factorial(m) * sum(
                    bernoulli_poly(n + j + 1, a + l) / factorial(n + j + 1)
                    * binomial_ext(n + j, j) * (-a) ** (m - j) / factorial(m - j)
                    for j in range(m + 1)
                )
                bad += rhs != bbB(m, n, a, l)
    dt = time.perf_counter() - t
    ok = err < Fraction(1, 10**30) and bad == 0
    assert report(7, ok, dt, 60, f"expansion error {float(err):.1e}, identity failures {bad}")


# 8 ----------------------------------------------------------------------------


def test_criterion_08_negative_index_vanishing(acc_fleet):
    cases = [e for e in acc_fleet if e.satisfies_condition and e.condition_min is not None]
    t = time.perf_counter()
    worst_neg, worst_c0, modes = mpmath.mpf(0), mpmath.mpf(0), set()
    for e in cases:
        ld = linking_data(e.graph)
        pc = product_char(ld)
        for k in (3, 5, 7):
            led = cn_ledger(ld, pc, k)
            modes.add(led.normalization_mode)
            worst_neg = max(worst_neg, led.negative_max())
            worst_c0 = max(worst_c0, abs(led.c0 - c0_closed_form(ld, pc, k)))
    dt = time.perf_counter() - t
    ok = bool(cases) and worst_neg < 1e-20 and worst_c0 < 1e-25
    assert report(8, ok, dt, 600, f"{len(cases)} graphs x k in (3,5,7), max |c_n<0| {mpmath.nstr(worst_neg, 3)}, "
                                  f"max |c0 - closed| {mpmath.nstr(worst_c0, 3)}, modes {sorted(modes)}")


# 9 ----------------------------------------------------------------------------


def _cost(e):
    ld = linking_data(e.graph)
    return (len(ld.vge3), abs(ld.detS), e.name)


def three_way_cases(fleet):
    cases = [("sigma237", sigma237(), k) for k in (3, 5, 7)]
    cases += [("h-graph", h_graph((-1, -7), (-2, -3), (-2, -3)), k) for k in (3, 4, 5)]
    good = sorted((e for e in fleet if e.satisfies_condition), key=_cost)[:10]
    cases += [(e.name, e.graph, 5) for e in good]
    return cases


def test_criterion_09_three_way_agreement(acc_fleet):
    cases = three_way_cases(acc_fleet)
    t = time.perf_counter()
    worst, failed = 0.0, []
    for name, g, k in cases:
        ld = linking_data(g)
        rep = verify_main(ld, product_char(ld), k, tolerance=1e-8)
        worst = max([worst] + list(rep.deltas.values()))
        if not rep.passed:
            failed.append((name, k))
    dt = time.perf_counter() - t
    ok = len(cases) == 16 and not failed
    assert report(9, ok, dt, 1800, f"{len(cases)} cases, max delta {worst:.2e}, failures={failed}")


# 10 ---------------------------------------------------------------------------


def test_criterion_10_s3():
    t = time.perf_counter()
    ld = linking_data(single_vertex(-1))
    pc = product_char(ld)
    worst = mpmath.mpf(0)
    hb = zhat_false_theta(ld, pc, 8)
    chain = hb.core.as_dict() == {Fraction(0): -2, Fraction(1): 2} and zhat_by_pv(ld, 8).core == hb.core
    for k in range(2, 13):
        for val in (wrt_gppv(ld, k).value, wrt_reduced(ld, k).value):
            worst = max(worst, abs(val - 1))
        z = e_frac(Fraction(1, 2 * k))
        worst = max(worst, abs(radial_limit(hb, k).value / (2 * (z - 1 / z)) - 1))
    dt = time.perf_counter() - t
    ok = worst < 1e-30 and chain
    assert report(10, ok, dt, 10, f"k = 2..12, max |WRT - 1| {mpmath.nstr(worst, 3)}, block chain consistent: {chain}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
