"""Euler-Maclaurin machinery with polynomial weights, and the t -> 0 data of F(f; t).

Notation.  For a smooth rapidly decaying ``f`` the antiderivatives are
``f^(-1)(x) = -int_x^oo f`` (iterated for lower orders).  The expansion
implemented here is

    sum_{n>=0} P(lam + n) f(t(alpha + lam + n)) ~ - sum_n t^n f^(n)(0) sum_m p_m bbB(m, n; alpha, lam)

with the overall minus sign of the classical formula
``sum_{n>=0} f(t(n+a)) ~ int f / t - sum_{n>=0} B_{n+1}(a)/(n+1)! f^(n)(0) t^n``.

``F(f; t)`` is the series sum_alpha eps(alpha) sum_{n in N^{V>=3}} e(Q(n+alpha)/k) P(n) f(t(n+alpha))
with ``t`` supported on V>=3 (components on degree-two vertices are zero).
"""

import itertools
import math
import time
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import mpmath
import numpy as np

from .errors import CalibrationFailed, ConditionViolated, OrderAmbiguous, OrderTooLarge
from .gausswrt import reduced_sum, wrt_gppv, wrt_reduced
from .hp import complex_to_json, e_frac
from .lattice import quad
from .ratfunc import P_vertex_coeffs

MAX_BERNOULLI = 64
MODES = ("prop_scaled", "corollary_literal")

# -- Bernoulli polynomials ------------------------------------------------------------


class BernoulliCache:
    """Exact coefficient vectors of B_0 .. B_max (index j holds the x^j coefficient)."""

    def __init__(self, max_order=MAX_BERNOULLI):
        self.max_order = max_order
        nums = [Fraction(1)]
        for m in range(1, max_order + 1):
            # sum_{j<=m} C(m+1, j) B_j = 0
            s = sum(math.comb(m + 1, j) * nums[j] for j in range(m))
            nums.append(-s / (m + 1))
        self.numbers = nums
        self.polys = [
            [math.comb(m, j) * nums[m - j] for j in range(m + 1)] for m in range(max_order + 1)
        ]

    def __call__(self, m, x):
        if m > self.max_order:
            raise OrderTooLarge(f"Bernoulli order {m} exceeds {self.max_order}")
        if m < 0:
            raise ValueError("negative Bernoulli order")
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.polys[m]):
            acc = acc * x + c
        return acc


_BERNOULLI = BernoulliCache()


def bernoulli_poly(m, x):
    return _BERNOULLI(m, x)


# -- the coefficients bbB -------------------------------------------------------------


def _b_coeff(m, n, l):
    # C(m+n-j, n) is taken as 0 when m+n-j = -1
    s = sum(
        Fraction(math.comb(m + n - j, n) * (-1) ** j, math.factorial(j) * math.factorial(l - j))
        for j in range(min(l, m + n) + 1)
    )
    return Fraction(math.factorial(m), math.factorial(m + n + 1 - l)) * s


def bbB(m, n, alpha, lam, literal=False):
    """The one-variable coefficient bbB_{m,n}(alpha, lam) (exact).

    For -m-1 <= n <= -1 the value obtained from the antiderivative rule
    f^(-1) = -int_x^oo f is (-1)^(n+1) m!/(m+n+1)! (-alpha)^(m+n+1);
    ``literal=True`` drops the sign (-1)^(n+1).
    """
    alpha, lam = Fraction(alpha), Fraction(lam)
    if n >= 0:
        return sum(
            (_b_coeff(m, n, l) * bernoulli_poly(m + n + 1 - l, lam) * alpha**l for l in range(m + n + 2)),
            Fraction(0),
        )
    if n >= -m - 1:
        val = Fraction(math.factorial(m), math.factorial(m + n + 1)) * (-alpha) ** (m + n + 1)
        return val if literal or (n + 1) % 2 == 0 else -val
    return Fraction(0)


def em_asymptotic_1d(fderiv, p, alpha, lam, orders):
    """Coefficients of t^n, n in ``orders``, of sum_{n>=0} P(lam+n) f(t(alpha+lam+n)).

    ``fderiv(n)`` returns f^(n)(0) for any integer n (negative n meaning
    iterated antiderivatives vanishing at infinity); ``p`` lists the
    monomial coefficients of P.  Values are exact when ``fderiv`` is.
    """
    out = []
    for n in orders:
        s = sum((pm * bbB(m, n, alpha, lam) for m, pm in enumerate(p) if pm), Fraction(0))
        out.append(-s * fderiv(n) if s else Fraction(0))
    return out


def exp_derivative(n):
    """f^(n)(0) for f(x) = exp(-x), all integers n."""
    return (-1) ** (n % 2)


# -- condition on high-degree vertices ----------------------------------------------------


def condition_values(ld):
    """|leaf neighbours| + 2 - deg(v) for each v in V>=3."""
    part = ld.partition
    return {v: len(part.leaf_nbrs[v]) + 2 - part.degree[v] for v in ld.vge3}


def check_condition(ld, strict=True):
    for v, c in condition_values(ld).items():
        if c < 0 or (strict and c == 0):
            raise ConditionViolated(f"vertex {v!r} has leaf count + 2 - degree = {c}", vertex=v)


# -- the c_n ledger ----------------------------------------------------------------------


@dataclass
class AsymptoticLedger:
    k: int
    coeffs: Dict[Tuple[int, ...], object]
    normalization_mode: str
    c0: object
    box: Tuple[Tuple[int, int], ...]
    calibration: Optional[dict] = None

    def negative_max(self):
        """Largest |c_n| over indices with a negative component."""
        vals = [abs(c) for n, c in self.coeffs.items() if any(x < 0 for x in n)]
        return max(vals) if vals else mpmath.mpf(0)

    def series(self, t):
        """Truncated sum_n c_n f1^(n)(0) prod t_v^n_v for f1 = exp(-sum x)."""
        acc = mpmath.mpc(0)
        for n, c in self.coeffs.items():
            term = c * (-1) ** (sum(n) % 2)
            for tv, nv in zip(t, n):
                term *= _mpf(tv) ** nv
            acc += term
        return acc

    def to_json(self, digits=30):
        return {
            "k": self.k,
            "normalization_mode": self.normalization_mode,
            "box": [list(b) for b in self.box],
            "c0": complex_to_json(self.c0, digits),
            "coeffs": [[list(n), complex_to_json(c, digits)] for n, c in sorted(self.coeffs.items())],
            "calibration": self.calibration,
        }


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _leaf_sign(ld):
    # the stored half-character signs differ from those in F by (-1)^|V1|
    return -1 if len(ld.v1) % 2 else 1


def default_box(ld, top=1):
    """n_v from 2 - deg(v) (below that every bbB vanishes) up to ``top``."""
    return tuple((2 - ld.partition.degree[v], top) for v in ld.vge3)


@lru_cache(maxsize=None)
def _vertex_factor(k, deg, n, a, lam, mode):
    # sum_m p_m k^{m+n} bbB_{m,n}(.) for one vertex
    p = P_vertex_coeffs(deg)
    if mode == "prop_scaled":
        a, lam = a / k, Fraction(lam, k)
    return sum(
        (pm * Fraction(k) ** (m + n) * bbB(m, n, a, lam) for m, pm in enumerate(p) if pm),
        Fraction(0),
    )


def _ledger_coeffs(ld, pc, k, box, mode):
    S = ld.S
    pos3 = ld.vge3_positions()
    degs = [ld.partition.degree[v] for v in ld.vge3]
    ranges = [range(lo, hi + 1) for lo, hi in box]
    idx = list(itertools.product(*ranges))
    acc = {n: mpmath.mpc(0) for n in idx}
    for alpha, eps in pc.entries:
        for lam in itertools.product(range(k), repeat=len(pos3)):
            x = list(alpha)
            for i, l in zip(pos3, lam):
                x[i] += l
            phase = eps * e_frac((quad(S, x) / k) % 1)
            tables = [
                {n: _vertex_factor(k, degs[j], n, alpha[pos3[j]], lam[j], mode) for n in ranges[j]}
                for j in range(len(pos3))
            ]
            for n in idx:
                val = Fraction(1)
                for j, nj in enumerate(n):
                    val *= tables[j][nj]
                    if not val:
                        break
                if val:
                    acc[n] += phase * (mpmath.mpf(val.numerator) / val.denominator)
    # overall sign of the Euler-Maclaurin expansion, once per summed coordinate
    sign = (-1 if len(pos3) % 2 else 1) * _leaf_sign(ld)
    return {n: sign * c for n, c in acc.items()}


def cn_ledger(ld, pc, k, box=None, mode=None, calibrate=True):
    """c_n for n in ``box`` (default :func:`default_box`).

    ``mode`` selects the placement of k in the bbB arguments; when ``None``
    both are computed and the one agreeing with the Gauss-sum evaluation of
    F(f1; t) at small t is kept (CalibrationFailed if neither does).
    """
    box = default_box(ld) if box is None else tuple(box)
    if mode is not None and not calibrate:
        coeffs = _ledger_coeffs(ld, pc, k, box, mode)
        return AsymptoticLedger(k, coeffs, mode, coeffs.get(tuple(0 for _ in box), mpmath.mpc(0)), box)
    modes = [mode] if mode else list(MODES)
    cal = calibrate_modes(ld, pc, k, box, modes)
    best = cal["selected"]
    if best is None:
        raise CalibrationFailed(f"no normalization matches F(f1; t): {cal['residuals']}")
    coeffs = cal.pop("_coeffs")[best]
    zero = tuple(0 for _ in box)
    return AsymptoticLedger(k, coeffs, best, coeffs.get(zero, mpmath.mpc(0)), box, cal)


def calibrate_modes(ld, pc, k, box, modes=MODES, h=None, rtol=1e-6):
    """Compare each mode's truncated expansion with F(f1; t) at t = (h, ..., h)."""
    top = min(hi for _, hi in box) if box else 0
    if h is None:
        h = Fraction(1, 40 * k)
    t = [h] * len(ld.vge3)
    exact = F_f1(ld, pc, k, t)
    res, coeffs = {}, {}
    for m in modes:
        coeffs[m] = _ledger_coeffs(ld, pc, k, box, m)
        led = AsymptoticLedger(k, coeffs[m], m, None, box)
        res[m] = float(abs(led.series(t) - exact) / max(abs(exact), mpmath.mpf(1)))
    # truncation error ~ (k h)^(top+1) with modest constants
    ok = [m for m in modes if res[m] < max(rtol, 50 * float(k * h) ** (top + 1))]
    selected = min(ok, key=lambda m: res[m]) if ok else None
    return {"h": str(h), "residuals": res, "selected": selected, "_coeffs": coeffs}


# -- F(f1; t) ----------------------------------------------------------------------------


def F_prefactor(ld, k):
    """e(|V>=2|/8) / (sqrt(2k)^|V>=2| prod_{leaves} sqrt|w_i|)."""
    n2 = len(ld.vge2)
    denom = mpmath.sqrt(2 * k) ** n2
    for i in ld.v1:
        denom *= mpmath.sqrt(abs(ld.graph.weights[i]))
    return e_frac(Fraction(n2, 8) % 1) / denom


def _t_on_vge2(ld, t):
    pos = dict(zip(ld.vge3_positions(), t))
    return [_mpf(Fraction(pos[i])) if i in pos else 0 for i in range(len(ld.vge2))]


def F_f1(ld, pc, k, t, parallel=1):
    """F(f1; t) for f1 = exp(-sum x_v), via the finite Gauss-sum form (t_v > 0 on V>=3)."""
    if len(t) != len(ld.vge3):
        raise ValueError("t must be indexed by V>=3")
    if any(Fraction(x) <= 0 for x in t):
        raise ValueError("t must be componentwise positive")
    val, _ = reduced_sum(ld, k, _t_on_vge2(ld, t), parallel=parallel, skip_kz=False)
    return F_prefactor(ld, k) * val


def F_f1_direct(ld, pc, k, t, cutoff=40.0):
    """F(f1; t) from its defining double series, truncated where exp(-<t, n>) < e^-cutoff.

    Float64 numpy; meant as an independent check at moderate t.
    """
    pos3 = ld.vge3_positions()
    S = ld.S
    tt = np.array([float(x) for x in t])
    nmax = [int(cutoff / x) + 1 for x in tt]
    grids = np.meshgrid(*[np.arange(m) for m in nmax], indexing="ij")
    n = np.stack([g.ravel() for g in grids], axis=1) if pos3 else np.zeros((1, 0), dtype=np.int64)
    S3 = np.array([[int(S[i][j]) for j in pos3] for i in pos3], dtype=np.int64).reshape(len(pos3), len(pos3))
    P = np.ones(len(n))
    for j, v in enumerate(ld.vge3):
        d = ld.partition.degree[v]
        for a in range(1, d - 2):
            P *= n[:, j] + a
        P /= math.factorial(max(d - 3, 0))
    total = 0j
    for alpha, eps in pc.entries:
        Qa = quad(S, alpha)
        lin = np.array([int(2 * sum(S[i][j] * alpha[j] for j in range(len(alpha)))) for i in pos3], dtype=np.int64)
        ip = (np.einsum("ij,jk,ik->i", n, S3, n) + n @ lin) if pos3 else np.zeros(1, dtype=np.int64)
        resid = np.mod(ip, k)
        table = np.array([complex(e_frac((Qa + r) / k % 1)) for r in range(k)])
        a3 = np.array([float(alpha[i]) for i in pos3])
        damp = np.exp(-((n + a3) @ tt)) if pos3 else np.ones(1)
        total += eps * np.sum(table[resid] * P * damp)
    return _leaf_sign(ld) * complex(total)


def F_f1_order(ld, pc, k, v, h=Fraction(1, 64), others=None, steps=4):
    """Laurent order of F(f1; t) in t_v at 0 (other components fixed), by slope sampling.

    Asserts the lower bound min(0, leaf count + 2 - deg(v)) and returns the order.
    """
    vs = list(ld.vge3)
    j = vs.index(v)
    others = Fraction(1, 7) if others is None else Fraction(others)
    base = [others] * len(vs)
    vals, hs = [], []
    for s in range(steps):
        hv = Fraction(h) / 2**s
        tt = list(base)
        tt[j] = hv
        vals.append(abs(F_f1(ld, pc, k, tt)))
        hs.append(hv)
    slopes = []
    for a, b, ha, hb in zip(vals, vals[1:], hs, hs[1:]):
        if a == 0 or b == 0:
            slopes.append(None)
            continue
        slopes.append(float(mpmath.log(b / a) / mpmath.log(_mpf(hb) / _mpf(ha))))
    last = slopes[-1]
    if last is None:
        raise OrderAmbiguous("F(f1; t) vanishes at the sample points")
    order = round(last)
    if abs(last - order) > 0.1:
        raise OrderAmbiguous(f"slope {last:.3f} is not near an integer")
    bound = min(0, condition_values(ld)[v])
    assert order >= bound, f"order {order} below {bound}"
    return order


# -- the constant term -------------------------------------------------------------------


def c0_closed_form(ld, pc, k, parallel=1):
    """F(f1; 0) as the restricted Gauss sum over mu with no component in kZ."""
    check_condition(ld, strict=True)
    val, _ = reduced_sum(ld, k, None, parallel=parallel, skip_kz=True)
    return F_prefactor(ld, k) * val


def limit_prefactor(ld, k):
    """(-1)^|V1| e(-phi/4k), the factor relating lim F to the radial limit of Zhat."""
    sign = -1 if len(ld.v1) % 2 else 1
    return sign * e_frac((-ld.phi() / (4 * k)) % 1)


# -- the main verification ---------------------------------------------------------------


@dataclass
class VerdictReport:
    k: int
    tolerance: float
    wrt: object
    normalized_wrt: object
    radial: object
    prefactored_c0: object
    deltas: Dict[str, float]
    passed: bool
    radial_error: float
    wrt_cross_check: Optional[float] = None
    normalization_mode: Optional[str] = None
    timing: Dict[str, float] = field(default_factory=dict)

    def to_json(self, digits=30):
        return {
            "k": self.k,
            "tolerance": self.tolerance,
            "wrt": complex_to_json(self.wrt, digits),
            "normalized_wrt": complex_to_json(self.normalized_wrt, digits),
            "radial_limit": complex_to_json(self.radial, digits),
            "prefactored_c0": complex_to_json(self.prefactored_c0, digits),
            "deltas": self.deltas,
            "radial_error_estimate": self.radial_error,
            "wrt_gppv_delta": self.wrt_cross_check,
            "normalization_mode": self.normalization_mode,
            "passed": self.passed,
            "timing_s": self.timing,
        }


def verify_main(ld, pc, k, tolerance=1e-8, budget=10**8, gppv_budget=10**6, radial_kwargs=None, ledger=False):
    """Compare 2(z - 1/z) WRT against the radial limit of Zhat and against the prefactored c0.

    ``z = zeta_2k``.  The gppv cross-check runs when (2k)^|V| <= gppv_budget.
    With ``ledger=True`` the normalization mode is also calibrated and recorded.
    """
    from .hblock import radial_limit, zhat_false_theta

    check_condition(ld, strict=True)
    timing = {}
    t0 = time.perf_counter()
    w = wrt_reduced(ld, k, budget=budget).value
    cross = None
    if (2 * k) ** len(ld.graph.vertices) <= gppv_budget:
        cross = float(abs(wrt_gppv(ld, k, budget=budget).value - w))
    timing["wrt"] = time.perf_counter() - t0
    z = e_frac(Fraction(1, 2 * k))
    norm_wrt = 2 * (z - 1 / z) * w

    t0 = time.perf_counter()
    # the core only matters for its prefactors and, on graphs without V>=3, its finite terms
    top = max((quad(ld.S, a) for a, _ in pc.entries), default=Fraction(0)) + 10
    hb = zhat_false_theta(ld, pc, top if not ld.vge3 else 0)
    rep = radial_limit(hb, k, tolerance=tolerance, **(radial_kwargs or {}))
    timing["radial"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    C = limit_prefactor(ld, k) * c0_closed_form(ld, pc, k)
    timing["c0"] = time.perf_counter() - t0

    mode = None
    if ledger:
        t0 = time.perf_counter()
        mode = cn_ledger(ld, pc, k, box=tuple((lo, 0) for lo, _ in default_box(ld))).normalization_mode
        timing["ledger"] = time.perf_counter() - t0

    L = rep.value
    deltas = {
        "wrt_vs_radial": float(abs(norm_wrt - L)),
        "radial_vs_c0": float(abs(L - C)),
        "wrt_vs_c0": float(abs(norm_wrt - C)),
    }
    passed = all(d < tolerance for d in deltas.values()) and (cross is None or cross < 1e-30)
    return VerdictReport(k, tolerance, w, norm_wrt, L, C, deltas, passed, rep.error, cross, mode, timing)
