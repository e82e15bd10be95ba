"""Homological blocks as q-series, their evaluation and radial limits.

Conventions.  ``Zhat = sign_prefactor * q^prefactor_exponent * core`` with
``prefactor_exponent = -phi/4``, ``phi = sum_v (w_v + 3) + sum_{i in V1} 1/w_i``
and ``sign_prefactor = 2^-|V>=3|``; core coefficients are integers.  (The
leaf signs l_i and the half-character signs are related by a global flip,
which absorbs the factor (-1)^|V1| coming from prod_i (-2 l_i).)
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np

from .errors import Infeasible, LevelTooSmall, NoConvergence, RadiusTooClose
from .hp import complex_to_json, e_frac
from .lattice import ellipsoid_points, inverse, matmul, matvec, quad, submatrix
from .ratfunc import P_vertex, QSeries

DEFAULT_POINT_BUDGET = 10**7

# -- principal values ------------------------------------------------------------


def _laurent_residue(d, l):
    """Coefficient of z^-1 in z^(l-1) (z - 1/z)^(2-d) for d <= 2."""
    p = 2 - d
    total = 0
    for j in range(p + 1):
        # term C(p,j) z^(p-j) (-z^-1)^j  ->  exponent l - 1 + p - 2j
        if l - 1 + p - 2 * j == -1:
            total += math.comb(p, j) * (-1) ** j
    return total


def pv_residue(d, l):
    """Principal value (sum of the contours |z| = 1 +- eps) of z^(l-1)(z - 1/z)^(2-d) dz/2 pi i.

    For d >= 3 and l = d mod 2 the value is sgn(n) P_d(n) with n = (l - d + 2)/2,
    where P_d is the polynomial weight; this agrees with the binomial table for
    n >= -1 and differs from it below.  d = 0 is allowed (one-vertex graph).
    """
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if d <= 2:
        return 2 * _laurent_residue(d, l)
    if (l - d) % 2:
        return 0
    n = (l - d + 2) // 2
    val = P_vertex(n, d)
    return int(val) if n >= 0 else -int(val)


def pv_residue_table(d, l):
    """The binomial form of the table (kept for comparison; wrong for very negative l)."""
    from .ratfunc import binomial_ext

    if d == 1 and l in (1, -1):
        return -2 * l
    if d == 2 and l == 0:
        return 2
    if d >= 3 and (l - d) % 2 == 0:
        s = 1 if l - d + 2 >= 0 else -1
        return s * binomial_ext((l + d) // 2 - 2, (l - d) // 2 + 1)
    return 0


# -- series container -----------------------------------------------------------


@dataclass
class HBSeries:
    prefactor_exponent: Fraction
    core: QSeries
    sign_prefactor: Fraction
    truncation: Fraction
    method: str = ""
    ld: object = field(default=None, repr=False, compare=False)
    pc: object = field(default=None, repr=False, compare=False)

    def to_json(self):
        out = self.core.to_json()
        out.update(
            {
                "prefactor_exponent": f"{self.prefactor_exponent.numerator}/{self.prefactor_exponent.denominator}",
                "sign_prefactor": str(self.sign_prefactor),
                "truncation": str(self.truncation),
                "method": self.method,
            }
        )
        return out

    def full_terms(self):
        """Terms of Zhat itself (exponent shifted, coefficient scaled)."""
        return self.core.shift(self.prefactor_exponent).scale(self.sign_prefactor)


def _prefactors(ld):
    sign = Fraction(1, 2 ** len(ld.vge3))
    return -ld.phi() / 4, sign


def _section(A, free, fixed, fixed_vals):
    """Write x^T A x with x_fixed given as (x_f + c)^T A_ff (x_f + c) + const."""
    Aff = submatrix(A, free, free)
    Afx = submatrix(A, free, fixed)
    xv = [Fraction(x) for x in fixed_vals]
    Axx = submatrix(A, fixed, fixed)
    if not free:
        return Aff, [], quad(Axx, xv) if fixed else Fraction(0)
    b = matvec(Afx, xv) if fixed else [Fraction(0)] * len(free)
    Ainv = inverse(Aff)
    c = matvec(Ainv, b)
    const = (quad(Axx, xv) if fixed else Fraction(0)) - quad(Aff, c)
    return Aff, c, const


def _check_budget(count, budget):
    if count > budget:
        raise Infeasible(f"{count} lattice points exceed budget {budget}")


# -- principal-value construction -------------------------------------------------


def zhat_by_pv(ld, exponent_bound, budget=DEFAULT_POINT_BUDGET):
    """Zhat from the theta-function definition with the residue table (oracle)."""
    g = ld.graph
    verts = list(g.vertices)
    deg = ld.partition.degree
    X = [[-x for x in r] for r in ld.Winv]  # positive definite
    pre_exp, sign = _prefactors(ld)
    E = Fraction(exponent_bound)
    leaf_shift = sum((Fraction(1, 4 * g.weights[i]) for i in ld.v1), Fraction(0))
    finite_choices = {0: (-2, 0, 2), 1: (-1, 1), 2: (0,)}
    fixed = [i for i, v in enumerate(verts) if deg[v] <= 2]
    free = [i for i, v in enumerate(verts) if deg[v] >= 3]
    delta = [deg[verts[i]] % 2 for i in free]
    R = 4 * (E - leaf_shift)  # need l^T X l <= R
    norm = Fraction(1, 2 ** len(verts))
    acc = {}
    count = 0
    for vals in itertools.product(*(finite_choices[deg[verts[i]]] for i in fixed)):
        base = norm
        for i, lv in zip(fixed, vals):
            base *= pv_residue(deg[verts[i]], lv)
        if base == 0:
            continue
        Aff, c, const = _section(X, free, fixed, vals)
        if free:
            center = [(dl + ci) / 2 for dl, ci in zip(delta, c)]
            pts = ellipsoid_points(Aff, center, (R - const) / 4)
        else:
            pts = np.zeros((1 if const <= R else 0, 0), dtype=np.int64)
        count += len(pts)
        _check_budget(count, budget)
        for m in pts:
            l = [0] * len(verts)
            for i, lv in zip(fixed, vals):
                l[i] = lv
            coef = base
            for i, mi, dl in zip(free, m, delta):
                l[i] = 2 * int(mi) + dl
                coef *= pv_residue(deg[verts[i]], l[i])
            if coef == 0:
                continue
            r = quad(X, l) / 4 + leaf_shift
            if r <= E:
                acc[r] = acc.get(r, 0) + coef
    core = QSeries.from_terms(((r, c / sign) for r, c in acc.items()), E)
    for _, c in core.terms:
        assert Fraction(c).denominator == 1, "non-integral core coefficient"
    core = QSeries.from_terms(((r, int(c)) for r, c in core.terms), E)
    return HBSeries(pre_exp, core, sign, E, "by_pv", ld)


# -- false theta form ------------------------------------------------------------


def _has_isolated_vertex(ld):
    return any(d == 0 for d in ld.partition.degree.values())


def false_theta_points(ld, pc, bound, budget=DEFAULT_POINT_BUDGET):
    """Yield (alpha_vec, sign, n_array) with all n in Z^{V>=3} where Q(n+alpha) <= bound (superset)."""
    S = ld.S
    pos3 = ld.vge3_positions()
    pos2 = [i for i in range(len(ld.vge2)) if i not in pos3]
    count = 0
    for alpha, eps in pc.entries:
        fixed_vals = [alpha[i] for i in pos2]
        Aff, c, const = _section(S, pos3, pos2, fixed_vals)
        if pos3:
            center = [alpha[i] + ci for i, ci in zip(pos3, c)]
            pts = ellipsoid_points(Aff, center, Fraction(bound) - const)
        else:
            pts = np.zeros((1 if const <= bound else 0, 0), dtype=np.int64)
        count += len(pts)
        _check_budget(count, budget)
        yield alpha, eps, pts


def _sgnP(ld, n):
    val = Fraction(1)
    for v, nv in zip(ld.vge3, n):
        val *= P_vertex(nv, ld.partition.degree[v])
        if nv < 0:
            val = -val
    return val


def zhat_false_theta(ld, pc, exponent_bound, budget=DEFAULT_POINT_BUDGET):
    """Zhat as a false theta series in Q(n) = n^T S n.

    The one-vertex graph has a degree-0 vertex, outside the range where the
    false theta identity is derived; it falls back to the principal-value form.
    """
    if _has_isolated_vertex(ld):
        hb = zhat_by_pv(ld, exponent_bound, budget)
        hb.method = "false_theta(isolated vertex: pv form)"
        hb.pc = pc
        return hb
    S = ld.S
    pos3 = ld.vge3_positions()
    pre_exp, sign = _prefactors(ld)
    E = Fraction(exponent_bound)
    acc = {}
    for alpha, eps, pts in false_theta_points(ld, pc, E, budget):
        for n in pts:
            x = list(alpha)
            for i, ni in zip(pos3, n):
                x[i] += int(ni)
            r = quad(S, x)
            if r <= E:
                acc[r] = acc.get(r, 0) + eps * _sgnP(ld, [int(t) for t in n])
    for r, c in acc.items():
        assert Fraction(c).denominator == 1, "non-integral core coefficient"
    core = QSeries.from_terms(((r, int(c)) for r, c in acc.items()), E)
    return HBSeries(pre_exp, core, sign, E, "false_theta", ld, pc)


# -- evaluation --------------------------------------------------------------------


def lambda_min_lower(S):
    """A rigorous positive lower bound for the smallest eigenvalue of ``S``.

    Uses det S = prod(lambda) and Gershgorin's bound on the largest eigenvalue.
    """
    from .lattice import det_rational

    m = len(S)
    if m == 0:
        return Fraction(1)
    gersh = max(sum(abs(Fraction(x)) for x in r) for r in S)
    return det_rational(S) / gersh ** (m - 1)


def tail_bound(hb, absq):
    """Upper bound for |sum of core terms with exponent > truncation| at |q| = absq."""
    ld = hb.ld
    if ld is None or _has_isolated_vertex(ld) or not ld.vge3:
        return mpmath.mpf(0)  # finite series: nothing beyond any bound above the top term
    lam = lambda_min_lower(ld.S)
    m = len(ld.vge3)
    degs = [ld.partition.degree[v] for v in ld.vge3]
    n_alpha = 2 ** len(ld.v1)
    absq = mpmath.mpf(absq)
    lamf = mpmath.mpf(lam.numerator) / lam.denominator
    total = mpmath.mpf(0)
    E = int(math.floor(hb.truncation))
    # shell R in (j, j+1]: |n+alpha| <= sqrt((j+1)/lam), so |n_v| <= that + 1
    j = E
    while True:
        r = mpmath.sqrt((j + 1) / lamf) + 1
        count = (2 * r + 1) ** m
        pmax = mpmath.mpf(1)
        for d in degs:
            pmax *= (r + d) ** max(d - 3, 0)
        term = n_alpha * count * pmax * absq**j
        total += term
        if j > E + 10 and term < total * mpmath.mpf(10) ** (-mpmath.mp.dps):
            break
        j += 1
        if j > E + 100000:
            return mpmath.inf
    return total


def zhat_eval(hb, q, tolerance=None):
    """Evaluate Zhat at |q| < 1; returns (value, tail_bound).

    Fractional powers use the principal branch of log q.
    """
    q = mpmath.mpc(q)
    if not abs(q) < 1:
        raise ValueError("|q| must be < 1")
    if q == 0:
        raise ValueError("q = 0 is a branch point of the prefactor")
    logq = mpmath.log(q)
    core = mpmath.mpc(0)
    for r, c in hb.core.terms:
        core += c * mpmath.exp(logq * (mpmath.mpf(r.numerator) / r.denominator))
    pre = hb.sign_prefactor.numerator / mpmath.mpf(hb.sign_prefactor.denominator)
    pre *= mpmath.exp(logq * (mpmath.mpf(hb.prefactor_exponent.numerator) / hb.prefactor_exponent.denominator))
    tail = tail_bound(hb, abs(q)) * abs(pre)
    if tolerance is not None and tail > tolerance:
        raise RadiusTooClose(f"tail bound {mpmath.nstr(tail, 5)} exceeds tolerance {tolerance}")
    return pre * core, tail


# -- radial limit -------------------------------------------------------------------


@dataclass
class RadialReport:
    value: object
    error: float
    k: int
    t_schedule: list
    samples: list
    table: list
    core_limit: object

    def to_json(self, digits=20):
        return {
            "k": self.k,
            "value": complex_to_json(self.value, digits),
            "error_estimate": float(self.error),
            "t_schedule": [float(t) for t in self.t_schedule],
            "samples": [complex_to_json(s, 17) for s in self.samples],
            "extrapolants": [[complex_to_json(x, 17) for x in row] for row in self.table],
        }


class CoreRadial:
    """Fast float64 evaluator of the core at q = e(1/k) e^{-t} for several t.

    Uses Q(n + alpha) = Q(alpha) + (2 S alpha) . n + n^T S n, whose last two
    terms are integers, so the phase e(Q/k) is exact: e(Q(alpha)/k) times an
    integer residue mod k.
    """

    def __init__(self, ld, pc, k):
        self.ld, self.pc, self.k = ld, pc, k
        self.pos3 = ld.vge3_positions()
        S = ld.S
        self.S3 = np.array([[int(S[i][j]) for j in self.pos3] for i in self.pos3], dtype=np.int64)
        self.entries = []
        for alpha, eps in pc.entries:
            Qa = quad(S, alpha)
            lin = [2 * sum(S[i][j] * alpha[j] for j in range(len(alpha))) for i in self.pos3]
            assert all(Fraction(x).denominator == 1 for x in lin)
            self.entries.append((alpha, eps, Qa, np.array([int(x) for x in lin], dtype=np.int64)))
        self.degs = [ld.partition.degree[v] for v in ld.vge3]

    def weights(self, n):
        """sgn(n) P(n) for an int array of shape (N, m)."""
        w = np.ones(len(n))
        for j, d in enumerate(self.degs):
            col = n[:, j].astype(np.float64)
            p = np.ones(len(n))
            for a in range(1, d - 2):
                p *= col + a
            p /= math.factorial(max(d - 3, 0))
            w *= np.where(n[:, j] >= 0, p, -p)
        return w

    def _phase_table(self, Qa):
        """cos/sin of 2 pi (Q(alpha) + r)/k for r mod k, in long double."""
        k = self.k
        cos, sin = [], []
        for r in range(k):
            z = e_frac((Fraction(Qa) + r) / k % 1)
            cos.append(np.longdouble(mpmath.nstr(z.real, 25)))
            sin.append(np.longdouble(mpmath.nstr(z.imag, 25)))
        return np.array(cos, dtype=np.longdouble), np.array(sin, dtype=np.longdouble)

    def evaluate(self, ts, cutoff=42.0, budget=DEFAULT_POINT_BUDGET * 20):
        """Core sums for each t in ``ts`` (returned as mpmath numbers).

        Accumulation is in long double: the result is O(1) while the number
        of unit-size terms grows like t^(-m/2).
        """
        ts = [float(t) for t in ts]
        tmin = min(ts)
        re = [np.longdouble(0)] * len(ts)
        im = [np.longdouble(0)] * len(ts)
        k = self.k
        bound = Fraction(cutoff / tmin).limit_denominator(10**6) + 1
        for (alpha, eps, Qa, lin), (_, _, n) in zip(self.entries, false_theta_points(self.ld, self.pc, bound, budget)):
            if len(n) == 0:
                continue
            if n.shape[1]:
                integer_part = np.einsum("ij,jk,ik->i", n, self.S3, n) + n @ lin
            else:
                integer_part = np.zeros(len(n), dtype=np.int64)
            Q = np.longdouble(Fraction(Qa).numerator) / np.longdouble(Fraction(Qa).denominator) + integer_part.astype(np.longdouble)
            resid = np.mod(integer_part, k)
            cos, sin = self._phase_table(Qa)
            w = (eps * self.weights(n)).astype(np.longdouble)
            wc, ws = w * cos[resid], w * sin[resid]
            for j, t in enumerate(ts):
                mask = Q * t <= cutoff + 5
                damp = np.exp(-np.longdouble(t) * Q[mask])
                re[j] += np.sum(wc[mask] * damp)
                im[j] += np.sum(ws[mask] * damp)
        return [mpmath.mpc(mpmath.mpf(str(a)), mpmath.mpf(str(b))) for a, b in zip(re, im)]


def neville_richardson(ts, vals):
    """Polynomial extrapolation to t = 0; returns the Neville table (rows by order)."""
    ts = list(ts)
    table = [list(vals)]
    for order in range(1, len(ts)):
        prev = table[-1]
        row = []
        for i in range(len(prev) - 1):
            t0, t1 = ts[i], ts[i + order]
            row.append((t1 * prev[i] - t0 * prev[i + 1]) / (t1 - t0))
        table.append(row)
    return table


def default_t0(ld, k, target=1e-14):
    """Starting t for the radial schedule.

    The exponentially small remainder of the small-t expansion behaves like
    exp(-pi^2 / (k^2 t max_v S_vv)); t0 makes it about ``target``.
    """
    if not ld.vge3:
        return 1e-3
    smax = max(float(ld.S[i][i]) for i in ld.vge3_positions())
    return math.pi**2 / (-math.log(target) * k * k * smax)


def radial_limit(hb, k, tolerance=1e-8, t0=None, levels=10, ratio=0.8):
    """Limit of Zhat(q) as q -> e(1/k) radially, by Richardson extrapolation in t.

    Returns a :class:`RadialReport`.  The prefactor q^(-phi/4) tends to
    e(-phi/4k) exactly; only the core needs extrapolation.
    """
    ld, pc = hb.ld, hb.pc
    if k < 2:
        raise LevelTooSmall(f"level k = {k} < 2")
    pre = (hb.sign_prefactor.numerator / mpmath.mpf(hb.sign_prefactor.denominator)) * e_frac(
        (hb.prefactor_exponent / k) % 1
    )
    if ld is None or pc is None or _has_isolated_vertex(ld) or not ld.vge3:
        # finite core: evaluate directly at the root of unity
        core = mpmath.mpc(0)
        for r, c in hb.core.terms:
            core += c * e_frac((r / k) % 1)
        return RadialReport(pre * core, 0.0, k, [], [], [], core)
    t0 = default_t0(ld, k) if t0 is None else t0
    ts = [mpmath.mpf(t0) * mpmath.mpf(ratio) ** j for j in range(levels)]
    vals = CoreRadial(ld, pc, k).evaluate(ts)
    table = neville_richardson(ts, vals)
    last = [row[-1] for row in table]
    core = last[-1]
    err = abs(last[-1] - last[-2]) if len(last) > 1 else float("inf")
    if err > tolerance:
        raise NoConvergence(f"extrapolants differ by {err:.3e} > {tolerance:.1e}")
    return RadialReport(pre * core, float(err), k, ts, list(vals), table, core)
