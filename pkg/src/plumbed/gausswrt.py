"""WRT invariants at zeta_k = e(1/k) as finite Gauss sums."""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import Infeasible, LevelTooSmall, PoleAtInput, PreconditionViolated, SingularMatrix
from .hp import KahanSum, complex_to_json, e_frac, root_of_unity
from .lattice import coset_reps, det_bareiss, det_rational, inverse, matmul, signature, transpose
from .ratfunc import G_v_root

DEFAULT_BUDGET = 10**8


@dataclass
class WRTResult:
    value: object
    k: int
    method: str
    term_count: int
    prefactor_phase: Fraction

    def to_json(self, digits=30):
        z = complex_to_json(self.value, digits)
        return {
            "k": self.k,
            "method": self.method,
            "re": z["re"],
            "im": z["im"],
            "digits": digits,
            "terms": self.term_count,
            "prefactor_phase": str(self.prefactor_phase),
        }


def _check_level(k):
    if k < 2:
        raise LevelTooSmall(f"level k = {k} < 2")


def _sin_factor(mu, k):
    return root_of_unity(mu, 2 * k) - root_of_unity(-mu, 2 * k)


# -- the full-vertex sum ----------------------------------------------------------


def _gppv_prefactor(ld, k):
    V = len(ld.W)
    sw = sum(ld.W[i][i] + 3 for i in range(V))
    phase = Fraction(V, 8) - Fraction(sw, 4 * k)
    denom = 2 * mpmath.sqrt(2 * k) ** V * _sin_factor(1, k)
    return phase, e_frac(phase) / denom


def _gppv_enumerate(ld, k):
    W = ld.W
    n = len(W)
    deg = [ld.partition.degree[v] for v in ld.graph.vertices]
    mus = [m for m in range(2 * k) if m % k]
    vfac = [{m: _sin_factor(m, k) ** (2 - d) for m in mus} for d in deg]
    phases = [root_of_unity(j, 4 * k) for j in range(4 * k)]
    acc = KahanSum()
    for mu in itertools.product(mus, repeat=n):
        ph = 0
        for i in range(n):
            row = W[i]
            mi = mu[i]
            ph += mi * sum(row[j] * mu[j] for j in range(n))
        term = phases[ph % (4 * k)]
        for i in range(n):
            term *= vfac[i][mu[i]]
        acc.add(term)
    return acc.value


def _gppv_eliminate(ld, k):
    """Same sum by exact variable elimination along the tree.

    The phase mu^T W mu splits into per-vertex terms w_v mu_v^2 and per-edge
    terms 2 mu_a mu_b, so leaves can be summed out into messages indexed by
    the parent's residue mod 2k.
    """
    g = ld.graph
    deg = ld.partition.degree
    mus = [m for m in range(2 * k) if m % k]
    phases = [root_of_unity(j, 4 * k) for j in range(4 * k)]
    root = g.vertices[0]
    order, parent = [], {root: None}
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        for u in g.neighbors(v):
            if u not in parent:
                parent[u] = v
                stack.append(u)
    local = {}
    for v in g.vertices:
        w = g.weights[v]
        d = deg[v]
        local[v] = {m: phases[(w * m * m) % (4 * k)] * _sin_factor(m, k) ** (2 - d) for m in mus}
    messages = {}
    for v in reversed(order):
        own = dict(local[v])
        for u in g.neighbors(v):
            if parent.get(u) == v:
                msg = messages.pop(u)
                for m in mus:
                    own[m] *= msg[m]
        p = parent[v]
        if p is None:
            acc = KahanSum()
            acc.extend(own[m] for m in mus)
            return acc.value
        msg = {}
        for mp in mus:
            acc = KahanSum()
            acc.extend(own[m] * phases[(2 * m * mp) % (4 * k)] for m in mus)
            msg[mp] = acc.value
        messages[v] = msg


def wrt_gppv(ld, k, budget=DEFAULT_BUDGET, strategy="auto"):
    """WRT_k from the sum over all vertices (the oracle).

    ``strategy`` is ``"enumerate"`` (literal loop over tuples), ``"eliminate"``
    (exact tree elimination of the same finite sum) or ``"auto"``.
    """
    _check_level(k)
    n = len(ld.W)
    full = (2 * k) ** n
    if full > budget:
        raise Infeasible(f"(2k)^|V| = {full} exceeds budget {budget}")
    if strategy == "auto":
        strategy = "enumerate" if full <= 20000 else "eliminate"
    if strategy == "enumerate":
        total = _gppv_enumerate(ld, k)
    elif strategy == "eliminate":
        total = _gppv_eliminate(ld, k)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    phase, pre = _gppv_prefactor(ld, k)
    return WRTResult(pre * total, k, "gppv_a12", (2 * k - 2) ** n, phase)


# -- the reduced coset sum ------------------------------------------------------


class _Reduced:
    """Precomputed data for the sum over (Z - kZ)^{V>=2} / 2kS."""

    def __init__(self, ld, k, skip_kz=True):
        self.ld, self.k, self.skip_kz = ld, k, skip_kz
        self.verts = list(ld.vge2)
        Sinv = ld.Sinv
        D = 1
        for r in Sinv:
            for x in r:
                D = D * x.denominator // math.gcd(D, x.denominator)
        self.D = D
        self.N = [[int(x * D) for x in r] for r in Sinv]
        self.mod = 4 * k * D
        self.period = [2 * k * abs(ld.partition.leaf_prod[v]) for v in self.verts]
        self.cache = [dict() for _ in self.verts]
        self.cosets = coset_reps([[2 * k * x for x in r] for r in ld.S_int()])

    def G(self, i, mu, t=0):
        key = (mu % self.period[i], t)
        c = self.cache[i]
        if key not in c:
            c[key] = G_v_root(self.ld, self.verts[i], key[0], self.k, t)
        return c[key]

    def summand(self, mu, t=None):
        k = self.k
        if self.skip_kz and any(m % k == 0 for m in mu):
            return None
        N = self.N
        n = len(mu)
        q = sum(mu[i] * N[i][j] * mu[j] for i in range(n) for j in range(n))
        term = root_of_unity(-q, self.mod)
        for i, m in enumerate(mu):
            term *= self.G(i, m, 0 if t is None else t[i])
        return term

    def partial(self, start, stop, t=None):
        acc = KahanSum()
        count = 0
        for mu in self.cosets.reps(start, stop):
            s = self.summand(mu, t)
            if s is not None:
                acc.add(s)
                count += 1
        return acc.value, count

    def tree_cost(self):
        return sum(self.period) + 4 * self.k**2 * len(self.period)

    def total_tree(self, t=None):
        """The same sum by elimination along the tree spanned by V>=2.

        Off the diagonal S^{-1} is -1 on edges and 0 elsewhere, and each summand
        is periodic in mu_v with period L_v = 2k|M_v|.  Summing over the box
        prod [0, L_v) and rescaling by |det 2kS| / prod L_v gives the coset sum;
        an edge factor e(mu_u mu_v / 2k) only sees residues mod 2k.
        """
        k, ld = self.k, self.ld
        verts = self.verts
        if not verts:
            raise PreconditionViolated("no vertices of degree >= 2")
        pos = {v: i for i, v in enumerate(verts)}
        g = ld.graph
        nbrs = {v: [u for u in g.neighbors(v) if u in pos] for v in verts}
        local, count = {}, 0
        for i, v in enumerate(verts):
            d = ld.Sinv[i][i]
            acc = [mpmath.mpc(0)] * (2 * k)
            for mu in range(self.period[i]):
                if self.skip_kz and mu % k == 0:
                    continue
                ph = root_of_unity(-d.numerator * mu * mu, 4 * k * d.denominator)
                acc[mu % (2 * k)] += ph * self.G(i, mu, 0 if t is None else t[i])
                count += 1
            local[v] = acc
        edge = [root_of_unity(j, 2 * k) for j in range(2 * k)]
        root = verts[0]
        order, parent = [], {root: None}
        stack = [root]
        while stack:
            v = stack.pop()
            order.append(v)
            for u in nbrs[v]:
                if u not in parent:
                    parent[u] = v
                    stack.append(u)
        if len(order) != len(verts):
            raise PreconditionViolated("V>=2 does not span a tree")
        msgs = {}
        for v in reversed(order):
            own = list(local[v])
            for u in nbrs[v]:
                if parent.get(u) == v:
                    own = [a * b for a, b in zip(own, msgs.pop(u))]
            if parent[v] is None:
                box = KahanSum()
                box.extend(own)
                break
            msgs[v] = [mpmath.fsum(own[r] * edge[(r * s) % (2 * k)] for r in range(2 * k)) for s in range(2 * k)]
        ratio = mpmath.mpf(self.cosets.size) / math.prod(self.period)
        return box.value * ratio, count

    def total(self, t=None, parallel=1, strategy="auto"):
        if strategy == "auto":
            strategy = "tree" if self.verts and self.tree_cost() < self.cosets.size else "cosets"
        if strategy == "tree":
            return self.total_tree(t)
        if strategy != "cosets":
            raise ValueError(f"unknown strategy {strategy!r}")
        if parallel > 1 and self.cosets.size > 2000:
            chunks = self.cosets.chunks(parallel * 4)
            with ProcessPoolExecutor(parallel) as ex:
                jobs = [(self.ld, self.k, self.skip_kz, a, b, t, mpmath.mp.dps) for a, b in chunks]
                parts = list(ex.map(_partial_job, jobs))
        else:
            parts = [self.partial(0, None, t)]
        acc = KahanSum()
        for v, _ in parts:
            acc.add(v)
        return acc.value, sum(c for _, c in parts)


def _partial_job(args):
    ld, k, skip_kz, a, b, t, dps = args
    with mpmath.workdps(dps):
        return _Reduced(ld, k, skip_kz).partial(a, b, t)


def reduced_sum(ld, k, t=None, parallel=1, skip_kz=True, strategy="auto"):
    """Sum over mu of e(-mu^T S^{-1} mu / 4k) prod_v G_v(zeta_{2kM_v}^{mu_v} e^{-t_v/2M_v}).

    With ``skip_kz`` only mu with no component in kZ contribute.  ``strategy``
    is ``"cosets"`` (enumerate Z^{V>=2}/2kS), ``"tree"`` or ``"auto"``.
    """
    return _Reduced(ld, k, skip_kz).total(t, parallel, strategy)


def wrt_reduced_prefactor(ld, k):
    n1, n2 = len(ld.v1), len(ld.vge2)
    phi = ld.phi()
    phase = Fraction(n2, 8) - phi / (4 * k) + Fraction(n1, 2)
    denom = 2 * mpmath.sqrt(2 * k) ** n2 * _sin_factor(1, k)
    for i in ld.v1:
        denom *= mpmath.sqrt(abs(ld.graph.weights[i]))
    return phase % 1, e_frac(phase) / denom


def wrt_reduced(ld, k, budget=DEFAULT_BUDGET, parallel=1, strategy="auto"):
    _check_level(k)
    red = _Reduced(ld, k)
    if min(red.cosets.size, red.tree_cost()) > budget:
        raise Infeasible(f"both the coset count {red.cosets.size} and the tree cost exceed budget {budget}")
    total, count = red.total(None, parallel, strategy)
    phase, pre = wrt_reduced_prefactor(ld, k)
    return WRTResult(pre * total, k, "reduced", count, phase)


# -- reciprocity ---------------------------------------------------------------------


def _is_int(x):
    return Fraction(x).denominator == 1


def reciprocity_check(gram, k, h, u):
    """Both sides of the Gauss-sum reciprocity formula.

    The dual sum runs over ``L'/h(L)``; for unimodular ``L`` this is ``L'/h(L')``.

    ``L = Z^n`` with Gram matrix ``gram``; ``h`` is the coordinate matrix of the
    self-adjoint map; ``u`` is given in the same coordinates.
    """
    n = len(gram)
    G = [[Fraction(x) for x in r] for r in gram]
    H = [[Fraction(x) for x in r] for r in h]
    u = [Fraction(x) for x in u]
    detG = det_rational(G)
    if detG == 0:
        raise PreconditionViolated("gram matrix is degenerate")
    if any(not _is_int(x) for r in G for x in r) or G != transpose(G):
        raise PreconditionViolated("gram matrix must be integral and symmetric")
    disc = abs(int(detG))
    if k <= 0 or k % disc:
        raise PreconditionViolated(f"k = {k} is not a positive multiple of |L'/L| = {disc}")
    if any(not _is_int(k * x) for x in u):
        raise PreconditionViolated("u is not in (1/k)L")
    GH = matmul(G, H)
    if GH != transpose(GH):
        raise PreconditionViolated("h is not self-adjoint")
    detH = det_rational(H)
    if detH == 0:
        raise PreconditionViolated("h is not an automorphism")
    Ginv = inverse(G)
    C = matmul(matmul(G, H), Ginv)  # h on L' in the basis G^{-1} e_i
    if any(not _is_int(x) for r in C for x in r):
        raise PreconditionViolated("h(L') is not contained in L'")
    # (k/2) <y, h y> on L' with y = G^{-1} z is (k/2) z^T G^{-1} G H G^{-1} z
    B = matmul(H, Ginv)
    for i in range(n):
        if not _is_int(Fraction(k, 2) * B[i][i] * 1) or any(not _is_int(k * B[i][j]) for j in range(n) if j != i):
            raise PreconditionViolated("(k/2)<y, h(y)> is not integral on L'")
    sigma = signature(GH)

    def phase(x):
        x = Fraction(x)
        return e_frac(x - math.floor(x))

    lhs = KahanSum()
    for x in itertools.product(range(k), repeat=n):
        q = sum(x[i] * GH[i][j] * x[j] for i in range(n) for j in range(n)) / (2 * k)
        lin = sum(x[i] * G[i][j] * u[j] for i in range(n) for j in range(n))
        lhs.add(phase(q + lin))

    # dual sum over L'/h(L): y = G^{-1} z with z taken mod (G H) Z^n
    cos = coset_reps([[int(x) for x in r] for r in GH])
    GHinv = matmul(G, inverse(H))
    rhs = KahanSum()
    for z in cos:
        y = [sum(Ginv[i][j] * z[j] for j in range(n)) + u[i] for i in range(n)]
        val = -Fraction(k, 2) * sum(y[i] * GHinv[i][j] * y[j] for i in range(n) for j in range(n))
        rhs.add(phase(val))
    pre = e_frac(Fraction(sigma, 8) % 1) * mpmath.sqrt(k) ** n / mpmath.sqrt(mpmath.mpf(disc) * abs(mpmath.mpf(detH.numerator) / detH.denominator))
    return lhs.value, pre * rhs.value


def random_reciprocity_instance(rng, max_rank=3, max_k=8):
    """A random instance satisfying all hypotheses (``rng`` is a ``random.Random``)."""
    while True:
        n = rng.randint(1, max_rank)
        G = [[0] * n for _ in range(n)]
        for i in range(n):
            G[i][i] = rng.choice([-3, -2, -1, 1, 2, 3])
            for j in range(i):
                G[i][j] = G[j][i] = rng.randint(-1, 1)
        d = det_bareiss(G)
        if d == 0 or abs(d) > max_k:
            continue
        mults = [m for m in range(abs(d), max_k + 1, abs(d))]
        k = rng.choice(mults)
        B = [[0] * n for _ in range(n)]
        for i in range(n):
            choices = [b for b in range(-4, 5) if b and (k * b) % 2 == 0]
            B[i][i] = rng.choice(choices)
            for j in range(i):
                B[i][j] = B[j][i] = rng.randint(-1, 1)
        if det_bareiss(B) == 0 or abs(det_bareiss(B) * d) > 400:
            continue
        H = matmul(B, G)
        u = [Fraction(rng.randint(-k, k), k) for _ in range(n)]
        return G, k, H, u
