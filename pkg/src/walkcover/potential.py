"""Potential theory of the walk killed on leaving a disc.

Everything here reduces to sparse linear algebra on the sites of
D(0, R).  With Q the substochastic transition matrix of the walk killed
on exit, the Green function G_R(v, u) — expected visits to u from v
before exit — is (I - Q)^{-1}, and standard identities follow:

* P^y(hit 0 before exit)      = G_R(y, 0) / G_R(0, 0)
* visits to 0 given a hit     ~ geometric with mean G_R(0, 0)
* E^y exp(-lam * visits to 0) = 1 - (e^lam - 1) G_R(y,0) / (1 + (e^lam - 1) G_R(0,0))
* E^y (exit time)             = (I - Q)^{-1} 1

Systems up to R = 64 are solved by a direct sparse factorization;
larger ones by conjugate gradients ((I - Q) is symmetric positive
definite).  Both routes agree to 1e-9 where they overlap, which the
test suite pins down.
"""

from __future__ import annotations

import csv
import math

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from scipy.optimize import minimize_scalar

from .errors import DivergentTransformError
from .geometry import Site, disc_sites, open_radius_threshold

DIRECT_RADIUS_LIMIT = 64.0  # sparse LU below, conjugate gradients above

_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class DiscOracle:
    """Exact solver for the walk on D(0, R) killed at its first exit."""

    def __init__(self, r, method: str = "auto", cg_tol: float = 1e-13):
        self.r = r
        self.threshold = open_radius_threshold(r)
        self.sites = disc_sites((0, 0), r)
        self.index = {s: i for i, s in enumerate(self.sites)}
        n = len(self.sites)
        rows, cols = [], []
        for i, (x, y) in enumerate(self.sites):
            for dx, dy in _NEIGHBOURS:
                j = self.index.get((x + dx, y + dy))
                if j is not None:
                    rows.append(i)
                    cols.append(j)
        q = sps.csc_matrix(
            (np.full(len(rows), 0.25), (rows, cols)), shape=(n, n)
        )
        self._a = (sps.identity(n, format="csc") - q).tocsc()
        if method == "auto":
            method = "direct" if float(r) <= DIRECT_RADIUS_LIMIT else "cg"
        if method not in ("direct", "cg"):
            raise ValueError(f"unknown solver method {method!r}")
        self.method = method
        self._cg_tol = cg_tol
        self._lu = spla.factorized(self._a) if method == "direct" else None
        self._columns: dict[Site, np.ndarray] = {}
        self._exit_times: np.ndarray | None = None

    def _solve(self, b: np.ndarray) -> np.ndarray:
        if self._lu is not None:
            return self._lu(b)
        x, info = spla.cg(self._a, b, rtol=self._cg_tol, atol=0.0, maxiter=20000)
        if info != 0:
            raise RuntimeError(f"conjugate gradients failed to converge (info={info})")
        return x

    def green_column(self, u: Site = (0, 0)) -> np.ndarray:
        """G_R(v, u) for every site v of the disc, as an array over self.sites."""
        u = (int(u[0]), int(u[1]))
        col = self._columns.get(u)
        if col is None:
            if u not in self.index:
                raise ValueError(f"{u} is not inside D(0, {self.r})")
            b = np.zeros(len(self.sites))
            b[self.index[u]] = 1.0
            col = self._solve(b)
            self._columns[u] = col
        return col

    def green(self, y: Site, u: Site = (0, 0)) -> float:
        """Expected visits to u (counting time 0) from y before exiting."""
        i = self.index.get((int(y[0]), int(y[1])))
        if i is None:
            return 0.0
        return float(self.green_column(u)[i])

    def hit_prob(self, y: Site, u: Site = (0, 0)) -> float:
        """P^y(visit u before exiting the disc)."""
        i = self.index.get((int(y[0]), int(y[1])))
        if i is None:
            return 0.0
        col = self.green_column(u)
        return float(col[i] / col[self.index[(int(u[0]), int(u[1]))]])

    def expected_exit_time(self, y: Site = (0, 0)) -> float:
        """E^y of the first exit step from the open disc; 0 outside."""
        i = self.index.get((int(y[0]), int(y[1])))
        if i is None:
            return 0.0
        if self._exit_times is None:
            self._exit_times = self._solve(np.ones(len(self.sites)))
        return float(self._exit_times[i])


_oracles: dict[tuple[int, str], DiscOracle] = {}


def disc_oracle(r, method: str = "auto") -> DiscOracle:
    """Shared, cached oracle for D(0, r) (keyed by the exact threshold)."""
    key = (open_radius_threshold(r), method)
    oracle = _oracles.get(key)
    if oracle is None:
        oracle = DiscOracle(r, method=method)
        _oracles[key] = oracle
    return oracle


def exact_green(y: Site, r, u: Site = (0, 0)) -> float:
    return disc_oracle(r).green(y, u)


def exact_hit_prob(y: Site, r) -> float:
    """P^y(visit the origin before leaving D(0, r)), by Green-function ratio."""
    return disc_oracle(r).hit_prob(y, (0, 0))


def hit_prob_first_passage(y: Site, r) -> float:
    """Same probability as `exact_hit_prob`, from the first-passage system
    (absorb at the origin, kill at exit) — an independent route used to
    cross-check the Green ratio."""
    h = hit_before_exit_prob(r, [(0, 0)])
    return h.get((int(y[0]), int(y[1])), 0.0)


def exact_expected_exit_time(r, y: Site = (0, 0)) -> float:
    return disc_oracle(r).expected_exit_time(y)


def hit_before_exit_prob(stop_r, absorb_sites) -> dict[Site, float]:
    """P^v(hit the absorbing set before exiting D(0, stop_r)) for every site v.

    The absorbing sites (which must lie inside the disc) carry value 1;
    the walk is killed (value contribution 0) on leaving the open disc.
    """
    threshold = open_radius_threshold(stop_r)
    absorb = {(int(x), int(y)) for x, y in absorb_sites}
    for s in absorb:
        if s[0] * s[0] + s[1] * s[1] >= threshold:
            raise ValueError(f"absorbing site {s} lies outside D(0, {stop_r})")
    sites = disc_sites((0, 0), stop_r)
    unknowns = [s for s in sites if s not in absorb]
    index = {s: i for i, s in enumerate(unknowns)}
    n = len(unknowns)
    rows, cols, vals = [], [], []
    b = np.zeros(n)
    for i, (x, y) in enumerate(unknowns):
        for dx, dy in _NEIGHBOURS:
            nb = (x + dx, y + dy)
            if nb in absorb:
                b[i] += 0.25
            else:
                j = index.get(nb)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(0.25)
    a = sps.identity(n, format="csc") - sps.csc_matrix((vals, (rows, cols)), shape=(n, n))
    h = spla.spsolve(a, b)
    out = {s: 1.0 for s in absorb}
    out.update({s: float(v) for s, v in zip(unknowns, h)})
    return out


def laplace_visits(lam: float, g_y0: float, g_00: float) -> float:
    """E^y exp(-lam * L) where L counts visits to the origin before exit.

    Parameterized by the two Green values that determine the law of L:
    G(y,0) and G(0,0).  Finite exactly when 1 + (e^lam - 1) G(0,0) > 0;
    outside that region the defining series diverges.
    """
    em1 = math.expm1(lam)
    denom = 1.0 + em1 * g_00
    if denom <= 0.0:
        raise DivergentTransformError(
            f"transform diverges: 1 + (e^lam - 1) G00 = {denom:.6g} <= 0"
        )
    return 1.0 - em1 * g_y0 / denom


def geometric_visit_law(g_y0: float, g_00: float) -> tuple[float, float]:
    """(p, q) of the visit-count law: L = 0 with prob 1-p, else 1 + Geom(q).

    p = G(y,0)/G(0,0) is the probability of reaching the origin at all;
    each visit is followed by another with probability q = 1 - 1/G(0,0).
    So P(L = j) = p q^(j-1) (1-q) for j >= 1.
    """
    if g_00 < 1.0:
        raise ValueError(f"G(0,0) must be >= 1 (it counts the visit at time 0), got {g_00}")
    if not 0.0 <= g_y0 <= g_00:
        raise ValueError("G(y,0) must lie in [0, G(0,0)]")
    return g_y0 / g_00, 1.0 - 1.0 / g_00


def tail_rate(a: float, b: float) -> float:
    """inf over phi > 0 of  a*phi - b*phi/(1+phi)  in closed form: -(sqrt(b)-sqrt(a))^2.

    Valid for b >= a > 0 (otherwise the infimum is the boundary value 0
    and the closed form does not apply)."""
    if not (0.0 < a <= b):
        raise ValueError(f"closed form needs b >= a > 0, got a={a}, b={b}")
    return -((math.sqrt(b) - math.sqrt(a)) ** 2)


def tail_rate_numeric(a: float, b: float) -> float:
    """The same infimum found by direct numeric minimization over phi > 0."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("rates must be positive")
    ub = 10.0 * max(1.0, math.sqrt(b / a))
    res = minimize_scalar(
        lambda phi: a * phi - b * phi / (1.0 + phi),
        bounds=(1e-12, ub),
        method="bounded",
        options={"xatol": 1e-12, "maxiter": 2000},
    )
    return float(min(res.fun, 0.0))


def visit_shortfall_bound(a: float, delta: float, beta: float, gamma: float,
                          alpha: float, r: float) -> float:
    """Polynomial bound r^(-((1-delta) beta sqrt(a) - sqrt(2 alpha))^2 / gamma^2)
    on the chance that a centre's visit count falls far below what its
    excursion count predicts.  Requires (1-delta)^2 a beta^2 > 2 alpha,
    i.e. the shortfall is genuinely below the mean."""
    if min(a, beta, gamma) <= 0.0 or alpha < 0.0 or not 0.0 <= delta < 1.0:
        raise ValueError("need a, beta, gamma > 0, alpha >= 0, 0 <= delta < 1")
    if (1.0 - delta) ** 2 * a * beta * beta <= 2.0 * alpha:
        raise ValueError(
            "precondition violated: (1-delta)^2 a beta^2 must exceed 2 alpha"
        )
    if r <= 1.0:
        raise ValueError("radius must exceed 1")
    exponent = ((1.0 - delta) * beta * math.sqrt(a) - math.sqrt(2.0 * alpha)) ** 2 / gamma**2
    return float(r) ** (-exponent)


def approx_hit_center(dist: float, r: float) -> float:
    """First-order probability ln(r/dist)/ln(r) that a walk started
    `dist` from the centre of D(., r) hits the centre before exiting."""
    if r <= 1.0:
        raise ValueError("disc radius must exceed 1")
    if not 1.0 <= dist <= r:
        raise ValueError(f"need 1 <= dist <= r, got dist={dist}, r={r}")
    return math.log(r / dist) / math.log(r)


def green_origin_values(radii) -> list[float]:
    """G_R(0, 0) for each radius — the (2/pi) ln R growth observable."""
    return [exact_green((0, 0), r) for r in radii]


def export_oracle_csv(r, path) -> None:
    """Write per-site Green values and origin-hit probabilities for D(0, r).

    Columns: y_x, y_y, G (Green value G_r(site, 0)) and hit_prob
    (P^site(T_0 < exit)); sites in lexicographic order.
    """
    oracle = disc_oracle(r)
    col = oracle.green_column((0, 0))
    g00 = col[oracle.index[(0, 0)]]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        fh.write(f"# walkcover-oracle v1 r={r}\n")
        w.writerow(["y_x", "y_y", "G", "hit_prob"])
        for s, gv in zip(oracle.sites, col):
            w.writerow([s[0], s[1], repr(float(gv)), repr(float(gv / g00))])
