"""Verification suites shared by the ``verify`` subcommand and the acceptance tests.

Each suite returns a SuiteResult holding named checks with the measured value,
the threshold and the comparison used.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .diffeo import Diffeo, conjugate_apply
from .errors import ConfigurationError, UnsupportedOrder
from .expmap import exp_flow, exp_id, log_map, path_length
from .geodesic import (GeodesicState, ad_transpose, christoffel_B, covariant_derivative,
                       diagnostics, euler_rhs, integrate_euler, integrate_lagrangian, spray_S)
from .homogeneous import (Constraint, constrained_euler_rhs, constrained_invert,
                          integrate_constrained, project_to_fixed, verify_equivariance)
from .multiplier import (ch, clm, frac, hilbert, hs, lambda_2s, order_bound_check,
                         symbol_condition_check, wp, apply)
from .multisymbol import MultiSymbolTable, apply_P_n, p_n_closed_array, p_n_recursive_array
from .spectral import (GridSpec, PeriodicField, differentiate, l2_inner, product,
                       random_field, sobolev_norm)


@dataclass
class Check:
    label: str
    value: float
    threshold: float
    mode: str = "<="  # value <= threshold, or ">" for negative controls

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        return self.value <= self.threshold if self.mode == "<=" else self.value > self.threshold

    def to_dict(self):
        return {"label": self.label, "value": float(self.value), "threshold": self.threshold,
                "mode": self.mode, "pass": self.passed}


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, label, value, threshold, mode="<="):
        self.checks.append(Check(label, float(value), threshold, mode))

    def failing(self):
        return [c.label for c in self.checks if not c.passed]

    def to_dict(self):
        return {"suite": self.name, "pass": self.passed, "seconds": round(self.seconds, 3),
                "checks": [c.to_dict() for c in self.checks], "notes": list(self.notes)}


def _norm(u: PeriodicField) -> float:
    return float(np.sqrt(max(l2_inner(u, u), 0.0)))


def _maxabs(u: PeriodicField) -> float:
    return float(np.max(np.abs(u.half)))


# ---------------------------------------------------------------------------
# 1. closed form vs recursion

MULTI_SYMBOLS = {"k^2": hs, "|k|": clm, "1+k^2": ch,
                 "(1+k^2)^(3/4)": lambda: lambda_2s(0.75), "|k|(k^2-1)": wp}


def mode_tuples(n: int, bound: int = 8) -> list:
    """Mode arrays (m_0..m_n) with |m_j| <= bound.

    Full grid for n <= 3. For larger n the directions are taken as sorted
    multisets: p_n is symmetric in (m_1..m_n), which is checked separately.
    """
    vals = np.arange(-bound, bound + 1)
    if n <= 3:
        grids = np.meshgrid(*([vals] * (n + 1)), indexing="ij")
        return [g.ravel() for g in grids]
    dirs = np.array(list(itertools.combinations_with_replacement(vals, n)), dtype=np.int64)
    m0 = np.repeat(vals, len(dirs))
    rest = np.tile(dirs, (len(vals), 1))
    return [m0] + [rest[:, j] for j in range(n)]


def compare_multisymbol(t: MultiSymbolTable, n: int, modes, rel_tol=1e-12, abs_tol=1e-9):
    rec = p_n_recursive_array(t, n, modes)
    clo = p_n_closed_array(t, n, modes, extended=True)
    err = np.abs(rec - clo)
    ok = (err <= rel_tol * np.abs(clo)) | (err <= abs_tol)
    big = np.abs(clo) > abs_tol / rel_tol
    worst_rel = float(np.max(err[big] / np.abs(clo[big]))) if big.any() else 0.0
    return bool(ok.all()), worst_rel, float(np.max(err[~big])) if (~big).any() else 0.0


def suite_multi_symbol(seed: int = 0, n_max: int = 5, bound: int = 8) -> SuiteResult:
    res = SuiteResult("multi-symbol")
    fails = 0
    worst_rel = worst_abs = 0.0
    for name, factory in MULTI_SYMBOLS.items():
        t = MultiSymbolTable(factory())
        for n in range(1, n_max + 1):
            ok, rel, ab = compare_multisymbol(t, n, mode_tuples(n, bound))
            fails += not ok
            worst_rel, worst_abs = max(worst_rel, rel), max(worst_abs, ab)
    res.add("failing (symbol, n) blocks", fails, 0)
    res.add("worst relative error (|p| > 1e3)", worst_rel, 1e-12)
    res.add("worst absolute error (|p| <= 1e3)", worst_abs, 1e-9)
    return res


# ---------------------------------------------------------------------------
# 2. derivative of phi -> A_phi


def derivative_error(A, v: PeriodicField, d: PeriodicField, eps: float = 1e-5) -> float:
    grid = v.grid
    plus = conjugate_apply(A, Diffeo(d * eps), v)
    minus = conjugate_apply(A, Diffeo(d * (-eps)), v)
    fd = (plus - minus) * (1.0 / (2.0 * eps))
    exact = apply_P_n(MultiSymbolTable(A), 1, [v, d])
    if grid != exact.grid:
        raise ConfigurationError("grid mismatch")
    return _norm(fd - exact) / _norm(exact)


def suite_derivative(seed: int = 0, n_points: int = 64, draws: int = 5) -> SuiteResult:
    res = SuiteResult("derivative")
    rng = np.random.default_rng(seed)
    grid = GridSpec(n_points)
    band = grid.kmax // 2
    for A in (ch(), lambda_2s(0.75), clm()):
        worst = 0.0
        for _ in range(draws):
            v = random_field(grid, rng, band, decay=2.0)
            d = random_field(grid, rng, band, decay=2.0, amplitude=0.2)
            worst = max(worst, derivative_error(A, v, d))
        res.add(f"{A.name}: FD vs P_1 relative error", worst, 1e-6)
    return res


# ---------------------------------------------------------------------------
# 3./4. CH reference run and conservation

CH_REFERENCE = dict(n_points=128, T=1.0, dt=1e-3)


def ch_initial(grid: GridSpec) -> PeriodicField:
    return PeriodicField.trig(grid, cos={1: 0.2}, sin={2: 0.1})


_CH_CACHE = {}


def ch_reference_runs(cadence: int = 50):
    key = cadence
    if key not in _CH_CACHE:
        grid = GridSpec(CH_REFERENCE["n_points"])
        u0 = ch_initial(grid)
        lag = integrate_lagrangian(ch(), GeodesicState(Diffeo.identity(grid), u0),
                                   CH_REFERENCE["T"], CH_REFERENCE["dt"], cadence=cadence)
        eul = integrate_euler(ch(), u0, CH_REFERENCE["T"], CH_REFERENCE["dt"], cadence=cadence)
        _CH_CACHE[key] = (lag, eul)
    return _CH_CACHE[key]


def suite_lagrangian_eulerian(seed: int = 0) -> SuiteResult:
    res = SuiteResult("lagrangian-eulerian")
    lag, eul = ch_reference_runs()
    res.add("lagrangian run completed", 0.0 if lag.completed else 1.0, 0.0)
    u_lag = lag.last.eulerian_velocity()
    res.add("||v o phi^-1 - u_euler||_L2 at t=1", _norm(u_lag - eul.last.u), 1e-4)
    return res


def conservation_drifts(A, traj):
    d0 = diagnostics(A, traj.states[0])
    e_drift = noether = 0.0
    for s in traj.states[1:]:
        d = diagnostics(A, s, d0.noether_field)
        e_drift = max(e_drift, abs(d.energy - d0.energy) / abs(d0.energy))
        noether = max(noether, d.noether_drift)
    return e_drift, noether


def mu_drift(traj) -> float:
    m0 = traj.states[0].m.mean
    return max(abs(s.m.mean - m0) for s in traj.states)


def suite_conservation(seed: int = 0) -> SuiteResult:
    res = SuiteResult("conservation")
    lag, _ = ch_reference_runs()
    e_drift, noether = conservation_drifts(ch(), lag)
    res.add("ch: energy relative drift", e_drift, 1e-6)
    res.add("ch: noether sup-drift", noether, 1e-5)
    grid = GridSpec(128)
    u0 = PeriodicField.trig(grid, cos={1: 0.2}, sin={2: 0.1}, mean=0.3)
    for r in (1.0, 2.0):
        traj = integrate_euler(frac(r), u0, 1.0, 1e-3, cadence=50)
        res.add(f"frac(r={r:g}): mu drift", mu_drift(traj), 1e-10)
    return res


# ---------------------------------------------------------------------------
# 5. specialized-equation residuals


def hs_residual(u, u_t):
    D = differentiate
    return D(u_t, 2) + 2.0 * product(D(u), D(u, 2)) + product(u, D(u, 3))


def clm_residual(u, u_t):
    H, D = hilbert(), differentiate
    return apply(H, D(u_t)) + product(u, apply(H, D(u, 2))) + 2.0 * product(D(u), apply(H, D(u)))


def mu_hs_residual(u, u_t):
    D, mu = differentiate, u.mean
    return D(u_t, 2) + product(u, D(u, 3)) + 2.0 * product(D(u), D(u, 2)) - 2.0 * mu * D(u)


def mu_clm_residual(u, u_t):
    H, D, mu = hilbert(), differentiate, u.mean
    return (apply(H, D(u_t)) + product(u, apply(H, D(u, 2))) + 2.0 * mu * D(u)
            + 2.0 * product(D(u), apply(H, D(u))))


def suite_residuals(seed: int = 0, n_points: int = 128, draws: int = 3) -> SuiteResult:
    res = SuiteResult("residuals")
    rng = np.random.default_rng(seed)
    grid = GridSpec(n_points)
    band = n_points // 6
    c = Constraint.fix1()
    worst = {"HS": 0.0, "CLM": 0.0, "mu-HS": 0.0, "mu-CLM": 0.0}
    for _ in range(draws):
        u = project_to_fixed(random_field(grid, rng, band, decay=1.5), c)
        worst["HS"] = max(worst["HS"], _maxabs(hs_residual(u, constrained_euler_rhs(hs(), u, c))))
        worst["CLM"] = max(worst["CLM"],
                           _maxabs(clm_residual(u, constrained_euler_rhs(clm(), u, c))))
        v = random_field(grid, rng, band, decay=1.5)
        worst["mu-HS"] = max(worst["mu-HS"], _maxabs(mu_hs_residual(v, euler_rhs(frac(2), v))))
        worst["mu-CLM"] = max(worst["mu-CLM"], _maxabs(mu_clm_residual(v, euler_rhs(frac(1), v))))
    for name, val in worst.items():
        res.add(f"{name} residual", val, 1e-8)
    return res


# ---------------------------------------------------------------------------
# 6. structure identities


def metric_compatibility_error(A, u0: PeriodicField, rng, t0: float = 0.25, h: float = 1e-3):
    """|d/dt<xi,eta> - <Dxi/Dt,eta> - <xi,Deta/Dt>| / scale along an Euler geodesic."""
    grid = u0.grid
    band = grid.dealias_cutoff // 2
    xi0, xi1 = (random_field(grid, rng, band, decay=2.0) for _ in range(2))
    eta0, eta1 = (random_field(grid, rng, band, decay=2.0) for _ in range(2))

    def xi(t):
        return xi0 + xi1 * t

    def eta(t):
        return eta0 * np.cos(t) + eta1 * np.sin(t)

    def inner(a, b):
        return l2_inner(apply(A, a), b)

    traj = integrate_euler(A, u0, t0, h / 4.0, cadence=1)
    u = traj.last.u
    t = traj.final_time
    lhs = (inner(xi(t + h), eta(t + h)) - inner(xi(t - h), eta(t - h))) / (2.0 * h)
    d_xi = covariant_derivative(A, u, xi(t), xi1)
    d_eta = covariant_derivative(A, u, eta(t), eta0 * (-np.sin(t)) + eta1 * np.cos(t))
    rhs = inner(d_xi, eta(t)) + inner(xi(t), d_eta)
    scale = max(abs(lhs), np.sqrt(abs(inner(d_xi, d_xi) * inner(eta(t), eta(t)))), 1e-300)
    return abs(lhs - rhs) / scale


def suite_structure(seed: int = 0, n_points: int = 64, draws: int = 20) -> SuiteResult:
    res = SuiteResult("structure")
    rng = np.random.default_rng(seed)
    grid = GridSpec(n_points)
    A = ch()
    e_b = e_ad = e_s = 0.0
    for _ in range(draws):
        u = random_field(grid, rng, grid.dealias_cutoff // 2, decay=1.5)
        rhs = euler_rhs(A, u)
        scale = max(_maxabs(rhs), 1.0)
        e_b = max(e_b, _maxabs(rhs + christoffel_B(A, u, u)) / scale)
        e_ad = max(e_ad, _maxabs(rhs + ad_transpose(A, u, u)) / scale)
        s_alt = product(u, differentiate(u), dealiased=True) - christoffel_B(A, u, u)
        e_s = max(e_s, _maxabs(spray_S(A, u) - s_alt) / scale)
    res.add("euler_rhs + B(u,u)", e_b, 1e-11)
    res.add("euler_rhs + ad^T_u u", e_ad, 1e-11)
    res.add("S(u) - (u u_x - B(u,u))", e_s, 1e-11)
    u0 = PeriodicField.trig(grid, cos={1: 0.2}, sin={2: 0.1})
    res.add("covariant derivative metric compatibility",
            metric_compatibility_error(A, u0, rng), 1e-6)
    return res


# ---------------------------------------------------------------------------
# 7. equivariance


def suite_equivariance(seed: int = 0, n_points: int = 64, draws: int = 10) -> SuiteResult:
    res = SuiteResult("equivariance")
    rng = np.random.default_rng(seed)
    grid = GridSpec(n_points)
    ws = {"1": PeriodicField.constant(grid, 1.0), "cos": PeriodicField.trig(grid, cos={1: 1.0}),
          "sin": PeriodicField.trig(grid, sin={1: 1.0})}
    us = [random_field(grid, rng, grid.kmax // 2, decay=1.0) for _ in range(draws)]
    for label, w in ws.items():
        res.add(f"wp, w={label}", max(verify_equivariance(wp(), w, u) for u in us), 1e-10)
    controls = [PeriodicField.trig(grid, sin={2: 1.0})] + us
    res.add("ch, w=cos (negative control, min)",
            min(verify_equivariance(ch(), ws["cos"], u) for u in controls), 0.1, ">")
    return res


# ---------------------------------------------------------------------------
# 8. exp / log

EXP_GRID = 32
EXP_RADIUS = 0.05


def small_field(grid, rng, s, radius, band=6):
    v = random_field(grid, rng, band, decay=2.0)
    return v * (radius * rng.uniform(0.3, 1.0) / sobolev_norm(v, s))


def geodesic_path(A, v0: PeriodicField, samples: int = 21, dt: float = 0.05):
    steps = int(round(1.0 / dt))
    cadence = steps // (samples - 1)
    traj = exp_flow(A, v0, 1.0, dt, cadence=cadence)
    return [s.phi for s in traj.states], [s.v for s in traj.states]


def perturbed_path(A, va, vb, delta, samples: int = 11):
    t = np.linspace(0.0, 1.0, samples)
    phis = [exp_id(A, va + (vb - va) * ti + delta * np.sin(np.pi * ti)) for ti in t]
    disp = np.stack([p.displacement.half for p in phis])
    vel = np.gradient(disp, t, axis=0, edge_order=2)
    grid = va.grid
    return phis, [PeriodicField(grid, row) for row in vel]


def suite_expmap(seed: int = 0, paths: int = 20) -> SuiteResult:
    res = SuiteResult("expmap")
    rng = np.random.default_rng(seed)
    grid = GridSpec(EXP_GRID)
    rt = sc = pl = 0.0
    for s in (0.5, 1.0):
        A = lambda_2s(s)
        for _ in range(2):
            v = small_field(grid, rng, s, EXP_RADIUS)
            rt = max(rt, sobolev_norm(log_map(A, exp_id(A, v)) - v, s))
        v = small_field(grid, rng, s, EXP_RADIUS)
        phis, vels = geodesic_path(A, v)
        pl = max(pl, abs(path_length(A, phis, vels) - sobolev_norm(v, s)))
    res.add("exp/log roundtrip (H^s)", rt, 1e-8)
    A = lambda_2s(1.0)
    dt = 0.05
    for _ in range(3):
        v = small_field(grid, rng, 1.0, EXP_RADIUS)
        for sigma in (0.25, 0.5, 2.0):
            lhs = exp_id(A, v * sigma, dt)
            rhs = exp_flow(A, v, sigma, sigma * dt).last.phi
            sc = max(sc, lhs.sup_distance(rhs))
    res.add("scaling identity (sup)", sc, 1e-8)
    res.add("geodesic path length - rho", pl, 1e-6)
    worst = np.inf
    for _ in range(paths):
        va = small_field(grid, rng, 1.0, EXP_RADIUS)
        vb = small_field(grid, rng, 1.0, EXP_RADIUS)
        delta = small_field(grid, rng, 1.0, 0.02)
        phis, vels = perturbed_path(A, va, vb, delta)
        gap = path_length(A, phis, vels) - abs(sobolev_norm(vb, 1.0) - sobolev_norm(va, 1.0))
        worst = min(worst, gap)
    res.add("path length inequality slack (min of L - |rho_b - rho_a|)", worst, -1e-6, ">")
    return res


# ---------------------------------------------------------------------------
# 9. symbol checker


def suite_symbols(seed: int = 0, n_max: int = 4, xi_max: float = 1e3) -> SuiteResult:
    res = SuiteResult("symbols")
    for P in (lambda_2s(0.5), lambda_2s(1.0), lambda_2s(1.5), hs(), clm(), wp()):
        rep = symbol_condition_check(P, n_max=n_max, xi_max=xi_max)
        label = P.name + (f"(s={dict(P.params)['s']:g})" if P.params else "")
        res.add(f"{label}: symbol condition failures", sum(not ok for *_, ok in rep.per_n), 0)
        _, bound_ok = order_bound_check(P, 4096)
        res.add(f"{label}: order bound failures", 0 if bound_ok else 1, 0)
    try:
        symbol_condition_check(lambda_2s(0.25))
        refused = 0
    except UnsupportedOrder:
        refused = 1
    res.add("refuses r < 1", refused, 0, ">")
    _, ok = order_bound_check(hs().with_order(1.0), 4096)
    res.add("hs declared r=1: order bound fails (negative control)", 0 if ok else 1, 0, ">")
    return res


# ---------------------------------------------------------------------------
# 10. homogeneous constraints


def inverse_errors(A, c: Constraint, rng, grid: GridSpec, draws: int = 5):
    left = right = 0.0
    kern = list(c.kernel_wavenumbers)
    for _ in range(draws):
        u = project_to_fixed(random_field(grid, rng, grid.kmax // 2, decay=1.5), c)
        right = max(right, _maxabs(constrained_invert(A, apply(A, u), c) - u))
        m = random_field(grid, rng, grid.kmax // 2, decay=1.5)
        half = m.half.copy()
        half[kern] = 0.0
        m = PeriodicField(grid, half)
        back = apply(A, constrained_invert(A, m, c)).half - m.half
        back[kern] = 0.0
        left = max(left, float(np.max(np.abs(back))))
    return left, right


def suite_homogeneous(seed: int = 0, n_points: int = 64, T: float = 0.5,
                      dt: float = 1e-3) -> SuiteResult:
    res = SuiteResult("homogeneous")
    rng = np.random.default_rng(seed)
    grid = GridSpec(n_points)
    cases = [(hs(), Constraint.fix1()), (clm(), Constraint.fix1()), (wp(), Constraint.fix3())]
    for A, c in cases:
        left, right = inverse_errors(A, c, rng, grid)
        res.add(f"{A.name}/{c.kind}: A(A^-1 m) - m", left, 1e-11)
        res.add(f"{A.name}/{c.kind}: A^-1(A u) - u", right, 1e-11)
    runs = [(hs(), Constraint.fix1(), PeriodicField.trig(grid, sin={1: 0.2}, cos={2: 0.05})),
            (wp(), Constraint.fix3(), PeriodicField.trig(grid, cos={2: 0.03}, sin={3: 0.02}))]
    for A, c, raw in runs:
        u0 = project_to_fixed(raw, c)
        traj = integrate_constrained(A, c, u0, T, dt, cadence=50)
        res.add(f"{A.name}/{c.kind}: run completed", 0.0 if traj.completed else 1.0, 0.0)
        res.add(f"{A.name}/{c.kind}: constraint drift", traj.constraint_drift, 1e-9)
        e_drift, _ = conservation_drifts(A, traj)
        res.add(f"{A.name}/{c.kind}: energy relative drift", e_drift, 1e-6)
    return res


SUITES = {
    "multi-symbol": suite_multi_symbol,
    "derivative": suite_derivative,
    "lagrangian-eulerian": suite_lagrangian_eulerian,
    "conservation": suite_conservation,
    "residuals": suite_residuals,
    "structure": suite_structure,
    "equivariance": suite_equivariance,
    "expmap": suite_expmap,
    "symbols": suite_symbols,
    "homogeneous": suite_homogeneous,
}


def run_suite(name: str, seed: int = 0, **kwargs) -> SuiteResult:
    if name not in SUITES:
        raise ConfigurationError(f"unknown suite {name!r}; known: {sorted(SUITES)} or 'all'")
    start = time.perf_counter()
    result = SUITES[name](seed=seed, **kwargs)
    result.seconds = time.perf_counter() - start
    return result


def run_suites(selector: str, seed: int = 0) -> list:
    names = list(SUITES) if selector == "all" else [selector]
    if selector != "all" and selector not in SUITES:
        raise ConfigurationError(f"unknown suite {selector!r}; known: {sorted(SUITES)} or 'all'")
    return [run_suite(n, seed) for n in names]
