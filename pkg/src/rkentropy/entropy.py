"""Discrete entropy functionals and dissipation diagnostics.

Two zeroth-order families (cell sums of h(u)) and one first-order family
(cell sum of the squared gradient of f(u)) are provided, together with:

* production:     the instantaneous dissipation rate -dH/dt along the
                  semi-discrete flow,
* i0 / i1:        the condition integrals whose positivity certifies that
                  the entropy gap G(tau) = H[u] - H[v(tau)] is concave at
                  tau = 0 (G''(0) = -i0, resp. -i1, exactly at the
                  spatially discrete level),
* profile_g:      a tau sweep of G with discrete second derivative and
                  the normalized quotient Q,
* decay-rate fitting for the exponential large-time regime.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .operators import DomainError, Grid1D, PorousMedium, Problem, StateField, diff1
from .stepping import NewtonConfig, StepError, Trajectory, _backward_flat
from .tableau import Scheme


class PowerEntropy:
    """h(u) = u^(alpha+1) / (alpha (alpha+1)) for alpha > 0.

    At alpha = 0 the family degenerates to h(u) = u (log u - 1), which
    requires strictly positive states.  h''(u) = u^(alpha - 1) > 0 on the
    positive axis for every alpha >= 0.
    """

    kind = "zeroth"

    def __init__(self, alpha: float):
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        self.alpha = float(alpha)

    def h(self, u):
        if self.alpha == 0.0:
            return u * (np.log(u) - 1.0)
        a = self.alpha
        return u ** (a + 1.0) / (a * (a + 1.0))

    def hp(self, u):
        if self.alpha == 0.0:
            return np.log(u)
        return u**self.alpha / self.alpha

    def hpp(self, u):
        return u ** (self.alpha - 1.0)

    @property
    def needs_positive(self) -> bool:
        return self.alpha == 0.0


class LogEntropySum:
    """Species-summed logarithmic entropy sum_j u_j (log u_j - 1)."""

    kind = "zeroth"
    needs_positive = True

    def h(self, u):
        return u * (np.log(u) - 1.0)

    def hp(self, u):
        return np.log(u)

    def hpp(self, u):
        return 1.0 / u


class ExperimentPower:
    """Plain power sum H_d[u] = sum_i u_i^alpha dx (no normalization)."""

    kind = "zeroth"
    needs_positive = False

    def __init__(self, alpha: float):
        self.alpha = float(alpha)

    def h(self, u):
        return u**self.alpha

    def hp(self, u):
        return self.alpha * u ** (self.alpha - 1.0)

    def hpp(self, u):
        return self.alpha * (self.alpha - 1.0) * u ** (self.alpha - 2.0)


class FirstOrder:
    """Gradient functional with f(u) = u^(alpha/2), e.g. Fisher information.

    Single species, strictly positive states only.
    """

    kind = "first"
    needs_positive = True

    def __init__(self, alpha: float):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)

    def f(self, u):
        return u ** (self.alpha / 2.0)

    def fp(self, u):
        return (self.alpha / 2.0) * u ** (self.alpha / 2.0 - 1.0)

    def fpp(self, u):
        e = self.alpha / 2.0
        return e * (e - 1.0) * u ** (e - 2.0)


def _check_positive(e, u: StateField):
    if getattr(e, "needs_positive", False):
        bad = np.flatnonzero(u.flat <= 0.0)
        if bad.size:
            raise DomainError(
                f"entropy requires strictly positive values; flat cell "
                f"{int(bad[0])} has u={u.flat[bad[0]]:.6g}"
            )


def evaluate(e, u: StateField, grid: Grid1D) -> float:
    """Discrete entropy of the state (species-summed cell sum)."""
    _check_positive(e, u)
    if e.kind == "first":
        if u.species != 1:
            raise ValueError("first-order entropies are single-species")
        grad = diff1(e.f(u.values[0]), grid.dx)
        return float(np.sum(grad**2) * grid.dx)
    return float(np.sum(e.h(u.values)) * grid.dx)


def production(e, problem: Problem, u: StateField) -> float:
    """Dissipation rate -dH/dt = -G'(0) along du/dt = -A[u].

    Zeroth order: sum_i h'(u_i) A[u]_i dx.  First order: the exact chain
    rule for the discrete gradient functional, 2 sum_i (D1 f(u))_i *
    (D1(f'(u) A[u]))_i dx, which is nonnegative in dissipating regimes.
    """
    _check_positive(e, u)
    au = problem.apply(u).values
    dx = problem.grid.dx
    if e.kind == "first":
        uu = u.values[0]
        return float(
            2.0 * np.sum(diff1(e.f(uu), dx) * diff1(e.fp(uu) * au[0], dx)) * dx
        )
    return float(np.sum(e.hp(u.values) * au) * dx)


def i0(e, problem: Problem, u: StateField, c_rk: float) -> float:
    """Condition integral for zeroth-order entropies:

        sum_i [ c_rk h'(u_i) (DA[u](A[u]))_i + h''(u_i) (A[u]_i)^2 ] dx

    (species-summed; the listed entropies all have diagonal Hessians).
    Equals -G''(0) exactly at the spatially discrete level.
    """
    if e.kind != "zeroth":
        raise ValueError("i0 takes a zeroth-order entropy")
    _check_positive(e, u)
    au_field = problem.apply(u)
    daa = problem.deriv_apply(u, au_field).values
    au = au_field.values
    dx = problem.grid.dx
    return float(np.sum(c_rk * e.hp(u.values) * daa + e.hpp(u.values) * au**2) * dx)


def i1(e, problem: Problem, u: StateField, c_rk: float) -> float:
    """Condition integral for first-order entropies, -G''(0) exactly:

        2 sum_i [ (D1(f'(u) A[u]))_i^2
                  + (D1 f(u))_i (D1(f''(u) A[u]^2 + c_rk f'(u) DA[u](A[u])))_i ] dx

    The second term is the gradient form of the Laplacian terms in the
    continuous condition integral; with periodic central differences the
    summation by parts that links the two forms is exact, so this is the
    literal second tau-derivative of the discrete gradient functional.
    """
    if e.kind != "first":
        raise ValueError("i1 takes a first-order entropy")
    if u.species != 1:
        raise ValueError("first-order entropies are single-species")
    _check_positive(e, u)
    dx = problem.grid.dx
    uu = u.values[0]
    au_field = problem.apply(u)
    au = au_field.values[0]
    daa = problem.deriv_apply(u, au_field).values[0]
    square = diff1(e.fp(uu) * au, dx) ** 2
    cross = diff1(e.f(uu), dx) * diff1(e.fpp(uu) * au**2 + c_rk * e.fp(uu) * daa, dx)
    return float(2.0 * np.sum(square + cross) * dx)


@dataclass
class GProfile:
    """Backward-solve sweep of the entropy gap G(tau) = H[u] - H[v(tau)].

    ``d2g`` holds central second differences on the interior tau nodes
    (NaN at the endpoints); ``q`` is d2g normalized by the porous-medium
    gradient norm (NaN where undefined).  When a backward solve fails the
    profile is truncated: entries from ``failed_index`` on are NaN.
    """

    taus: np.ndarray
    g: np.ndarray
    d2g: np.ndarray
    q: np.ndarray
    base_time: float = 0.0
    failed_index: int | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("tau,G,d2G,Q\n")
        for t, g, d, q in zip(self.taus, self.g, self.d2g, self.q):
            buf.write(f"{float(t)!r},{float(g)!r},{float(d)!r},{float(q)!r}\n")
        return buf.getvalue()


def q_denominator(e, problem: Problem, u: StateField, variant: str = "standard") -> float:
    """Porous-medium normalization || u^p (D1 u)^4 ||_L1 for the quotient Q.

    ``variant`` selects the exponent p: "standard" uses alpha + 2 beta - 2,
    "gradient_estimate" uses 2 beta + alpha - 5 (the exponent appearing in
    the lower bound the quotient is meant to track).  Returns NaN for
    problems without a power nonlinearity.
    """
    if not isinstance(problem, PorousMedium) or not hasattr(e, "alpha"):
        return float("nan")
    if variant == "standard":
        p = e.alpha + 2.0 * problem.beta - 2.0
    elif variant == "gradient_estimate":
        p = 2.0 * problem.beta + e.alpha - 5.0
    else:
        raise ValueError(f"unknown quotient variant {variant!r}")
    uu = u.values[0]
    dx = problem.grid.dx
    return float(np.sum(uu**p * diff1(uu, dx) ** 4) * dx)


def profile_g(e, problem: Problem, scheme: Scheme, u: StateField, tau_max: float,
              m: int, cfg: NewtonConfig | None = None, base_time: float = 0.0,
              q_variant: str = "standard") -> GProfile:
    """Sweep tau_j = j * tau_max / m, j = 0..m, backward-solving at each.

    g[0] = 0 exactly (v(0) = u).  Each solve continues from the previous
    tau node's solution: the backward problem can develop spurious Newton
    roots away from the physical branch at larger tau, and continuation
    keeps the iteration inside the correct basin.  A failed backward solve
    truncates the sweep; everything computed so far is kept.
    """
    if not tau_max > 0:
        raise ValueError("tau_max must be positive")
    if m < 3:
        raise ValueError("need at least m = 3 sweep intervals")
    cfg = cfg or NewtonConfig()
    problem._check_state(u)
    taus = np.linspace(0.0, tau_max, m + 1)
    g = np.full(m + 1, np.nan)
    g[0] = 0.0
    h_u = evaluate(e, u, problem.grid)
    failed: int | None = None
    y_prev = None
    for j in range(1, m + 1):
        try:
            v, _, y_prev = _backward_flat(problem, scheme, u.flat, taus[j],
                                          cfg, y_init=y_prev)
        except StepError:
            failed = j
            break
        g[j] = h_u - evaluate(e, StateField.from_flat(v, problem.species),
                              problem.grid)
    h = taus[1] - taus[0]
    d2g = np.full(m + 1, np.nan)
    last = (failed if failed is not None else m + 1) - 1
    for j in range(1, last):
        d2g[j] = (g[j + 1] - 2.0 * g[j] + g[j - 1]) / h**2
    den = q_denominator(e, problem, u, q_variant)
    q = d2g / den if np.isfinite(den) and den != 0.0 else np.full(m + 1, np.nan)
    return GProfile(taus=taus, g=g, d2g=d2g, q=q, base_time=base_time,
                    failed_index=failed)


def d2g_at_zero(profile: GProfile) -> float:
    """Second-order estimate of G''(0) from the left edge of a profile.

    The centered second difference at the first interior node estimates
    G'' at tau = h with an O(h) offset from 0; combining the h and 2h
    stencils cancels that leading term (Richardson), leaving O(h^2).
    Needs g at nodes 0..4.
    """
    g, taus = profile.g, profile.taus
    if g.size < 5 or not np.all(np.isfinite(g[:5])):
        raise ValueError("profile too short for extrapolation (need nodes 0..4)")
    h = taus[1] - taus[0]
    d_h = (g[2] - 2.0 * g[1] + g[0]) / h**2
    d_2h = (g[4] - 2.0 * g[2] + g[0]) / (2.0 * h) ** 2
    return 2.0 * d_h - d_2h


def fit_rate_series(times: np.ndarray, values: np.ndarray) -> float:
    """Exponential decay rate of a positive series: -slope of log(values)."""
    times = np.asarray(times, float)
    values = np.asarray(values, float)
    if times.size < 2:
        raise ValueError("need at least two samples to fit a rate")
    if np.any(values <= 0.0):
        raise ValueError("decay fit requires strictly positive values")
    slope = np.polyfit(times, np.log(values), 1)[0]
    return float(-slope)


def fit_decay_rate(traj: Trajectory, e, window: tuple[float, float]) -> float:
    """Fit the exponential decay rate of the entropy gap over a time window.

    The gap is measured against the constant steady state with the same
    mass as the initial datum (the periodic steady state of the diffusion
    families in scope).
    """
    t0, t1 = window
    mask = (traj.times >= t0) & (traj.times <= t1)
    if mask.sum() < 2:
        raise ValueError("window contains fewer than two trajectory samples")
    steady_vals = traj.states[0].values.mean(axis=1, keepdims=True) * np.ones(
        (1, traj.states[0].n)
    )
    h_steady = evaluate(e, StateField(steady_vals), traj.problem.grid)
    gaps = np.array(
        [evaluate(e, traj.states[k], traj.problem.grid) - h_steady
         for k in np.flatnonzero(mask)]
    )
    if np.any(gaps <= 0.0):
        raise ValueError("entropy gap is not positive on the window")
    return fit_rate_series(traj.times[mask], gaps)
