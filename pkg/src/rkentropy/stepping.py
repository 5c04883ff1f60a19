"""Newton-based forward stepping, backward solving, and trajectories.

Implicit stages are solved in the shifted variables Z_i = tau * sum_j
a_ij K_j rather than in the slopes K_i: the residuals then live on the
scale of the state itself, so the Newton tolerance keeps its meaning at
tight settings (slope residuals carry an extra 1/dx^2 and would sit above
any tolerance below stencil noise).  The slopes are recovered afterwards
as K_i = -A[u_old + Z_i].

No damping or line search is used; non-convergence is surfaced as
StepError, never masked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import Problem, StateField
from .tableau import Scheme


class StepError(RuntimeError):
    """Newton failed to reach the residual tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class NewtonConfig:
    tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class Trajectory:
    """Uniformly spaced states t^k = k*tau produced by ``run``."""

    times: np.ndarray
    states: list[StateField]
    scheme: Scheme
    problem: Problem
    tau: float
    newton_iters: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.states)


def _newton(residual, jacobian, y0: np.ndarray, cfg: NewtonConfig):
    """Plain Newton iteration; returns (solution, iterations_used)."""
    y = y0.copy()
    res = residual(y)
    norm = float(np.max(np.abs(res))) if res.size else 0.0
    for it in range(cfg.max_iter):
        if norm <= cfg.tol:
            return y, it
        try:
            y -= np.linalg.solve(jacobian(y), res)
        except np.linalg.LinAlgError as err:
            raise StepError(
                f"singular Newton matrix at iteration {it} "
                f"(residual {norm:.3e}): {err}",
                residual=norm,
                iterations=it,
            ) from err
        res = residual(y)
        norm = float(np.max(np.abs(res)))
    if norm <= cfg.tol:
        return y, cfg.max_iter
    raise StepError(
        f"Newton stalled at residual {norm:.3e} after {cfg.max_iter} iterations "
        f"(tol {cfg.tol:.1e})",
        residual=norm,
        iterations=cfg.max_iter,
    )


def _forward_flat(problem: Problem, scheme: Scheme, u0: np.ndarray, tau: float,
                  cfg: NewtonConfig):
    """One step on flat state vectors; returns (u_new, newton_iterations)."""
    if scheme.is_composite_simpson:
        return _forward_simpson(problem, u0, tau, cfg)
    tb = scheme.tableau
    s, m = tb.s, u0.size
    a, b = tb.a, tb.b

    if tb.is_explicit():
        K = np.empty((s, m))
        for i in range(s):
            g = u0 + tau * sum(a[i, j] * K[j] for j in range(i))
            K[i] = -problem.apply_flat(g)
        return u0 + tau * (b[:, None] * K).sum(axis=0), 0

    def residual(z):
        Z = z.reshape(s, m)
        Ag = np.array([problem.apply_flat(u0 + Z[j]) for j in range(s)])
        return (Z + tau * a @ Ag).reshape(-1)

    def jacobian(z):
        Z = z.reshape(s, m)
        J = [problem.jacobian_flat(u0 + Z[j]) for j in range(s)]
        M = np.zeros((s * m, s * m))
        for i in range(s):
            for j in range(s):
                blk = tau * a[i, j] * J[j]
                if i == j:
                    blk = blk + np.eye(m)
                M[i * m:(i + 1) * m, j * m:(j + 1) * m] = blk
        return M

    au0 = problem.apply_flat(u0)
    z0 = np.concatenate([-tau * a[i].sum() * au0 for i in range(s)])
    z, iters = _newton(residual, jacobian, z0, cfg)
    Z = z.reshape(s, m)
    K = np.array([-problem.apply_flat(u0 + Z[i]) for i in range(s)])
    return u0 + tau * (b[:, None] * K).sum(axis=0), iters


def _forward_simpson(problem: Problem, u0: np.ndarray, tau: float,
                     cfg: NewtonConfig):
    a_old = problem.apply_flat(u0)
    eye = np.eye(u0.size)

    def residual(u):
        return u - u0 + tau / 6.0 * (
            problem.apply_flat(u) + 4.0 * problem.apply_flat(0.5 * (u + u0)) + a_old
        )

    def jacobian(u):
        return (
            eye
            + tau / 6.0 * problem.jacobian_flat(u)
            + tau / 3.0 * problem.jacobian_flat(0.5 * (u + u0))
        )

    return _newton(residual, jacobian, u0, cfg)


def _backward_flat(problem: Problem, scheme: Scheme, u: np.ndarray, tau: float,
                   cfg: NewtonConfig, y_init: np.ndarray | None = None):
    """Solve for the previous state v with forward(v, tau) == u.

    ``y_init`` optionally overrides the tau -> 0 initial iterate with a
    full stacked vector (stage increments and previous state), which lets
    sweeps continue from a neighbouring solution instead of restarting.
    Returns (v, iterations, stacked solution).
    """
    if tau == 0.0:
        return u.copy(), 0, None
    if scheme.is_composite_simpson:
        return _backward_simpson(problem, u, tau, cfg, y_init)
    tb = scheme.tableau
    s, m = tb.s, u.size
    a, b = tb.a, tb.b

    # joint unknown y = (Z_1..Z_s, v); the stage relations and the update
    # relation v - u + tau*sum b_i K_i = 0 are solved simultaneously.
    def unpack(y):
        return y[: s * m].reshape(s, m), y[s * m:]

    def residual(y):
        Z, v = unpack(y)
        Ag = np.array([problem.apply_flat(v + Z[j]) for j in range(s)])
        r_stage = Z + tau * a @ Ag
        r_update = v - u - tau * (b[:, None] * Ag).sum(axis=0)
        return np.concatenate([r_stage.reshape(-1), r_update])

    def jacobian(y):
        Z, v = unpack(y)
        J = [problem.jacobian_flat(v + Z[j]) for j in range(s)]
        M = np.zeros(((s + 1) * m, (s + 1) * m))
        for i in range(s):
            rows = slice(i * m, (i + 1) * m)
            acc = np.zeros((m, m))
            for j in range(s):
                blk = tau * a[i, j] * J[j]
                acc += blk
                if i == j:
                    blk = blk + np.eye(m)
                M[rows, j * m:(j + 1) * m] = blk
            M[rows, s * m:] = acc
        rows = slice(s * m, (s + 1) * m)
        bsum = np.zeros((m, m))
        for j in range(s):
            M[rows, j * m:(j + 1) * m] = -tau * b[j] * J[j]
            bsum += b[j] * J[j]
        M[rows, s * m:] = np.eye(m) - tau * bsum
        return M

    if y_init is None:
        # initial iterate from the tau -> 0 limit: K_i = -A[u], v = u
        au = problem.apply_flat(u)
        y_init = np.concatenate([-tau * a[i].sum() * au for i in range(s)] + [u])
    y, iters = _newton(residual, jacobian, y_init, cfg)
    return unpack(y)[1], iters, y


def _backward_simpson(problem: Problem, u: np.ndarray, tau: float,
                      cfg: NewtonConfig, y_init: np.ndarray | None = None):
    a_new = problem.apply_flat(u)
    eye = np.eye(u.size)

    def residual(v):
        return u - v + tau / 6.0 * (
            a_new + 4.0 * problem.apply_flat(0.5 * (u + v)) + problem.apply_flat(v)
        )

    def jacobian(v):
        return (
            -eye
            + tau / 3.0 * problem.jacobian_flat(0.5 * (u + v))
            + tau / 6.0 * problem.jacobian_flat(v)
        )

    v, iters = _newton(residual, jacobian, u if y_init is None else y_init, cfg)
    return v, iters, v


def forward_step(problem: Problem, scheme: Scheme, u_prev: StateField, tau: float,
                 cfg: NewtonConfig | None = None) -> StateField:
    """Advance one step of size tau from u_prev."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    cfg = cfg or NewtonConfig()
    problem._check_state(u_prev)
    u_new, _ = _forward_flat(problem, scheme, u_prev.flat, tau, cfg)
    return StateField.from_flat(u_new, problem.species)


def backward_solve(problem: Problem, scheme: Scheme, u: StateField, tau: float,
                   cfg: NewtonConfig | None = None) -> StateField:
    """Recover the previous state v(tau) that steps forward onto u.

    v(0) = u exactly; for small tau the solution follows the expansion
    v(tau) = u + tau*A[u] + (tau^2/2) * c_rk * DA[u](A[u]) + O(tau^3).
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    cfg = cfg or NewtonConfig()
    problem._check_state(u)
    v, _, _ = _backward_flat(problem, scheme, u.flat, tau, cfg)
    return StateField.from_flat(v, problem.species)


def run(problem: Problem, scheme: Scheme, u0: StateField, tau: float, t_end: float,
        cfg: NewtonConfig | None = None) -> Trajectory:
    """Advance ceil(t_end/tau) uniform steps from t = 0, keeping every state."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if t_end < tau:
        raise ValueError("t_end must be at least one step")
    cfg = cfg or NewtonConfig()
    problem._check_state(u0)
    n_steps = int(np.ceil(t_end / tau - 1e-12))
    states = [u0.copy()]
    iters: list[int] = []
    x = u0.flat
    for k in range(n_steps):
        try:
            x, it = _forward_flat(problem, scheme, x, tau, cfg)
        except StepError as err:
            raise StepError(
                f"step {k + 1} (t={k * tau:.6g} -> {(k + 1) * tau:.6g}) failed: {err}",
                residual=err.residual,
                iterations=err.iterations,
            ) from err
        if not np.all(np.isfinite(x)):
            raise StepError(
                f"step {k + 1} produced non-finite values (overflow or "
                f"blow-up at t={(k + 1) * tau:.6g})",
                residual=float("inf"),
                iterations=it,
            )
        states.append(StateField.from_flat(x, problem.species))
        iters.append(it)
    times = np.arange(n_steps + 1) * tau
    return Trajectory(
        times=times, states=states, scheme=scheme, problem=problem, tau=tau,
        newton_iters=iters,
    )
