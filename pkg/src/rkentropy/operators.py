"""Discrete 1D periodic spatial operators for four diffusion families.

Sign convention: the semi-discrete problem is du/dt = -A[u], so A[u] is
the negated right-hand side.  All stencils are second-order central
differences on a uniform periodic grid; the diffusion families are written
so that sum_i A[u]_i telescopes to zero (discrete mass conservation).

Each problem provides the operator A, its exact directional derivative
DA[u](w), and the exact Jacobian as a dense banded-cyclic matrix (small
grids only; Newton at desk scale does not need sparse storage).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """State outside a problem's admissible set (e.g. nonpositive cells)."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic cell grid on [0, length) with nodes x_i = i*dx."""

    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"grid needs n >= 4 cells, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx


class StateField:
    """Per-cell solution values, one row per species (shape species x n)."""

    def __init__(self, values, species: int | None = None):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if species is not None and values.shape[0] != species:
            raise ValueError(
                f"expected {species} species, got array with {values.shape[0]} rows"
            )
        if values.shape[0] not in (1, 2):
            raise ValueError(f"species count must be 1 or 2, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("state contains non-finite entries")
        self.values = values

    @classmethod
    def scalar(cls, values) -> "StateField":
        return cls(np.asarray(values, dtype=float)[None, :])

    @classmethod
    def pair(cls, u1, u2) -> "StateField":
        return cls(np.stack([np.asarray(u1, float), np.asarray(u2, float)]))

    @classmethod
    def from_flat(cls, flat: np.ndarray, species: int) -> "StateField":
        return cls(np.asarray(flat, float).reshape(species, -1))

    @property
    def species(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def copy(self) -> "StateField":
        return StateField(self.values.copy())

    def __repr__(self):
        return f"StateField(species={self.species}, n={self.n})"


def diff1(w: np.ndarray, dx: float) -> np.ndarray:
    """Periodic central first difference (w_{i+1} - w_{i-1}) / (2 dx)."""
    return (np.roll(w, -1) - np.roll(w, 1)) / (2.0 * dx)


def diff2(w: np.ndarray, dx: float) -> np.ndarray:
    """Periodic second difference (w_{i+1} - 2 w_i + w_{i-1}) / dx^2."""
    return (np.roll(w, -1) - 2.0 * w + np.roll(w, 1)) / dx**2


def diff2_matrix(n: int, dx: float) -> np.ndarray:
    """Dense cyclic matrix D2 with diff2(w) == D2 @ w."""
    eye = np.eye(n)
    up = np.roll(eye, 1, axis=1)  # picks w_{i+1}
    dn = np.roll(eye, -1, axis=1)  # picks w_{i-1}
    return (up - 2.0 * eye + dn) / dx**2


class Problem:
    """Base for the equation families; subclasses fill in the flat kernels."""

    species = 1

    def __init__(self, grid: Grid1D):
        self.grid = grid

    # -- StateField API -------------------------------------------------
    def apply(self, u: StateField) -> StateField:
        """Evaluate A[u] on the same grid."""
        self._check_state(u)
        return StateField.from_flat(self.apply_flat(u.flat), self.species)

    def deriv_apply(self, u: StateField, w: StateField) -> StateField:
        """Exact Jacobian-vector product DA[u](w)."""
        self._check_state(u)
        self._check_shape(w)
        return StateField.from_flat(
            self.deriv_flat(u.flat, w.flat), self.species
        )

    def jacobian(self, u: StateField) -> np.ndarray:
        """Exact Jacobian of apply at u, dense (species*n) x (species*n)."""
        self._check_state(u)
        return self.jacobian_flat(u.flat)

    # -- flat kernels (stepping works on these) -------------------------
    def apply_flat(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def deriv_flat(self, x: np.ndarray, wx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian_flat(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- validation ------------------------------------------------------
    def _check_state(self, u: StateField):
        if u.species != self.species or u.n != self.grid.n:
            raise ValueError(
                f"state shape ({u.species}, {u.n}) does not match problem "
                f"({self.species}, {self.grid.n})"
            )

    def _check_shape(self, w: StateField):
        if w.species != self.species or w.n != self.grid.n:
            raise ValueError("direction field shape does not match problem")


def _require_positive(x: np.ndarray, what: str):
    bad = np.flatnonzero(x <= 0.0)
    if bad.size:
        raise DomainError(
            f"{what} requires strictly positive values; "
            f"cell {int(bad[0])} has u={x[bad[0]]:.6g}"
        )


class PorousMedium(Problem):
    """A[u] = -D2(u^beta), the porous-medium / fast-diffusion operator.

    Zero cells are admissible for beta >= 1 (u^(beta-1) stays finite);
    for beta < 1 they are rejected because the mobility blows up.
    """

    def __init__(self, grid: Grid1D, beta: float):
        if not beta > 0:
            raise ValueError(f"beta must be positive, got {beta}")
        super().__init__(grid)
        self.beta = float(beta)
        self._d2m = diff2_matrix(grid.n, grid.dx)

    def _check_state(self, u: StateField):
        super()._check_state(u)
        if self.beta < 1.0:
            _require_positive(u.flat, f"porous medium with beta={self.beta} < 1")

    def apply_flat(self, x):
        return -diff2(x**self.beta, self.grid.dx)

    def deriv_flat(self, x, wx):
        return -diff2(self.beta * x ** (self.beta - 1.0) * wx, self.grid.dx)

    def jacobian_flat(self, x):
        return -self._d2m * (self.beta * x ** (self.beta - 1.0))[None, :]


class ScalarDiffusion(Problem):
    """A[u] = -div(a(u) grad u) in conservative flux form.

    Interface coefficients use the arithmetic mean of the two neighbours,
    which keeps the stencil mass-conservative.  ``a`` and its derivative
    ``da`` are vectorized callables.
    """

    def __init__(self, grid: Grid1D, a, da):
        super().__init__(grid)
        self.a = a
        self.da = da

    def _fluxes(self, x):
        # flux numerator g_i = a((x_i + x_{i+1})/2) * (x_{i+1} - x_i), interface i+1/2
        xp = np.roll(x, -1)
        mid = 0.5 * (x + xp)
        return np.asarray(self.a(mid)) * (xp - x), mid, xp

    def apply_flat(self, x):
        g, _, _ = self._fluxes(x)
        return -(g - np.roll(g, 1)) / self.grid.dx**2

    def deriv_flat(self, x, wx):
        _, mid, xp = self._fluxes(x)
        wp = np.roll(wx, -1)
        dg = np.asarray(self.da(mid)) * 0.5 * (wx + wp) * (xp - x) + np.asarray(
            self.a(mid)
        ) * (wp - wx)
        return -(dg - np.roll(dg, 1)) / self.grid.dx**2

    def jacobian_flat(self, x):
        n = self.grid.n
        xp = np.roll(x, -1)
        mid = 0.5 * (x + xp)
        av = np.asarray(self.a(mid)) * np.ones(n)
        pv = 0.5 * np.asarray(self.da(mid)) * (xp - x) * np.ones(n)
        jac = np.zeros((n, n))
        idx = np.arange(n)
        dx2 = self.grid.dx**2
        # dA_i/du_{i+1} from flux i, dA_i/du_{i-1} from flux i-1
        jac[idx, (idx + 1) % n] = -(pv + av) / dx2
        jac[idx, (idx - 1) % n] = (np.roll(pv, 1) - np.roll(av, 1)) / dx2
        jac[idx, idx] = -((pv - av) - (np.roll(pv, 1) + np.roll(av, 1))) / dx2
        return jac


class LinearSystem(Problem):
    """Two coupled heat equations with symmetric exchange term.

    du1/dt = rho1 * Lap(u1) + mu * (u2 - u1), and symmetrically for u2,
    so A[u]_j = -rho_j * D2(u_j) - mu * (u_other - u_j).  The operator is
    linear: DA[u](w) = A[w].
    """

    species = 2

    def __init__(self, grid: Grid1D, rho1: float, rho2: float, mu: float):
        if rho1 < 0 or rho2 < 0 or mu < 0:
            raise ValueError("rho1, rho2, mu must be nonnegative")
        super().__init__(grid)
        self.rho1 = float(rho1)
        self.rho2 = float(rho2)
        self.mu = float(mu)
        d2m = diff2_matrix(grid.n, grid.dx)
        eye = np.eye(grid.n)
        self._jac = np.block(
            [
                [-self.rho1 * d2m + self.mu * eye, -self.mu * eye],
                [-self.mu * eye, -self.rho2 * d2m + self.mu * eye],
            ]
        )

    def apply_flat(self, x):
        n = self.grid.n
        u1, u2 = x[:n], x[n:]
        dx = self.grid.dx
        return np.concatenate(
            [
                -self.rho1 * diff2(u1, dx) - self.mu * (u2 - u1),
                -self.rho2 * diff2(u2, dx) - self.mu * (u1 - u2),
            ]
        )

    def deriv_flat(self, x, wx):
        return self.apply_flat(wx)

    def jacobian_flat(self, x):
        return self._jac


class Dlss(Problem):
    """Fourth-order quantum diffusion operator A[u] = D2(u * D2(log u)).

    The state must be strictly positive; positivity is a precondition,
    not enforced by regularization, so the entropy identities tested
    against this operator stay exact.
    """

    def __init__(self, grid: Grid1D):
        super().__init__(grid)
        self._d2m = diff2_matrix(grid.n, grid.dx)

    def _check_state(self, u: StateField):
        super()._check_state(u)
        _require_positive(u.flat, "the fourth-order log-diffusion operator")

    def apply_flat(self, x):
        _require_positive(x, "the fourth-order log-diffusion operator")
        dx = self.grid.dx
        return diff2(x * diff2(np.log(x), dx), dx)

    def deriv_flat(self, x, wx):
        dx = self.grid.dx
        inner = wx * diff2(np.log(x), dx) + x * diff2(wx / x, dx)
        return diff2(inner, dx)

    def jacobian_flat(self, x):
        d2m = self._d2m
        dx = self.grid.dx
        core = np.diag(diff2(np.log(x), dx)) + x[:, None] * d2m * (1.0 / x)[None, :]
        return d2m @ core
