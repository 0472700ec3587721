"""Brute-force Crank-Nicolson integrator for the delta-impurity NLS.

Grid: x_j = -X + j dx, j = 0..2J, with the node x_J = 0 doubled into a left
value (end of the left half-line) and a right value (start of the right one).
The two interface rows of the linear system are

* continuity:  u_L(0) - u_R(0) = 0
* jump, in flux form over the half cell around 0,
      dx * i d/dt u0 = -[(u_R1 - u_R0) - (u_L0 - u_L1)]/dx + 2 eta u0 + dx * 2g|u0|^2 u0,
  with u0 = (u_L0 + u_R0)/2.  This is the discrete statement of
  u_x(0+) - u_x(0-) = 2 eta u(0) plus the second-order correction coming from
  the equation itself, and keeps the reduced operator symmetric.

The nonlinear potential V = 2g|u|^2 is evaluated at a Picard midpoint
estimate (one sweep per step) and applied implicitly, so the discrete mass
is conserved by every step up to the linear-solver tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .kernels import MINUS, PLUS, ModelParams


class OracleDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class GridField:
    X: float
    dx: float
    left: np.ndarray      # values at x = -X, ..., 0 (J + 1 entries)
    right: np.ndarray     # values at x = 0, ..., X (J + 1 entries)
    t: float = 0.0
    dt: float = 1e-3

    @property
    def J(self):
        return self.left.size - 1

    @property
    def x_left(self):
        return -self.X + self.dx * np.arange(self.J + 1)

    @property
    def x_right(self):
        return self.dx * np.arange(self.J + 1)

    @property
    def u0(self):
        return 0.5 * (self.left[-1] + self.right[0])

    def sample(self, x):
        """Linear interpolation on the appropriate half-line (theta(0) = 1/2)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        neg, pos = x < 0, x > 0
        xl, xr = self.x_left, self.x_right
        out[neg] = np.interp(x[neg], xl, self.left.real) + 1j * np.interp(x[neg], xl, self.left.imag)
        out[pos] = np.interp(x[pos], xr, self.right.real) + 1j * np.interp(x[pos], xr, self.right.imag)
        out[x == 0] = self.u0
        return out

    def mirrored(self):
        return replace(self, left=self.right[::-1].copy(), right=self.left[::-1].copy())

    def mass(self):
        # every node once, the doubled node once (through its average)
        return float(self.dx * (np.sum(np.abs(self.left[:-1]) ** 2) + np.sum(np.abs(self.right[1:]) ** 2)
                                + abs(self.u0) ** 2))

    def energy(self, params: ModelParams):
        u = self.reduced()
        grad = np.sum(np.abs(np.diff(u)) ** 2) / self.dx
        quart = params.g * self.dx * np.sum(np.abs(u) ** 4)
        return float(grad + quart + 2 * params.eta * abs(self.u0) ** 2)

    def reduced(self):
        """Single-valued array with the doubled node merged."""
        return np.concatenate([self.left[:-1], [self.u0], self.right[1:]])

    def interface_residuals(self, eta):
        """(continuity, one-sided second-order jump residual)."""
        L, R, dx = self.left, self.right, self.dx
        dplus = (-3 * R[0] + 4 * R[1] - R[2]) / (2 * dx)
        dminus = (3 * L[-1] - 4 * L[-2] + L[-3]) / (2 * dx)
        return abs(L[-1] - R[0]), abs(dplus - dminus - 2 * eta * self.u0)


def grid_from_function(f_left, f_right, X, dx, dt=1e-3, t=0.0):
    """Sample callables on the two half-lines (each including 0)."""
    J = int(round(X / dx))
    dx = X / J
    xl = -X + dx * np.arange(J + 1)
    xr = dx * np.arange(J + 1)
    left = np.asarray(f_left(xl), dtype=complex)
    right = np.asarray(f_right(xr), dtype=complex)
    left[0] = right[-1] = 0.0
    # continuity of the initial datum at the doubled node
    u0 = 0.5 * (left[-1] + right[0])
    left[-1] = right[0] = u0
    return GridField(X, dx, left, right, t, dt)


@dataclass
class OracleRun:
    params: ModelParams
    snapshots: list = field(default_factory=list)    # GridField at checkpoints
    interface: list = field(default_factory=list)    # (t, continuity, jump) per step sample
    masses: list = field(default_factory=list)
    energies: list = field(default_factory=list)

    @property
    def final(self):
        return self.snapshots[-1]


class _Stepper:
    def __init__(self, J, dx, dt, params):
        self.J, self.dx, self.dt, self.params = J, dx, dt, params
        n = 2 * J        # unknowns: L_1..L_J (L_J = 0-), R_0..R_{J-1} (R_0 = 0+)
        self.n = n
        self.iL0 = J - 1          # index of L_J
        self.iR0 = J              # index of R_0

    def _bands(self, V, sign):
        """Banded representation (l = u = 2) of I + sign*i dt/2 (H + V), with the interface rows."""
        n, dx, dt, eta = self.n, self.dx, self.dt, self.params.eta
        c = sign * 0.5j * dt
        ab = np.zeros((5, n), dtype=complex)
        # interior rows: -(u_{i+1} - 2u_i + u_{i-1})/dx^2 + V_i u_i
        diag = 1 + c * (2 / dx ** 2 + V)
        off = -c / dx ** 2 * np.ones(n)
        ab[2] = diag
        ab[1, 1:] = off[:-1]       # super-diagonal a[i, i+1]
        ab[3, :-1] = off[1:]       # sub-diagonal a[i+1, i]
        i0, i1 = self.iL0, self.iR0
        # row i0: continuity u_L0 - u_R0 = 0 (no time derivative)
        ab[2, i0] = 1.0
        ab[1, i1] = -1.0            # a[i0, i0+1]
        ab[3, i0 - 1] = 0.0         # a[i0, i0-1]
        # row i1: dx*(u0) + c*dx*[-(R1 - R0 - L0 + L1)/dx^2 ... ] in flux form, u0 = (L0+R0)/2
        v0 = V[i1]
        a_half = 0.5 * (dx + c * (2 * eta + dx * v0))
        ab[2, i1] = a_half + c / dx            # R0
        ab[3, i0] = a_half + c / dx            # L0: a[i1, i1-1]
        ab[1, i1 + 1] = -c / dx                # R1: a[i1, i1+1]
        ab[4, i0 - 1] = -c / dx                # L1: a[i1, i1-2]
        return ab

    def _apply(self, u, V, sign):
        """(I + sign*i dt/2 (H+V)) u for the dynamic rows; interface rows as in _bands."""
        dx, dt, eta = self.dx, self.dt, self.params.eta
        c = sign * 0.5j * dt
        up = np.concatenate([[0.0], u, [0.0]])
        out = u + c * (-(up[2:] - 2 * up[1:-1] + up[:-2]) / dx ** 2 + V * u)
        i0, i1 = self.iL0, self.iR0
        out[i0] = 0.0
        L1, L0, R0, R1 = u[i0 - 1], u[i0], u[i1], u[i1 + 1]
        u0 = 0.5 * (L0 + R0)
        out[i1] = dx * u0 + c * (-((R1 - R0) - (L0 - L1)) / dx + (2 * eta + dx * V[i1]) * u0)
        return out

    def step(self, u):
        g = self.params.g
        if g == 0:
            V = np.zeros(self.n)
            rhs = self._apply(u, V, -1)
            return solve_banded((2, 2), self._bands(V, +1), rhs)
        V0 = 2 * g * np.abs(self._merged(u)) ** 2
        pred = solve_banded((2, 2), self._bands(V0, +1), self._apply(u, V0, -1))
        Vm = 2 * g * np.abs(0.5 * (self._merged(u) + self._merged(pred))) ** 2
        return solve_banded((2, 2), self._bands(Vm, +1), self._apply(u, Vm, -1))

    def _merged(self, u):
        u = u.copy()
        m = 0.5 * (u[self.iL0] + u[self.iR0])
        u[self.iL0] = u[self.iR0] = m
        return u


def _pack(gf: GridField):
    return np.concatenate([gf.left[1:], gf.right[:-1]])


def _unpack(u, gf: GridField, t):
    J = gf.J
    left = np.concatenate([[0.0], u[:J]])
    right = np.concatenate([u[J:], [0.0]])
    return replace(gf, left=left, right=right, t=t)


def evolve(initial: GridField, params: ModelParams, t_final: float, checkpoints=None,
           diagnostics_every=50) -> OracleRun:
    """Integrate to t_final; snapshots at the requested checkpoint times (and t_final)."""
    dt = initial.dt
    nsteps = int(round((t_final - initial.t) / dt))
    if nsteps < 0:
        raise ValueError("t_final precedes the initial time")
    stepper = _Stepper(initial.J, initial.dx, dt, params)
    cps = sorted(set([round((c - initial.t) / dt) for c in (checkpoints or [])] + [nsteps]))
    run = OracleRun(params)
    u = _pack(initial)
    m0 = max(initial.mass(), 1e-300)
    gf = initial
    run.masses.append((gf.t, gf.mass()))
    run.energies.append((gf.t, gf.energy(params)))
    if 0 in cps:
        run.snapshots.append(gf)
    for k in range(1, nsteps + 1):
        u = stepper.step(u)
        if not np.all(np.isfinite(u)):
            raise OracleDivergence(f"non-finite values at step {k} (t = {initial.t + k * dt:.4g})")
        if k % diagnostics_every == 0 or k in cps:
            gf = _unpack(u, initial, initial.t + k * dt)
            m = gf.mass()
            if m > 10 * m0:
                raise OracleDivergence(f"mass grew {m / m0:.3g}x by t = {gf.t:.4g}")
            c, j = gf.interface_residuals(params.eta)
            run.interface.append((gf.t, c, j))
            run.masses.append((gf.t, m))
            run.energies.append((gf.t, gf.energy(params)))
            if k in cps:
                run.snapshots.append(gf)
    return run


def energy_drift(run: OracleRun) -> float:
    e = np.array([v for _, v in run.energies])
    if e.size == 0 or e[0] == 0:
        return 0.0
    return float(np.max(np.abs(e - e[0])) / abs(e[0]))


def mass_drift(run: OracleRun) -> float:
    m = np.array([v for _, v in run.masses])
    if m.size == 0 or m[0] == 0:
        return 0.0
    return float(np.max(np.abs(m - m[0])) / abs(m[0]))


# --- series comparison --------------------------------------------------------

@dataclass(frozen=True)
class OracleGrid:
    X: float = 40.0
    dx: float = 2.5e-3
    dt: float = 1e-3
    sample_step: float = 0.05      # spacing of series samples for the initial spline
    compare_step: float = 0.1      # spacing of the comparison grid
    compare_X: float = 25.0
    checkpoints: tuple = (0.25, 0.5, 0.75, 1.0)


def series_initial(profiles, N, quad, grid: OracleGrid, t0=0.0) -> GridField:
    from .classical_field import side_series
    xs = np.arange(0.0, grid.compare_X + 1e-12, grid.sample_step)
    fp = side_series(PLUS, t0, xs, profiles, N, quad)[0]
    fm = side_series(MINUS, t0, -xs, profiles, N, quad)[0]
    sp_r = CubicSpline(xs, fp.real), CubicSpline(xs, fp.imag)
    sp_l = CubicSpline(xs, fm.real), CubicSpline(xs, fm.imag)
    cut = grid.compare_X

    def right(x):
        y = np.where(x <= cut, sp_r[0](np.minimum(x, cut)) + 1j * sp_r[1](np.minimum(x, cut)), 0)
        return y

    def left(x):
        z = np.minimum(-x, cut)
        return np.where(-x <= cut, sp_l[0](z) + 1j * sp_l[1](z), 0)

    return grid_from_function(left, right, grid.X, grid.dx, grid.dt, t0)


def compare_series(profiles, N, quad, params, t_final=1.0, grid: OracleGrid = OracleGrid(), return_run=False):
    """max over checkpoints of ||Phi_oracle - Phi_series||_2 / ||Phi_series||_2."""
    from .classical_field import field_values
    if profiles.params != params:
        raise ValueError("oracle and series must use the same model parameters")
    init = series_initial(profiles, N, quad, grid)
    cps = [c for c in grid.checkpoints if c <= t_final + 1e-12]
    run = evolve(init, params, t_final, checkpoints=cps)
    xc = np.arange(-grid.compare_X, grid.compare_X + 1e-12, grid.compare_step)
    worst = 0.0
    rows = []
    for snap in run.snapshots:
        if snap.t == 0:
            continue
        ser = field_values(snap.t, xc, profiles, N, quad)
        ora = snap.sample(xc)
        dev = float(np.linalg.norm(ora - ser) / np.linalg.norm(ser))
        rows.append((snap.t, dev))
        worst = max(worst, dev)
    return (worst, rows, run) if return_run else worst
