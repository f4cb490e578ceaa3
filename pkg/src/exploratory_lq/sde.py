"""Simulation of the controlled state dynamics and exact reference paths.

Under an affine Gaussian feedback policy the policy-averaged state
follows

    dX = (a1 X + a2) dt + sqrt((b1 X + b2)^2 + c1) dW,

which Euler-Maruyama discretizes on a uniform grid.  Setting the policy
variance to zero recovers the classical controlled SDE bit for bit, so
one stepping kernel serves both.  Three exact constructions provide
oracles on shared Brownian increments: the lognormal-type solution for
d = 0, the Ornstein-Uhlenbeck recursion for c = 0 (exact Gaussian
transitions driven by the same standardized increments), and the
Doss-Saussmann transform X = F(W, Y) for the general state-dependent
optimum, with Y solved per path by a fixed-step RK4 integrator.

Randomness is counter-based per path (see :mod:`exploratory_lq.rng`);
batches chunk over paths with fixed boundaries, so results are
invariant under the parallelism degree.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .constants import ABS_TOL, DIVERGENCE_THRESHOLD
from .errors import (
    GridMismatchError,
    NonIntegrableDensityError,
    NumericalError,
    UnsupportedRegimeError,
)
from .model import AffineGaussianPolicy, DerivedCoeffs, LqModel, derived_coeffs

_CHUNK = 512


@dataclass(frozen=True)
class PathGrid:
    """Uniform time grid with step dt and n_steps steps (horizon dt*n_steps)."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    def times(self) -> np.ndarray:
        """Node times t_0 = 0, ..., t_n = horizon."""
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class BrownianPath:
    """One discretized Brownian motion, reproducible from (seed, path_index)."""

    grid: PathGrid
    seed: int
    path_index: int
    increments: np.ndarray  # n_steps values, each N(0, dt)
    values: np.ndarray      # n_steps + 1 cumulative values, W_0 = 0

    @classmethod
    def generate(cls, grid: PathGrid, seed: int, path_index: int) -> "BrownianPath":
        z = rng.standard_normals(seed, path_index, grid.n_steps)
        inc = z * math.sqrt(grid.dt)
        w = np.concatenate(([0.0], np.cumsum(inc)))
        return cls(grid=grid, seed=seed, path_index=path_index,
                   increments=inc, values=w)


@dataclass(frozen=True)
class DiscountedSums:
    """Per-path left-endpoint Riemann sums used by value estimation.

    weights w_k = exp(-rho t_k) dt for k = 0..n_steps-1; ``x``/``x2``
    accumulate w_k X_k and w_k X_k^2; the z-sums (present only when
    action noise was drawn) accumulate w_k Z_k X_k, w_k Z_k and
    w_k (Z_k^2 - 1) for the per-path action normals Z_k.
    """

    rho: float
    weight_total: float
    x: np.ndarray
    x2: np.ndarray
    zx: np.ndarray | None = None
    z: np.ndarray | None = None
    z2m1: np.ndarray | None = None


@dataclass
class TrajectoryBatch:
    """A batch of simulated sample paths plus bookkeeping.

    states is (n_paths, n_steps + 1) when paths were recorded, else
    None; endpoints always holds the final node.  Paths whose state
    exceeded the divergence threshold are flagged (frozen at their last
    finite value) rather than propagated.
    """

    grid: PathGrid
    n_paths: int
    seed: int
    kind: str
    x0: float
    endpoints: np.ndarray
    diverged: np.ndarray
    divergence_step: np.ndarray
    states: np.ndarray | None = None
    checkpoint_states: dict = field(default_factory=dict)
    sums: DiscountedSums | None = None

    def __post_init__(self):
        # Batches are shared across threads; freeze the payload.
        for arr in (self.endpoints, self.diverged, self.divergence_step,
                    self.states, *self.checkpoint_states.values()):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_diverged(self) -> int:
        return int(self.diverged.sum())

    def _ok(self) -> np.ndarray:
        return ~self.diverged

    def endpoint_mean(self) -> float:
        return float(self.endpoints[self._ok()].mean())

    def endpoint_second_moment(self) -> float:
        e = self.endpoints[self._ok()]
        return float((e * e).mean())

    def checkpoint_stats(self, node: int) -> tuple[float, float, float, float]:
        """(mean, second moment, se_mean, se_m2) at a checkpoint node,
        excluding diverged paths."""
        x = self.checkpoint_states[node][self._ok()]
        n = x.size
        m2 = x * x
        se_mean = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        se_m2 = float(m2.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return float(x.mean()), float(m2.mean()), se_mean, se_m2

    def summary(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "diverged": self.n_diverged,
            "mean_T": self.endpoint_mean(),
            "m2_T": self.endpoint_second_moment(),
        }

    def write_csv(self, fh) -> None:
        """Trajectory table with columns t, path_id, x, ordered by
        (path_id, t).  Requires recorded paths."""
        if self.states is None:
            raise ValueError("paths were not recorded in this batch")
        times = self.grid.times()
        fh.write("t,path_id,x\n")
        for p in range(self.n_paths):
            row = self.states[p]
            for k in range(self.grid.n_steps + 1):
                fh.write(f"{times[k]!r},{p},{row[k]!r}\n")


def _discount_weights(rho: float, grid: PathGrid) -> np.ndarray:
    t = np.arange(grid.n_steps) * grid.dt
    return np.exp(-rho * t) * grid.dt


def _chunk_ranges(n_paths: int):
    return [(lo, min(lo + _CHUNK, n_paths)) for lo in range(0, n_paths, _CHUNK)]


def _simulate_coeffs(coeffs: DerivedCoeffs, x0: float, grid: PathGrid,
                     seed: int, n_paths: int, *, kind: str,
                     record_paths: bool = True,
                     checkpoints: tuple = (),
                     discount_rate: float | None = None,
                     action_noise: bool = False,
                     parallelism: int = 1) -> TrajectoryBatch:
    """Euler-Maruyama batch for dX = (a1 X + a2) dt + sqrt((b1 X + b2)^2 + c1) dW."""
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    if coeffs.c1 < 0:
        raise ValueError("noise injection c1 must be >= 0")
    k_steps = grid.n_steps
    cp = sorted(set(int(c) for c in checkpoints))
    if cp and (cp[0] < 0 or cp[-1] > k_steps):
        raise ValueError(f"checkpoints must be grid nodes in [0, {k_steps}]")

    endpoints = np.empty(n_paths)
    diverged = np.zeros(n_paths, dtype=bool)
    div_step = np.full(n_paths, -1, dtype=np.int64)
    states = np.empty((n_paths, k_steps + 1)) if record_paths else None
    cp_states = {c: np.empty(n_paths) for c in cp}
    weights = _discount_weights(discount_rate, grid) if discount_rate is not None else None
    if weights is not None:
        sum_x = np.zeros(n_paths)
        sum_x2 = np.zeros(n_paths)
        sum_zx = np.zeros(n_paths) if action_noise else None
        sum_z = np.zeros(n_paths) if action_noise else None
        sum_z2 = np.zeros(n_paths) if action_noise else None

    dt = grid.dt
    sq_dt = math.sqrt(dt)
    cp_set = set(cp)

    def run_chunk(lo: int, hi: int) -> None:
        m = hi - lo
        z = rng.normal_block(seed, lo, m, k_steps)
        za = (rng.normal_block(seed, lo, m, k_steps, stream=rng.ACTION_STREAM)
              if (weights is not None and action_noise) else None)
        x = np.full(m, float(x0))
        alive = np.ones(m, dtype=bool)
        dstep = np.full(m, -1, dtype=np.int64)
        if record_paths:
            states[lo:hi, 0] = x
        for k in range(k_steps):
            if k in cp_set:
                cp_states[k][lo:hi] = x
            if weights is not None:
                w = weights[k]
                sum_x[lo:hi] += w * x
                sum_x2[lo:hi] += w * x * x
                if za is not None:
                    zk = za[:, k]
                    sum_zx[lo:hi] += w * zk * x
                    sum_z[lo:hi] += w * zk
                    sum_z2[lo:hi] += w * (zk * zk - 1.0)
            drift = coeffs.a1 * x + coeffs.a2
            vol = np.sqrt((coeffs.b1 * x + coeffs.b2) ** 2 + coeffs.c1)
            xn = x + drift * dt + vol * (z[:, k] * sq_dt)
            bad = alive & (~np.isfinite(xn) | (np.abs(xn) > DIVERGENCE_THRESHOLD))
            if bad.any():
                dstep[bad] = k + 1
                alive &= ~bad
            x = np.where(alive, xn, x)
            if record_paths:
                states[lo:hi, k + 1] = x
        if k_steps in cp_set:
            cp_states[k_steps][lo:hi] = x
        endpoints[lo:hi] = x
        diverged[lo:hi] = ~alive
        div_step[lo:hi] = dstep

    ranges = _chunk_ranges(n_paths)
    if parallelism > 1 and len(ranges) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallelism) as ex:
            list(ex.map(lambda r: run_chunk(*r), ranges))
    else:
        for lo, hi in ranges:
            run_chunk(lo, hi)

    sums = None
    if weights is not None:
        sums = DiscountedSums(
            rho=float(discount_rate), weight_total=float(weights.sum()),
            x=sum_x, x2=sum_x2, zx=sum_zx, z=sum_z, z2m1=sum_z2)
    return TrajectoryBatch(
        grid=grid, n_paths=n_paths, seed=seed, kind=kind, x0=float(x0),
        endpoints=endpoints, diverged=diverged, divergence_step=div_step,
        states=states, checkpoint_states=cp_states, sums=sums)


def simulate_exploratory(model: LqModel, policy: AffineGaussianPolicy,
                         x0: float, grid: PathGrid, seed: int, n_paths: int,
                         **kwargs) -> TrajectoryBatch:
    """Euler-Maruyama batch of the policy-averaged (exploratory) dynamics.

    With policy variance zero this coincides bitwise with
    :func:`simulate_classical` under the same affine feedback, seed and
    grid: both run the identical kernel with c1 = 0.
    """
    coeffs = derived_coeffs(model, policy)
    return _simulate_coeffs(coeffs, x0, grid, seed, n_paths,
                            kind="exploratory", **kwargs)


def simulate_classical(model: LqModel, feedback_slope: float,
                       feedback_intercept: float, x0: float, grid: PathGrid,
                       seed: int, n_paths: int, **kwargs) -> TrajectoryBatch:
    """Euler-Maruyama batch of dx = (ax + bu(x)) dt + (cx + du(x)) dW
    under the deterministic feedback u(x) = slope*x + intercept."""
    policy = AffineGaussianPolicy(feedback_slope, feedback_intercept, 0.0)
    coeffs = derived_coeffs(model, policy)
    return _simulate_coeffs(coeffs, x0, grid, seed, n_paths,
                            kind="classical", **kwargs)


# ---------------------------------------------------------------------------
# Exact reference paths for the state-independent optimal process
#     dX = (a X - b q / n) dt + sqrt((c X - d q / n)^2 + lam d^2 / n) dW
# ---------------------------------------------------------------------------

def _refine_linear(values: np.ndarray, substeps: int) -> np.ndarray:
    """Linear interpolation of node values onto a grid refined by
    ``substeps``; rows are paths, columns nodes."""
    if substeps == 1:
        return values
    left = values[:, :-1, None]
    right = values[:, 1:, None]
    frac = np.arange(substeps) / substeps
    fine = left * (1.0 - frac) + right * frac
    fine = fine.reshape(values.shape[0], -1)
    return np.concatenate([fine, values[:, -1:]], axis=1)


def _exact_d0_matrix(model: LqModel, x0: float, grid: PathGrid,
                     w: np.ndarray, substeps: int) -> np.ndarray:
    """Exact solution on given Brownian node values (rows = paths).

    X_t = x0 e^{theta t + s|c| W_t}
          - (bq/n) int_0^t e^{theta (t-u) + s|c|(W_t - W_u)} du,
    theta = a - c^2/2, s = +1 on the {x0 >= 0, bq <= 0} branch and
    s = -1 on the mirror branch; the time integral uses the trapezoid
    rule on the (optionally refined) grid.
    """
    if abs(model.d) > ABS_TOL:
        raise ValueError("exact_path_d0 requires d = 0")
    bq = model.b * model.q
    if x0 >= 0 and bq <= ABS_TOL:
        sgn = 1.0
    elif x0 <= 0 and bq >= -ABS_TOL:
        sgn = -1.0
    else:
        raise UnsupportedRegimeError(
            f"no explicit solution for x0={x0!r} with b*q={bq!r}; "
            "supported regimes are (x0 >= 0, b*q <= 0) and (x0 <= 0, b*q >= 0)")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    theta = model.a - model.c ** 2 / 2.0
    cc = abs(model.c)
    a2 = -bq / model.n

    t_coarse = grid.times()
    w_fine = _refine_linear(w, substeps)
    t_fine = np.arange(w_fine.shape[1]) * (grid.dt / substeps)
    g = np.exp(-theta * t_fine - sgn * cc * w_fine)
    h = grid.dt / substeps
    cum = np.zeros_like(g)
    np.cumsum((g[:, :-1] + g[:, 1:]) * (h / 2.0), axis=1, out=cum[:, 1:])
    j_coarse = cum[:, ::substeps]
    growth = np.exp(theta * t_coarse + sgn * cc * w)
    return growth * (x0 + a2 * j_coarse)


def exact_path_d0(model: LqModel, x0: float, path: BrownianPath,
                  substeps: int = 1) -> np.ndarray:
    """Exact node values of the d = 0 optimal process on one path."""
    return _exact_d0_matrix(model, x0, path.grid,
                            path.values[None, :], substeps)[0]


def _c0_constants(model: LqModel) -> tuple[float, float]:
    if abs(model.c) > ABS_TOL:
        raise ValueError("exact_path_c0 requires c = 0")
    sigma = abs(model.d) / model.n * math.sqrt(model.q ** 2 + model.lam * model.n)
    a2 = -model.b * model.q / model.n
    return a2, sigma


def _exact_c0_matrix(model: LqModel, x0: float, grid: PathGrid,
                     z: np.ndarray) -> np.ndarray:
    """Ornstein-Uhlenbeck recursion with exact Gaussian transitions.

    The per-step update scales the standardized Brownian increment by
    the exact transition standard deviation, so marginals are exact at
    every node while the noise stays coupled to the Euler scheme.
    """
    a2, sigma = _c0_constants(model)
    a = model.a
    dt = grid.dt
    m, k_steps = z.shape
    x = np.full(m, float(x0))
    out = np.empty((m, k_steps + 1))
    out[:, 0] = x
    if abs(a) > ABS_TOL:
        eah = math.exp(a * dt)
        shift = a2 * math.expm1(a * dt) / a
        sdh = sigma * math.sqrt(math.expm1(2.0 * a * dt) / (2.0 * a))
    else:
        eah = 1.0
        shift = a2 * dt
        sdh = sigma * math.sqrt(dt)
    for k in range(k_steps):
        x = eah * x + shift + sdh * z[:, k]
        out[:, k + 1] = x
    return out


def exact_path_c0(model: LqModel, x0: float, path: BrownianPath) -> np.ndarray:
    """Exact node values of the c = 0 optimal process on one path."""
    z = path.increments / math.sqrt(path.grid.dt)
    return _exact_c0_matrix(model, x0, path.grid, z[None, :])[0]


@dataclass(frozen=True)
class DossSaussmanTransform:
    """Pathwise transform X = F(W, Y) for the optimal state SDE
    dX = (at X + bt) dt + sqrt((c1t X + c2t)^2 + dt_var) dW.

    F(z, y) = (sqrt(dt_var)/|c1t|) sinh(|c1t| z + asinh((|c1t|/sqrt(dt_var)) (y + c2t/c1t))) - c2t/c1t
    satisfies dF/dz = sqrt((c1t F + c2t)^2 + dt_var) with F(0, y) = y,
    and Y follows the per-path ODE dY/dt = G(W_t, Y_t).
    """

    at: float
    bt: float
    c1t: float
    c2t: float
    dt_var: float

    @classmethod
    def from_solution(cls, model: LqModel, value) -> "DossSaussmanTransform":
        n2 = model.n - value.k2 * model.d ** 2
        if n2 <= 0:
            raise NonIntegrableDensityError(
                f"n - k2*d^2 must be positive, got {n2}")
        beta = model.b + model.c * model.d
        slope = (value.k2 * beta - model.r) / n2
        lin = (value.k1 * model.b - model.q) / n2
        return cls(
            at=model.a + model.b * slope,
            bt=model.b * lin,
            c1t=model.c + model.d * slope,
            c2t=model.d * lin,
            dt_var=model.lam * model.d ** 2 / n2,
        )

    def _arg(self, z, y):
        root = math.sqrt(self.dt_var)
        ac = abs(self.c1t)
        shift = self.c2t / self.c1t
        return ac * z + np.arcsinh(ac / root * (y + shift))

    def f(self, z, y):
        root = math.sqrt(self.dt_var)
        shift = self.c2t / self.c1t
        return root / abs(self.c1t) * np.sinh(self._arg(z, y)) - shift

    def df_dz(self, z, y):
        return math.sqrt(self.dt_var) * np.cosh(self._arg(z, y))

    def df_dy(self, z, y):
        root = math.sqrt(self.dt_var)
        ac = abs(self.c1t)
        shift = self.c2t / self.c1t
        w = ac / root * (y + shift)
        return np.cosh(self._arg(z, y)) / np.sqrt(1.0 + w * w)

    def g(self, z, y):
        fv = self.f(z, y)
        num = self.at * fv + self.bt - self.c1t / 2.0 * (self.c1t * fv + self.c2t)
        return num / self.df_dy(z, y)

    def diffusion_defect(self, z, y):
        """dF/dz minus sqrt((c1t F + c2t)^2 + dt_var); zero in exact math."""
        fv = self.f(z, y)
        return self.df_dz(z, y) - np.sqrt((self.c1t * fv + self.c2t) ** 2 + self.dt_var)


def _doss_saussman_matrix(transform: DossSaussmanTransform, x0: float,
                          grid: PathGrid, w: np.ndarray,
                          ode_substeps: int) -> np.ndarray:
    """Integrate Y per path (RK4, W linearly interpolated inside steps)
    and map nodes through F.  Verifies the defining diffusion ODE of F
    at every evaluated node to 1e-8."""
    if ode_substeps < 1:
        raise ValueError("ode_substeps must be >= 1")
    m, nodes = w.shape
    k_steps = nodes - 1
    dt = grid.dt
    h = dt / ode_substeps
    y = np.full(m, float(x0))
    out = np.empty((m, nodes))
    out[:, 0] = x0
    worst = 0.0
    for k in range(k_steps):
        w0 = w[:, k]
        dw = w[:, k + 1] - w0
        for j in range(ode_substeps):
            z0 = w0 + dw * (j / ode_substeps)
            zh = w0 + dw * ((j + 0.5) / ode_substeps)
            z1 = w0 + dw * ((j + 1.0) / ode_substeps)
            k1 = transform.g(z0, y)
            k2 = transform.g(zh, y + 0.5 * h * k1)
            k3 = transform.g(zh, y + 0.5 * h * k2)
            k4 = transform.g(z1, y + h * k3)
            y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x = transform.f(w[:, k + 1], y)
        defect = np.abs(transform.diffusion_defect(w[:, k + 1], y))
        scale = np.maximum(1.0, np.abs(transform.df_dz(w[:, k + 1], y)))
        worst = max(worst, float((defect / scale).max()))
        out[:, k + 1] = x
    if worst > 1e-8:
        raise NumericalError(
            f"Doss-Saussmann transform violated its defining ODE ({worst:.3g})")
    return out


def doss_saussman_path(model: LqModel, value, x0: float, path: BrownianPath,
                       ode_substeps: int = 4) -> np.ndarray:
    """Exact-transform node values for the state-dependent optimal SDE.

    Requires d != 0 and a nonvanishing effective volatility slope
    c + d*(k2(b+cd)-r)/(n-k2 d^2); callers must fall back to the other
    exact constructions otherwise.
    """
    transform = DossSaussmanTransform.from_solution(model, value)
    if abs(model.d) <= ABS_TOL or transform.dt_var <= 0:
        raise ValueError("Doss-Saussmann path requires d != 0")
    if abs(transform.c1t) <= ABS_TOL:
        raise ValueError(
            "effective volatility slope vanishes; use the c = 0 exact path")
    return _doss_saussman_matrix(transform, x0, path.grid,
                                 path.values[None, :], ode_substeps)[0]


def exact_batch(model: LqModel, x0: float, grid: PathGrid, seed: int,
                n_paths: int, method: str, value=None, substeps: int = 1,
                ode_substeps: int = 4) -> TrajectoryBatch:
    """TrajectoryBatch of exact reference paths on the shared
    per-path Brownian streams; method one of 'd0', 'c0',
    'doss_saussman'."""
    k_steps = grid.n_steps
    sq_dt = math.sqrt(grid.dt)
    states = np.empty((n_paths, k_steps + 1))
    transform = None
    if method == "doss_saussman":
        if value is None:
            raise ValueError("doss_saussman batch needs the value function")
        transform = DossSaussmanTransform.from_solution(model, value)
        if abs(model.d) <= ABS_TOL or transform.dt_var <= 0:
            raise ValueError("Doss-Saussmann path requires d != 0")
        if abs(transform.c1t) <= ABS_TOL:
            raise ValueError(
                "effective volatility slope vanishes; use the c = 0 exact path")
    for lo, hi in _chunk_ranges(n_paths):
        z = rng.normal_block(seed, lo, hi - lo, k_steps)
        if method == "c0":
            states[lo:hi] = _exact_c0_matrix(model, x0, grid, z)
            continue
        w = np.concatenate(
            [np.zeros((hi - lo, 1)), np.cumsum(z * sq_dt, axis=1)], axis=1)
        if method == "d0":
            states[lo:hi] = _exact_d0_matrix(model, x0, grid, w, substeps)
        elif method == "doss_saussman":
            states[lo:hi] = _doss_saussman_matrix(
                transform, x0, grid, w, ode_substeps)
        else:
            raise ValueError(f"unknown exact-path method {method!r}")
    endpoints = states[:, -1].copy()
    return TrajectoryBatch(
        grid=grid, n_paths=n_paths, seed=seed, kind="exact", x0=float(x0),
        endpoints=endpoints, diverged=np.zeros(n_paths, dtype=bool),
        divergence_step=np.full(n_paths, -1, dtype=np.int64), states=states)


def _check_comparable(batch_a: TrajectoryBatch, batch_b: TrajectoryBatch) -> None:
    if batch_a.grid != batch_b.grid:
        raise GridMismatchError("batches use different grids")
    if batch_a.seed != batch_b.seed:
        raise GridMismatchError("batches use different seeds")
    if batch_a.n_paths != batch_b.n_paths:
        raise GridMismatchError("batches hold different path counts")


def strong_error(batch_a: TrajectoryBatch, batch_b: TrajectoryBatch) -> tuple[float, float]:
    """(max, mean) pathwise endpoint deviation |X_a(T) - X_b(T)|."""
    _check_comparable(batch_a, batch_b)
    diff = np.abs(batch_a.endpoints - batch_b.endpoints)
    return float(diff.max()), float(diff.mean())


def endpoint_rms_error(batch_a: TrajectoryBatch, batch_b: TrajectoryBatch) -> float:
    """Root-mean-square endpoint deviation over paths."""
    _check_comparable(batch_a, batch_b)
    diff = batch_a.endpoints - batch_b.endpoints
    return float(np.sqrt((diff * diff).mean()))
