"""Splitting solver for low-rank factorized SDPs with diagonal or
block-diagonal constraints.

The problem ``min <C, X>`` over unit-diagonal (or identity-block-diagonal)
positive semidefinite X is handled through the factorization X = st @ s.T
with the coupling constraint st = s, where only st is kept on the manifold.
One iteration kernel covers both the plain method (mu = 0, unit rows) and
the proximally regularized one (mu > 0, orthonormal blocks):

    gamma  = (mu * st + rho * s - (y + C s)) / (rho + mu)
    st'    = blockwise projection of gamma onto the manifold
    s'     = st' + (y - C st') / rho
    y'     = y + rho * (st' - s')

started from s = st on the manifold and y = C st, which keeps y = C st
at every iterate.  Each iteration costs exactly two sparse products.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    AssumptionViolated,
    DegenerateProjection,
    DimensionMismatch,
    InvariantViolation,
    OffManifold,
)
from .manifold import ManifoldSpec, manifold_violation, project, random_point
from .sparse import SparseSymMatrix, inf_norm, spmm, two_norm_estimate
from .trace import BASE_COLUMNS, Trace, TraceRecord

logger = logging.getLogger("bmadmm")


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    ASSUMPTION_VIOLATED = "assumption_violated"
    EPS_CONVEX = "eps_convex"
    STALLED = "stalled"


@dataclass(frozen=True)
class ProblemSpec:
    """Cost matrix plus the block structure and rank of the factorization."""

    cost: SparseSymMatrix
    manifold: ManifoldSpec

    def __post_init__(self):
        if self.cost.n != self.manifold.n:
            raise DimensionMismatch(
                f"cost matrix dimension {self.cost.n} does not match "
                f"manifold dimension {self.manifold.n}"
            )

    @classmethod
    def sphere(cls, cost, r=None):
        return cls(cost, ManifoldSpec.sphere(cost.n, r))

    @classmethod
    def stiefel(cls, cost, d, r=None):
        if cost.n % d:
            raise DimensionMismatch(f"dimension {cost.n} is not a multiple of d={d}")
        return cls(cost, ManifoldSpec.stiefel(cost.n // d, d, r))


@dataclass
class SolverOptions:
    """Knobs of the splitting solver.

    Parameters
    ----------
    rho : float or {"theory", "practice"}
        Penalty parameter.  "theory" picks max(alpha ||C||_inf, beta ||C||_2),
        the regime with provable monotone decrease; "practice" picks ||C||_2,
        the fast setting used for benchmarks.
    mu : float
        Proximal weight on the manifold update, >= 0.  Required > ||C||^2/rho
        for the proximal descent guarantee; a violation is only logged.
    tol_primal : float
        Stop when ||st - s||_F <= tol_primal * sqrt(n) ...
    tol_obj : float
        ... and the merit value changes by <= tol_obj * (1 + |merit|).
    check_invariants : bool
        Verify the runtime descent/floor/link invariants each iteration.
        Violations abort with diagnostics under a "theory" rho and are
        logged otherwise.
    trace_every : int
        Record a trace row every this many iterations (the final iterate is
        always recorded).
    alpha, beta : float
        Multiples of ||C||_inf and ||C||_2 defining the "theory" penalty and
        the constants of the decrease bound.  Advanced; defaults (10, 2).
    """

    rho: float | str = "practice"
    mu: float = 0.0
    max_iter: int = 100_000
    tol_primal: float = 1e-8
    tol_obj: float = 1e-10
    seed: int = 0
    check_invariants: bool = False
    trace_every: int = 1
    time_budget: float | None = None
    alpha: float = 10.0
    beta: float = 2.0

    def __post_init__(self):
        if isinstance(self.rho, str):
            if self.rho not in ("theory", "practice"):
                raise ValueError(f"unknown rho mode {self.rho!r}")
        elif self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.tol_primal <= 0 or self.tol_obj <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")


@dataclass
class SolverState:
    """Full iterate of the solver at iteration k.

    ``cost_sigma_tilde`` caches C @ sigma_tilde from the step that produced
    the iterate; the previous pair is retained for step norms.
    """

    problem: ProblemSpec
    sigma_tilde: np.ndarray
    sigma: np.ndarray
    y: np.ndarray
    rho: float
    mu: float
    k: int = 0
    rho_mode: str = "explicit"
    norm_two: float = 0.0
    norm_inf: float = 0.0
    last_G: float = 0.0
    last_objective: float = 0.0
    last_min_gamma: float = math.nan
    cost_sigma_tilde: np.ndarray | None = None
    prev_sigma_tilde: np.ndarray | None = None
    prev_sigma: np.ndarray | None = None


@dataclass
class SolveResult:
    state: SolverState
    trace: Trace
    status: Status
    report: object | None = None  # curvature probe report, when applicable


def default_rho(C, mode, alpha=10.0, beta=2.0, norms=None, seed=0):
    """Penalty parameter for a cost matrix.

    mode "theory" -> max(alpha ||C||_inf, beta ||C||_2); mode "practice"
    -> ||C||_2.  A zero cost matrix is rejected (the penalty must be > 0).
    """
    if norms is not None:
        norm_two, norm_inf_ = norms
    else:
        norm_two = two_norm_estimate(C, seed=seed)
        norm_inf_ = inf_norm(C)
    if norm_two <= 0.0 or norm_inf_ <= 0.0:
        raise ValueError("cost matrix is zero; the penalty must be positive")
    if mode == "theory":
        return float(max(alpha * norm_inf_, beta * norm_two))
    if mode == "practice":
        return float(norm_two)
    raise ValueError(f"unknown rho mode {mode!r}")


def init_state(problem, options, sigma0=None):
    """Initial state: st = s on the manifold (seeded random unless a warm
    start is given) and y = C st.  Warm starts must lie on the manifold;
    y is always reset to C st to preserve the dual link."""
    C = problem.cost
    man = problem.manifold
    norm_inf_ = inf_norm(C)
    norm_two = two_norm_estimate(C, seed=options.seed)
    if isinstance(options.rho, str):
        rho = default_rho(
            C, options.rho, options.alpha, options.beta, norms=(norm_two, norm_inf_)
        )
        rho_mode = options.rho
    else:
        rho = float(options.rho)
        rho_mode = "explicit"
    mu = float(options.mu)
    if mu > 0.0 and mu - norm_two**2 / rho <= 0.0:
        logger.warning(
            "proximal descent condition mu - ||C||^2/rho > 0 fails "
            "(mu=%g, rho=%g, ||C||=%g); convergence is not guaranteed",
            mu,
            rho,
            norm_two,
        )
    if sigma0 is None:
        st = random_point(man, options.seed)
    else:
        st = np.array(sigma0, dtype=np.float64)
        if st.shape != (man.n, man.r):
            raise DimensionMismatch(
                f"warm start shape {st.shape} does not match ({man.n}, {man.r})"
            )
        err = manifold_violation(man, st)
        if err > 1e-8:
            raise OffManifold(f"warm start is off the manifold by {err:.3e}")
    y0 = spmm(C, st)
    objective = float(np.vdot(y0, st))
    return SolverState(
        problem=problem,
        sigma_tilde=st,
        sigma=st.copy(),
        y=y0.copy(),
        rho=rho,
        mu=mu,
        k=0,
        rho_mode=rho_mode,
        norm_two=norm_two,
        norm_inf=norm_inf_,
        last_G=objective,
        last_objective=objective,
        cost_sigma_tilde=y0,
    )


def gamma(state, mu=None):
    """Pre-projection update point of the manifold block.

    With mu = 0 this is s - (y + C s) / rho; with mu > 0 the proximal form
    (mu st + rho s - (y + C s)) / (rho + mu).  The two coincide at mu = 0.
    """
    mu = state.mu if mu is None else float(mu)
    C_sigma = spmm(state.problem.cost, state.sigma)
    return _gamma_from_product(state, C_sigma, mu)


def _gamma_from_product(state, C_sigma, mu):
    if mu == 0.0:
        return state.sigma - (state.y + C_sigma) / state.rho
    return (mu * state.sigma_tilde + state.rho * state.sigma - (state.y + C_sigma)) / (
        state.rho + mu
    )


def step(state, options):
    """One iteration of the splitting kernel; returns the new state.

    Exactly two sparse products: C s for the update point and C st' for the
    s- and y-updates.  A collapsed gamma block raises AssumptionViolated
    naming the block and the iteration.
    """
    problem = state.problem
    man = problem.manifold
    rho = state.rho
    C_sigma = spmm(problem.cost, state.sigma)
    gam = _gamma_from_product(state, C_sigma, state.mu)
    min_gamma = float(np.linalg.norm(gam, axis=1).min())
    try:
        sigma_tilde_new = project(man, gam)
    except DegenerateProjection as exc:
        raise AssumptionViolated(
            f"degenerate update block {exc.block} at iteration {state.k}",
            block=exc.block,
            iteration=state.k,
        ) from None
    cost_st_new = spmm(problem.cost, sigma_tilde_new)
    sigma_new = sigma_tilde_new + (state.y - cost_st_new) / rho
    y_new = state.y + rho * (sigma_tilde_new - sigma_new)
    objective_new = float(np.vdot(cost_st_new, sigma_tilde_new))
    diff = sigma_tilde_new - sigma_new
    G_new = objective_new + 0.5 * rho * float(np.vdot(diff, diff))
    new_state = SolverState(
        problem=problem,
        sigma_tilde=sigma_tilde_new,
        sigma=sigma_new,
        y=y_new,
        rho=rho,
        mu=state.mu,
        k=state.k + 1,
        rho_mode=state.rho_mode,
        norm_two=state.norm_two,
        norm_inf=state.norm_inf,
        last_G=G_new,
        last_objective=objective_new,
        last_min_gamma=min_gamma,
        cost_sigma_tilde=cost_st_new,
        prev_sigma_tilde=state.sigma_tilde,
        prev_sigma=state.sigma,
    )
    if options.check_invariants:
        _check_invariants(state, new_state, options.alpha, options.beta)
    return new_state


def merit_value(state):
    """Merit value <C st, st> + (rho/2) ||st - s||_F^2, the augmented
    Lagrangian with the multiplier eliminated through y = C st.  Errors if
    st is off the manifold."""
    err = manifold_violation(state.problem.manifold, state.sigma_tilde)
    if err > 1e-8:
        raise OffManifold(f"sigma_tilde is off the manifold by {err:.3e}")
    if state.cost_sigma_tilde is not None:
        Cst = state.cost_sigma_tilde
    else:
        Cst = spmm(state.problem.cost, state.sigma_tilde)
    diff = state.sigma_tilde - state.sigma
    return float(np.vdot(Cst, state.sigma_tilde)) + 0.5 * state.rho * float(
        np.vdot(diff, diff)
    )


def residuals(state):
    """(primal, step_tilde, step_sigma) Frobenius norms; the step norms are
    zero when no previous iterate is retained."""
    primal = float(np.linalg.norm(state.sigma_tilde - state.sigma))
    step_tilde = 0.0
    step_sigma = 0.0
    if state.prev_sigma_tilde is not None:
        step_tilde = float(np.linalg.norm(state.sigma_tilde - state.prev_sigma_tilde))
    if state.prev_sigma is not None:
        step_sigma = float(np.linalg.norm(state.sigma - state.prev_sigma))
    return primal, step_tilde, step_sigma


def kappa_constant(alpha, beta):
    """Decrease-rate constant (alpha^2 - 4 alpha - 2) beta / (2 alpha^2)
    - 1/beta of the monotonicity bound; positive only for valid (alpha,
    beta) pairs, e.g. 0.08 at the defaults (10, 2)."""
    return (alpha**2 - 4.0 * alpha - 2.0) * beta / (2.0 * alpha**2) - 1.0 / beta


def _check_invariants(old, new, alpha=10.0, beta=2.0):
    """Runtime invariants of the iteration, checked from the indices where
    they provably hold.  Raise under a theory-mode penalty, log otherwise."""
    problem = new.problem
    n = problem.manifold.n
    diag = {"k": new.k}
    failures = []

    # dual link y = C st (every iterate >= 1)
    link_err = float(np.linalg.norm(new.y - new.cost_sigma_tilde))
    link_tol = 1e-10 * new.norm_two * math.sqrt(n)
    if link_err > link_tol:
        failures.append(f"dual link ||y - C st|| = {link_err:.3e} > {link_tol:.3e}")

    # merit floor (every iterate >= 1)
    floor = -n * new.norm_inf
    if new.last_G < floor - 1e-9 * (1.0 + abs(floor)):
        failures.append(f"merit {new.last_G:.6e} below floor {floor:.6e}")

    if old.k >= 2:
        dec = old.last_G - new.last_G
        if dec < -1e-9 * (1.0 + abs(old.last_G)):
            failures.append(f"merit increased by {-dec:.3e}")
        d_tilde = float(np.linalg.norm(new.sigma_tilde - old.sigma_tilde))
        d_sigma = float(np.linalg.norm(new.sigma - old.sigma))
        bound = None
        if new.mu > 0.0:
            coeff = new.mu - new.norm_two**2 / new.rho
            if coeff > 0.0:
                bound = coeff * d_tilde**2 + 0.5 * new.rho * d_sigma**2
        else:
            if new.rho_mode == "theory":
                alpha_eff, beta_eff = alpha, beta
            else:
                alpha_eff = new.rho / new.norm_inf if new.norm_inf > 0 else math.inf
                beta_eff = new.rho / new.norm_two if new.norm_two > 0 else math.inf
            kap = kappa_constant(alpha_eff, beta_eff)
            if kap > 0.0 and math.isfinite(kap):
                bound = kap * new.norm_two * d_tilde**2 + 0.5 * new.rho * d_sigma**2
            # row-norm floor of the update point, valid in the same regime
            gamma_floor = 1.0 - 4.0 / alpha_eff - 2.0 / alpha_eff**2
            if problem.manifold.d == 1 and gamma_floor > 0.0:
                if new.last_min_gamma < gamma_floor - 1e-9:
                    failures.append(
                        f"min gamma row norm {new.last_min_gamma:.6f} below "
                        f"floor {gamma_floor:.6f}"
                    )
        if bound is not None and dec < bound - 1e-9:
            failures.append(f"merit decrease {dec:.3e} below bound {bound:.3e}")

    if failures:
        diag["failures"] = failures
        message = f"iteration {new.k}: " + "; ".join(failures)
        if new.rho_mode == "theory":
            raise InvariantViolation(message, diagnostics=diag)
        logger.warning("invariant check: %s", message)


def _record(state, primal, step_tilde, step_sigma, seconds, **extra):
    return TraceRecord(
        k=state.k,
        objective=state.last_objective,
        lagrangian=state.last_G,
        primal_res=primal,
        step_tilde=step_tilde,
        step_sigma=step_sigma,
        min_gamma=state.last_min_gamma,
        seconds=seconds,
        **extra,
    )


def solve(problem, options=None, sigma0=None):
    """Run the splitting solver until the primal residual and the merit
    change fall under their tolerances, the iteration budget runs out, or
    an update block degenerates.

    Parameters
    ----------
    problem : ProblemSpec
    options : SolverOptions, optional
    sigma0 : ndarray, optional
        Warm start on the manifold; the multiplier is reset to C sigma0.

    Returns
    -------
    SolveResult
        Final state, trace (one row every ``trace_every`` iterations plus
        the final iterate) and a Status.  Deterministic for a fixed seed
        and thread count.
    """
    options = options if options is not None else SolverOptions()
    state = init_state(problem, options, sigma0)
    trace = Trace(BASE_COLUMNS)
    start = time.perf_counter()
    status = Status.MAX_ITER
    sqrt_n = math.sqrt(problem.manifold.n)
    prev_G = state.last_G
    for _ in range(options.max_iter):
        try:
            state = step(state, options)
        except AssumptionViolated as exc:
            logger.warning("solve aborted: %s", exc)
            status = Status.ASSUMPTION_VIOLATED
            break
        primal, step_tilde, step_sigma = residuals(state)
        if state.k % options.trace_every == 0:
            trace.append(
                _record(state, primal, step_tilde, step_sigma, time.perf_counter() - start)
            )
        delta_G = abs(state.last_G - prev_G)
        if primal <= options.tol_primal * sqrt_n and delta_G <= options.tol_obj * (
            1.0 + abs(state.last_G)
        ):
            status = Status.CONVERGED
            break
        if (
            options.time_budget is not None
            and time.perf_counter() - start > options.time_budget
        ):
            break
        prev_G = state.last_G
    if not trace.records or trace.records[-1].k != state.k:
        primal, step_tilde, step_sigma = residuals(state)
        trace.append(
            _record(state, primal, step_tilde, step_sigma, time.perf_counter() - start)
        )
    return SolveResult(state=state, trace=trace, status=status)
