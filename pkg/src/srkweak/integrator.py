"""Stepping engine for explicit stochastic Runge-Kutta schemes.

One step of size h from (t, y) for the Ito SDE

    dX = a(t, X) dt + sum_k b^k(t, X) dW^k,   X in R^d,  W in R^m,

reads, with the weights and stage matrices of a CoefficientTableau and
the increments Ihat_k, Ihat_(k,l) of a WeakIncrementBatch,

    y' = y + sum_i alpha_i a(t + c0_i h, H0_i) h
           + sum_{i,k} beta1_i b^k(t + c1_i h, H_i^k) Ihat_k
           + sum_{i,k} beta2_i b^k(t + c1_i h, H_i^k) Ihat_(k,k)/sqrt(h)
           + sum_i sum_{k != l} beta3_i b^k(t + c2_i h, Hh_i^l) Ihat_k
           + sum_i sum_{k != l} beta4_i b^k(t + c2_i h, Hh_i^l)
                                                      Ihat_(k,l)/sqrt(h)

with stage values (all sums over j < i)

    H0_i   = y + sum_j A0_ij a(t + c0_j h, H0_j) h
               + sum_j B0_ij sum_r b^r(t + c1_j h, H_j^r) Ihat_r
    H_i^k  = y + sum_j A1_ij a(t + c0_j h, H0_j) h
               + sum_j B1_ij b^k(t + c1_j h, H_j^k) sqrt(h)
    Hh_i^k = y + sum_j A2_ij a(t + c0_j h, H0_j) h
               + sum_j B2_ij b^k(t + c1_j h, H_j^k) sqrt(h)

Evaluations are shared and skipped aggressively: each drift value
a(H0_i), each diffusion column b^k(H_i^k) and each mixed value
b^k(Hh_i^l) is computed at most once per step, and only when some
nonzero coefficient actually references it.  Since the first stage
satisfies H_1^k = Hh_1^l = y with zero nodes, the mixed values of
stage one are the plain columns b^k(t, y) and are reused rather than
re-evaluated.  evaluation_cost() reports the per-step evaluation and
random-variable counts implied by this policy, and the stepper is
instrumentable to match them exactly.

All stepping code broadcasts over leading axes of the state, so a
whole batch of trajectories advances in one call with identical
results to stepping them one by one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .increments import WeakIncrementBatch, draw, support_batch
from .tableau import Error


class DivergedTrajectoryError(Error):
    """A trajectory left the representable range (NaN or infinity)."""

    def __init__(self, t, y=None, count=None, total=None):
        if count is None:
            msg = "trajectory diverged at t = %r" % (t,)
        else:
            msg = "%d of %d trajectories diverged by t = %r" % (count, total, t)
        super().__init__(msg)
        self.t = t
        self.y = y
        self.count = count


@dataclass(frozen=True)
class SdeProblem:
    """An Ito SDE with fixed initial data on a time interval.

    drift(t, y) and diffusion_column(t, y, j) map a state array of
    shape (..., d) to an array of the same shape; j is the 0-based
    index of the driving Wiener component.  Both callables must
    broadcast over leading axes of y.

    exact_functional, when present, maps t to the exact value of
    E f(X_t) for the functional f the problem is studied with.
    """

    d: int
    m: int
    drift: object
    diffusion_column: object
    x0: np.ndarray
    t0: float = 0.0
    t_end: float = 1.0
    exact_functional: object = None

    def __post_init__(self):
        for key in ("d", "m"):
            val = getattr(self, key)
            if isinstance(val, bool) or not isinstance(val, (int, np.integer)) \
                    or val < 1:
                raise ValueError("%s must be an integer >= 1, got %r"
                                 % (key, val))
            object.__setattr__(self, key, int(val))
        if not callable(self.drift) or not callable(self.diffusion_column):
            raise ValueError("drift and diffusion_column must be callable")
        x0 = np.asarray(self.x0, dtype=float).copy()
        if x0.shape != (self.d,):
            raise ValueError("x0 must have shape (%d,), got %r"
                             % (self.d, x0.shape))
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be finite")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t_end", float(self.t_end))
        if not self.t_end > self.t0:
            raise ValueError("t_end must exceed t0")


@dataclass(frozen=True)
class StepContext:
    """Input of one scheme step: time, step size, state and increments."""

    t: float
    h: float
    y: np.ndarray
    increments: WeakIncrementBatch


@dataclass(frozen=True)
class EvaluationCost:
    """Per-step, per-trajectory work of a scheme applied with m noises."""

    drift_evals: int
    diffusion_column_evals: int
    random_draws: int


@dataclass(frozen=True)
class _UsagePlan:
    """Which stage evaluations a tableau actually references.

    need_a[i]: the drift value a(H0_i) is used somewhere.
    need_b[i]: the m diffusion columns b^k(H_i^k) are used somewhere.
    need_bhat[i]: the mixed values b^k(Hh_i^l), k != l, are used; for
      i = 0 they coincide with the stage-one plain columns and are
      reused at no extra evaluation cost.
    """

    m: int
    need_a: tuple
    need_b: tuple
    need_bhat: tuple
    needs_ihat: bool
    needs_offdiag: bool


def usage_plan(tab, m):
    """Compute the evaluation plan of a tableau for m Wiener components."""
    s = tab.s
    need_a = [bool(tab.alpha[i]) for i in range(s)]
    need_b = [bool(tab.beta1[i]) or bool(tab.beta2[i]) for i in range(s)]
    mixed = m >= 2
    need_bhat = [mixed and (bool(tab.beta3[i]) or bool(tab.beta4[i]))
                 for i in range(s)]
    # propagate through stage dependencies until stable
    changed = True
    while changed:
        changed = False
        for i in range(s):
            wants_h0 = need_a[i]
            wants_hk = need_b[i]
            wants_hhat = need_bhat[i] and i > 0  # stage one needs nothing
            for j in range(i):
                if wants_h0:
                    if tab.A0[i, j] and not need_a[j]:
                        need_a[j] = changed = True
                    if tab.B0[i, j] and not need_b[j]:
                        need_b[j] = changed = True
                if wants_hk:
                    if tab.A1[i, j] and not need_a[j]:
                        need_a[j] = changed = True
                    if tab.B1[i, j] and not need_b[j]:
                        need_b[j] = changed = True
                if wants_hhat:
                    if tab.A2[i, j] and not need_a[j]:
                        need_a[j] = changed = True
                    if tab.B2[i, j] and not need_b[j]:
                        need_b[j] = changed = True
        if need_bhat[0] and not need_b[0]:
            # mixed values of stage one reuse the plain columns
            need_b[0] = changed = True
    uses_b0 = any(need_a[i] and tab.B0[i, j] and need_b[j]
                  for i in range(s) for j in range(i))
    needs_ihat = (any(tab.beta1) or any(tab.beta2) or any(need_bhat)
                  or uses_b0)
    needs_offdiag = mixed and any(tab.beta4)
    return _UsagePlan(m=m, need_a=tuple(need_a), need_b=tuple(need_b),
                      need_bhat=tuple(need_bhat), needs_ihat=needs_ihat,
                      needs_offdiag=needs_offdiag)


def evaluation_cost(tab, m):
    """Count the per-step work of a scheme for an m-noise problem.

    diffusion_column_evals counts single-column evaluations of b; the
    mixed stage values contribute m(m-1) per needed stage beyond the
    first, whose values are reused.  random_draws counts the variates
    consumed per step, m for the three-point part plus m(m-1)/2 sign
    variates when some beta4 weight is nonzero.

    Args:
      tab: CoefficientTableau
      m: number of driving Wiener components, >= 1

    Returns:
      EvaluationCost
    """
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError("m must be an integer >= 1, got %r" % (m,))
    plan = usage_plan(tab, int(m))
    drift = sum(plan.need_a)
    diff = m * sum(plan.need_b)
    diff += m * (m - 1) * sum(plan.need_bhat[1:])
    draws = m * plan.needs_ihat
    if plan.needs_offdiag:
        draws += m * (m - 1) // 2
    return EvaluationCost(drift_evals=int(drift),
                          diffusion_column_evals=int(diff),
                          random_draws=int(draws))


def srk_step(tab, prob, ctx):
    """Advance the state by one step of the scheme.

    Args:
      tab: CoefficientTableau
      prob: SdeProblem (or anything with d, m, drift, diffusion_column)
      ctx: StepContext; ctx.y may carry leading batch axes, and the
        increment arrays must broadcast against them

    Returns:
      the state after the step, same shape as ctx.y

    Raises:
      ValueError: if the increments do not match the problem or step
    """
    inc = ctx.increments
    m = prob.m
    if inc.m != m:
        raise ValueError("increments carry m = %d but the problem has m = %d"
                         % (inc.m, m))
    if inc.h != ctx.h:
        raise ValueError("increments were drawn for h = %r, step has h = %r"
                         % (inc.h, ctx.h))
    s = tab.s
    t, h = ctx.t, ctx.h
    y = np.asarray(ctx.y, dtype=float)
    sqrth = np.sqrt(h)
    plan = usage_plan(tab, m)
    ihat = inc.Ihat

    a_val = [None] * s      # a(H0_i), shape (..., d)
    b_val = [None] * s      # b^k(H_i^k) stacked over k, shape (..., m, d)
    b_dot_i = [None] * s    # sum_r b^r(H_j^r) Ihat_r, shape (..., d)
    bhat_val = [None] * s   # b^k(Hh_i^l), shape (..., m, m, d), axes (k, l)

    for i in range(s):
        if plan.need_a[i]:
            h0 = y
            for j in range(i):
                if tab.A0[i, j]:
                    h0 = h0 + (tab.A0[i, j] * h) * a_val[j]
                if tab.B0[i, j]:
                    h0 = h0 + tab.B0[i, j] * b_dot_i[j]
            a_val[i] = np.asarray(prob.drift(t + tab.c0[i] * h, h0),
                                  dtype=float)
        if plan.need_b[i]:
            hk = y[..., None, :]
            for j in range(i):
                if tab.A1[i, j]:
                    hk = hk + (tab.A1[i, j] * h) * a_val[j][..., None, :]
                if tab.B1[i, j]:
                    hk = hk + (tab.B1[i, j] * sqrth) * b_val[j]
            hk = np.broadcast_to(hk, hk.shape[:-2] + (m, hk.shape[-1]))
            tnode = t + tab.c1v[i] * h
            cols = [np.asarray(prob.diffusion_column(tnode, hk[..., k, :], k),
                               dtype=float) for k in range(m)]
            b_val[i] = np.stack(cols, axis=-2)
            if plan.needs_ihat:
                b_dot_i[i] = np.einsum("...kd,...k->...d", b_val[i], ihat)
            else:
                b_dot_i[i] = 0.0 * b_val[i][..., 0, :]
        if plan.need_bhat[i]:
            if i == 0:
                # Hh_1^l = H_1^k = y and both node offsets vanish, so
                # b^k(Hh_1^l) = b^k(t, y) for every l; reuse the columns
                bhat_val[0] = np.broadcast_to(
                    b_val[0][..., :, None, :],
                    b_val[0].shape[:-2] + (m, m, b_val[0].shape[-1]))
                continue
            hh = y[..., None, :]
            for j in range(i):
                if tab.A2[i, j]:
                    hh = hh + (tab.A2[i, j] * h) * a_val[j][..., None, :]
                if tab.B2[i, j]:
                    hh = hh + (tab.B2[i, j] * sqrth) * b_val[j]
            hh = np.broadcast_to(hh, hh.shape[:-2] + (m, hh.shape[-1]))
            tnode = t + tab.c2v[i] * h
            vals = np.zeros(hh.shape[:-2] + (m, m) + hh.shape[-1:])
            for l in range(m):
                point = hh[..., l, :]
                for k in range(m):
                    if k != l:
                        vals[..., k, l, :] = np.asarray(
                            prob.diffusion_column(tnode, point, k),
                            dtype=float)
            bhat_val[i] = vals

    out = y
    for i in range(s):
        if tab.alpha[i]:
            out = out + (tab.alpha[i] * h) * a_val[i]
    if any(tab.beta1):
        for i in range(s):
            if tab.beta1[i]:
                out = out + tab.beta1[i] * b_dot_i[i]
    if any(tab.beta2):
        ikk = 0.5 * (ihat ** 2 - h) / sqrth  # Ihat_(k,k)/sqrt(h)
        for i in range(s):
            if tab.beta2[i]:
                out = out + tab.beta2[i] * np.einsum(
                    "...kd,...k->...d", b_val[i], ikk)
    if any(plan.need_bhat):
        pair = inc.ihat_pair() / sqrth  # Ihat_(k,l)/sqrt(h)
        off = 1.0 - np.eye(m)
        col = ihat[..., :, None] * np.ones(m)  # Ihat_k along axis k
        for i in range(s):
            if plan.need_bhat[i]:
                w = (tab.beta3[i] * col + tab.beta4[i] * pair) * off
                out = out + np.einsum("...kld,...kl->...d", bhat_val[i], w)
    return out


def simulate_path(tab, prob, n_steps, stream, t_end=None):
    """Simulate one trajectory on a uniform grid and return its endpoint.

    Args:
      tab: CoefficientTableau
      prob: SdeProblem
      n_steps: number of uniform steps over [t0, t_end], >= 1
      stream: generator for the increment draws
      t_end: end of the simulated interval, defaults to prob.t_end

    Returns:
      state at t_end, shape (d,)

    Raises:
      DivergedTrajectoryError: if the state leaves the finite range
    """
    y = _run_steps(tab, prob, n_steps, 1, stream, t_end, raise_on_divergence=True)[0]
    return y[0]


def terminal_values(tab, prob, n_steps, n_paths, stream, t_end=None):
    """Simulate a batch of independent trajectories to the interval end.

    Diverged trajectories are flagged and frozen at the initial state
    so the rest of the batch continues unaffected; callers decide how
    to treat them.  The increment draws do not depend on which
    trajectories diverge.

    Args:
      tab: CoefficientTableau
      prob: SdeProblem
      n_steps: number of uniform steps over [t0, t_end], >= 1
      n_paths: batch size, >= 1
      stream: generator for the increment draws
      t_end: end of the simulated interval, defaults to prob.t_end

    Returns:
      (values, diverged): states of shape (n_paths, d) and a boolean
      mask of shape (n_paths,) marking trajectories that left the
      finite range
    """
    return _run_steps(tab, prob, n_steps, n_paths, stream, t_end,
                      raise_on_divergence=False)


def _run_steps(tab, prob, n_steps, n_paths, stream, t_end,
               raise_on_divergence):
    if not isinstance(n_steps, (int, np.integer)) or n_steps < 1:
        raise ValueError("n_steps must be an integer >= 1, got %r"
                         % (n_steps,))
    end = prob.t_end if t_end is None else float(t_end)
    if not end > prob.t0:
        raise ValueError("t_end must exceed t0")
    h = (end - prob.t0) / n_steps
    plan = usage_plan(tab, prob.m)
    y = np.broadcast_to(prob.x0, (n_paths, prob.d)).copy()
    diverged = np.zeros(n_paths, dtype=bool)
    t = prob.t0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(n_steps):
            if plan.needs_ihat:
                inc = draw(prob.m, h, stream, size=(n_paths,),
                           with_offdiag=plan.needs_offdiag)
            else:
                zeros_i = np.zeros((n_paths, prob.m))
                v = np.zeros((n_paths, prob.m, prob.m))
                v[:, np.arange(prob.m), np.arange(prob.m)] = -h
                inc = WeakIncrementBatch(h=h, Ihat=zeros_i, V=v)
            y = srk_step(tab, prob, StepContext(t=t, h=h, y=y,
                                                increments=inc))
            t = prob.t0 + (n + 1) * h
            bad = ~np.all(np.isfinite(y), axis=-1)
            fresh = bad & ~diverged
            if fresh.any():
                if raise_on_divergence:
                    idx = int(np.argmax(fresh))
                    raise DivergedTrajectoryError(t=t, y=y[idx])
                diverged |= fresh
            if diverged.any():
                y[diverged] = prob.x0  # freeze, the mask keeps the record
    return y, diverged


def exact_one_step_expectation(tab, prob, f, h, t=None, y=None):
    """Compute E f(Y) after one step exactly by support enumeration.

    The joint increment law has finite support, so the expectation is
    a finite probability-weighted sum; all support points are advanced
    in one vectorised step.

    Args:
      tab: CoefficientTableau
      prob: SdeProblem with m <= 4
      f: functional mapping states (..., d) to values (...)
      h: step size, > 0
      t: step start time, defaults to prob.t0
      y: step start state of shape (d,), defaults to prob.x0

    Returns:
      float, the exact expectation over the increment law
    """
    t = prob.t0 if t is None else float(t)
    y = prob.x0 if y is None else np.asarray(y, dtype=float)
    batch, probs = support_batch(prob.m, h)
    states = np.broadcast_to(y, (len(probs), prob.d))
    out = srk_step(tab, prob, StepContext(t=t, h=float(h), y=states,
                                          increments=batch))
    vals = np.asarray(f(out), dtype=float)
    return float(probs @ vals)


def extrapolated_em(prob, f, n_steps, stream_coarse, stream_fine, n_paths,
                    chunk=65536, t_end=None):
    """Estimate E f(X_t) by extrapolating two Euler-Maruyama levels.

    Runs the one-stage order-(1,1) scheme with n_steps and with
    2 n_steps steps on independent streams and combines the Monte
    Carlo means as 2 u_fine - u_coarse, which cancels the leading
    error term.

    Args:
      prob: SdeProblem
      f: functional mapping states (..., d) to values (...)
      n_steps: steps of the coarse level, >= 1
      stream_coarse: generator for the coarse level
      stream_fine: independent generator for the fine level
      n_paths: trajectories per level
      chunk: batch size used internally
      t_end: end of the simulated interval, defaults to prob.t_end

    Returns:
      float

    Raises:
      DivergedTrajectoryError: if any trajectory of either level
        diverges
    """
    from .families import named_scheme

    tab = named_scheme("EM")
    means = []
    for steps, stream in ((n_steps, stream_coarse),
                          (2 * n_steps, stream_fine)):
        total = 0.0
        done = 0
        while done < n_paths:
            n = min(chunk, n_paths - done)
            values, diverged = terminal_values(tab, prob, steps, n, stream,
                                               t_end=t_end)
            if diverged.any():
                raise DivergedTrajectoryError(
                    t=prob.t_end if t_end is None else t_end,
                    count=int(diverged.sum()), total=n)
            total += float(np.sum(np.asarray(f(values), dtype=float)))
            done += n
        means.append(total / n_paths)
    u_coarse, u_fine = means
    return 2.0 * u_fine - u_coarse
