"""Latent recovery for generator networks.

Realizable observations are inverted exactly, one layer at a time: the
coordinates above threshold pin down equality constraints whose solution is
checked against the full sign pattern.  Noisy observations go through
error-bound linear programs (uniform-bound, per-coordinate, or relaxed
objective variants; each with leaky-activation bands) wrapped in a tolerance
growth loop: start from an optimistic error guess and multiply by ``alpha``
until the program turns feasible.

Multi-layer inversion walks from the output layer back to the latent code,
feeding each recovered input to the next-shallower layer as its observation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import lp
from .linalg import (DimensionMismatch, Matrix, RankDeficient, SingularMatrix,
                     Vector, least_squares, norm_l1, norm_l2, norm_linf,
                     solve_square)
from .lp import LpStatus
from .model import GeneratorNetwork, Layer, forward

REALIZABLE_TOLERANCE = 1e-8
ACTIVE_THRESHOLD_SCALE = 1e-9


class InversionError(Exception):
    """Base class for inversion failures."""


class InsufficientActiveRows(InversionError):
    """Fewer above-threshold observation rows than latent dimensions."""


class NotRealizable(InversionError):
    """The observation is inconsistent with the layer's range."""


class NeverFeasible(InversionError):
    """No feasible error-bound program within the round budget."""


class UnboundedRelaxation(InversionError):
    """The relaxed objective admits an unbounded improving direction."""


@dataclass(frozen=True)
class LpInvertConfig:
    """Knobs for the LP inversion loops.

    ``epsilon_rule``: "adaptive" starts every layer at ``epsilon_init`` and
    relies on the growth loop; "theoretical" pre-scales layer i's starting
    guess by (2/assumed_c)^(d-i) so deeper recoveries absorb the amplified
    error of the layers already inverted.
    """

    epsilon_init: float = 0.1
    alpha: float = 1.2
    epsilon_rule: str = "adaptive"
    assumed_c: float = 1.0
    max_epsilon_rounds: int = 50

    def __post_init__(self):
        if not self.epsilon_init > 0:
            raise ValueError("epsilon_init must be positive")
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")
        if self.epsilon_rule not in ("adaptive", "theoretical"):
            raise ValueError(f"unknown epsilon_rule {self.epsilon_rule!r}")
        if not (0.0 < self.assumed_c <= 2.0):
            raise ValueError("assumed_c must lie in (0, 2]")
        if self.max_epsilon_rounds < 1:
            raise ValueError("max_epsilon_rounds must be at least 1")


@dataclass(frozen=True)
class LayerInversionOutcome:
    recovered: Vector
    epsilon_used: float
    delta_or_l1: float
    active_set_size: int
    status_trail: tuple[tuple[float, str], ...] = ()
    budget_exhausted: bool = False
    bias_adjusted: bool = False


@dataclass(frozen=True)
class InversionReport:
    latent: Vector
    layer_outcomes: tuple[LayerInversionOutcome, ...]  # deepest layer first
    lp_solves: int
    success: bool
    residual_linf: float
    residual_l1: float
    residual_l2: float
    method: str
    iterations: int = 0
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class BoundReport:
    depth: int
    epsilon: float
    assumed_c: float
    norm: str
    value: float


def theoretical_bound(depth: int, eps: float, c: float, norm: str = "linf") -> BoundReport:
    """Worst-case error amplification (2/c)^depth * eps for either norm."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if not (0.0 < c <= 2.0):
        raise ValueError("c must lie in (0, 2]")
    if norm not in ("linf", "l1"):
        raise ValueError(f"norm must be 'linf' or 'l1', got {norm!r}")
    return BoundReport(depth, eps, c, norm, (2.0 / c) ** depth * eps)


def _first_independent_rows(W: np.ndarray, k: int) -> np.ndarray:
    """Indices of the first k rows (in order) that are linearly independent."""
    q = np.zeros((k, W.shape[1]))
    got = 0
    picked = []
    for i in range(W.shape[0]):
        w = W[i]
        r = w - q[:got].T @ (q[:got] @ w)
        r -= q[:got].T @ (q[:got] @ r)  # second pass keeps the basis orthonormal
        nr = np.linalg.norm(r)
        if nr > 1e-10 * (1.0 + np.linalg.norm(w)):
            q[got] = r / nr
            got += 1
            picked.append(i)
            if got == k:
                return np.asarray(picked)
    raise RankDeficient(f"active rows span only {got} of {k} input dimensions")


def invert_layer_realizable(layer: Layer, x: Vector,
                            tol: float = REALIZABLE_TOLERANCE) -> Vector:
    """Exact single-layer inversion of a realizable ReLU observation.

    Solves the equality system given by the active coordinates and verifies
    the full sign pattern: active rows must be reproduced within tolerance and
    inactive pre-activations must not be positive.
    """
    if layer.activation.kind != "relu":
        raise InversionError("realizable active-set inversion expects a ReLU layer")
    if x.dim != layer.out_dim:
        raise DimensionMismatch(f"observation dim {x.dim} vs layer output {layer.out_dim}")
    scale = 1.0 + norm_linf(x)
    thresh = ACTIVE_THRESHOLD_SCALE * scale
    xs = x.data
    if np.any(xs < -thresh):
        raise NotRealizable("a ReLU output cannot have negative entries")
    active = np.nonzero(xs > thresh)[0]
    k = layer.in_dim
    if active.size < k:
        raise InsufficientActiveRows(
            f"{active.size} active coordinates, need at least {k}")
    W = layer.weights.data
    b = layer.bias.data
    w_act = W[active]
    rhs = xs[active] - b[active]

    rows = _first_independent_rows(w_act, k)
    candidates: list[np.ndarray] = []
    try:
        candidates.append(
            solve_square(Matrix.from_array(w_act[rows]), Vector(rhs[rows])).data)
    except SingularMatrix:
        pass
    if active.size > k:
        try:
            sol, _ = least_squares(Matrix.from_array(w_act), Vector(rhs))
            candidates.append(sol.data)
        except RankDeficient:
            pass
    if not candidates:
        raise RankDeficient("no well-conditioned solve over the active rows")
    z = min(candidates, key=lambda c: norm_linf(w_act @ c - rhs))

    check_tol = tol * scale
    if norm_linf(w_act @ z - rhs) > check_tol:
        raise NotRealizable("active equalities cannot be met; observation is "
                            "outside the layer's range or the threshold is wrong")
    inactive = np.setdiff1d(np.arange(layer.out_dim), active, assume_unique=True)
    if inactive.size and np.max(W[inactive] @ z + b[inactive]) > check_tol:
        raise NotRealizable("an inactive coordinate would have fired")
    return Vector(z)


def invert_layer_leaky_exact(layer: Layer, x: Vector,
                             tol: float = REALIZABLE_TOLERANCE) -> Vector:
    """Exact single-layer inversion for leaky activations.

    The activation is bijective coordinatewise, so the pre-activation is known
    exactly and the input follows from one least-squares solve; an oversized
    residual certifies that the observation is not realizable.
    """
    if layer.activation.kind != "leaky":
        raise InversionError("exact bijective inversion expects a leaky layer")
    if x.dim != layer.out_dim:
        raise DimensionMismatch(f"observation dim {x.dim} vs layer output {layer.out_dim}")
    pre = layer.activation.invert(x.data)
    target = pre - layer.bias.data
    sol, _ = least_squares(layer.weights, Vector(target))
    resid = norm_linf(layer.weights.data @ sol.data - target)
    if resid > tol * (1.0 + norm_linf(x)):
        raise NotRealizable(f"pre-activation residual {resid:.3e} certifies inconsistency")
    return sol


def invert_realizable(net: GeneratorNetwork, x: Vector,
                      tol: float = REALIZABLE_TOLERANCE) -> InversionReport:
    """Layer-wise exact inversion of a realizable observation, deepest first."""
    if x.dim != net.output_dim:
        raise DimensionMismatch(f"observation dim {x.dim} vs network output {net.output_dim}")
    obs = x
    outcomes = []
    for idx in reversed(range(net.depth)):
        l = net.layers[idx]
        try:
            if l.activation.kind == "relu":
                z = invert_layer_realizable(l, obs, tol)
            else:
                z = invert_layer_leaky_exact(l, obs, tol)
        except (InversionError, RankDeficient, SingularMatrix) as e:
            raise type(e)(f"layer {idx + 1}: {e}") from e
        layer_resid = norm_linf(l.apply(z.data) - obs.data)
        thresh = ACTIVE_THRESHOLD_SCALE * (1.0 + norm_linf(obs))
        outcomes.append(LayerInversionOutcome(
            recovered=z,
            epsilon_used=0.0,
            delta_or_l1=layer_resid,
            active_set_size=int(np.count_nonzero(obs.data > thresh)),
            bias_adjusted=bool(np.any(l.bias.data != 0.0)),
        ))
        obs = z
    latent = obs
    diff = forward(net, latent).data - x.data
    success = norm_linf(diff) <= tol * (1.0 + norm_linf(x))
    return InversionReport(
        latent=latent, layer_outcomes=tuple(outcomes), lp_solves=0, success=success,
        residual_linf=norm_linf(diff), residual_l1=norm_l1(diff), residual_l2=norm_l2(diff),
        method="exact")


# ---------------------------------------------------------------------------
# error-bound linear programs
# ---------------------------------------------------------------------------


def _adjusted_observation(layer: Layer, x: Vector) -> tuple[np.ndarray, bool]:
    """Observation with the bias folded into the right-hand side; band
    membership is judged on the adjusted values."""
    if x.dim != layer.out_dim:
        raise DimensionMismatch(f"observation dim {x.dim} vs layer output {layer.out_dim}")
    bias_adjusted = bool(np.any(layer.bias.data != 0.0))
    return x.data - layer.bias.data, bias_adjusted


def _free_bounds(k: int) -> list[tuple[Optional[float], Optional[float]]]:
    return [(None, None)] * k


def _linf_problem_relu(W: np.ndarray, y: np.ndarray, eps: float) -> lp.LpProblem:
    k = W.shape[1]
    rows = []
    for j in range(W.shape[0]):
        w = W[j]
        upper = np.append(w, -1.0)
        rows.append(lp.LinearConstraint(Vector(upper), "<=", float(y[j])))
        if y[j] > eps:
            lower = np.append(-w, -1.0)
            rows.append(lp.LinearConstraint(Vector(lower), "<=", float(-y[j])))
    objective = Vector(np.append(np.zeros(k), 1.0))
    bounds = _free_bounds(k) + [(0.0, eps)]
    return lp.LpProblem("min", objective, tuple(rows), tuple(bounds))


def _linf_problem_leaky(W: np.ndarray, y: np.ndarray, eps: float, c: float) -> lp.LpProblem:
    k = W.shape[1]
    rows = []
    for j in range(W.shape[0]):
        w = W[j]
        if y[j] > eps:
            rows.append(lp.LinearConstraint(Vector(np.append(w, -1.0)), "<=", float(y[j])))
            rows.append(lp.LinearConstraint(Vector(np.append(-w, -1.0)), "<=", float(-y[j])))
        elif y[j] > -eps:
            rows.append(lp.LinearConstraint(Vector(np.append(w, -1.0)), "<=", float(y[j])))
            rows.append(lp.LinearConstraint(Vector(np.append(-w, -1.0 / c)), "<=",
                                            float(-y[j] / c)))
        else:
            rows.append(lp.LinearConstraint(Vector(np.append(c * w, -1.0)), "<=", float(y[j])))
            rows.append(lp.LinearConstraint(Vector(np.append(-c * w, -1.0)), "<=", float(-y[j])))
    objective = Vector(np.append(np.zeros(k), 1.0))
    bounds = _free_bounds(k) + [(0.0, eps)]
    return lp.LpProblem("min", objective, tuple(rows), tuple(bounds))


def _l1_problem_relu(W: np.ndarray, y: np.ndarray, eps: float) -> lp.LpProblem:
    """Deviation-split form: one equality row per coordinate with fresh
    overshoot/undershoot variables, w.z - u_j + v_j = y_j.  Coordinates above
    the band threshold pay for both deviation directions; the rest only for
    overshoot (their lower side is unconstrained).  The optimal objective
    equals the summed per-coordinate deviations of the banded program, and
    the singleton u/v columns give the solver a feasible crash basis."""
    n, k = W.shape
    rows = []
    u_cost = np.ones(n)
    v_cost = (y > eps).astype(float)
    for j in range(n):
        coeffs = np.zeros(k + 2 * n)
        coeffs[:k] = W[j]
        coeffs[k + 2 * j] = -1.0      # u_j: overshoot
        coeffs[k + 2 * j + 1] = 1.0   # v_j: undershoot
        rows.append(lp.LinearConstraint(Vector(coeffs), "=", float(y[j])))
    objective = np.zeros(k + 2 * n)
    objective[k::2] = u_cost
    objective[k + 1::2] = v_cost
    bounds = _free_bounds(k) + [(0.0, None)] * (2 * n)
    return lp.LpProblem("min", Vector(objective), tuple(rows), tuple(bounds))


def _l1_problem_leaky(W: np.ndarray, y: np.ndarray, eps: float, c: float) -> lp.LpProblem:
    """Three-band variant.  Outer bands have a single residual form (w.z for
    positive observations, c*w.z for strongly negative ones) and use the same
    deviation split as the ReLU program; the narrow middle band couples one
    shared deviation variable to both a w.z and a (1/c)-scaled lower
    constraint, so it keeps its two inequality rows."""
    n, k = W.shape
    band_mid = np.nonzero((y >= -eps) & (y <= eps))[0]
    mid_pos = {int(j): i for i, j in enumerate(band_mid)}
    nv = k + 2 * n + len(band_mid)
    rows = []
    objective = np.zeros(nv)
    for j in range(n):
        if j in mid_pos:
            e_at = k + 2 * n + mid_pos[j]
            upper = np.zeros(nv)
            upper[:k] = W[j]
            upper[e_at] = -1.0
            rows.append(lp.LinearConstraint(Vector(upper), "<=", float(y[j])))
            lower = np.zeros(nv)
            lower[:k] = -W[j]
            lower[e_at] = -1.0 / c
            rows.append(lp.LinearConstraint(Vector(lower), "<=", float(-y[j] / c)))
            objective[e_at] = 1.0
            continue
        scale = 1.0 if y[j] > eps else c
        coeffs = np.zeros(nv)
        coeffs[:k] = scale * W[j]
        coeffs[k + 2 * j] = -1.0
        coeffs[k + 2 * j + 1] = 1.0
        rows.append(lp.LinearConstraint(Vector(coeffs), "=", float(y[j])))
        objective[k + 2 * j] = 1.0
        objective[k + 2 * j + 1] = 1.0
    bounds = _free_bounds(k) + [(0.0, None)] * (nv - k)
    return lp.LpProblem("min", Vector(objective), tuple(rows), tuple(bounds))


def _relaxed_problem_relu(W: np.ndarray, y: np.ndarray, eps: float) -> lp.LpProblem:
    k = W.shape[1]
    objective = Vector(W.T @ np.maximum(y, 0.0))
    rows = [lp.LinearConstraint(Vector(W[j]), "<=", float(y[j] + eps))
            for j in range(W.shape[0])]
    return lp.LpProblem("max", objective, tuple(rows), tuple(_free_bounds(k)))


def _relaxed_problem_leaky(W: np.ndarray, y: np.ndarray, eps: float, c: float) -> lp.LpProblem:
    k = W.shape[1]
    objective = Vector(W.T @ y)
    rows = []
    for j in range(W.shape[0]):
        hi = max(y[j] + eps, 0.0)
        lo = min(y[j] - eps, 0.0) / c
        rows.append(lp.LinearConstraint(Vector(W[j]), "<=", float(hi)))
        rows.append(lp.LinearConstraint(Vector(-W[j]), "<=", float(-lo)))
    return lp.LpProblem("max", objective, tuple(rows), tuple(_free_bounds(k)))


def _grow_until_feasible(layer: Layer, x: Vector, cfg: LpInvertConfig,
                         build: Callable[[np.ndarray, np.ndarray, float], lp.LpProblem],
                         ) -> LayerInversionOutcome:
    """Uniform-bound loop: return the first feasible round; growing the guess
    further only relaxes the program, so the earliest feasible round carries
    the tightest certificate."""
    y, bias_adjusted = _adjusted_observation(layer, x)
    W = layer.weights.data
    k = layer.in_dim
    eps = cfg.epsilon_init
    trail: list[tuple[float, str]] = []
    for _ in range(cfg.max_epsilon_rounds):
        sol = lp.solve(build(W, y, eps))
        trail.append((eps, sol.status.value))
        if sol.status is LpStatus.OPTIMAL:
            return LayerInversionOutcome(
                recovered=Vector(sol.point.data[:k]),
                epsilon_used=eps,
                delta_or_l1=float(sol.objective),
                active_set_size=int(np.count_nonzero(y > eps)),
                status_trail=tuple(trail),
                bias_adjusted=bias_adjusted)
        if sol.status is LpStatus.UNBOUNDED:
            raise InversionError("uniform-bound program reported unbounded")
        eps *= cfg.alpha
    raise NeverFeasible(
        f"no feasible program after {cfg.max_epsilon_rounds} rounds "
        f"(last tolerance {eps / cfg.alpha:.4g})")


def invert_layer_linf(layer: Layer, x: Vector, cfg: LpInvertConfig) -> LayerInversionOutcome:
    """Minimize the uniform deviation of the active rows, ReLU constraints."""
    if layer.activation.kind != "relu":
        raise InversionError("ReLU constraint set requested for a non-ReLU layer")
    return _grow_until_feasible(layer, x, cfg, _linf_problem_relu)


def invert_layer_linf_leaky(layer: Layer, x: Vector,
                            cfg: LpInvertConfig) -> LayerInversionOutcome:
    """Uniform-deviation program with three sign bands for leaky layers."""
    if layer.activation.kind != "leaky":
        raise InversionError("leaky constraint set requested for a non-leaky layer")
    c = layer.activation.leaky_slope
    return _grow_until_feasible(
        layer, x, cfg, lambda W, y, eps: _linf_problem_leaky(W, y, eps, c))


def _l1_loop(layer: Layer, x: Vector, cfg: LpInvertConfig,
             build: Callable[[np.ndarray, np.ndarray, float], lp.LpProblem],
             ) -> LayerInversionOutcome:
    """Per-coordinate deviation loop: grow the band threshold every round and
    stop once the layer-forward l1 error stops improving, returning the
    previous round.  On budget exhaustion the best round is returned, flagged
    instead of raised: an approximate answer beats none."""
    y, bias_adjusted = _adjusted_observation(layer, x)
    W = layer.weights.data
    k = layer.in_dim
    eps = cfg.epsilon_init
    trail: list[tuple[float, str]] = []
    prev = None
    best = None
    for _ in range(cfg.max_epsilon_rounds):
        sol = lp.solve(build(W, y, eps))
        trail.append((eps, sol.status.value))
        if sol.status is not LpStatus.OPTIMAL:
            raise InversionError(f"per-coordinate program unexpectedly {sol.status.value}")
        z = sol.point.data[:k]
        entry = {
            "z": z, "eps": eps, "sum_e": float(sol.objective),
            "l1": norm_l1(layer.apply(z) - x.data),
            "active": int(np.count_nonzero(y > eps)),
        }
        if prev is not None and entry["l1"] >= prev["l1"]:
            return _l1_outcome(prev, trail, bias_adjusted, exhausted=False)
        if best is None or entry["l1"] < best["l1"]:
            best = entry
        prev = entry
        eps *= cfg.alpha
    return _l1_outcome(best, trail, bias_adjusted, exhausted=True)


def _l1_outcome(entry, trail, bias_adjusted, exhausted) -> LayerInversionOutcome:
    return LayerInversionOutcome(
        recovered=Vector(entry["z"]),
        epsilon_used=entry["eps"],
        delta_or_l1=entry["sum_e"],
        active_set_size=entry["active"],
        status_trail=tuple(trail),
        budget_exhausted=exhausted,
        bias_adjusted=bias_adjusted)


def invert_layer_l1(layer: Layer, x: Vector, cfg: LpInvertConfig) -> LayerInversionOutcome:
    """Minimize the summed per-coordinate deviations, ReLU constraints."""
    if layer.activation.kind != "relu":
        raise InversionError("ReLU constraint set requested for a non-ReLU layer")
    return _l1_loop(layer, x, cfg, _l1_problem_relu)


def invert_layer_l1_leaky(layer: Layer, x: Vector,
                          cfg: LpInvertConfig) -> LayerInversionOutcome:
    """Summed-deviation program with three sign bands for leaky layers."""
    if layer.activation.kind != "leaky":
        raise InversionError("leaky constraint set requested for a non-leaky layer")
    c = layer.activation.leaky_slope
    return _l1_loop(layer, x, cfg, lambda W, y, eps: _l1_problem_leaky(W, y, eps, c))


def invert_layer_relaxed(layer: Layer, x: Vector,
                         cfg: LpInvertConfig) -> LayerInversionOutcome:
    """Sign-tolerant relaxation: only upper bounds constrain the pre-activation
    and large observations pull their rows up through the objective.  Stops
    after the first two rounds once the forward l1 error stops improving."""
    y, bias_adjusted = _adjusted_observation(layer, x)
    W = layer.weights.data
    k = layer.in_dim
    act = layer.activation
    if act.kind == "relu":
        build = _relaxed_problem_relu
    else:
        c = act.leaky_slope
        build = lambda W_, y_, eps_: _relaxed_problem_leaky(W_, y_, eps_, c)
    eps = cfg.epsilon_init
    trail: list[tuple[float, str]] = []
    prev = None
    best = None
    for t in range(1, cfg.max_epsilon_rounds + 1):
        sol = lp.solve(build(W, y, eps))
        trail.append((eps, sol.status.value))
        if sol.status is LpStatus.UNBOUNDED:
            raise UnboundedRelaxation("relaxed objective is unbounded; some direction "
                                      "improves the objective without hitting any bound")
        if sol.status is LpStatus.INFEASIBLE:
            prev = None  # the stop rule needs the immediately previous round feasible
            eps *= cfg.alpha
            continue
        z = sol.point.data[:k]
        entry = {
            "z": z, "eps": eps, "sum_e": float(sol.objective),
            "l1": norm_l1(act.apply(W @ z + layer.bias.data) - x.data),
            "active": int(np.count_nonzero(y > eps)),
        }
        if t > 2 and prev is not None and entry["l1"] >= prev["l1"]:
            return _l1_outcome(prev, trail, bias_adjusted, exhausted=False)
        if best is None or entry["l1"] < best["l1"]:
            best = entry
        prev = entry
        eps *= cfg.alpha
    if best is None:
        raise NeverFeasible(f"no feasible relaxation in {cfg.max_epsilon_rounds} rounds")
    return _l1_outcome(best, trail, bias_adjusted, exhausted=True)


_METHODS = ("linf", "l1", "relaxed")


def _layer_op(method: str, activation_kind: str):
    table = {
        ("linf", "relu"): invert_layer_linf,
        ("linf", "leaky"): invert_layer_linf_leaky,
        ("l1", "relu"): invert_layer_l1,
        ("l1", "leaky"): invert_layer_l1_leaky,
        ("relaxed", "relu"): invert_layer_relaxed,
        ("relaxed", "leaky"): invert_layer_relaxed,
    }
    return table[(method, activation_kind)]


def invert_network(net: GeneratorNetwork, x: Vector, method: str = "linf",
                   cfg: LpInvertConfig | None = None) -> InversionReport:
    """LP inversion from the output layer back to the latent code.

    Each layer's recovered input becomes the observation for the layer below.
    The per-layer starting tolerance follows the configured epsilon rule; the
    activation kind selects the matching constraint set.
    """
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}")
    cfg = cfg or LpInvertConfig()
    if x.dim != net.output_dim:
        raise DimensionMismatch(f"observation dim {x.dim} vs network output {net.output_dim}")
    d = net.depth
    obs = x
    outcomes = []
    solves = 0
    for idx in reversed(range(d)):
        l = net.layers[idx]
        if cfg.epsilon_rule == "theoretical":
            eps_i = cfg.epsilon_init * (2.0 / cfg.assumed_c) ** (d - 1 - idx)
        else:
            eps_i = cfg.epsilon_init
        layer_cfg = replace(cfg, epsilon_init=eps_i)
        op = _layer_op(method, l.activation.kind)
        try:
            outcome = op(l, obs, layer_cfg)
        except InversionError as e:
            raise type(e)(f"layer {idx + 1}: {e}") from e
        outcomes.append(outcome)
        solves += len(outcome.status_trail)
        obs = outcome.recovered
    latent = obs
    diff = forward(net, latent).data - x.data
    notes = tuple(f"layer {d - i}: budget exhausted"
                  for i, o in enumerate(outcomes) if o.budget_exhausted)
    return InversionReport(
        latent=latent, layer_outcomes=tuple(outcomes), lp_solves=solves,
        success=not notes,
        residual_linf=norm_linf(diff), residual_l1=norm_l1(diff), residual_l2=norm_l2(diff),
        method=method, notes=notes)
