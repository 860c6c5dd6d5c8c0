"""Descent baselines: subgradient descent on the squared reconstruction error
and projected gradient descent for linear inverse problems, where any LP
inversion method serves as the projection onto the generator's range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .invert import InversionError, InversionReport, LpInvertConfig, invert_network
from .linalg import DimensionMismatch, Matrix, Vector, norm_l1, norm_l2, norm_linf
from .model import GeneratorNetwork, forward, gaussian_samples, seeded_rng


@dataclass(frozen=True)
class GdConfig:
    learning_rate: float = 1.0
    max_iters: int = 1000
    grad_norm_stop: float = 1e-9
    init: str = "gaussian"  # or "zero"
    init_seed: int = 0
    restarts: int = 1
    backtracking: bool = False  # halve the step until the objective decreases

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.grad_norm_stop < 0:
            raise ValueError("grad_norm_stop must be nonnegative")
        if self.init not in ("zero", "gaussian"):
            raise ValueError(f"init must be 'zero' or 'gaussian', got {self.init!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass(frozen=True)
class ForwardOperator:
    """Linear measurement map applied to the generator output."""

    kind: str  # "identity", "mask" or "dense"
    indices: Optional[tuple[int, ...]] = None
    matrix: Optional[Matrix] = None

    @classmethod
    def identity(cls) -> "ForwardOperator":
        return cls("identity")

    @classmethod
    def mask(cls, indices) -> "ForwardOperator":
        idx = tuple(int(i) for i in indices)
        if len(set(idx)) != len(idx):
            raise ValueError("mask indices must be distinct")
        if any(i < 0 for i in idx):
            raise ValueError("mask indices must be nonnegative")
        return cls("mask", indices=idx)

    @classmethod
    def dense(cls, matrix: Matrix) -> "ForwardOperator":
        return cls("dense", matrix=matrix)

    def validate_against(self, n: int) -> None:
        if self.kind == "mask" and self.indices and max(self.indices) >= n:
            raise DimensionMismatch(f"mask index {max(self.indices)} out of range for dim {n}")
        if self.kind == "dense" and self.matrix is not None and self.matrix.cols != n:
            raise DimensionMismatch(
                f"operator has {self.matrix.cols} columns, generator output is {n}")

    def out_dim(self, n: int) -> int:
        if self.kind == "identity":
            return n
        if self.kind == "mask":
            return len(self.indices)
        return self.matrix.rows

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return v
        if self.kind == "mask":
            return v[list(self.indices)]
        return self.matrix.data @ v

    def adjoint(self, r: np.ndarray, n: int) -> np.ndarray:
        if self.kind == "identity":
            return r
        if self.kind == "mask":
            out = np.zeros(n)
            out[list(self.indices)] = r
            return out
        return self.matrix.data.T @ r


def _objective_and_grad(net: GeneratorNetwork, x: np.ndarray, op: ForwardOperator,
                        z: np.ndarray) -> tuple[float, np.ndarray]:
    """f(z) = 0.5 ||A G(z) - x||^2 with the active-branch subgradient."""
    pres = []
    v = z
    for l in net.layers:
        pre = l.pre_activation(v)
        pres.append(pre)
        v = l.activation.apply(pre)
    r = op.apply(v) - x
    f = 0.5 * float(np.dot(r, r))
    g = op.adjoint(r, net.output_dim)
    for l, pre in zip(reversed(net.layers), reversed(pres)):
        g = l.weights.data.T @ (l.activation.derivative(pre) * g)
    return f, g


def _initial_point(net: GeneratorNetwork, cfg: GdConfig, restart: int) -> np.ndarray:
    if cfg.init == "zero":
        return np.zeros(net.input_dim)
    rng = seeded_rng(np.random.SeedSequence([cfg.init_seed, restart]))
    return gaussian_samples(rng, net.input_dim)


def gd_invert(net: GeneratorNetwork, x: Vector, op: ForwardOperator | None = None,
              cfg: GdConfig | None = None, z0: Vector | None = None) -> InversionReport:
    """Fixed-step subgradient descent on the squared measurement residual.

    Runs ``cfg.restarts`` independent starts (``z0``, when given, replaces the
    first start) and keeps the best final objective; non-convergence is
    reported through the success flag, never raised.
    """
    op = op or ForwardOperator.identity()
    cfg = cfg or GdConfig()
    op.validate_against(net.output_dim)
    if x.dim != op.out_dim(net.output_dim):
        raise DimensionMismatch(
            f"observation dim {x.dim} vs operator output {op.out_dim(net.output_dim)}")
    xs = x.data
    best_z = None
    best_f = np.inf
    best_iters = 0
    best_converged = False
    for restart in range(cfg.restarts):
        if restart == 0 and z0 is not None:
            if z0.dim != net.input_dim:
                raise DimensionMismatch(f"z0 dim {z0.dim} vs input dim {net.input_dim}")
            z = z0.data.copy()
        else:
            z = _initial_point(net, cfg, restart)
        f, g = _objective_and_grad(net, xs, op, z)
        iters = 0
        while iters < cfg.max_iters and float(np.linalg.norm(g)) > cfg.grad_norm_stop:
            if cfg.backtracking:
                step = cfg.learning_rate
                z_new, f_new, g_new = z, f, g
                for _ in range(40):
                    z_new = z - step * g
                    f_new, g_new = _objective_and_grad(net, xs, op, z_new)
                    if f_new <= f:
                        break
                    step *= 0.5
                z, f, g = z_new, f_new, g_new
            else:
                z = z - cfg.learning_rate * g
                f, g = _objective_and_grad(net, xs, op, z)
            iters += 1
        converged = float(np.linalg.norm(g)) <= cfg.grad_norm_stop
        if f < best_f:
            best_f, best_z, best_iters, best_converged = f, z, iters, converged
    diff = op.apply(forward(net, Vector(best_z)).data) - xs
    return InversionReport(
        latent=Vector(best_z), layer_outcomes=(), lp_solves=0, success=best_converged,
        residual_linf=norm_linf(diff), residual_l1=norm_l1(diff), residual_l2=norm_l2(diff),
        method="gd", iterations=best_iters)


def finite_diff_grad(net: GeneratorNetwork, x: Vector, op: ForwardOperator,
                     z: Vector, h: float) -> Vector:
    """Central-difference gradient of the descent objective; oracle for the
    analytic subgradient at smooth points."""
    if h <= 0:
        raise ValueError("step h must be positive")
    op.validate_against(net.output_dim)
    zs = z.data
    g = np.zeros(zs.size)
    for i in range(zs.size):
        zp = zs.copy()
        zp[i] += h
        zm = zs.copy()
        zm[i] -= h
        fp, _ = _objective_and_grad(net, x.data, op, zp)
        fm, _ = _objective_and_grad(net, x.data, op, zm)
        g[i] = (fp - fm) / (2.0 * h)
    return Vector(g)


def pgd_sense(net: GeneratorNetwork, x: Vector, op: ForwardOperator,
              inner_method: str = "linf", outer_iters: int = 30, step: float = 0.5,
              cfg: LpInvertConfig | None = None) -> InversionReport:
    """Projected gradient descent in observation space.

    Alternates a gradient step on the measurement residual with a projection
    onto the generator's range via LP inversion; returns the iterate with the
    best measurement objective.  Failed projections are skipped and counted.
    """
    cfg = cfg or LpInvertConfig()
    op.validate_against(net.output_dim)
    if x.dim != op.out_dim(net.output_dim):
        raise DimensionMismatch(
            f"observation dim {x.dim} vs operator output {op.out_dim(net.output_dim)}")
    n = net.output_dim
    xs = x.data
    w = op.adjoint(xs, n)
    best = None
    failures = 0
    lp_solves = 0
    for _ in range(outer_iters):
        w = w - step * op.adjoint(op.apply(w) - xs, n)
        try:
            rep = invert_network(net, Vector(w), inner_method, cfg)
        except InversionError:
            failures += 1
            continue
        lp_solves += rep.lp_solves
        g_img = forward(net, rep.latent).data
        r = op.apply(g_img) - xs
        obj = 0.5 * float(np.dot(r, r))
        if best is None or obj < best[1]:
            best = (rep.latent, obj, g_img)
        w = g_img
    if best is None:
        raise InversionError(f"all {outer_iters} projections failed")
    latent, _, g_img = best
    diff = op.apply(g_img) - xs
    notes = (f"projection failures: {failures}",) if failures else ()
    return InversionReport(
        latent=latent, layer_outcomes=(), lp_solves=lp_solves, success=failures == 0,
        residual_linf=norm_linf(diff), residual_l1=norm_l1(diff), residual_l2=norm_l2(diff),
        method=f"pgd+{inner_method}", iterations=outer_iters, notes=notes)
