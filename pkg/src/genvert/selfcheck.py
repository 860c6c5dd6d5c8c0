"""Built-in sanity checks for `verify`: pinned forward values on the tiny
two-layer witness network (two distinct preimages of the same output whose
midpoint maps elsewhere, guarding the sign conventions), serialization
round-trips, an LP smoke test and an exact-recovery round-trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .invert import invert_realizable
from .linalg import Vector
from .model import (GeneratorNetwork, dumps_net, forward, layer, loads_net,
                    random_gaussian_net)


def witness_network() -> GeneratorNetwork:
    """2 -> 2 -> 1 ReLU stack with two known preimages of output 1 whose
    midpoint produces 2: the preimage set of a composed network need not be
    convex, so layer order and signs must be exactly right."""
    return GeneratorNetwork((
        layer([[1.0, 2.0], [3.0, 1.0]]),
        layer([[1.0, -1.0]]),
    ))


WITNESS_POINTS = ((-1.0, 1.0), (1.0, 3.0), (0.0, 2.0))
WITNESS_VALUES = (1.0, 1.0, 2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_self_checks() -> list[CheckResult]:
    results = []

    net = witness_network()
    got = tuple(forward(net, Vector(p)).data[0] for p in WITNESS_POINTS)
    results.append(CheckResult(
        "witness forward values",
        got == WITNESS_VALUES,
        f"expected {WITNESS_VALUES}, got {got}"))

    round_trip = loads_net(dumps_net(net))
    results.append(CheckResult(
        "network serialization round-trip",
        round_trip == net,
        "loads(dumps(net)) == net"))

    problem = lp.problem("min", [1.0], [([1.0], ">=", 3.0)])
    sol = lp.solve(problem)
    lp_ok = (sol.status is lp.LpStatus.OPTIMAL and sol.objective is not None
             and abs(sol.objective - 3.0) < 1e-9)
    results.append(CheckResult(
        "lp smoke test",
        lp_ok,
        f"min x s.t. x >= 3: status {sol.status.value}, value {sol.objective}"))

    trial = random_gaussian_net((4, 12, 30), seed=20240101)
    z_star = Vector([0.8, -1.4, 0.3, 2.0])
    report = invert_realizable(trial, forward(trial, z_star))
    err = float(np.max(np.abs(report.latent.data - z_star.data)))
    results.append(CheckResult(
        "exact recovery round-trip",
        report.success and err < 1e-8,
        f"max latent error {err:.2e}"))

    return results
