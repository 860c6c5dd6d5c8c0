"""Feed-forward generator networks: representation, evaluation, sampling and
a text serialization format.

A network is a stack of layers, each applying an activation to an affine map.
Networks are immutable; evaluation is pure and safe to run concurrently.

Random weights are drawn with an explicit Box-Muller transform over the
uniform output of a seeded PCG64 generator (``PRNG_FAMILY`` names the scheme
for experiment metadata), so sampled networks are reproducible bit-for-bit
from their seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .linalg import DimensionMismatch, Matrix, Vector

PRNG_FAMILY = "pcg64-box-muller"

WEIGHT_STD_RULES = ("unit", "inv_sqrt_fanout")


class NetFormatError(ValueError):
    """Malformed network file: bad syntax or structure."""


class NetDimensionError(NetFormatError):
    """Declared and actual dimensions disagree."""


class NetValueError(NetFormatError):
    """Entries outside the admissible domain (non-finite values, bad slope)."""


@dataclass(frozen=True)
class Activation:
    kind: str  # "relu" or "leaky"
    leaky_slope: float | None = None

    def __post_init__(self):
        if self.kind not in ("relu", "leaky"):
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "leaky":
            c = self.leaky_slope
            if c is None or not (0.0 < c < 1.0):
                raise ValueError(f"leaky slope must lie strictly in (0, 1), got {c!r}")
        elif self.leaky_slope is not None:
            raise ValueError("leaky_slope is only meaningful for leaky activations")

    @classmethod
    def relu(cls) -> "Activation":
        return cls("relu")

    @classmethod
    def leaky(cls, slope: float = 0.1) -> "Activation":
        return cls("leaky", slope)

    def apply(self, pre: np.ndarray) -> np.ndarray:
        if self.kind == "relu":
            return np.maximum(pre, 0.0)
        return np.where(pre >= 0.0, pre, self.leaky_slope * pre)

    def derivative(self, pre: np.ndarray) -> np.ndarray:
        """Subgradient choice: exactly-zero pre-activations get slope 0."""
        if self.kind == "relu":
            return (pre > 0.0).astype(float)
        return np.where(pre > 0.0, 1.0, np.where(pre < 0.0, self.leaky_slope, 0.0))

    def invert(self, x: np.ndarray) -> np.ndarray:
        """Coordinatewise inverse; only bijective for leaky activations."""
        if self.kind != "leaky":
            raise ValueError("only leaky activations have a coordinatewise inverse")
        return np.where(x >= 0.0, x, x / self.leaky_slope)


@dataclass(frozen=True)
class Layer:
    weights: Matrix
    bias: Vector
    activation: Activation

    def __post_init__(self):
        if self.bias.dim != self.weights.rows:
            raise DimensionMismatch(
                f"bias dim {self.bias.dim} does not match {self.weights.rows} output rows")

    @property
    def in_dim(self) -> int:
        return self.weights.cols

    @property
    def out_dim(self) -> int:
        return self.weights.rows

    def pre_activation(self, v: np.ndarray) -> np.ndarray:
        return self.weights.data @ v + self.bias.data

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.activation.apply(self.pre_activation(v))


def layer(weights: Sequence[Sequence[float]],
          bias: Sequence[float] | None = None,
          activation: Activation | None = None) -> Layer:
    """Build a layer from row lists; bias defaults to zero, activation to ReLU."""
    w = Matrix.from_rows(weights)
    b = Vector(bias) if bias is not None else Vector(np.zeros(w.rows))
    return Layer(w, b, activation or Activation.relu())


@dataclass(frozen=True)
class GeneratorNetwork:
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ValueError("a network needs at least one layer")
        for i in range(1, len(self.layers)):
            if self.layers[i].in_dim != self.layers[i - 1].out_dim:
                raise DimensionMismatch(
                    f"layer {i + 1} expects {self.layers[i].in_dim} inputs but layer "
                    f"{i} produces {self.layers[i - 1].out_dim}")

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim,) + tuple(l.out_dim for l in self.layers)

    def __eq__(self, other) -> bool:
        return (isinstance(other, GeneratorNetwork)
                and len(self.layers) == len(other.layers)
                and all(a.weights == b.weights and a.bias == b.bias
                        and a.activation == b.activation
                        for a, b in zip(self.layers, other.layers)))

    def __hash__(self):
        return hash(tuple((l.weights, l.bias, l.activation) for l in self.layers))


def network(*layers: Layer) -> GeneratorNetwork:
    return GeneratorNetwork(tuple(layers))


def forward(net: GeneratorNetwork, z: Vector) -> Vector:
    if z.dim != net.input_dim:
        raise DimensionMismatch(f"input dim {z.dim}, network expects {net.input_dim}")
    v = z.data
    for l in net.layers:
        v = l.apply(v)
    return Vector(v)


def forward_trace(net: GeneratorNetwork, z: Vector) -> list[Vector]:
    """Per-layer outputs, shallowest first; the last entry equals forward()."""
    if z.dim != net.input_dim:
        raise DimensionMismatch(f"input dim {z.dim}, network expects {net.input_dim}")
    v = z.data
    trace = []
    for l in net.layers:
        v = l.apply(v)
        trace.append(Vector(v))
    return trace


def absorb_bias(net: GeneratorNetwork) -> GeneratorNetwork:
    """Equivalent zero-bias network over one extra input pinned to 1.

    Intermediate layers gain a pass-through row with weight 1 on the constant
    coordinate so the constant survives every activation (1 stays 1 under both
    ReLU and leaky); the final layer folds its bias without the extra row.
    """
    new_layers = []
    d = net.depth
    for i, l in enumerate(net.layers):
        w, b = l.weights.data, l.bias.data
        block = np.hstack([w, b[:, None]])
        if i < d - 1:
            passthrough = np.zeros((1, l.in_dim + 1))
            passthrough[0, -1] = 1.0
            block = np.vstack([block, passthrough])
        zero_bias = Vector(np.zeros(block.shape[0]))
        new_layers.append(Layer(Matrix.from_array(block), zero_bias, l.activation))
    return GeneratorNetwork(tuple(new_layers))


def gaussian_samples(rng: np.random.Generator, shape: tuple[int, ...] | int) -> np.ndarray:
    """Standard normal draws via Box-Muller over the generator's uniforms."""
    if isinstance(shape, int):
        shape = (shape,)
    count = int(np.prod(shape)) if shape else 1
    half = (count + 1) // 2
    u1 = 1.0 - rng.random(half)  # (0, 1]: keeps the log finite
    u2 = rng.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    pairs = np.concatenate([radius * np.cos(2.0 * math.pi * u2),
                            radius * np.sin(2.0 * math.pi * u2)])
    return pairs[:count].reshape(shape)


def seeded_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int seed or a numpy SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


def random_gaussian_net(dims: Sequence[int],
                        weight_std_rule: str = "unit",
                        seed=0,
                        activation: Activation | None = None) -> GeneratorNetwork:
    """Zero-bias network with i.i.d. Gaussian weights.

    ``weight_std_rule``: "unit" draws entries with standard deviation 1;
    "inv_sqrt_fanout" scales layer i by 1/sqrt(n_i) where n_i is its output
    width.  Deterministic for a given seed.
    """
    dims = list(dims)
    if len(dims) < 2:
        raise ValueError("dims must list at least an input and an output width")
    if any(d < 1 for d in dims):
        raise ValueError("all layer widths must be positive")
    if weight_std_rule not in WEIGHT_STD_RULES:
        raise ValueError(f"weight_std_rule must be one of {WEIGHT_STD_RULES}")
    act = activation or Activation.relu()
    rng = seeded_rng(seed)
    layers = []
    for i in range(1, len(dims)):
        n_out, n_in = dims[i], dims[i - 1]
        std = 1.0 if weight_std_rule == "unit" else 1.0 / math.sqrt(n_out)
        w = std * gaussian_samples(rng, (n_out, n_in))
        layers.append(Layer(Matrix.from_array(w), Vector(np.zeros(n_out)), act))
    return GeneratorNetwork(tuple(layers))


NET_HEADER = "genvert-net v1"


def dumps_net(net: GeneratorNetwork) -> str:
    """Serialize to the documented text format with round-trip float precision."""
    lines = [NET_HEADER, f"layers {net.depth}"]
    for l in net.layers:
        act = l.activation
        head = f"layer {l.out_dim} {l.in_dim} "
        head += "relu" if act.kind == "relu" else f"leaky {act.leaky_slope!r}"
        lines.append(head)
        for r in range(l.out_dim):
            lines.append(" ".join(repr(v) for v in l.weights.data[r]))
        lines.append(" ".join(repr(v) for v in l.bias.data))
    return "\n".join(lines) + "\n"


def _parse_floats(text: str, count: int, where: str) -> np.ndarray:
    parts = text.split()
    if len(parts) != count:
        raise NetDimensionError(f"{where}: expected {count} values, got {len(parts)}")
    try:
        arr = np.array([float(p) for p in parts])
    except ValueError as e:
        raise NetFormatError(f"{where}: {e}") from e
    if not np.all(np.isfinite(arr)):
        raise NetValueError(f"{where}: non-finite entry")
    return arr


def loads_net(text: str) -> GeneratorNetwork:
    lines = [ln for ln in text.splitlines()]
    pos = 0

    def next_line(what: str) -> str:
        # lines are read literally: an empty line is a legal row of 0 floats
        # (zero-width layers occur in gadget networks built from empty formulas)
        nonlocal pos
        if pos >= len(lines):
            raise NetFormatError(f"unexpected end of file while reading {what}")
        ln = lines[pos].strip()
        pos += 1
        return ln

    if next_line("header") != NET_HEADER:
        raise NetFormatError(f"missing {NET_HEADER!r} header")
    decl = next_line("layer count").split()
    if len(decl) != 2 or decl[0] != "layers":
        raise NetFormatError("expected 'layers <d>' line")
    try:
        depth = int(decl[1])
    except ValueError as e:
        raise NetFormatError("layer count is not an integer") from e
    if depth < 1:
        raise NetDimensionError("layer count must be at least 1")

    layers = []
    for li in range(depth):
        head = next_line(f"layer {li + 1} header").split()
        if len(head) < 4 or head[0] != "layer":
            raise NetFormatError(f"layer {li + 1}: expected 'layer <out> <in> <kind> [<c>]'")
        try:
            n_out, n_in = int(head[1]), int(head[2])
        except ValueError as e:
            raise NetFormatError(f"layer {li + 1}: bad dimensions") from e
        kind = head[3]
        if kind == "relu":
            if len(head) != 4:
                raise NetFormatError(f"layer {li + 1}: relu takes no slope parameter")
            act = Activation.relu()
        elif kind == "leaky":
            if len(head) != 5:
                raise NetFormatError(f"layer {li + 1}: leaky requires a slope parameter")
            try:
                slope = float(head[4])
            except ValueError as e:
                raise NetFormatError(f"layer {li + 1}: bad slope") from e
            try:
                act = Activation.leaky(slope)
            except ValueError as e:
                raise NetValueError(f"layer {li + 1}: {e}") from e
        else:
            raise NetFormatError(f"layer {li + 1}: unknown activation {kind!r}")
        rows = [_parse_floats(next_line(f"layer {li + 1} weights row"), n_in,
                              f"layer {li + 1} row {r + 1}")
                for r in range(n_out)]
        bias = _parse_floats(next_line(f"layer {li + 1} bias"), n_out,
                             f"layer {li + 1} bias")
        w = (np.vstack(rows) if rows else np.zeros((0, n_in)))
        layers.append(Layer(Matrix.from_array(w.reshape(n_out, n_in)), Vector(bias), act))
    while pos < len(lines):
        if lines[pos].strip():
            raise NetFormatError(f"trailing content on line {pos + 1}")
        pos += 1
    try:
        return GeneratorNetwork(tuple(layers))
    except DimensionMismatch as e:
        raise NetDimensionError(str(e)) from e


def save_net(net: GeneratorNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_net(net))


def load_net(path) -> GeneratorNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_net(fh.read())


def save_vector(v: Vector, path) -> None:
    """One float per line, round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for x in v.data:
            fh.write(repr(x) + "\n")


def load_vector(path) -> Vector:
    with open(path, "r", encoding="utf-8") as fh:
        vals = [ln.strip() for ln in fh if ln.strip()]
    try:
        return Vector([float(v) for v in vals])
    except ValueError as e:
        raise NetFormatError(f"bad vector file {path}: {e}") from e
