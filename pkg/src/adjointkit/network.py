"""Feed-forward networks: forward, adjoint, and gradient passes.

The network is the constraint ``a^i = act(W^i a^{i-1} + b^i)`` chained
over layers.  Training under the half squared error loss fits the
reduced-space pattern exactly: the state Jacobian of the stacked layer
equations is block lower bidiagonal with identity diagonal blocks, so
the adjoint system is solved by one backward sweep

    y_top = target - output,
    y_i   = W_{i+1}^T (act'(pre_{i+1}) o y_{i+1}),

and the parameter gradients follow layer by layer.  The
``as_constrained_problem`` adapter exposes the same passes through the
generic optimizer interface, sharing the per-layer arithmetic so both
routes produce identical floats.
"""

from dataclasses import dataclass

import numpy as np

from .optim import ConstrainedProblem
from .rand import Lcg

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda t: 1.0 - np.tanh(t) ** 2),
    "logistic": (lambda t: 1.0 / (1.0 + np.exp(-t)),
                 lambda t: (s := 1.0 / (1.0 + np.exp(-t))) * (1.0 - s)),
    "identity": (lambda t: t, lambda t: np.ones_like(t)),
}


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths (input first) and the componentwise activation name."""
    layer_sizes: tuple
    activation: str = "tanh"

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least one layer (two sizes)")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError("layer sizes must be positive")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1

    def act(self, t):
        return _ACTIVATIONS[self.activation][0](t)

    def act_prime(self, t):
        return _ACTIVATIONS[self.activation][1](t)


class Parameters:
    """Weight matrices and bias vectors, one pair per layer."""

    def __init__(self, weights, biases):
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        if len(self.weights) != len(self.biases):
            raise ValueError("weights and biases must pair up per layer")
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError("bias length must match weight rows")

    def check_spec(self, spec: NetworkSpec):
        sizes = spec.layer_sizes
        if len(self.weights) != spec.num_layers:
            raise ValueError("layer count does not match spec")
        for i, w in enumerate(self.weights):
            if w.shape != (sizes[i + 1], sizes[i]):
                raise ValueError(
                    f"layer {i + 1} weight shape {w.shape}, expected "
                    f"({sizes[i + 1]}, {sizes[i]})")


@dataclass(frozen=True)
class ForwardTrace:
    """Activations a^0..a^L plus the cached pre-activation inputs."""
    activations: tuple
    preactivations: tuple


@dataclass(frozen=True)
class AdjointTrace:
    adjoints: tuple


def init_parameters(spec: NetworkSpec, seed: int = 42) -> Parameters:
    """Seeded uniform(-0.5, 0.5) weights and biases."""
    rng = Lcg(seed)
    sizes = spec.layer_sizes
    weights, biases = [], []
    for i in range(spec.num_layers):
        weights.append(rng.matrix(sizes[i + 1], sizes[i], -0.5, 0.5))
        biases.append(rng.floats(sizes[i + 1], -0.5, 0.5))
    return Parameters(weights, biases)


def forward(spec: NetworkSpec, params: Parameters, x) -> ForwardTrace:
    """Propagate an input through every layer."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.layer_sizes[0],):
        raise ValueError("input length does not match first layer size")
    params.check_spec(spec)
    acts = [x]
    pres = []
    for w, b in zip(params.weights, params.biases):
        t = w @ acts[-1] + b
        pres.append(t)
        acts.append(spec.act(t))
    return ForwardTrace(activations=tuple(acts), preactivations=tuple(pres))


def loss(trace: ForwardTrace, a_obs) -> float:
    """Half squared distance between the output layer and the target."""
    a_obs = np.asarray(a_obs, dtype=float)
    out = trace.activations[-1]
    if a_obs.shape != out.shape:
        raise ValueError("target length does not match output layer")
    diff = a_obs - out
    return 0.5 * float(diff @ diff)


def adjoint_pass(spec: NetworkSpec, params: Parameters, trace: ForwardTrace,
                 a_obs) -> AdjointTrace:
    """Backward sweep for the layer multipliers.

    The top adjoint equals the output misfit; each lower one pulls the
    next adjoint back through the transposed weights, masked by the
    activation slope at the stored pre-activations.
    """
    a_obs = np.asarray(a_obs, dtype=float)
    n_layers = spec.num_layers
    ys = [None] * (n_layers + 1)
    ys[n_layers] = a_obs - trace.activations[-1]
    for i in range(n_layers - 1, -1, -1):
        slope = spec.act_prime(trace.preactivations[i])
        ys[i] = params.weights[i].T @ (slope * ys[i + 1])
    return AdjointTrace(adjoints=tuple(ys))


def _layer_gradients(spec, params, trace, y_next, layer):
    """Parameter gradient of one layer given its outgoing adjoint."""
    slope = spec.act_prime(trace.preactivations[layer])
    masked = y_next * slope
    grad_w = -np.outer(masked, trace.activations[layer])
    grad_b = -masked
    return grad_w, grad_b


def gradients(spec: NetworkSpec, params: Parameters, trace: ForwardTrace,
              adjoints: AdjointTrace) -> Parameters:
    """Loss gradients with respect to every weight and bias.

    Carries the leading minus sign that comes from defining the top
    adjoint as target minus output.
    """
    gw, gb = [], []
    for i in range(spec.num_layers):
        grad_w, grad_b = _layer_gradients(spec, params, trace,
                                          adjoints.adjoints[i + 1], i)
        gw.append(grad_w)
        gb.append(grad_b)
    return Parameters(gw, gb)


def loss_gradients(spec: NetworkSpec, params: Parameters, x, a_obs):
    """Convenience wrapper: one forward/backward round trip."""
    trace = forward(spec, params, x)
    adj = adjoint_pass(spec, params, trace, a_obs)
    return loss(trace, a_obs), gradients(spec, params, trace, adj)


# -- flattening helpers -------------------------------------------------------

def flatten_parameters(params: Parameters) -> np.ndarray:
    parts = []
    for w, b in zip(params.weights, params.biases):
        parts.append(w.ravel())
        parts.append(b)
    return np.concatenate(parts)


def unflatten_parameters(spec: NetworkSpec, z: np.ndarray) -> Parameters:
    sizes = spec.layer_sizes
    weights, biases = [], []
    pos = 0
    for i in range(spec.num_layers):
        rows, cols = sizes[i + 1], sizes[i]
        weights.append(z[pos:pos + rows * cols].reshape(rows, cols))
        pos += rows * cols
        biases.append(z[pos:pos + rows])
        pos += rows
    if pos != z.size:
        raise ValueError("flat parameter vector has wrong length")
    return Parameters(weights, biases)


def parameter_count(spec: NetworkSpec) -> int:
    sizes = spec.layer_sizes
    return sum(sizes[i + 1] * (sizes[i] + 1) for i in range(spec.num_layers))


class NetworkTrainingProblem(ConstrainedProblem):
    """Single-sample training cast as an equality-constrained problem.

    State: all activations concatenated (input layer included).
    Control: flattened weights and biases.  The layer structure makes
    the adjoint solve one backward substitution, which this class shares
    with ``adjoint_pass`` so the two gradient routes agree bit for bit.
    """

    def __init__(self, spec: NetworkSpec, x, a_obs):
        self.spec = spec
        self.x = np.asarray(x, dtype=float)
        self.a_obs = np.asarray(a_obs, dtype=float)
        self.state_dim = sum(spec.layer_sizes)
        self.control_dim = parameter_count(spec)
        self._offsets = np.cumsum((0,) + spec.layer_sizes)

    def _split_state(self, u):
        return [u[self._offsets[i]:self._offsets[i + 1]]
                for i in range(len(self.spec.layer_sizes))]

    def _trace_from_state(self, u, params):
        acts = self._split_state(u)
        pres = [w @ acts[i] + b
                for i, (w, b) in enumerate(zip(params.weights, params.biases))]
        return ForwardTrace(activations=tuple(acts), preactivations=tuple(pres))

    def residual(self, u, z):
        params = unflatten_parameters(self.spec, z)
        acts = self._split_state(u)
        blocks = [acts[0] - self.x]
        for i, (w, b) in enumerate(zip(params.weights, params.biases)):
            blocks.append(acts[i + 1] - self.spec.act(w @ acts[i] + b))
        return np.concatenate(blocks)

    def solve_forward(self, z):
        params = unflatten_parameters(self.spec, z)
        trace = forward(self.spec, params, self.x)
        return np.concatenate(trace.activations)

    def apply_state_jacobian(self, u, z, du):
        params = unflatten_parameters(self.spec, z)
        trace = self._trace_from_state(u, params)
        d = self._split_state(du)
        blocks = [d[0]]
        for i, w in enumerate(params.weights):
            slope = self.spec.act_prime(trace.preactivations[i])
            blocks.append(d[i + 1] - slope * (w @ d[i]))
        return np.concatenate(blocks)

    def apply_state_adjoint(self, u, z, y):
        params = unflatten_parameters(self.spec, z)
        trace = self._trace_from_state(u, params)
        ys = self._split_state(y)
        blocks = []
        for i in range(len(ys)):
            block = ys[i].copy()
            if i < self.spec.num_layers:
                slope = self.spec.act_prime(trace.preactivations[i])
                block -= params.weights[i].T @ (slope * ys[i + 1])
            blocks.append(block)
        return np.concatenate(blocks)

    def solve_adjoint(self, u, z, rhs):
        # identity diagonal blocks: a single backward substitution
        params = unflatten_parameters(self.spec, z)
        trace = self._trace_from_state(u, params)
        r = self._split_state(rhs)
        n_layers = self.spec.num_layers
        ys = [None] * (n_layers + 1)
        ys[n_layers] = r[n_layers]
        for i in range(n_layers - 1, -1, -1):
            slope = self.spec.act_prime(trace.preactivations[i])
            ys[i] = r[i] + params.weights[i].T @ (slope * ys[i + 1])
        return np.concatenate(ys)

    def apply_control_adjoint(self, u, z, y):
        params = unflatten_parameters(self.spec, z)
        trace = self._trace_from_state(u, params)
        ys = self._split_state(y)
        parts = []
        for i in range(self.spec.num_layers):
            grad_w, grad_b = _layer_gradients(self.spec, params, trace, ys[i + 1], i)
            parts.append(grad_w.ravel())
            parts.append(grad_b)
        return np.concatenate(parts)

    def objective(self, u, z):
        out = self._split_state(u)[-1]
        diff = self.a_obs - out
        return 0.5 * float(diff @ diff)

    def objective_grad_state(self, u, z):
        g = np.zeros(self.state_dim)
        out = self._split_state(u)[-1]
        g[self._offsets[-2]:] = out - self.a_obs
        return g

    def objective_grad_control(self, u, z):
        return np.zeros(self.control_dim)


def as_constrained_problem(spec: NetworkSpec, x, a_obs) -> NetworkTrainingProblem:
    """Expose one training sample through the generic optimizer interface."""
    return NetworkTrainingProblem(spec, x, a_obs)


def train(spec: NetworkSpec, params: Parameters, samples, iters: int,
          step: float = 1.0, tol: float = 0.0):
    """Full-batch descent on the summed per-sample loss with Armijo halving.

    ``samples`` is a sequence of (x, a_obs) pairs.  Returns the trained
    parameters and the per-iteration history rows (k, loss, grad_norm,
    step).
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    z = flatten_parameters(params)

    def total_loss_grad(zvec):
        p = unflatten_parameters(spec, zvec)
        total = 0.0
        grad = np.zeros_like(zvec)
        for x, a_obs in samples:
            f, g = loss_gradients(spec, p, x, a_obs)
            total += f
            grad += flatten_parameters(g)
        return total, grad

    def total_loss(zvec):
        p = unflatten_parameters(spec, zvec)
        return sum(loss(forward(spec, p, x), a_obs) for x, a_obs in samples)

    history = []
    for k in range(iters):
        f_curr, g = total_loss_grad(z)
        gnorm = float(np.linalg.norm(g))
        history.append((k, f_curr, gnorm, 0.0))
        if gnorm <= tol:
            break
        alpha = step
        for _ in range(60):
            candidate = z - alpha * g
            if total_loss(candidate) <= f_curr - 1e-4 * alpha * gnorm * gnorm:
                break
            alpha *= 0.5
        else:
            break
        history[-1] = (k, f_curr, gnorm, alpha)
        z = candidate
    return unflatten_parameters(spec, z), history
