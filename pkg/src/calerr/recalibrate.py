"""Post-hoc recalibrators: fit on a validation half, apply to held-out data.

Methods, with their standard hyperparameters:

- histogram binning (20 even bins over max-probs, optionally per predicted
  class, optionally averaged over bootstrap resamples),
- isotonic regression (exact pool-adjacent-violators fit, one-versus-all in
  multiclass mode),
- temperature scaling (Nelder-Mead on log T, objective = NLL or any binned
  calibration error),
- Platt / vector / matrix scaling (affine maps on logits trained by
  full-batch Nesterov SGD: lr 0.001, momentum 0.9, 1000 iterations),
- MLP scaling (three 50-unit rectified-linear layers, same SGD recipe).

Every ``fit_*`` returns an immutable model; every ``apply_*`` is pure and
returns a valid :class:`~calerr.predictions.PredictionSet`.  Models
serialize to JSON-ready dicts tagged with a ``method`` key via
:func:`model_to_dict` / :func:`model_from_dict`.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .binning import assign_even_bins, even_edges
from .metrics import MetricConfig, gce, named_metric
from .optimize import SgdConfig, nelder_mead, sgd_minimize
from .predictions import (
    LogitSet,
    PredictionSet,
    ValidationError,
    max_prob_view,
    row_softmax,
)

HISTOGRAM_BINS = 20
BOOTSTRAP_RESAMPLES = 100
EMPTY_BIN_FALLBACKS = ("center", "nearest")

MLP_HIDDEN_WIDTH = 50
MLP_HIDDEN_LAYERS = 3


# ---------------------------------------------------------------------------
# Shared NLL plumbing
# ---------------------------------------------------------------------------

def _nll_and_grad(out_logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean NLL of softmax(out_logits) and its gradient w.r.t. the logits."""
    n = out_logits.shape[0]
    z = out_logits - out_logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(lse - z[np.arange(n), labels]))
    p = np.exp(z - lse[:, None])
    p[np.arange(n), labels] -= 1.0
    return loss, p / n


def nll(p: PredictionSet, floor: float = 1e-12) -> float:
    """Mean negative log likelihood of the true labels under ``p``."""
    picked = p.probs[np.arange(p.n_points), p.labels]
    return float(-np.mean(np.log(np.maximum(picked, floor))))


# ---------------------------------------------------------------------------
# Histogram binning
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class HistogramBinningModel:
    """Even-bin lookup table replacing each max-prob with validation accuracy.

    ``bin_values`` is the pooled table; ``class_values`` maps each predicted
    class to its own table when the model is class-conditional (predicted
    classes never seen during fitting fall back to the pooled table).
    ``empty_bin`` records the fallback rule used for bins with no validation
    points: their own center, or the value of the nearest occupied bin.
    """

    edges: np.ndarray
    bin_values: np.ndarray
    class_conditional: bool = False
    class_values: dict[int, np.ndarray] | None = None
    empty_bin: str = "center"


def _fill_empty_bins(
    sums: np.ndarray, counts: np.ndarray, edges: np.ndarray, empty_bin: str
) -> np.ndarray:
    values = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    occupied = np.flatnonzero(counts > 0)
    centers = 0.5 * (edges[:-1] + edges[1:])
    if occupied.size == 0:
        return centers
    for b in np.flatnonzero(counts == 0):
        if empty_bin == "center":
            values[b] = centers[b]
        else:
            # Nearest occupied bin by index; equidistant ties take the lower.
            nearest = occupied[np.argmin(np.abs(occupied - b))]
            values[b] = values[nearest]
    return values


def fit_histogram_binning(
    val: PredictionSet,
    n_bins: int = HISTOGRAM_BINS,
    class_conditional: bool = False,
    bootstrap: int | None = None,
    seed: int = 0,
    empty_bin: str = "center",
) -> HistogramBinningModel:
    """Learn per-bin replacement probabilities from validation accuracy.

    Max-prob scores are placed into ``n_bins`` even bins; each occupied bin
    stores the mean correctness of its members.  With ``class_conditional``
    a separate table is kept per predicted class.  With ``bootstrap`` = R the
    validation view is resampled with replacement R times (seeded) and each
    bin stores its mean accuracy over the resamples in which it was occupied.
    Bins occupied in no resample use the ``empty_bin`` fallback.
    """
    if empty_bin not in EMPTY_BIN_FALLBACKS:
        raise ValueError(
            f"empty_bin must be one of {EMPTY_BIN_FALLBACKS}, got {empty_bin!r}"
        )
    if bootstrap is not None and bootstrap < 1:
        raise ValueError(f"bootstrap resample count must be >= 1, got {bootstrap}")
    view = max_prob_view(val)
    edges = even_edges(n_bins)
    bin_idx = assign_even_bins(view.scores, n_bins)
    correct = view.correct.astype(float)

    pools: list[tuple[int | None, np.ndarray]] = [(None, np.arange(len(view)))]
    if class_conditional:
        pools += [
            (k, np.flatnonzero(view.class_index == k)) for k in range(val.n_classes)
        ]

    def table_for(members: np.ndarray) -> np.ndarray:
        if bootstrap is None:
            counts = np.bincount(bin_idx[members], minlength=n_bins)
            sums = np.bincount(
                bin_idx[members], weights=correct[members], minlength=n_bins
            )
            return _fill_empty_bins(sums, counts, edges, empty_bin)
        # Each pool draws from its own seeded stream, so per-class tables do
        # not depend on how many pools were fitted before them.
        rng = np.random.default_rng(seed)
        value_sums = np.zeros(n_bins)
        occupied_runs = np.zeros(n_bins)
        for _ in range(bootstrap):
            draw = members[rng.integers(0, members.size, members.size)]
            counts = np.bincount(bin_idx[draw], minlength=n_bins)
            sums = np.bincount(bin_idx[draw], weights=correct[draw], minlength=n_bins)
            hit = counts > 0
            value_sums[hit] += sums[hit] / counts[hit]
            occupied_runs += hit
        values = _fill_empty_bins(value_sums, occupied_runs, edges, empty_bin)
        return values

    tables: dict[int | None, np.ndarray] = {}
    for pool_key, members in pools:
        if members.size == 0:
            tables[pool_key] = _fill_empty_bins(
                np.zeros(n_bins), np.zeros(n_bins, dtype=int), edges, empty_bin
            )
        else:
            tables[pool_key] = table_for(members)

    return HistogramBinningModel(
        edges=edges,
        bin_values=tables[None],
        class_conditional=class_conditional,
        class_values=(
            {k: v for k, v in tables.items() if k is not None}
            if class_conditional
            else None
        ),
        empty_bin=empty_bin,
    )


def apply_histogram_binning(
    model: HistogramBinningModel, test: PredictionSet
) -> PredictionSet:
    """Replace each max-prob with its bin value; rescale the other classes.

    The non-max probability mass is redistributed proportionally so rows
    still sum to 1.  A row whose max-prob is exactly 1 has no residual shape
    to scale, so the remainder spreads uniformly over the other classes.
    """
    n, k = test.probs.shape
    n_bins = model.bin_values.shape[0]
    view = max_prob_view(test)
    bin_idx = assign_even_bins(view.scores, n_bins)
    values = np.empty(n)
    for i in range(n):
        table = model.bin_values
        if model.class_conditional and model.class_values is not None:
            table = model.class_values.get(int(view.class_index[i]), table)
        values[i] = table[bin_idx[i]]
    # Scale against the row's actual residual mass, not 1 - max: near-saturated
    # rows would otherwise amplify the row-sum rounding slack.
    residual = test.probs.sum(axis=1) - view.scores
    scale = np.where(residual > 0.0, (1.0 - values) / np.where(residual > 0.0, residual, 1.0), 0.0)
    probs = test.probs * scale[:, None]
    rows = np.arange(n)
    saturated = residual <= 0.0
    if np.any(saturated):
        probs[saturated] = ((1.0 - values[saturated]) / (k - 1))[:, None]
    probs[rows, view.class_index] = values
    return PredictionSet(probs, test.labels)


# ---------------------------------------------------------------------------
# Isotonic regression
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class IsotonicModel:
    """Stepwise-constant non-decreasing map fitted by pool-adjacent-violators."""

    breakpoints: np.ndarray
    fitted_values: np.ndarray


def _pava(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted pool-adjacent-violators: the non-decreasing LS fit to y."""
    values: list[float] = []
    weights: list[float] = []
    sizes: list[int] = []
    for yi, wi in zip(y, w):
        values.append(float(yi))
        weights.append(float(wi))
        sizes.append(1)
        while len(values) > 1 and values[-2] > values[-1]:
            wt = weights[-2] + weights[-1]
            merged = (values[-2] * weights[-2] + values[-1] * weights[-1]) / wt
            values.pop()
            weights.pop()
            sz = sizes.pop()
            values[-1] = merged
            weights[-1] = wt
            sizes[-1] += sz
    return np.repeat(values, sizes)


def fit_isotonic(val_scores: np.ndarray, val_targets: np.ndarray) -> IsotonicModel:
    """Exact non-decreasing least-squares fit of targets against scores.

    Duplicate scores are pooled (their targets averaged with weight = count)
    before running PAVA, so the fitted map is a function of the score.
    """
    scores = np.asarray(val_scores, dtype=float)
    targets = np.asarray(val_targets, dtype=float)
    if scores.shape != targets.shape or scores.ndim != 1 or scores.size == 0:
        raise ValidationError(
            "scores and targets must be equal-length 1-D arrays with >= 1 element"
        )
    order = np.argsort(scores, kind="stable")
    s_sorted = scores[order]
    t_sorted = targets[order]
    breakpoints, starts, counts = np.unique(
        s_sorted, return_index=True, return_counts=True
    )
    group_means = np.add.reduceat(t_sorted, starts) / counts
    fitted = _pava(group_means, counts.astype(float))
    return IsotonicModel(breakpoints=breakpoints, fitted_values=fitted)


def apply_isotonic(model: IsotonicModel, scores: np.ndarray) -> np.ndarray:
    """Evaluate the stepwise-constant fit, clamping outside the fitted range."""
    x = np.asarray(scores, dtype=float)
    idx = np.searchsorted(model.breakpoints, x, side="right") - 1
    idx = np.clip(idx, 0, model.breakpoints.shape[0] - 1)
    return model.fitted_values[idx]


def fit_isotonic_multiclass(val: PredictionSet) -> list[IsotonicModel]:
    """One-versus-all isotonic models, one per class column."""
    return [
        fit_isotonic(val.probs[:, k], (val.labels == k).astype(float))
        for k in range(val.n_classes)
    ]


def apply_isotonic_multiclass(
    models: list[IsotonicModel], test: PredictionSet
) -> PredictionSet:
    """Map each class column through its model, then renormalize rows.

    Rows mapping to all zeros fall back to the uniform distribution.
    """
    if len(models) != test.n_classes:
        raise ValidationError(
            f"got {len(models)} class models for {test.n_classes} classes"
        )
    cols = [apply_isotonic(m, test.probs[:, k]) for k, m in enumerate(models)]
    probs = np.column_stack(cols)
    sums = probs.sum(axis=1, keepdims=True)
    zero_rows = sums[:, 0] == 0.0
    sums[zero_rows] = 1.0
    probs = probs / sums
    probs[zero_rows] = 1.0 / test.n_classes
    return PredictionSet(probs, test.labels)


# ---------------------------------------------------------------------------
# Temperature scaling
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class TemperatureModel:
    """A single scalar temperature dividing every logit."""

    temperature: float
    converged: bool = True

    def __post_init__(self) -> None:
        if not (math.isfinite(self.temperature) and self.temperature > 0.0):
            raise ValidationError(
                f"temperature must be finite and > 0, got {self.temperature}"
            )


# Log-temperature grid seeding the gce-objective search: the binned objective
# is piecewise constant in T, and Nelder-Mead from one start can stall on a
# plateau, so the simplex starts at the best of these 41 points.
_LOG_T_GRID = np.linspace(math.log(0.05), math.log(20.0), 41)


def _golden_section(f, lo: float, hi: float, tol: float = 1e-8) -> float:
    """1-D golden-section minimizer on [lo, hi]; robustness fallback."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(np.array([c])), f(np.array([d]))
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(np.array([c]))
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(np.array([d]))
    return 0.5 * (a + b)


def fit_temperature(
    val: LogitSet,
    objective: str = "nll",
    metric: MetricConfig | None = None,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> TemperatureModel:
    """Fit T > 0 minimizing NLL or a binned calibration error on the logits.

    The search runs over log T so positivity holds by construction.  The
    ``gce`` objective scores softmax(logits / T) under ``metric`` (default:
    the standard even-bin max-prob L1 metric at its default bin count).  If
    Nelder-Mead exhausts ``max_iter`` without converging, a golden-section
    pass over the standard temperature bracket refines the result and the
    model is returned with ``converged=False``.
    """
    if objective not in ("nll", "gce"):
        raise ValueError(f"objective must be 'nll' or 'gce', got {objective!r}")
    z = val.logits
    labels = val.labels

    if objective == "nll":
        def f(x: np.ndarray) -> float:
            loss, _ = _nll_and_grad(z * math.exp(-x[0]), labels)
            return loss

        start = np.array([0.0])
    else:
        cfg = metric if metric is not None else named_metric("ECE")

        def f(x: np.ndarray) -> float:
            probs = row_softmax(z * math.exp(-x[0]))
            return gce(PredictionSet(probs, labels), cfg).value

        grid_values = [f(np.array([g])) for g in _LOG_T_GRID]
        start = np.array([_LOG_T_GRID[int(np.argmin(grid_values))]])

    result = nelder_mead(f, start, tol=tol, max_iter=max_iter)
    best_x, best_v = float(result.x[0]), result.value
    if not result.converged:
        fallback = _golden_section(f, float(_LOG_T_GRID[0]), float(_LOG_T_GRID[-1]))
        if f(np.array([fallback])) < best_v:
            best_x = fallback
    return TemperatureModel(temperature=math.exp(best_x), converged=result.converged)


def apply_temperature(model: TemperatureModel, test: LogitSet) -> PredictionSet:
    """Softmax of logits / T.  Preserves each row's argmax for any T > 0."""
    return PredictionSet(row_softmax(test.logits / model.temperature), test.labels)


# ---------------------------------------------------------------------------
# Affine scaling (Platt / vector / matrix)
# ---------------------------------------------------------------------------

AFFINE_KINDS = ("platt", "vector", "matrix")


@dataclasses.dataclass(frozen=True)
class AffineScalingModel:
    """Affine logit map: scalar a,b (platt), diagonal W,b (vector), full W,b.

    ``binary`` marks the classic two-class Platt form, a sigmoid on the
    logit difference z1 - z0; multiclass Platt applies a,b uniformly to the
    whole logit vector.
    """

    kind: str
    weight: np.ndarray
    bias: np.ndarray
    binary: bool = False


def affine_objective(logits: np.ndarray, labels: np.ndarray, kind: str):
    """(f_and_grad, x0) for the NLL of an affine logit map.

    Parameters travel as one flat vector so the optimizer and the gradient
    checker can stay generic.  For ``platt`` on K=2 the classic binary form
    is used: p1 = sigmoid(a (z1 - z0) + b).
    """
    z = np.asarray(logits, dtype=float)
    y = np.asarray(labels, dtype=int)
    n, k = z.shape
    if kind == "platt" and k == 2:
        s = z[:, 1] - z[:, 0]
        t_true = (y == 1).astype(float)

        def f_and_grad(params: np.ndarray) -> tuple[float, np.ndarray]:
            a, b = params
            t = a * s + b
            # loss_i = y softplus(-t) + (1-y) softplus(t), all stable forms
            loss = float(
                np.mean(t_true * np.logaddexp(0.0, -t) + (1.0 - t_true) * np.logaddexp(0.0, t))
            )
            dt = (1.0 / (1.0 + np.exp(-t)) - t_true) / n
            return loss, np.array([float(dt @ s), float(dt.sum())])

        return f_and_grad, np.array([1.0, 0.0])

    if kind == "platt":
        def f_and_grad(params: np.ndarray) -> tuple[float, np.ndarray]:
            a, b = params
            loss, gout = _nll_and_grad(a * z + b, y)
            return loss, np.array([float((gout * z).sum()), float(gout.sum())])

        return f_and_grad, np.array([1.0, 0.0])

    if kind == "vector":
        def f_and_grad(params: np.ndarray) -> tuple[float, np.ndarray]:
            w, b = params[:k], params[k:]
            loss, gout = _nll_and_grad(z * w + b, y)
            return loss, np.concatenate([(gout * z).sum(axis=0), gout.sum(axis=0)])

        return f_and_grad, np.concatenate([np.ones(k), np.zeros(k)])

    if kind == "matrix":
        def f_and_grad(params: np.ndarray) -> tuple[float, np.ndarray]:
            w = params[: k * k].reshape(k, k)
            b = params[k * k :]
            loss, gout = _nll_and_grad(z @ w.T + b, y)
            return loss, np.concatenate([(gout.T @ z).ravel(), gout.sum(axis=0)])

        return f_and_grad, np.concatenate([np.eye(k).ravel(), np.zeros(k)])

    raise ValueError(f"kind must be one of {AFFINE_KINDS}, got {kind!r}")


def fit_affine_scaling(
    val: LogitSet, kind: str, sgd: SgdConfig = SgdConfig()
) -> AffineScalingModel:
    """Train an affine logit map on NLL with the standard SGD recipe."""
    k = val.n_classes
    f_and_grad, x0 = affine_objective(val.logits, val.labels, kind)
    params = sgd_minimize(f_and_grad, x0, sgd)
    if kind == "platt":
        return AffineScalingModel(
            kind=kind,
            weight=np.asarray(params[0]),
            bias=np.asarray(params[1]),
            binary=(k == 2),
        )
    if kind == "vector":
        return AffineScalingModel(kind=kind, weight=params[:k], bias=params[k:])
    return AffineScalingModel(
        kind=kind, weight=params[: k * k].reshape(k, k), bias=params[k * k :]
    )


def apply_affine(model: AffineScalingModel, test: LogitSet) -> PredictionSet:
    """Apply the fitted affine map and renormalize through softmax."""
    z = test.logits
    if model.kind == "platt" and model.binary:
        t = float(model.weight) * (z[:, 1] - z[:, 0]) + float(model.bias)
        p1 = 1.0 / (1.0 + np.exp(-t))
        return PredictionSet(np.column_stack([1.0 - p1, p1]), test.labels)
    if model.kind == "platt":
        out = float(model.weight) * z + float(model.bias)
    elif model.kind == "vector":
        out = z * model.weight + model.bias
    else:
        out = z @ model.weight.T + model.bias
    return PredictionSet(row_softmax(out), test.labels)


# ---------------------------------------------------------------------------
# MLP scaling
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class MlpScalingModel:
    """Feedforward logit map: hidden relu layers, linear output, width K."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]


def _mlp_shapes(k: int, hidden: int, layers: int) -> list[tuple[tuple[int, int], tuple[int]]]:
    dims = [k] + [hidden] * layers + [k]
    return [((dims[i + 1], dims[i]), (dims[i + 1],)) for i in range(len(dims) - 1)]


def _pack(weights, biases) -> np.ndarray:
    return np.concatenate([a.ravel() for pair in zip(weights, biases) for a in pair])


def _unpack(params: np.ndarray, shapes) -> tuple[list[np.ndarray], list[np.ndarray]]:
    weights, biases, pos = [], [], 0
    for w_shape, b_shape in shapes:
        w_size = w_shape[0] * w_shape[1]
        weights.append(params[pos : pos + w_size].reshape(w_shape))
        pos += w_size
        biases.append(params[pos : pos + b_shape[0]])
        pos += b_shape[0]
    return weights, biases


def _mlp_forward(weights, biases, z: np.ndarray) -> np.ndarray:
    a = z
    for w, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ w.T + b, 0.0)
    return a @ weights[-1].T + biases[-1]


def init_mlp_params(
    k: int,
    seed: int,
    hidden: int = MLP_HIDDEN_WIDTH,
    layers: int = MLP_HIDDEN_LAYERS,
    scale: float | None = None,
) -> np.ndarray:
    """Seeded random init, fan-scaled by default.

    The default draws each weight from N(0, 2 / (fan_in + fan_out)), which
    trains under the fixed learning rate.  Passing an explicit ``scale``
    overrides that standard deviation everywhere; a near-zero scale gives an
    untrained network whose outputs are near-uniform.  Biases start at zero.
    """
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for w_shape, b_shape in _mlp_shapes(k, hidden, layers):
        std = scale if scale is not None else math.sqrt(2.0 / sum(w_shape))
        weights.append(std * rng.standard_normal(w_shape))
        biases.append(np.zeros(b_shape))
    return _pack(weights, biases)


def mlp_objective(
    logits: np.ndarray,
    labels: np.ndarray,
    hidden: int = MLP_HIDDEN_WIDTH,
    layers: int = MLP_HIDDEN_LAYERS,
):
    """f_and_grad for the MLP's NLL over a flat parameter vector."""
    z = np.asarray(logits, dtype=float)
    y = np.asarray(labels, dtype=int)
    shapes = _mlp_shapes(z.shape[1], hidden, layers)

    def f_and_grad(params: np.ndarray) -> tuple[float, np.ndarray]:
        weights, biases = _unpack(params, shapes)
        activations = [z]
        pre_acts = []
        a = z
        for w, b in zip(weights[:-1], biases[:-1]):
            pre = a @ w.T + b
            pre_acts.append(pre)
            a = np.maximum(pre, 0.0)
            activations.append(a)
        out = a @ weights[-1].T + biases[-1]
        loss, gout = _nll_and_grad(out, y)

        grad_w = [np.empty(0)] * len(weights)
        grad_b = [np.empty(0)] * len(biases)
        grad_w[-1] = gout.T @ activations[-1]
        grad_b[-1] = gout.sum(axis=0)
        upstream = gout @ weights[-1]
        for layer in range(layers - 1, -1, -1):
            dh = upstream * (pre_acts[layer] > 0.0)
            grad_w[layer] = dh.T @ activations[layer]
            grad_b[layer] = dh.sum(axis=0)
            if layer:
                upstream = dh @ weights[layer]
        return loss, _pack(grad_w, grad_b)

    return f_and_grad


def fit_mlp_scaling(
    val: LogitSet,
    seed: int = 0,
    sgd: SgdConfig = SgdConfig(),
    hidden: int = MLP_HIDDEN_WIDTH,
    layers: int = MLP_HIDDEN_LAYERS,
) -> MlpScalingModel:
    """Train the relu network on NLL; deterministic for a fixed seed."""
    params0 = init_mlp_params(val.n_classes, seed, hidden, layers)
    f_and_grad = mlp_objective(val.logits, val.labels, hidden, layers)
    params = sgd_minimize(f_and_grad, params0, sgd)
    weights, biases = _unpack(params, _mlp_shapes(val.n_classes, hidden, layers))
    return MlpScalingModel(weights=tuple(weights), biases=tuple(biases))


def apply_mlp_scaling(model: MlpScalingModel, test: LogitSet) -> PredictionSet:
    out = _mlp_forward(model.weights, model.biases, test.logits)
    return PredictionSet(row_softmax(out), test.labels)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def model_to_dict(model) -> dict:
    """JSON-ready representation tagged with a ``method`` key."""
    if isinstance(model, HistogramBinningModel):
        return {
            "method": "histogram-binning",
            "edges": model.edges.tolist(),
            "bin_values": model.bin_values.tolist(),
            "class_conditional": model.class_conditional,
            "class_values": (
                {str(k): v.tolist() for k, v in model.class_values.items()}
                if model.class_values is not None
                else None
            ),
            "empty_bin": model.empty_bin,
        }
    if isinstance(model, IsotonicModel):
        return {
            "method": "isotonic",
            "breakpoints": model.breakpoints.tolist(),
            "fitted_values": model.fitted_values.tolist(),
        }
    if isinstance(model, list) and all(isinstance(m, IsotonicModel) for m in model):
        return {
            "method": "isotonic-multiclass",
            "models": [
                {
                    "breakpoints": m.breakpoints.tolist(),
                    "fitted_values": m.fitted_values.tolist(),
                }
                for m in model
            ],
        }
    if isinstance(model, TemperatureModel):
        return {
            "method": "temperature",
            "temperature": model.temperature,
            "converged": model.converged,
        }
    if isinstance(model, AffineScalingModel):
        return {
            "method": "affine",
            "kind": model.kind,
            "weight": np.asarray(model.weight).tolist(),
            "bias": np.asarray(model.bias).tolist(),
            "binary": model.binary,
        }
    if isinstance(model, MlpScalingModel):
        return {
            "method": "mlp",
            "weights": [w.tolist() for w in model.weights],
            "biases": [b.tolist() for b in model.biases],
        }
    raise TypeError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(doc: dict):
    """Inverse of :func:`model_to_dict`."""
    method = doc.get("method")
    if method == "histogram-binning":
        return HistogramBinningModel(
            edges=np.asarray(doc["edges"], dtype=float),
            bin_values=np.asarray(doc["bin_values"], dtype=float),
            class_conditional=doc["class_conditional"],
            class_values=(
                {int(k): np.asarray(v, dtype=float) for k, v in doc["class_values"].items()}
                if doc["class_values"] is not None
                else None
            ),
            empty_bin=doc["empty_bin"],
        )
    if method == "isotonic":
        return IsotonicModel(
            breakpoints=np.asarray(doc["breakpoints"], dtype=float),
            fitted_values=np.asarray(doc["fitted_values"], dtype=float),
        )
    if method == "isotonic-multiclass":
        return [
            IsotonicModel(
                breakpoints=np.asarray(m["breakpoints"], dtype=float),
                fitted_values=np.asarray(m["fitted_values"], dtype=float),
            )
            for m in doc["models"]
        ]
    if method == "temperature":
        return TemperatureModel(
            temperature=doc["temperature"], converged=doc["converged"]
        )
    if method == "affine":
        return AffineScalingModel(
            kind=doc["kind"],
            weight=np.asarray(doc["weight"], dtype=float),
            bias=np.asarray(doc["bias"], dtype=float),
            binary=doc["binary"],
        )
    if method == "mlp":
        return MlpScalingModel(
            weights=tuple(np.asarray(w, dtype=float) for w in doc["weights"]),
            biases=tuple(np.asarray(b, dtype=float) for b in doc["biases"]),
        )
    raise ValueError(f"unknown model method tag {method!r}")
