"""Loss, Riemannian SGD updates, dilation, and the full training loop.

The loop is deterministic: all randomness comes from one seeded Generator,
and updates within a batch use gradients evaluated at the pre-step table.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .capacity import capacity_check
from .errors import InputError, TrainingError
from .geometry import project_rows_to_ball
from .graph import HierarchyGraph, attach_closure
from .sampling import Batch, attach_negatives, make_batches

_COINCIDENT_TOL = 1e-12


@dataclass
class EmbeddingTable:
    """Node-indexed (n, d) array of in-ball points."""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] < 2:
            raise InputError(f"embedding table must be (n, d>=2), got {self.points.shape}")

    @property
    def n_nodes(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def copy(self) -> "EmbeddingTable":
        return EmbeddingTable(self.points.copy())

    @classmethod
    def random_init(cls, n: int, dim: int, radius: float, rng: np.random.Generator):
        return cls(rng.uniform(-radius, radius, size=(n, dim)))


@dataclass
class TrainConfig:
    dim: int = 2
    lr: float = 0.5
    epochs: int = 3000
    batch_size: int = 50
    m: int = 50
    eta_tc: float = 0.2
    n_tc: int = 300
    burn_in_epochs: int = 20
    burn_in_lr_divisor: float = 10.0
    dilation_enabled: bool = True
    dilation_k: float = 1.1
    dilation_start_epoch: int = 300
    dilation_cooldown: int = 50
    init_radius: float = 1e-3
    eps: float = 1e-5
    seed: int = 0

    def validate(self) -> None:
        if self.dim < 2:
            raise InputError(f"dim must be >= 2, got {self.dim}")
        if self.lr <= 0:
            raise InputError(f"lr must be positive, got {self.lr}")
        if self.epochs < 0:
            raise InputError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.m < 1:
            raise InputError(f"m must be >= 1, got {self.m}")
        if not 0.0 <= self.eta_tc <= 1.0:
            raise InputError(f"eta_tc must lie in [0, 1], got {self.eta_tc}")
        if self.n_tc < 0:
            raise InputError(f"n_tc must be >= 0, got {self.n_tc}")
        if self.burn_in_epochs < 0:
            raise InputError(f"burn_in_epochs must be >= 0, got {self.burn_in_epochs}")
        if self.burn_in_lr_divisor < 1:
            raise InputError(f"burn_in_lr_divisor must be >= 1, got {self.burn_in_lr_divisor}")
        if self.dilation_enabled and self.dilation_k <= 1.0:
            raise InputError(f"dilation_k must exceed 1, got {self.dilation_k}")
        if self.dilation_cooldown < 1:
            raise InputError(f"dilation_cooldown must be >= 1, got {self.dilation_cooldown}")
        if not 0.0 < self.init_radius < 0.1:
            raise InputError(f"init_radius must lie in (0, 0.1), got {self.init_radius}")
        if not 0.0 < self.eps < 0.1:
            raise InputError(f"eps must lie in (0, 0.1), got {self.eps}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    dilation_applied: bool
    offenders: int | None  # None when the capacity check did not run


@dataclass
class TrainTrace:
    records: list[EpochRecord] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Loss


def edge_loss(theta: EmbeddingTable, i: int, j: int, negatives: list[int]) -> float:
    """Softmax cross-entropy of the true target against its negatives."""
    from .geometry import poincare_distance

    if not negatives:
        return 0.0
    pts = theta.points
    d_pos = poincare_distance(pts[i], pts[j])
    d_all = np.array([d_pos] + [poincare_distance(pts[i], pts[x]) for x in negatives])
    return float(d_pos + np.logaddexp.reduce(-d_all))


def total_loss(theta: EmbeddingTable, batches: list[Batch]) -> float:
    """Weight-summed edge losses over all batches."""
    total = 0.0
    for batch in batches:
        for (i, j, w), negs in zip(batch.edges, batch.negatives):
            total += w * edge_loss(theta, i, j, negs)
    return total


# ---------------------------------------------------------------------------
# One SGD step (vectorized over the batch)


def _batch_loss_grad(points: np.ndarray, batch: Batch) -> tuple[float, np.ndarray]:
    """Weighted loss of one batch and its summed Euclidean gradient table.

    Both are evaluated at the current ``points``; the gradient is the exact
    derivative of the returned (weight-summed) loss.
    """
    b = len(batch.edges)
    if len(batch.negatives) != b:
        raise TrainingError("batch has no negatives attached")
    src = np.fromiter((e[0] for e in batch.edges), dtype=np.int64, count=b)
    tgt = np.fromiter((e[1] for e in batch.edges), dtype=np.int64, count=b)
    wts = np.fromiter((e[2] for e in batch.edges), dtype=np.float64, count=b)

    width = 1 + max((len(n) for n in batch.negatives), default=0)
    cand = np.zeros((b, width), dtype=np.int64)
    mask = np.zeros((b, width), dtype=bool)
    cand[:, 0] = tgt
    mask[:, 0] = True
    for row, negs in enumerate(batch.negatives):
        if negs:
            cand[row, 1 : 1 + len(negs)] = negs
            mask[row, 1 : 1 + len(negs)] = True

    u = points[src]  # (b, d)
    v = points[cand]  # (b, w, d)
    alpha = 1.0 - np.einsum("ij,ij->i", u, u)  # (b,)
    beta = 1.0 - np.einsum("ijk,ijk->ij", v, v)  # (b, w)
    diff = u[:, None, :] - v
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    gamma = 1.0 + 2.0 * sq / (alpha[:, None] * beta)
    gamma = np.maximum(gamma, 1.0)
    dist = np.arccosh(gamma)

    logits = np.where(mask, -dist, -np.inf)
    row_max = logits.max(axis=1)
    lse = row_max + np.log(np.exp(logits - row_max[:, None]).sum(axis=1))
    losses = dist[:, 0] + lse  # per-edge loss, 0 when no negatives
    probs = np.where(mask, np.exp(logits - lse[:, None]), 0.0)

    # d(loss)/d(distance_k) = onehot(target) - softmax_k, scaled by weight
    coef = -probs
    coef[:, 0] += 1.0
    coef *= wts[:, None]

    # pairwise distance gradients; coincident pairs contribute zero
    sep = gamma - 1.0 >= _COINCIDENT_TOL
    root = np.sqrt(np.maximum(gamma * gamma - 1.0, _COINCIDENT_TOL**2))
    uv = np.einsum("ik,ijk->ij", u, v)
    vv = np.einsum("ijk,ijk->ij", v, v)
    uu = np.einsum("ij,ij->i", u, u)
    scale_u = np.where(sep & mask, 4.0 / (beta * root), 0.0)
    scale_v = np.where(sep & mask, 4.0 / (alpha[:, None] * root), 0.0)
    gu = scale_u[..., None] * (
        ((vv - 2.0 * uv + 1.0) / alpha[:, None] ** 2)[..., None] * u[:, None, :]
        - v / alpha[:, None, None]
    )
    gv = scale_v[..., None] * (
        ((uu[:, None] - 2.0 * uv + 1.0) / beta**2)[..., None] * v
        - u[:, None, :] / beta[..., None]
    )

    grad_src = np.einsum("ij,ijk->ik", coef, gu)  # (b, d)
    grad_cand = coef[..., None] * gv  # (b, w, d)

    if not (np.all(np.isfinite(grad_src)) and np.all(np.isfinite(grad_cand[mask]))):
        bad = np.where(~np.isfinite(grad_src).all(axis=1))[0]
        if bad.size == 0:
            bad = np.where(~np.isfinite(grad_cand).all(axis=(1, 2)))[0]
        i, j, _ = batch.edges[int(bad[0])]
        raise TrainingError(f"non-finite gradient on edge ({i}, {j})")

    grad = np.zeros_like(points)
    np.add.at(grad, src, grad_src)
    np.add.at(grad, cand[mask], grad_cand[mask])
    return float((wts * losses).sum()), grad


def _apply_batch(points: np.ndarray, batch: Batch, lr: float, eps: float) -> float:
    """Update ``points`` in place from one batch; returns its weighted loss.

    The step uses the batch-mean gradient (weighted loss divided by the
    number of edges in the batch), evaluated at the pre-step table.
    """
    loss, grad = _batch_loss_grad(points, batch)
    grad /= len(batch.edges)
    touched = np.nonzero(np.any(grad != 0.0, axis=1))[0]
    if touched.size:
        theta_t = points[touched]
        factor = (1.0 - np.einsum("ij,ij->i", theta_t, theta_t)) ** 2 / 4.0
        updated = theta_t - lr * factor[:, None] * grad[touched]
        points[touched] = project_rows_to_ball(updated, eps)
    return loss


def sgd_step(theta: EmbeddingTable, batch: Batch, lr: float, eps: float) -> EmbeddingTable:
    """Apply one synchronous Riemannian SGD step; returns the mutated table."""
    if lr <= 0:
        raise InputError(f"lr must be positive, got {lr}")
    _apply_batch(theta.points, batch, lr, eps)
    return theta


def apply_dilation(theta: EmbeddingTable, k: float, eps: float = 1e-5) -> EmbeddingTable:
    """Multiply every point's hyperbolic norm by ``k`` in place."""
    if k <= 0:
        raise InputError(f"dilation factor must be positive, got {k}")
    pts = theta.points
    norms = np.linalg.norm(pts, axis=1)
    nz = norms > 0.0
    target = np.tanh(k * np.arctanh(norms[nz]))
    pts[nz] *= (target / norms[nz])[:, None]
    theta.points = project_rows_to_ball(pts, eps)
    return theta


# ---------------------------------------------------------------------------
# Training loop


def _both_orientations(pairs, weight: float) -> list[tuple[int, int, float]]:
    out = []
    for i, j in pairs:
        out.append((i, j, weight))
        out.append((j, i, weight))
    return out


def train(g: HierarchyGraph, cfg: TrainConfig) -> tuple[EmbeddingTable, TrainTrace]:
    """Run the geometry-aware loop: capacity-triggered dilation, then the
    closure-regularized loss for the first ``n_tc`` epochs, plain loss after.
    """
    cfg.validate()
    use_tc = cfg.eta_tc > 0.0 and cfg.n_tc > 0
    if use_tc and g.closure_edges is None:
        attach_closure(g)

    rng = np.random.default_rng(cfg.seed)
    theta = EmbeddingTable.random_init(len(g), cfg.dim, cfg.init_radius, rng)
    trace = TrainTrace()

    # Each linked pair is trained in both orientations so parents are also
    # pushed away from their negatives; one-directional training leaves inner
    # nodes closer to their subtrees than to their own parents.
    base_edges = _both_orientations(sorted(g.edges), 1.0)
    tc_edges = _both_orientations(sorted(g.closure_edges), cfg.eta_tc) if use_tc else []

    last_dilation: int | None = None
    for epoch in range(1, cfg.epochs + 1):
        dilation_applied = False
        offenders: int | None = None
        if (
            cfg.dilation_enabled
            and epoch >= cfg.dilation_start_epoch
            and (last_dilation is None or epoch - last_dilation >= cfg.dilation_cooldown)
        ):
            found = capacity_check(theta.points, g, cfg.dim)
            offenders = len(found)
            if found:
                apply_dilation(theta, cfg.dilation_k, cfg.eps)
                dilation_applied = True
                last_dilation = epoch

        tc_active = use_tc and epoch <= cfg.n_tc
        epoch_edges = base_edges + tc_edges if tc_active else base_edges

        lr = cfg.lr / cfg.burn_in_lr_divisor if epoch <= cfg.burn_in_epochs else cfg.lr
        loss_sum = 0.0
        for batch in make_batches(epoch_edges, cfg.batch_size, rng):
            attach_negatives(batch, g, cfg.m, rng, include_closure=tc_active)
            loss_sum += _apply_batch(theta.points, batch, lr, cfg.eps)
        trace.records.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=loss_sum / len(epoch_edges),
                dilation_applied=dilation_applied,
                offenders=offenders,
            )
        )
    return theta, trace


# ---------------------------------------------------------------------------
# Checkpoint and trace files


def save_checkpoint(
    theta: EmbeddingTable,
    labels: list[str],
    path: str | os.PathLike,
    cfg: TrainConfig | None = None,
    epoch: int | None = None,
) -> None:
    """Write one ``label<TAB>c1..cd`` line per node, 17 significant digits.

    A ``<path>.meta.json`` sidecar records the config and epoch when given.
    """
    if len(labels) != theta.n_nodes:
        raise InputError("label count does not match the embedding table")
    with open(path, "w", encoding="utf-8") as fh:
        for label, row in zip(labels, theta.points):
            coords = "\t".join(f"{c:.17g}" for c in row)
            fh.write(f"{label}\t{coords}\n")
    if cfg is not None or epoch is not None:
        meta = {"config": cfg.to_dict() if cfg else None, "epoch": epoch}
        with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")


def load_checkpoint(path: str | os.PathLike) -> tuple[list[str], np.ndarray]:
    """Read a checkpoint TSV back into labels and an (n, d) array."""
    if not os.path.exists(path):
        raise InputError(f"checkpoint not found: {path}")
    labels: list[str] = []
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) < 3:
                raise InputError(f"{path}:{lineno}: expected label plus >= 2 coordinates")
            labels.append(fields[0])
            try:
                rows.append([float(x) for x in fields[1:]])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: bad coordinate: {exc}") from None
    dims = {len(r) for r in rows}
    if len(dims) > 1:
        raise InputError(f"{path}: inconsistent coordinate counts {sorted(dims)}")
    return labels, np.array(rows, dtype=np.float64)


def write_trace(trace: TrainTrace, path: str | os.PathLike) -> None:
    """CSV with one row per epoch: epoch, loss, dilation flag, offender count."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss,dilation_applied,offenders\n")
        for r in trace.records:
            off = "" if r.offenders is None else str(r.offenders)
            fh.write(f"{r.epoch},{r.mean_loss:.17g},{int(r.dilation_applied)},{off}\n")
