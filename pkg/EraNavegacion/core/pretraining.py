"""
Preentrenamiento del codificador: pérdida métrica + imitación + isotropía.

    L = λ_i · mean_b ‖â_b − a*_b / v_max‖²
      + λ_m · mean_p | ‖z_i − z_j‖ − D_phys(E_i, E_j) |
      + w_iso · (mean_b ‖z_b‖² − 1)²

Gradientes analíticos y descenso por mini-lotes con momentum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from EraNavegacion.core.encoder import EncoderParams, ForwardCache, forward_batch, imitation_head
from EraNavegacion.core.features import FeatureScales, chamfer_features, featurize, stack_features
from EraNavegacion.core.models import EventList, Vec3
from EraNavegacion.core.seeding import stream_rng
from EraNavegacion.core.settings import EncoderShape, PretrainHyper
from shared.utils.exceptions import DatasetError, TrainingDivergenceError
from shared.utils.logger import get_logger

logger = get_logger("Pretraining")

# Pares fijos usados para evaluar la pérdida de época sobre todo el dataset
PARES_EVALUACION = 256


@dataclass
class FeaturizedDataset:
    """Dataset featurizado una sola vez: bloques por registro, globales y acciones normalizadas."""
    blocks: List[np.ndarray]
    globals_: List[np.ndarray]
    targets: np.ndarray

    def __len__(self) -> int:
        return len(self.blocks)

    @classmethod
    def build(cls, dataset: Sequence[Tuple[EventList, Vec3]], scales: FeatureScales) -> "FeaturizedDataset":
        blocks, globals_, targets = [], [], []
        for E, action in dataset:
            X, g = featurize(E, scales)
            blocks.append(X)
            globals_.append(g)
            targets.append(np.asarray(action, dtype=np.float64) / scales.velocity_scale)
        return cls(blocks=blocks, globals_=globals_, targets=np.array(targets).reshape(-1, 3))


@dataclass
class Batch:
    """Lote con pares de la pérdida métrica y sus distancias físicas precalculadas."""
    X: np.ndarray
    G: np.ndarray
    averaging: object
    targets: np.ndarray
    pairs: np.ndarray
    distances: np.ndarray


def make_batch(data: FeaturizedDataset, indices: np.ndarray, pair_count: int,
               rng: Optional[np.random.Generator], shape: EncoderShape) -> Batch:
    """
    Arma un lote y muestrea pares (i ≠ j) dentro de él.

    Args:
        data: Dataset featurizado
        indices: Índices de registros del lote
        pair_count: Pares a muestrear (0 desactiva el término métrico)
        rng: Generador para muestrear pares
        shape: Pesos de la distancia física

    Returns:
        Batch listo para ``objective``
    """
    blocks = [data.blocks[i] for i in indices]
    globals_ = [data.globals_[i] for i in indices]
    X, G, averaging = stack_features(blocks, globals_)
    pairs = np.zeros((0, 2), dtype=np.int64)
    if pair_count > 0 and len(indices) > 1 and rng is not None:
        first = rng.integers(0, len(indices), size=pair_count)
        shift = rng.integers(1, len(indices), size=pair_count)
        pairs = np.stack([first, (first + shift) % len(indices)], axis=1)
    distances = np.array([
        chamfer_features(blocks[i], globals_[i], blocks[j], globals_[j],
                         shape.empty_match_cost, shape.velocity_weight, shape.global_weight)
        for i, j in pairs
    ], dtype=np.float64)
    return Batch(X=X, G=G, averaging=averaging, targets=data.targets[indices],
                 pairs=pairs, distances=distances)


def objective(params: EncoderParams, batch: Batch, hyper: PretrainHyper,
              with_grad: bool = True) -> Tuple[float, Dict[str, float], Optional[np.ndarray]]:
    """
    Pérdida total del lote y su gradiente analítico respecto de todos los parámetros.

    Args:
        params: Parámetros actuales
        batch: Lote
        hyper: Pesos de la pérdida
        with_grad: Si False solo evalúa la pérdida

    Returns:
        Tupla (pérdida, componentes, gradiente aplanado o None)
    """
    cache: ForwardCache = forward_batch(params, batch.X, batch.G, batch.averaging)
    Z = cache.Z
    B = Z.shape[0]
    dZ = np.zeros_like(Z)

    pred = imitation_head(params, Z)
    residual = pred - batch.targets
    imitation = float(np.sum(residual ** 2) / B)
    d_pred = hyper.lambda_i * 2.0 * residual / B

    metric = 0.0
    n_pairs = len(batch.pairs)
    if n_pairs and hyper.lambda_m > 0.0:
        diff = Z[batch.pairs[:, 0]] - Z[batch.pairs[:, 1]]
        norms = np.linalg.norm(diff, axis=1)
        gap = norms - batch.distances
        metric = float(np.mean(np.abs(gap)))
        coef = hyper.lambda_m * np.sign(gap) / n_pairs
        safe = np.where(norms > 0.0, norms, 1.0)
        pair_grad = (coef / safe)[:, None] * diff
        pair_grad[norms == 0.0] = 0.0
        np.add.at(dZ, batch.pairs[:, 0], pair_grad)
        np.add.at(dZ, batch.pairs[:, 1], -pair_grad)

    energy = float(np.mean(np.einsum("ij,ij->i", Z, Z)))
    isotropy = (energy - 1.0) ** 2
    dZ += hyper.isotropy_weight * 2.0 * (energy - 1.0) * 2.0 * Z / B

    loss = hyper.lambda_i * imitation + hyper.lambda_m * metric + hyper.isotropy_weight * isotropy
    parts = {"imitation": imitation, "metric": metric, "isotropy": isotropy}
    if not with_grad:
        return loss, parts, None

    dWi = d_pred.T @ Z
    dbi = d_pred.sum(axis=0)
    dZ += d_pred @ params.Wi

    dW2 = dZ.T @ cache.U
    db2 = dZ.sum(axis=0)
    dU = dZ @ params.W2
    dPooled = dU[:, :params.hidden]
    if cache.averaging is not None:
        dH = np.asarray(cache.averaging.T @ dPooled)
        dPre = dH * (1.0 - cache.H ** 2)
        dW1 = dPre.T @ cache.X
        db1 = dPre.sum(axis=0)
    else:
        dW1 = np.zeros_like(params.W1)
        db1 = np.zeros_like(params.b1)
    grad = np.concatenate([dW1.ravel(), db1, dW2.ravel(), db2, dWi.ravel(), dbi])
    return loss, parts, grad


def numerical_gradient(fn: Callable[[np.ndarray], float], theta: np.ndarray,
                       indices: Sequence[int], eps: float = 1e-6) -> np.ndarray:
    """Diferencias centrales de ``fn`` en las coordenadas indicadas."""
    result = np.zeros(len(indices))
    for n, idx in enumerate(indices):
        plus = theta.copy()
        minus = theta.copy()
        plus[idx] += eps
        minus[idx] -= eps
        result[n] = (fn(plus) - fn(minus)) / (2.0 * eps)
    return result


def pretrain(dataset: Sequence[Tuple[EventList, Vec3]], hyper: PretrainHyper,
             shape: EncoderShape = EncoderShape(),
             scales: FeatureScales = FeatureScales()) -> Tuple[EncoderParams, List[Dict[str, float]]]:
    """
    Entrena el codificador sobre pares (E, a*) del experto.

    Args:
        dataset: Pares (lista de eventos, acción experta)
        hyper: Hiperparámetros
        shape: Dimensiones del codificador
        scales: Escalas de featurización

    Returns:
        Tupla (parámetros entrenados, curva de pérdida por época; la época 0
        es la pérdida inicial)

    Raises:
        DatasetError: Si el dataset está vacío
        TrainingDivergenceError: Si la pérdida deja de ser finita
    """
    if not dataset:
        raise DatasetError("El dataset de preentrenamiento está vacío")
    hyper.validate()
    rng = stream_rng(hyper.seed, "training")
    params = EncoderParams.initialize(shape, scales, rng, hyper.init_scale)
    data = FeaturizedDataset.build(dataset, scales)
    n = len(data)

    eval_indices = np.arange(n)
    eval_pairs = PARES_EVALUACION if hyper.pairs_per_batch > 0 else 0
    eval_batch = make_batch(data, eval_indices, eval_pairs, rng, shape)

    def evaluate(epoch: int) -> Dict[str, float]:
        loss, parts, _ = objective(params, eval_batch, hyper, with_grad=False)
        return {"epoch": epoch, "loss": loss, **parts}

    curve = [evaluate(0)]
    logger.info(f"Preentrenamiento: {n} registros, {hyper.epochs} épocas, pérdida inicial {curve[0]['loss']:.6f}")

    theta = params.flatten()
    velocity = np.zeros_like(theta)
    last_loss = curve[0]["loss"]
    for epoch in range(1, hyper.epochs + 1):
        order = rng.permutation(n)
        for batch_idx, start in enumerate(range(0, n, hyper.batch_size)):
            batch = make_batch(data, order[start:start + hyper.batch_size], hyper.pairs_per_batch, rng, shape)
            loss, _, grad = objective(params, batch, hyper)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                logger.error(f"Divergencia en época {epoch}, lote {batch_idx}: pérdida {loss}")
                raise TrainingDivergenceError(
                    f"Pérdida no finita en época {epoch}, lote {batch_idx}",
                    epoch=epoch, batch=batch_idx, last_loss=last_loss,
                )
            last_loss = loss
            velocity = hyper.momentum * velocity - hyper.learning_rate * grad
            theta = theta + velocity
            params = params.unflatten(theta)
        point = evaluate(epoch)
        if not np.isfinite(point["loss"]):
            raise TrainingDivergenceError(f"Pérdida de evaluación no finita en época {epoch}",
                                          epoch=epoch, batch=-1, last_loss=last_loss)
        curve.append(point)
        logger.debug(f"Época {epoch}: pérdida {point['loss']:.6f} (imitación {point['imitation']:.6f}, "
                     f"métrica {point['metric']:.6f})")

    logger.info(f"Preentrenamiento terminado: pérdida final {curve[-1]['loss']:.6f}")
    return params, curve
