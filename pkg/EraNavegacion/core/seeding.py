"""Sub-flujos aleatorios con nombre derivados de una única semilla de 64 bits."""
import zlib
from typing import Union

import numpy as np

STREAMS = ("world", "kmeans", "training", "eval", "dataset", "bench")


def _stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def seed_sequence(base_seed: int, stream: str, *indices: int) -> np.random.SeedSequence:
    """
    Construye la SeedSequence de un sub-flujo.

    Args:
        base_seed: Semilla global de 64 bits
        stream: Nombre del sub-flujo ("world", "kmeans", "training", "eval"…)
        *indices: Índices adicionales (episodio, semilla de evaluación…)

    Returns:
        SeedSequence determinista e independiente entre nombres
    """
    entropy = [int(base_seed) & 0xFFFFFFFFFFFFFFFF, _stream_key(stream), *[int(i) for i in indices]]
    return np.random.SeedSequence(entropy)


def derive_seed(base_seed: int, stream: str, *indices: int) -> int:
    """
    Deriva una semilla entera de 64 bits para un sub-flujo.

    Args:
        base_seed: Semilla global
        stream: Nombre del sub-flujo
        *indices: Índices adicionales

    Returns:
        Entero en [0, 2**63)
    """
    state = seed_sequence(base_seed, stream, *indices).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def stream_rng(base_seed: int, stream: str, *indices: int) -> np.random.Generator:
    """
    Crea el generador PCG64 de un sub-flujo.

    Args:
        base_seed: Semilla global
        stream: Nombre del sub-flujo
        *indices: Índices adicionales

    Returns:
        Generador de numpy
    """
    return np.random.Generator(np.random.PCG64(seed_sequence(base_seed, stream, *indices)))


def rng_from_seed(seed: Union[int, np.integer]) -> np.random.Generator:
    """Generador PCG64 a partir de una semilla entera (estado explícito del mundo)."""
    return np.random.Generator(np.random.PCG64(int(seed)))
