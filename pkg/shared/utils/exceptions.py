# coding: utf-8
"""
Excepciones personalizadas del proyecto EraNavegacion.

Define excepciones específicas para los distintos tipos de errores que
pueden ocurrir en la simulación, el codificador de eventos, el banco de
conocimiento y el arnés de experimentos.
"""


class EraError(Exception):
    """
    Excepción base del proyecto.

    Todas las excepciones específicas heredan de esta clase, de modo que la
    CLI puede convertirlas en un código de salida 1.
    """

    pass


class ConfigurationError(EraError):
    """
    Excepción para configuraciones inválidas.

    Se lanza cuando un valor de configuración está fuera de rango, cuando un
    archivo key=value está mal formado o cuando la geometría inicial de un
    episodio no puede generarse tras los reintentos permitidos.
    """

    pass


class SimulationError(EraError):
    """
    Excepción para errores del mundo cinemático.

    Se lanza cuando una acción no es finita o el estado deja de ser finito.
    """

    pass


class EpisodeAbortedError(EraError):
    """
    Excepción para episodios abortados por la política.

    Envuelve la excepción original de la política junto con la semilla y el
    paso en que ocurrió.
    """

    def __init__(self, message: str, seed: int, step: int) -> None:
        super().__init__(message)
        self.seed = seed
        self.step = step


class EncoderError(EraError):
    """
    Excepción para entradas inválidas del codificador.

    Se lanza ante dimensiones incompatibles o características no finitas.
    """

    pass


class TrainingDivergenceError(EraError):
    """
    Excepción para el preentrenamiento divergente (pérdida NaN o infinita).

    Conserva la época, el lote y la última pérdida finita como diagnóstico.
    """

    def __init__(self, message: str, epoch: int, batch: int, last_loss: float) -> None:
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
        self.last_loss = last_loss


class DynamicsFitError(EraError):
    """
    Excepción para el ajuste del modelo de transición latente.

    Se lanza cuando hay muy pocas tripletas o la matriz normal es singular.
    """

    pass


class BankError(EraError):
    """
    Excepción base para errores del banco de conocimiento.
    """

    pass


class DuplicateEntryError(BankError):
    """Se lanza al insertar una entrada con un id ya existente."""

    pass


class UnknownEntryError(BankError):
    """Se lanza al penalizar o podar un id que no existe en el banco."""

    pass


class InvalidEntryError(BankError):
    """Se lanza cuando una entrada viola sus invariantes (r fuera de (0,1], z de otra dimensión)."""

    pass


class EmptyBankError(BankError):
    """Se lanza cuando se consulta o se decide sobre un banco vacío."""

    pass


class StaleIndexError(BankError):
    """
    Se lanza cuando el índice IVF está desactualizado.

    El mensaje indica que debe reconstruirse el índice con build_index.
    """

    pass


class IndexBuildError(BankError):
    """Se lanza cuando no se puede entrenar el índice IVF (n_list inválido)."""

    pass


class BankFormatError(BankError):
    """
    Excepción para archivos JSONL del banco mal formados.

    Incluye el número de línea donde se detectó el problema.
    """

    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"Línea {line_number}: {message}")
        self.line_number = line_number


class DatasetError(EraError):
    """
    Excepción para el conjunto de datos experto.

    Se lanza cuando ningún episodio fue retenido o el archivo es inválido.
    """

    pass


class ArtifactError(EraError):
    """
    Excepción para artefactos faltantes o incompatibles (modelo, banco).
    """

    pass
