"""Excepciones del laboratorio"""

from typing import Optional


class OntolabError(Exception):
    """Error base de ontolab"""


class DomainError(OntolabError, ValueError):
    """Entrada fuera del dominio (rayos no normalizados, pesos inválidos, ...)"""


class SpaceMismatchError(DomainError):
    """Dos objetos viven en espacios de estados ónticos distintos"""


class QuadratureError(OntolabError):
    """La configuración de cuadratura no puede integrar el integrando pedido"""


class UnknownModelError(OntolabError, KeyError):
    """Nombre de modelo ausente del registro"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "modelo desconocido"


class NotAQuantumModelError(OntolabError):
    """El modelo no reproduce la estadística cuántica (regla de Born)"""

    def __init__(self, message: str, psi=None, measurement=None, outcome: Optional[int] = None,
                 deviation: Optional[float] = None):
        super().__init__(message)
        self.psi = psi
        self.measurement = measurement
        self.outcome = outcome
        self.deviation = deviation


class HypothesisRefusedError(OntolabError):
    """La hipótesis de un argumento no se cumple para el modelo dado"""

    def __init__(self, message: str, explanation: str = ""):
        super().__init__(message)
        self.explanation = explanation
