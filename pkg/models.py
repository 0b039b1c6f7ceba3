"""
Modelos ontológicos de un qubit.

Cada modelo declara su espacio óntico, la preparación psi -> p(lambda|psi)
y la medición M -> funciones de respuesta. Los modelos no guardan estado.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence, Type

import numpy as np

from bloch import ProjectiveMeasurement, Ray, ray_to_bloch
from errors import UnknownModelError
from measures import (
    SPHERE,
    Density,
    EpistemicState,
    IndicatorFunction,
    OnticPoint,
    OnticSpace,
    PointMass,
    Product,
    ResponseFunction,
    SphericalCap,
)
from sphere_quadrature import Cut

UNIFORM_DENSITY = 1.0 / (4.0 * math.pi)


def _step(values: np.ndarray) -> np.ndarray:
    """Theta(x) con Theta(0) = 0"""
    return (values > 0.0).astype(float)


def uniform_density() -> Density:
    """Densidad uniforme 1/4pi sobre una esfera"""
    return Density(SPHERE, lambda points: np.full(points.shape[0], UNIFORM_DENSITY), label='uniform')


class OntologicalModel(ABC):
    """Interfaz común: espacio óntico, preparación y medición"""

    name: str = ""
    description: str = ""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    @abstractmethod
    def space(self) -> OnticSpace:
        pass

    @abstractmethod
    def prepare(self, psi: Ray) -> EpistemicState:
        pass

    @abstractmethod
    def indicator(self, m: ProjectiveMeasurement) -> IndicatorFunction:
        pass

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


class BeltramettiBugajskiModel(OntologicalModel):
    """
    Modelo psi-completo: el estado óntico es el propio rayo.

    prepare(psi) es una delta en psi_vec y la respuesta del resultado con
    vector v es (1 + v . lambda)/2.
    """

    name = 'bb'
    description = 'Beltrametti-Bugajski'

    def space(self) -> OnticSpace:
        return OnticSpace.projective_hilbert()

    def prepare(self, psi: Ray) -> EpistemicState:
        return PointMass(self.space(), OnticPoint((ray_to_bloch(psi),)))

    def indicator(self, m: ProjectiveMeasurement) -> IndicatorFunction:
        space = self.space()
        outcomes = []
        for index, vector in enumerate(m.outcome_vectors()):
            v = vector.as_array()
            outcomes.append(ResponseFunction(
                space,
                lambda lam, v=v: 0.5 * (1.0 + lam @ v),
                label=f"{m.label or 'M'}[{index}]",
            ))
        return IndicatorFunction(space, tuple(outcomes), m.label)


class BellMerminModel(OntologicalModel):
    """
    Modelo psi-suplementado sobre dos esferas.

    lambda' es psi_vec (delta) y lambda'' es uniforme. El resultado phi
    ocurre si phi . (lambda' + lambda'') > 0; el complementario es 1 menos
    ese escalón, así la suma es exactamente 1 también en el empate.
    """

    name = 'bm'
    description = 'Bell-Mermin'

    def space(self) -> OnticSpace:
        return OnticSpace.product(2)

    def prepare(self, psi: Ray) -> EpistemicState:
        return Product(self.space(), (PointMass(SPHERE, OnticPoint((ray_to_bloch(psi),))), uniform_density()))

    def indicator(self, m: ProjectiveMeasurement) -> IndicatorFunction:
        space = self.space()
        phi = m.axis.as_array()

        def cuts(fixed: Sequence[Optional[np.ndarray]]) -> Dict[int, List[Cut]]:
            # Fijado un factor, el escalón es un círculo del otro: phi . lambda = -phi . fijo
            first, second = fixed
            if first is not None and second is None:
                return {1: [Cut.of(phi, -float(phi @ first))]}
            if second is not None and first is None:
                return {0: [Cut.of(phi, -float(phi @ second))]}
            return {}

        def detected(l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
            return _step((l1 + l2) @ phi)

        label = m.label or 'M'
        outcomes = (
            ResponseFunction(space, detected, cuts, f"{label}[0]"),
            ResponseFunction(space, lambda l1, l2: 1.0 - detected(l1, l2), cuts, f"{label}[1]"),
        )
        return IndicatorFunction(space, outcomes, m.label)


class KochenSpeckerModel(OntologicalModel):
    """
    Modelo psi-epistémico sobre una esfera.

    p(lambda|psi) = (1/pi) Theta(psi . lambda) psi . lambda y el resultado
    phi es el hemisferio Theta(phi . lambda).
    """

    name = 'ks'
    description = 'Kochen-Specker'

    def space(self) -> OnticSpace:
        return OnticSpace.sphere()

    def prepare(self, psi: Ray) -> EpistemicState:
        vector = ray_to_bloch(psi)
        axis = vector.as_array()
        return Density(
            self.space(),
            lambda points: np.clip(points @ axis, 0.0, None) / math.pi,
            support=SphericalCap(vector, 0.0),
            label=f"ks({vector})",
        )

    def indicator(self, m: ProjectiveMeasurement) -> IndicatorFunction:
        space = self.space()
        phi = m.axis.as_array()

        def cuts(fixed: Sequence[Optional[np.ndarray]]) -> Dict[int, List[Cut]]:
            return {0: [Cut.of(phi, 0.0)]} if fixed[0] is None else {}

        label = m.label or 'M'
        outcomes = (
            ResponseFunction(space, lambda lam: _step(lam @ phi), cuts, f"{label}[0]"),
            ResponseFunction(space, lambda lam: 1.0 - _step(lam @ phi), cuts, f"{label}[1]"),
        )
        return IndicatorFunction(space, outcomes, m.label)


def bb_model() -> OntologicalModel:
    return BeltramettiBugajskiModel()


def bm_model() -> OntologicalModel:
    return BellMerminModel()


def ks_model() -> OntologicalModel:
    return KochenSpeckerModel()


MODEL_REGISTRY: Dict[str, Type[OntologicalModel]] = {
    'bb': BeltramettiBugajskiModel,
    'bm': BellMerminModel,
    'ks': KochenSpeckerModel,
}


def get_model(name: str) -> OntologicalModel:
    """
    Buscar un modelo en el registro

    Args:
        name: Clave del registro ('bb', 'bm', 'ks')

    Returns:
        Instancia del modelo
    """
    try:
        return MODEL_REGISTRY[name.strip().lower()]()
    except KeyError:
        raise UnknownModelError(
            f"Modelo desconocido: '{name}' (disponibles: {', '.join(MODEL_REGISTRY)})"
        ) from None
