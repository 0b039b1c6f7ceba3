"""
Geometría de la esfera de Bloch y oráculo cuántico exacto de un qubit.

Convención de Pauli: sigma_z diagonal, |0> = +z.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

import config
from errors import DomainError

logger = logging.getLogger(__name__)

SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class BlochVector:
    """Punto de la bola unidad; los estados puros viven en la esfera"""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ('x', 'y', 'z'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"Componente {name} no finita: {value}")
            object.__setattr__(self, name, value)
        if self.norm() > 1.0 + config.PURE_TOLERANCE:
            raise DomainError(f"Vector de Bloch fuera de la bola unidad: norma {self.norm()!r}")

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'BlochVector':
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> 'BlochVector':
        """Vector unitario con ángulo polar theta y azimut phi (radianes)"""
        return cls(math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: 'BlochVector') -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def is_pure(self) -> bool:
        return abs(self.norm() - 1.0) <= config.PURE_TOLERANCE

    def angles(self) -> Tuple[float, float]:
        """(theta, phi) del vector"""
        theta = math.acos(max(-1.0, min(1.0, self.z / self.norm()))) if self.norm() > 0 else 0.0
        return theta, math.atan2(self.y, self.x)

    def isclose(self, other: 'BlochVector', atol: float = config.ATOM_TOLERANCE) -> bool:
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=0.0, atol=atol))

    def __neg__(self) -> 'BlochVector':
        return BlochVector(-self.x, -self.y, -self.z)

    def __str__(self) -> str:
        return f"{self.x!r},{self.y!r},{self.z!r}"


@dataclass(frozen=True, eq=False)
class Ray:
    """
    Estado puro de un qubit: par de amplitudes normalizado.

    Dos rayos son iguales si difieren en una fase global.
    """

    amplitudes: Tuple[complex, complex]

    def __post_init__(self):
        a0, a1 = (complex(a) for a in self.amplitudes)
        object.__setattr__(self, 'amplitudes', (a0, a1))
        norm = abs(a0) ** 2 + abs(a1) ** 2
        if abs(norm - 1.0) > config.PURE_TOLERANCE:
            raise DomainError(f"Rayo no normalizado: |a0|^2 + |a1|^2 = {norm!r}")

    @classmethod
    def from_unnormalized(cls, a0: complex, a1: complex) -> 'Ray':
        norm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
        if norm == 0.0:
            raise DomainError("El vector nulo no define un rayo")
        return cls((a0 / norm, a1 / norm))

    def as_array(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)

    def canonical(self) -> np.ndarray:
        """Amplitudes con la primera componente no nula real y positiva"""
        amps = self.as_array()
        pivot = amps[0] if abs(amps[0]) > config.PURE_TOLERANCE else amps[1]
        return amps * (abs(pivot) / pivot)

    def overlap(self, other: 'Ray') -> complex:
        """<other|self>"""
        return complex(np.vdot(other.as_array(), self.as_array()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ray):
            return NotImplemented
        overlap = self.overlap(other)
        if abs(overlap) == 0.0:
            return False
        # fase global de other alineada con self
        aligned = other.as_array() * (overlap / abs(overlap))
        return bool(np.allclose(self.as_array(), aligned, rtol=0.0, atol=config.PURE_TOLERANCE))

    __hash__ = None

    def __repr__(self) -> str:
        a0, a1 = self.canonical()
        return f"Ray({a0:.6g}, {a1:.6g})"


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Medición proyectiva de un qubit en la base ortonormal {|phi>, |phi_perp>}"""

    basis: Tuple[Ray, Ray]
    label: str = ""

    def __post_init__(self):
        b0, b1 = self.basis
        if abs(b1.overlap(b0)) > config.PURE_TOLERANCE:
            raise DomainError(f"Base no ortogonal: |<b0|b1>| = {abs(b1.overlap(b0))!r}")

    @classmethod
    def from_ray(cls, phi: Ray, label: str = "") -> 'ProjectiveMeasurement':
        return cls((phi, orthogonal(phi)), label)

    @classmethod
    def from_axis(cls, axis: BlochVector, label: str = "") -> 'ProjectiveMeasurement':
        return cls.from_ray(bloch_to_ray(axis), label)

    @property
    def axis(self) -> BlochVector:
        """Vector de Bloch del resultado 0; el resultado 1 es el antipodal"""
        return ray_to_bloch(self.basis[0])

    def outcome_vectors(self) -> Tuple[BlochVector, BlochVector]:
        return ray_to_bloch(self.basis[0]), ray_to_bloch(self.basis[1])

    def projectors(self) -> Tuple[np.ndarray, np.ndarray]:
        return tuple(np.outer(b.as_array(), b.as_array().conj()) for b in self.basis)


@dataclass(frozen=True)
class SteeredOutcome:
    index: int
    state: Ray
    probability: float


@dataclass(frozen=True)
class SteeredEnsemble:
    """Ensamble al que queda B tras medir A sin condicionar en el resultado"""

    measurement: ProjectiveMeasurement
    outcomes: Tuple[SteeredOutcome, ...]

    def probabilities(self) -> Tuple[float, ...]:
        return tuple(o.probability for o in self.outcomes)

    def bloch_vectors(self) -> Tuple[BlochVector, ...]:
        return tuple(ray_to_bloch(o.state) for o in self.outcomes)

    def average_bloch(self) -> np.ndarray:
        """Vector de Bloch promedio del ensamble (= vector reducido de B)"""
        total = np.zeros(3)
        for outcome, vector in zip(self.outcomes, self.bloch_vectors()):
            total += outcome.probability * vector.as_array()
        return total


def ray_to_bloch(r: Ray) -> BlochVector:
    """
    Vector de Bloch de un rayo: |psi><psi| = I/2 + (psi_vec . sigma)/2

    Args:
        r: Rayo normalizado

    Returns:
        Vector unitario (x, y, z)
    """
    a0, a1 = r.amplitudes
    cross = a0.conjugate() * a1
    return BlochVector(2.0 * cross.real, 2.0 * cross.imag, abs(a0) ** 2 - abs(a1) ** 2)


def bloch_to_ray(v: BlochVector) -> Ray:
    """
    Rayo asociado a un punto de la esfera (inverso de ray_to_bloch)

    Args:
        v: Vector de Bloch de norma 1

    Returns:
        Rayo en forma canónica (primera amplitud no nula real positiva)
    """
    if not v.is_pure():
        raise DomainError(f"Se requiere un vector unitario, norma = {v.norm()!r}")
    theta = math.acos(max(-1.0, min(1.0, v.z)))
    phi = math.atan2(v.y, v.x)
    a0 = math.cos(theta / 2.0)
    a1 = complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2.0)
    if a0 <= config.PURE_TOLERANCE:
        return Ray((0.0, 1.0))
    return Ray((a0, a1))


def orthogonal(r: Ray) -> Ray:
    """Rayo ortogonal |r_perp> (vector de Bloch antipodal)"""
    a0, a1 = r.amplitudes
    return Ray((-a1.conjugate(), a0.conjugate()))


def born_probability(psi: Ray, phi: Ray) -> float:
    """|<phi|psi>|^2 = (1 + psi_vec . phi_vec)/2"""
    return abs(psi.overlap(phi)) ** 2


# Kets con nombre
KET_0 = Ray((1.0, 0.0))
KET_1 = Ray((0.0, 1.0))
KET_PLUS = Ray((SQRT1_2, SQRT1_2))
KET_MINUS = Ray((SQRT1_2, -SQRT1_2))
KET_PLUS_I = Ray((SQRT1_2, 1j * SQRT1_2))
KET_MINUS_I = Ray((SQRT1_2, -1j * SQRT1_2))

NAMED_STATES: Dict[str, Ray] = {
    'z+': KET_0,
    'z-': KET_1,
    'x+': KET_PLUS,
    'x-': KET_MINUS,
    'y+': KET_PLUS_I,
    'y-': KET_MINUS_I,
}

M_01 = ProjectiveMeasurement((KET_0, KET_1), 'M01')
M_PM = ProjectiveMeasurement((KET_PLUS, KET_MINUS), 'Mpm')


def parse_state_spec(spec: str) -> Ray:
    """
    Interpretar un estado de la línea de comandos

    Args:
        spec: Nombre ('z+', 'x-', ...) o 'theta,phi' en radianes

    Returns:
        Rayo correspondiente
    """
    key = spec.strip().lower()
    if key in NAMED_STATES:
        return NAMED_STATES[key]
    parts = key.split(',')
    if len(parts) != 2:
        raise DomainError(f"Estado no reconocido: '{spec}' (use z+, z-, x+, x-, y+, y- o 'theta,phi')")
    try:
        theta, phi = float(parts[0]), float(parts[1])
    except ValueError as e:
        raise DomainError(f"Ángulos inválidos en '{spec}'") from e
    return bloch_to_ray(BlochVector.from_angles(theta, phi))


def psi_plus() -> np.ndarray:
    """(|01> + |10>)/sqrt(2) en el orden |ab> -> índice 2a + b"""
    return np.array([0.0, SQRT1_2, SQRT1_2, 0.0], dtype=complex)


def product_state(a: Ray, b: Ray) -> np.ndarray:
    return np.kron(a.as_array(), b.as_array())


def _validate_joint(joint: Sequence[complex]) -> np.ndarray:
    amps = np.asarray(joint, dtype=complex).reshape(-1)
    if amps.shape != (4,):
        raise DomainError(f"Se esperaban 4 amplitudes, se recibieron {amps.size}")
    norm = float(np.vdot(amps, amps).real)
    if abs(norm - 1.0) > config.PURE_TOLERANCE:
        raise DomainError(f"Estado conjunto no normalizado: norma^2 = {norm!r}")
    return amps


def steered_ensemble(joint: Sequence[complex], m: ProjectiveMeasurement) -> SteeredEnsemble:
    """
    Estados condicionales de B tras medir m sobre A (proyección parcial)

    Args:
        joint: Estado puro de dos qubits (4 amplitudes, orden |ab>)
        m: Medición proyectiva sobre A

    Returns:
        Ensamble de B; los resultados de probabilidad nula se omiten
    """
    amps = _validate_joint(joint).reshape(2, 2)
    outcomes = []
    for index, basis_ray in enumerate(m.basis):
        # <e_k|_A |psi>_AB
        conditional = basis_ray.as_array().conj() @ amps
        probability = float(np.vdot(conditional, conditional).real)
        if probability <= 1e-15:
            logger.debug(f"Resultado {index} de {m.label or 'M'} con probabilidad nula, omitido")
            continue
        state = Ray.from_unnormalized(*conditional)
        outcomes.append(SteeredOutcome(index, state, probability))
    return SteeredEnsemble(m, tuple(outcomes))


def schmidt_rank(joint: Sequence[complex], tol: float = config.PURE_TOLERANCE) -> int:
    """Número de coeficientes de Schmidt no nulos del estado conjunto"""
    amps = _validate_joint(joint).reshape(2, 2)
    singular_values = np.linalg.svd(amps, compute_uv=False)
    return int(np.sum(singular_values > tol))


def joint_detection_probability(psi: Ray, m: ProjectiveMeasurement) -> float:
    """Probabilidad cuántica de que ambos resultados de m ocurran: ||P1 P0 psi||^2"""
    p0, p1 = m.projectors()
    vec = p1 @ (p0 @ psi.as_array())
    return float(np.vdot(vec, vec).real)
