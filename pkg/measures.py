"""
Medidas de probabilidad estructuradas sobre espacios de estados ónticos.

Las deltas de Dirac son átomos simbólicos (PointMass), nunca densidades
suavizadas: la disjunción exacta de átomos es la que decide si un modelo
es psi-óntico.
"""

import logging
import math
from abc import ABC
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

import config
from bloch import BlochVector
from errors import DomainError, SpaceMismatchError
from sphere_quadrature import (
    Cut,
    Estimate,
    GaussGrid,
    QuadratureConfig,
    SphereIntegrator,
    build_sphere_grid,
    uniform_sphere_samples,
)

logger = logging.getLogger(__name__)


class SpaceKind(Enum):
    SPHERE = 'sphere'
    PRODUCT_OF_SPHERES = 'product-of-spheres'
    PROJECTIVE_HILBERT = 'projective-hilbert-as-sphere'


@dataclass(frozen=True)
class OnticSpace:
    """Descriptor estructural de Lambda"""

    kind: SpaceKind
    factors: int = 1

    def __post_init__(self):
        if self.kind is SpaceKind.PRODUCT_OF_SPHERES:
            if self.factors < 1:
                raise DomainError(f"Un producto de esferas necesita al menos un factor: {self.factors}")
        elif self.factors != 1:
            raise DomainError(f"{self.kind.value} tiene exactamente un factor, no {self.factors}")

    @classmethod
    def sphere(cls) -> 'OnticSpace':
        return cls(SpaceKind.SPHERE, 1)

    @classmethod
    def product(cls, n: int) -> 'OnticSpace':
        return cls(SpaceKind.PRODUCT_OF_SPHERES, n)

    @classmethod
    def projective_hilbert(cls) -> 'OnticSpace':
        return cls(SpaceKind.PROJECTIVE_HILBERT, 1)

    def __str__(self) -> str:
        if self.kind is SpaceKind.PRODUCT_OF_SPHERES:
            return f"{self.kind.value}({self.factors})"
        return self.kind.value


SPHERE = OnticSpace.sphere()


@dataclass(frozen=True)
class OnticPoint:
    coords: Tuple[BlochVector, ...]

    def __post_init__(self):
        for vector in self.coords:
            if not vector.is_pure():
                raise DomainError(f"Coordenada óntica no unitaria: {vector}")

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> 'OnticPoint':
        return cls(tuple(BlochVector.from_array(a) for a in arrays))

    def as_arrays(self) -> List[np.ndarray]:
        return [c.as_array() for c in self.coords]

    def __str__(self) -> str:
        return ';'.join(str(c) for c in self.coords)


@dataclass(frozen=True)
class SphericalCap:
    """Región {lambda : axis . lambda > offset}; su borde es un corte de la densidad"""

    axis: BlochVector
    offset: float = 0.0

    def cut(self) -> Cut:
        return Cut.of(self.axis.as_array(), self.offset)


class EpistemicState(ABC):
    """p(lambda|P): átomo, densidad, producto o mezcla finita"""

    space: OnticSpace


@dataclass(frozen=True)
class PointMass(EpistemicState):
    space: OnticSpace
    point: OnticPoint

    def __post_init__(self):
        if len(self.point.coords) != self.space.factors:
            raise SpaceMismatchError(
                f"El punto tiene {len(self.point.coords)} coordenadas y el espacio {self.space.factors} factores"
            )


@dataclass(frozen=True, eq=False)
class Density(EpistemicState):
    """Densidad respecto del ángulo sólido sobre una sola esfera"""

    space: OnticSpace
    fn: Callable[[np.ndarray], np.ndarray]
    support: Optional[SphericalCap] = None
    label: str = ""

    def __post_init__(self):
        if self.space.factors != 1:
            raise SpaceMismatchError("Una densidad vive en un solo factor; use Product para varios")
        check = QuadratureConfig(GaussGrid(config.MASS_CHECK_POLAR, config.MASS_CHECK_AZIMUTHAL))
        mass = total_mass(self, check)
        if abs(mass - 1.0) > config.MASS_TOLERANCE:
            raise DomainError(f"La densidad {self.label or '(sin etiqueta)'} integra {mass!r}, no 1")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(points), dtype=float)

    def cuts(self) -> List[Cut]:
        return [self.support.cut()] if self.support is not None else []


@dataclass(frozen=True)
class Product(EpistemicState):
    space: OnticSpace
    factors: Tuple[EpistemicState, ...]

    def __post_init__(self):
        if len(self.factors) != self.space.factors:
            raise SpaceMismatchError(
                f"Producto con {len(self.factors)} factores sobre un espacio de {self.space.factors}"
            )
        for factor in self.factors:
            if factor.space.factors != 1:
                raise SpaceMismatchError("Cada factor de un producto vive en una sola esfera")


@dataclass(frozen=True)
class Mixture(EpistemicState):
    space: OnticSpace
    components: Tuple[Tuple[float, EpistemicState], ...]

    def __post_init__(self):
        _validate_components(self.components, self.space)


@dataclass(frozen=True, eq=False)
class ResponseFunction:
    """
    Función de respuesta lambda -> [0, 1] de un resultado.

    fn recibe un arreglo (N, 3) por factor del espacio. cuts, si existe,
    recibe las coordenadas fijadas (None para los factores integrados) y
    devuelve los cortes por índice de factor.
    """

    space: OnticSpace
    fn: Callable[..., np.ndarray]
    cuts: Optional[Callable[[Sequence[Optional[np.ndarray]]], Dict[int, List[Cut]]]] = None
    label: str = ""

    def __call__(self, *coords: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(*coords), dtype=float)

    def cuts_given(self, fixed: Sequence[Optional[np.ndarray]]) -> Dict[int, List[Cut]]:
        if self.cuts is None:
            return {}
        return self.cuts(fixed)


@dataclass(frozen=True)
class IndicatorFunction:
    space: OnticSpace
    outcomes: Tuple[ResponseFunction, ...]
    label: str = ""

    def outcome(self, k: int) -> ResponseFunction:
        return self.outcomes[k]

    def completeness_defect(self, *coords: np.ndarray) -> float:
        """max |sum_k p(k|lambda) - 1| sobre los puntos dados"""
        total = sum(outcome(*coords) for outcome in self.outcomes)
        return float(np.max(np.abs(total - 1.0)))


@dataclass(frozen=True)
class SupportOverlap:
    disjoint: bool
    witness: Optional[OnticPoint] = None
    fidelity: float = 0.0


# ---------------------------------------------------------------------------
# Forma normal: suma finita de componentes producto (átomo | densidad por factor)
# ---------------------------------------------------------------------------

_Part = Union[np.ndarray, Density]


def _components(state: EpistemicState) -> List[Tuple[float, Tuple[_Part, ...]]]:
    if isinstance(state, PointMass):
        return [(1.0, tuple(state.point.as_arrays()))]
    if isinstance(state, Density):
        return [(1.0, (state,))]
    if isinstance(state, Product):
        result: List[Tuple[float, Tuple[_Part, ...]]] = [(1.0, ())]
        for factor in state.factors:
            factor_parts = _components(factor)
            result = [(w1 * w2, p1 + p2) for w1, p1 in result for w2, p2 in factor_parts]
        return result
    if isinstance(state, Mixture):
        return [(w * cw, parts) for w, component in state.components for cw, parts in _components(component)]
    raise DomainError(f"Estado epistémico no soportado: {type(state).__name__}")


class _MeasureClass:
    """Componentes con el mismo patrón de átomos: mutuamente singulares con cualquier otra clase"""

    def __init__(self, atoms: Tuple[Optional[np.ndarray], ...]):
        self.atoms = atoms
        self.members: List[Tuple[float, Tuple[Density, ...]]] = []

    @classmethod
    def key_of(cls, parts: Tuple[_Part, ...]) -> Tuple[Optional[np.ndarray], ...]:
        return tuple(p if isinstance(p, np.ndarray) else None for p in parts)

    def matches(self, atoms: Tuple[Optional[np.ndarray], ...]) -> bool:
        for mine, theirs in zip(self.atoms, atoms):
            if (mine is None) != (theirs is None):
                return False
            if mine is not None and not np.allclose(mine, theirs, rtol=0.0, atol=config.ATOM_TOLERANCE):
                return False
        return True

    @property
    def continuous(self) -> List[int]:
        return [i for i, a in enumerate(self.atoms) if a is None]

    @property
    def weight(self) -> float:
        return sum(w for w, _ in self.members)

    def density(self, points: List[np.ndarray]) -> np.ndarray:
        total = np.zeros(points[0].shape[0])
        for w, densities in self.members:
            term = np.full(points[0].shape[0], w)
            for d, pts in zip(densities, points):
                term = term * d(pts)
            total = total + term
        return total

    def cuts(self) -> List[List[Cut]]:
        result: List[List[Cut]] = [[] for _ in self.continuous]
        for _, densities in self.members:
            for k, d in enumerate(densities):
                result[k].extend(d.cuts())
        return result

    def full_point(self, points: List[np.ndarray], row: int) -> OnticPoint:
        coords, k = [], 0
        for atom in self.atoms:
            if atom is None:
                coords.append(points[k][row])
                k += 1
            else:
                coords.append(atom)
        return OnticPoint.from_arrays(coords)


def _measure_classes(state: EpistemicState) -> List[_MeasureClass]:
    classes: List[_MeasureClass] = []
    for weight, parts in _components(state):
        if weight == 0.0:
            continue
        key = _MeasureClass.key_of(parts)
        target = next((c for c in classes if c.matches(key)), None)
        if target is None:
            target = _MeasureClass(key)
            classes.append(target)
        target.members.append((weight, tuple(p for p in parts if isinstance(p, Density))))
    return classes


def _match(cls: _MeasureClass, others: List[_MeasureClass]) -> Optional[_MeasureClass]:
    return next((o for o in others if o.matches(cls.atoms)), None)


def _merge_cuts(*cut_lists: List[List[Cut]]) -> List[List[Cut]]:
    merged = [list(c) for c in cut_lists[0]]
    for extra in cut_lists[1:]:
        for k, cuts in enumerate(extra):
            merged[k].extend(cuts)
    return merged


def _validate_components(components, space: OnticSpace):
    if not components:
        raise DomainError("Una mezcla necesita al menos una componente")
    total = 0.0
    for weight, state in components:
        if weight < 0.0 or not math.isfinite(weight):
            raise DomainError(f"Peso de mezcla inválido: {weight!r}")
        if state.space != space:
            raise SpaceMismatchError(f"Componente en {state.space}, mezcla en {space}")
        total += weight
    if abs(total - 1.0) > config.WEIGHT_TOLERANCE:
        raise DomainError(f"Los pesos de la mezcla suman {total!r}, no 1")


def _check_same_space(p: EpistemicState, q: EpistemicState):
    if p.space != q.space:
        raise SpaceMismatchError(f"Espacios distintos: {p.space} vs {q.space}")


# ---------------------------------------------------------------------------
# Operaciones
# ---------------------------------------------------------------------------

def mix(components: Sequence[Tuple[float, EpistemicState]]) -> EpistemicState:
    """
    Mezcla convexa de estados epistémicos

    Args:
        components: Pares (peso, estado) sobre un mismo espacio

    Returns:
        Nodo Mixture (o el propio estado si hay una única componente de peso 1)
    """
    components = tuple((float(w), s) for w, s in components)
    if not components:
        raise DomainError("Una mezcla necesita al menos una componente")
    space = components[0][1].space
    _validate_components(components, space)
    if len(components) == 1:
        return components[0][1]
    return Mixture(space, components)


def expectation_estimate(e: EpistemicState, f: Callable[..., np.ndarray],
                         cfg: Optional[QuadratureConfig] = None) -> Estimate:
    """
    Integral de f contra p(lambda|P), con error estándar en Monte Carlo

    Args:
        e: Estado epistémico
        f: Función vectorizada, un arreglo (N, 3) por factor del espacio
        cfg: Configuración de cuadratura

    Returns:
        Estimación de la integral
    """
    space = getattr(f, 'space', None)
    if space is not None and space != e.space:
        raise SpaceMismatchError(f"Función sobre {space}, estado sobre {e.space}")
    cfg = cfg or QuadratureConfig()

    if isinstance(e, Mixture):
        value = error = 0.0
        for weight, component in e.components:
            est = expectation_estimate(component, f, cfg)
            value += weight * est.value
            error += weight * est.std_error
        return Estimate(value, error)

    integrator = SphereIntegrator(cfg)
    cuts_of_f = getattr(f, 'cuts_given', None)
    value = error = 0.0
    for weight, parts in _components(e):
        fixed = [p if isinstance(p, np.ndarray) else None for p in parts]
        continuous = [i for i, p in enumerate(parts) if isinstance(p, Density)]
        if not continuous:
            atoms = [p[None, :] for p in parts]
            value += weight * float(np.asarray(f(*atoms), dtype=float).reshape(-1)[0])
            continue

        extra = cuts_of_f(fixed) if cuts_of_f is not None else {}
        cuts = [parts[i].cuts() + list(extra.get(i, [])) for i in continuous]

        def integrand(points: List[np.ndarray], parts=parts, continuous=continuous) -> np.ndarray:
            n = points[0].shape[0]
            coords, k = [], 0
            density = np.ones(n)
            for i, part in enumerate(parts):
                if isinstance(part, Density):
                    coords.append(points[k])
                    density = density * part(points[k])
                    k += 1
                else:
                    coords.append(np.broadcast_to(part, (n, 3)))
            return np.asarray(f(*coords), dtype=float) * density

        est = integrator.integrate(integrand, cuts)
        value += weight * est.value
        error += weight * est.std_error
    return Estimate(value, error)


def expectation(e: EpistemicState, f: Callable[..., np.ndarray], cfg: Optional[QuadratureConfig] = None) -> float:
    """Integral de f contra p(lambda|P); exacta para átomos, cuadratura para densidades"""
    return expectation_estimate(e, f, cfg).value


def total_mass(e: EpistemicState, cfg: Optional[QuadratureConfig] = None) -> float:
    return expectation(e, lambda *coords: np.ones(coords[0].shape[0]), cfg)


def classical_fidelity(p: EpistemicState, q: EpistemicState, cfg: Optional[QuadratureConfig] = None) -> float:
    """
    Fidelidad clásica: integral de sqrt(p) sqrt(q)

    Átomos en lugares distintos y pares átomo/densidad son mutuamente
    singulares y contribuyen 0 sin calcular nada.
    """
    return _fidelity_with_witness(p, q, cfg, want_witness=False)[0]


def _witness_candidates(cls: _MeasureClass, cuts: List[List[Cut]], cfg: QuadratureConfig) -> List[np.ndarray]:
    if len(cls.continuous) == 1:
        scheme = cfg.scheme if isinstance(cfg.scheme, GaussGrid) else GaussGrid()
        return [build_sphere_grid(scheme.n_polar, scheme.n_azimuthal, cuts[0]).points]
    return [uniform_sphere_samples(0, k, 0, config.MC_BLOCK_SIZE) for k in range(len(cls.continuous))]


def _fidelity_with_witness(p: EpistemicState, q: EpistemicState, cfg: Optional[QuadratureConfig],
                           want_witness: bool) -> Tuple[float, Optional[OnticPoint]]:
    _check_same_space(p, q)
    cfg = cfg or QuadratureConfig()
    integrator = SphereIntegrator(cfg)
    classes_q = _measure_classes(q)
    total = 0.0
    best_contribution = 0.0
    best: Optional[Tuple[_MeasureClass, Callable, List[List[Cut]]]] = None
    for cls_p in _measure_classes(p):
        cls_q = _match(cls_p, classes_q)
        if cls_q is None:
            continue
        if not cls_p.continuous:
            contribution = math.sqrt(cls_p.weight * cls_q.weight)
            overlap, cuts = None, []
        else:
            cuts = _merge_cuts(cls_p.cuts(), cls_q.cuts())

            def overlap(points, a=cls_p, b=cls_q):
                return np.sqrt(np.clip(a.density(points), 0.0, None) * np.clip(b.density(points), 0.0, None))

            contribution = integrator.integrate(overlap, cuts).value
        total += contribution
        if contribution > best_contribution:
            best_contribution, best = contribution, (cls_p, overlap, cuts)

    total = min(max(total, 0.0), 1.0)
    if not want_witness or best is None or total <= config.FIDELITY_THRESHOLD:
        return total, None
    # testigo en la clase que más aporta
    cls, overlap, cuts = best
    if overlap is None:
        return total, cls.full_point([], 0)
    candidates = _witness_candidates(cls, cuts, cfg)
    values = overlap(candidates)
    index = int(np.argmax(values))
    if values[index] <= 0.0:
        return total, None
    return total, cls.full_point(candidates, index)


def support_overlap(p: EpistemicState, q: EpistemicState, cfg: Optional[QuadratureConfig] = None) -> SupportOverlap:
    """
    ¿Se solapan los soportes de p y q?

    Para densidades cuenta como solapamiento solo si la fidelidad supera
    FIDELITY_THRESHOLD (solapamientos de medida cero son disjuntos).
    """
    fidelity, witness = _fidelity_with_witness(p, q, cfg, want_witness=True)
    return SupportOverlap(fidelity <= config.FIDELITY_THRESHOLD, witness, fidelity)


def total_variation_distance(p: EpistemicState, q: EpistemicState, cfg: Optional[QuadratureConfig] = None) -> float:
    """1/2 integral |p - q|; los átomos se comparan por posición y peso"""
    _check_same_space(p, q)
    cfg = cfg or QuadratureConfig()
    integrator = SphereIntegrator(cfg)
    classes_p, classes_q = _measure_classes(p), _measure_classes(q)
    total = 0.0

    def one_sided(cls: _MeasureClass) -> float:
        if not cls.continuous:
            return cls.weight
        return integrator.integrate(lambda pts: np.abs(cls.density(pts)), cls.cuts()).value

    for cls_p in classes_p:
        cls_q = _match(cls_p, classes_q)
        if cls_q is None:
            total += one_sided(cls_p)
        elif not cls_p.continuous:
            total += abs(cls_p.weight - cls_q.weight)
        else:
            cuts = _merge_cuts(cls_p.cuts(), cls_q.cuts())
            total += integrator.integrate(lambda pts, a=cls_p, b=cls_q: np.abs(a.density(pts) - b.density(pts)),
                                          cuts).value
    for cls_q in classes_q:
        if _match(cls_q, classes_p) is None:
            total += one_sided(cls_q)
    return min(max(0.5 * total, 0.0), 1.0)


def continuous_density(e: EpistemicState, points: np.ndarray) -> np.ndarray:
    """Valor de la parte continua de un estado de un solo factor en los puntos dados"""
    if e.space.factors != 1:
        raise SpaceMismatchError("continuous_density solo aplica a espacios de un factor")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    total = np.zeros(points.shape[0])
    for cls in _measure_classes(e):
        if cls.continuous:
            total = total + cls.density([points])
    return total


def density_grid_frame(e: EpistemicState, cfg: Optional[QuadratureConfig] = None) -> pd.DataFrame:
    """
    Exportar un estado como filas de átomos (peso) y de malla (theta, phi, densidad)

    Args:
        e: Estado epistémico
        cfg: Configuración (la malla de Gauss define las filas; en Monte Carlo se usa la malla por defecto)

    Returns:
        DataFrame con columnas type, component, factor, theta, phi, x, y, z, weight (átomos), density (malla)
    """
    cfg = cfg or QuadratureConfig()
    scheme = cfg.scheme if isinstance(cfg.scheme, GaussGrid) else GaussGrid()
    grid = build_sphere_grid(scheme.n_polar, scheme.n_azimuthal)
    rows = []
    for index, (weight, parts) in enumerate(_components(e)):
        for factor, part in enumerate(parts):
            if isinstance(part, np.ndarray):
                rows.append({'type': 'atom', 'component': index, 'factor': factor,
                             'x': float(part[0]), 'y': float(part[1]), 'z': float(part[2]),
                             'weight': weight})
            else:
                values = weight * part(grid.points)
                rows.extend({'type': 'density', 'component': index, 'factor': factor,
                             'theta': float(t), 'phi': float(ph), 'density': float(v)}
                            for t, ph, v in zip(grid.theta, grid.phi, values))
    columns = ['type', 'component', 'factor', 'theta', 'phi', 'x', 'y', 'z', 'weight', 'density']
    return pd.DataFrame(rows, columns=columns)
