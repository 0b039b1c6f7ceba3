"""
Integración sobre productos de esferas unidad.

Malla: Gauss-Legendre en el ángulo polar x trapecio uniforme en el azimut.
El marco de la malla se adapta a los cortes declarados por el integrando
(bordes de soporte, escalones de funciones indicadoras) para que ningún
nodo caiga sobre una discontinuidad y cada banda integre una función suave.

Monte Carlo: flujo Philox por contador; la muestra i depende solo de
(seed, stream, i), de modo que el resultado no depende del número de hilos.
"""

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from errors import DomainError, QuadratureError

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi
_AXIS_TOLERANCE = 1e-12
_MIN_NODES_PER_INTERVAL = 16


@dataclass(frozen=True)
class GaussGrid:
    n_polar: int = config.GRID_POLAR
    n_azimuthal: int = config.GRID_AZIMUTHAL

    def __post_init__(self):
        if self.n_polar < 1 or self.n_azimuthal < 1:
            raise DomainError(f"Malla inválida: {self.n_polar}x{self.n_azimuthal}")


@dataclass(frozen=True)
class MonteCarlo:
    n_samples: int = config.MC_SAMPLES
    seed: int = config.SEED

    def __post_init__(self):
        if self.n_samples < 1:
            raise DomainError(f"Número de muestras inválido: {self.n_samples}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Esquema de integración; workers solo reparte trabajo, no cambia el resultado"""

    scheme: Union[GaussGrid, MonteCarlo] = field(default_factory=GaussGrid)
    workers: int = config.WORKERS

    def __post_init__(self):
        if self.workers < 1:
            raise DomainError(f"workers debe ser >= 1, recibido {self.workers}")

    @property
    def is_monte_carlo(self) -> bool:
        return isinstance(self.scheme, MonteCarlo)

    def describe(self) -> str:
        if self.is_monte_carlo:
            return f"mc:{self.scheme.n_samples}:seed={self.scheme.seed}"
        return f"grid:{self.scheme.n_polar}x{self.scheme.n_azimuthal}"


@dataclass(frozen=True)
class Cut:
    """Círculo {lambda : axis . lambda = offset} donde el integrando deja de ser suave"""

    axis: Tuple[float, float, float]
    offset: float = 0.0

    @classmethod
    def of(cls, axis: Sequence[float], offset: float = 0.0) -> 'Cut':
        vec = np.asarray(axis, dtype=float)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise DomainError("El eje de un corte no puede ser nulo")
        vec = vec / norm
        return cls((float(vec[0]), float(vec[1]), float(vec[2])), float(offset))

    def canonical(self) -> Tuple[np.ndarray, float]:
        """Eje con la primera componente no nula positiva (el offset cambia de signo con él)"""
        vec = np.asarray(self.axis, dtype=float)
        for component in vec:
            if abs(component) > _AXIS_TOLERANCE:
                if component < 0:
                    return -vec, -self.offset
                break
        return vec, self.offset


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float = 0.0


@dataclass(frozen=True)
class SphereGrid:
    points: np.ndarray   # (N, 3)
    weights: np.ndarray  # (N,)
    theta: np.ndarray    # (N,) en el marco de la malla
    phi: np.ndarray      # (N,)

    @property
    def size(self) -> int:
        return int(self.weights.size)


@functools.lru_cache(maxsize=128)
def _gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _gauss_on_interval(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = _gauss_legendre(n)
    half = 0.5 * (b - a)
    return half * nodes + 0.5 * (a + b), half * weights


def _nodes_for(length: float, period: float, total: int) -> int:
    return max(_MIN_NODES_PER_INTERVAL, int(math.ceil(total * length / period)))


def _perpendicular(pole: np.ndarray) -> np.ndarray:
    helper = np.array([1.0, 0.0, 0.0]) if abs(pole[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(pole, helper)
    return e1 / np.linalg.norm(e1)


def _cut_key(cut: Cut) -> Tuple[float, ...]:
    axis, offset = cut.canonical()
    return (*(float(c) for c in axis), float(offset))


def _distinct_axes(cuts: Sequence[Cut]) -> List[Tuple[np.ndarray, List[float]]]:
    """Agrupa los cortes por eje (módulo signo)"""
    groups: List[Tuple[np.ndarray, List[float]]] = []
    for cut in cuts:
        axis, offset = cut.canonical()
        for existing, offsets in groups:
            if abs(float(existing @ axis)) > 1.0 - _AXIS_TOLERANCE:
                offsets.append(offset)
                break
        else:
            groups.append((axis, [offset]))
    return groups


def _polar_rule(breaks: Sequence[float], n_polar: int) -> Tuple[np.ndarray, np.ndarray]:
    edges = [0.0] + sorted(b for b in breaks if 1e-12 < b < math.pi - 1e-12) + [math.pi]
    thetas, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 1e-12:
            continue
        t, w = _gauss_on_interval(a, b, _nodes_for(b - a, math.pi, n_polar))
        thetas.append(t)
        weights.append(w * np.sin(t))
    return np.concatenate(thetas), np.concatenate(weights)


def _azimuth_rule(breaks: Sequence[float], n_azimuthal: int) -> Tuple[np.ndarray, np.ndarray]:
    two_pi = 2.0 * math.pi
    if not breaks:
        phi = two_pi * (np.arange(n_azimuthal) + 0.5) / n_azimuthal
        return phi, np.full(n_azimuthal, two_pi / n_azimuthal)
    ordered = sorted(b % two_pi for b in breaks)
    unique = [ordered[0]]
    for b in ordered[1:]:
        if b - unique[-1] > 1e-12:
            unique.append(b)
    if two_pi - unique[-1] + unique[0] <= 1e-12 and len(unique) > 1:
        unique.pop()
    phis, weights = [], []
    for i, start in enumerate(unique):
        end = unique[i + 1] if i + 1 < len(unique) else unique[0] + two_pi
        p, w = _gauss_on_interval(start, end, _nodes_for(end - start, two_pi, n_azimuthal))
        phis.append(p)
        weights.append(w)
    return np.concatenate(phis), np.concatenate(weights)


def _assemble(pole: np.ndarray, e1: np.ndarray, theta: np.ndarray, w_theta: np.ndarray,
              phi: np.ndarray, w_phi: np.ndarray) -> SphereGrid:
    e2 = np.cross(pole, e1)
    t, p = np.meshgrid(theta, phi, indexing='ij')
    st, ct = np.sin(t).reshape(-1), np.cos(t).reshape(-1)
    cp, sp = np.cos(p).reshape(-1), np.sin(p).reshape(-1)
    points = (st * cp)[:, None] * e1 + (st * sp)[:, None] * e2 + ct[:, None] * pole
    weights = np.outer(w_theta, w_phi).reshape(-1)
    return SphereGrid(points, weights, t.reshape(-1), p.reshape(-1))


def build_sphere_grid(n_polar: int, n_azimuthal: int, cuts: Sequence[Cut] = ()) -> SphereGrid:
    """
    Construir una malla de cuadratura alineada con los cortes

    Args:
        n_polar: Nodos de Gauss-Legendre en el ángulo polar (por banda, proporcional)
        n_azimuthal: Nodos en el azimut
        cuts: Círculos donde el integrando no es suave

    Returns:
        Nodos y pesos (los pesos suman 4*pi)
    """
    # la malla depende del conjunto de cortes, no de su orden
    cuts = sorted(cuts, key=_cut_key)
    groups = _distinct_axes(cuts)
    z_pole = np.array([0.0, 0.0, 1.0])

    if not groups:
        theta, w_theta = _polar_rule([], n_polar)
        phi, w_phi = _azimuth_rule([], n_azimuthal)
        return _assemble(z_pole, np.array([1.0, 0.0, 0.0]), theta, w_theta, phi, w_phi)

    if len(groups) == 1:
        # Todos los cortes son paralelos: bandas polares alrededor de su eje
        pole, offsets = groups[0]
        breaks = [math.acos(max(-1.0, min(1.0, o))) for o in offsets]
        theta, w_theta = _polar_rule(breaks, n_polar)
        phi, w_phi = _azimuth_rule([], n_azimuthal)
        return _assemble(pole, _perpendicular(pole), theta, w_theta, phi, w_phi)

    great_circles = all(abs(o) <= _AXIS_TOLERANCE for _, offsets in groups for o in offsets)
    if great_circles:
        pole = np.cross(groups[0][0], groups[1][0])
        pole = pole / np.linalg.norm(pole)
        if all(abs(float(axis @ pole)) <= 1e-9 for axis, _ in groups):
            # Círculos máximos con un diámetro común: son meridianos alrededor de él
            e1 = groups[0][0]
            e2 = np.cross(pole, e1)
            breaks = []
            for axis, _ in groups:
                beta = math.atan2(float(axis @ e2), float(axis @ e1))
                breaks.extend([beta + 0.5 * math.pi, beta - 0.5 * math.pi])
            theta, w_theta = _polar_rule([], n_polar)
            phi, w_phi = _azimuth_rule(breaks, n_azimuthal)
            return _assemble(pole, e1, theta, w_theta, phi, w_phi)

    logger.debug(f"Cortes sin alineación común ({len(groups)} ejes), se usa la malla estándar")
    theta, w_theta = _polar_rule([], n_polar)
    phi, w_phi = _azimuth_rule([], n_azimuthal)
    return _assemble(z_pole, np.array([1.0, 0.0, 0.0]), theta, w_theta, phi, w_phi)


def uniform_sphere_samples(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """
    Muestras uniformes en la esfera [start, start + count) del flujo (seed, stream)

    Cada bloque de MC_BLOCK_SIZE muestras usa su propio contador Philox,
    así la muestra i es función pura de (seed, stream, i).
    """
    block_size = config.MC_BLOCK_SIZE
    chunks = []
    index = start
    end = start + count
    while index < end:
        block, offset = divmod(index, block_size)
        take = min(end - index, block_size - offset)
        bit_generator = np.random.Philox(key=seed, counter=[0, 0, stream, block])
        uniforms = np.random.Generator(bit_generator).random((offset + take, 2))[offset:]
        cos_theta = 2.0 * uniforms[:, 0] - 1.0
        sin_theta = np.sqrt(np.clip(1.0 - cos_theta * cos_theta, 0.0, None))
        phi = 2.0 * math.pi * uniforms[:, 1]
        chunks.append(np.column_stack((sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta)))
        index += take
    if not chunks:
        return np.empty((0, 3))
    return np.concatenate(chunks)


Integrand = Callable[[List[np.ndarray]], np.ndarray]


def ordered_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """map con hilos; los resultados conservan el orden de items"""
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(fn, items))
    return [fn(item) for item in items]


class SphereIntegrator:
    """Integra funciones de k puntos de la esfera con la configuración dada"""

    def __init__(self, cfg: Optional[QuadratureConfig] = None):
        self.cfg = cfg or QuadratureConfig()
        self.logger = logging.getLogger(__name__)

    def _map(self, fn, items):
        return ordered_map(fn, items, self.cfg.workers)

    def integrate(self, integrand: Integrand, cuts_per_factor: Sequence[Sequence[Cut]]) -> Estimate:
        """
        Integrar sobre el producto de len(cuts_per_factor) esferas

        Args:
            integrand: Recibe una lista de arreglos (N, 3), uno por factor, y devuelve (N,)
            cuts_per_factor: Cortes declarados para cada factor

        Returns:
            Estimación del valor (con error estándar en Monte Carlo)
        """
        n_factors = len(cuts_per_factor)
        if n_factors == 0:
            return Estimate(float(np.asarray(integrand([]), dtype=float).reshape(-1)[0]))
        if self.cfg.is_monte_carlo:
            return self._integrate_monte_carlo(integrand, n_factors)
        return self._integrate_grid(integrand, cuts_per_factor)

    def _integrate_grid(self, integrand: Integrand, cuts_per_factor: Sequence[Sequence[Cut]]) -> Estimate:
        scheme = self.cfg.scheme
        grids = [build_sphere_grid(scheme.n_polar, scheme.n_azimuthal, cuts) for cuts in cuts_per_factor]
        shape = tuple(g.size for g in grids)
        total_nodes = int(np.prod(shape))
        if total_nodes > config.MAX_GRID_NODES:
            raise QuadratureError(
                f"Malla producto de {total_nodes} nodos excede MAX_GRID_NODES={config.MAX_GRID_NODES}; "
                f"use Monte Carlo para {len(grids)} factores continuos"
            )

        chunk = config.GRID_CHUNK_SIZE
        ranges = [(start, min(start + chunk, total_nodes)) for start in range(0, total_nodes, chunk)]

        def partial(bounds: Tuple[int, int]) -> float:
            flat = np.arange(bounds[0], bounds[1])
            indices = np.unravel_index(flat, shape)
            points = [g.points[idx] for g, idx in zip(grids, indices)]
            weights = np.ones(flat.size)
            for g, idx in zip(grids, indices):
                weights = weights * g.weights[idx]
            values = np.asarray(integrand(points), dtype=float)
            return float(np.dot(values, weights))

        # Reducción en orden fijo de bloques
        partials = self._map(partial, ranges)
        total = 0.0
        for value in partials:
            total += value
        return Estimate(total)

    def _integrate_monte_carlo(self, integrand: Integrand, n_factors: int) -> Estimate:
        scheme = self.cfg.scheme
        block = config.MC_BLOCK_SIZE
        ranges = [(start, min(start + block, scheme.n_samples)) for start in range(0, scheme.n_samples, block)]

        def partial(bounds: Tuple[int, int]) -> Tuple[float, float]:
            points = [uniform_sphere_samples(scheme.seed, stream, bounds[0], bounds[1] - bounds[0])
                      for stream in range(n_factors)]
            values = np.asarray(integrand(points), dtype=float)
            return float(values.sum()), float(np.dot(values, values))

        partials = self._map(partial, ranges)
        s1 = s2 = 0.0
        for a, b in partials:
            s1 += a
            s2 += b
        n = scheme.n_samples
        mean = s1 / n
        variance = max(s2 / n - mean * mean, 0.0)
        scale = FOUR_PI ** n_factors
        return Estimate(scale * mean, scale * math.sqrt(variance / n))
