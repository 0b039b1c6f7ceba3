"""
Clasificación de modelos ontológicos y resultados de conexión entre modelos.

La clasificación es una semi-decisión: se evalúa una familia finita y
determinista de pares de estados, y el reporte dice cuántos se probaron.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

import config
from bloch import (
    KET_0,
    KET_1,
    KET_PLUS,
    BlochVector,
    ProjectiveMeasurement,
    Ray,
    bloch_to_ray,
    born_probability,
    ray_to_bloch,
)
from errors import DomainError, NotAQuantumModelError, OntolabError
from measures import (
    SPHERE,
    OnticPoint,
    OnticSpace,
    PointMass,
    Product,
    SpaceKind,
    classical_fidelity,
    expectation,
    expectation_estimate,
    support_overlap,
)
from models import BellMerminModel, OntologicalModel, uniform_density
from sphere_quadrature import QuadratureConfig, ordered_map, uniform_sphere_samples

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


class Verdict(Enum):
    PSI_COMPLETE = 'psi-complete'
    PSI_SUPPLEMENTED = 'psi-supplemented'
    PSI_EPISTEMIC = 'psi-epistemic'


@dataclass(frozen=True)
class Witness:
    """Par de estados cuyos estados epistémicos se solapan"""

    psi: Ray
    phi: Ray
    fidelity: float
    point: Optional[OnticPoint] = None


@dataclass(frozen=True)
class ClassificationReport:
    model_name: str
    verdict: Verdict
    is_psi_ontic: bool
    pairs_tested: int
    witness: Optional[Witness] = None
    quadrature: str = ""

    def __post_init__(self):
        # psi-completo implica psi-óntico
        if self.verdict is Verdict.PSI_COMPLETE and not self.is_psi_ontic:
            raise OntolabError("Reporte inconsistente: psi-completo pero no psi-óntico")
        if self.is_psi_ontic == (self.verdict is Verdict.PSI_EPISTEMIC):
            raise OntolabError(f"Reporte inconsistente: {self.verdict.value} con is_psi_ontic={self.is_psi_ontic}")
        if self.verdict is Verdict.PSI_EPISTEMIC:
            if self.witness is None or self.witness.fidelity <= config.FIDELITY_THRESHOLD:
                raise OntolabError("Un veredicto psi-epistémico requiere un testigo con fidelidad positiva")

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            'model': self.model_name,
            'verdict': self.verdict.value,
            'is_psi_ontic': self.is_psi_ontic,
            'pairs_tested': self.pairs_tested,
        }
        if self.witness is not None:
            record['witness_psi'] = str(ray_to_bloch(self.witness.psi))
            record['witness_phi'] = str(ray_to_bloch(self.witness.phi))
            record['fidelity'] = self.witness.fidelity
            if self.witness.point is not None:
                record['witness_lambda'] = str(self.witness.point)
        record['quadrature'] = self.quadrature
        return record


def fibonacci_directions(n: int) -> np.ndarray:
    """n direcciones casi uniformes (espiral de Fibonacci), deterministas"""
    index = np.arange(n)
    z = 1.0 - (2.0 * index + 1.0) / n
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    angle = GOLDEN_ANGLE * index
    return np.column_stack((radius * np.cos(angle), radius * np.sin(angle), z))


@dataclass(frozen=True)
class StatePairSampler:
    pairs: Tuple[Tuple[Ray, Ray], ...]

    def __post_init__(self):
        overlaps = [abs(phi.overlap(psi)) for psi, phi in self.pairs if not psi == phi]
        if not any(value <= config.PURE_TOLERANCE for value in overlaps):
            raise DomainError("El muestreador necesita al menos un par ortogonal")
        if not any(value > config.PURE_TOLERANCE for value in overlaps):
            raise DomainError("El muestreador necesita al menos un par no ortogonal de estados distintos")

    @classmethod
    def default(cls, n_directions: int = config.FIBONACCI_DIRECTIONS) -> 'StatePairSampler':
        """Pares canónicos (|0>,|+>), (|0>,|1>) y todos los pares de n direcciones de Fibonacci"""
        rays = [bloch_to_ray(BlochVector.from_array(d)) for d in fibonacci_directions(n_directions)]
        pairs = [(KET_0, KET_PLUS), (KET_0, KET_1)]
        pairs.extend((rays[i], rays[j]) for i in range(len(rays)) for j in range(i + 1, len(rays)))
        return cls(tuple(pairs))

    def states(self) -> List[Ray]:
        """Estados distintos que aparecen en algún par, en orden de aparición"""
        seen: List[Ray] = []
        for pair in self.pairs:
            for ray in pair:
                if not any(ray == s for s in seen):
                    seen.append(ray)
        return seen


# ---------------------------------------------------------------------------
# Regla de Born
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BornCheck:
    psi: Ray
    measurement: ProjectiveMeasurement
    outcome: int
    model_probability: float
    born_probability: float
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


@dataclass(frozen=True)
class BornCheckReport:
    model_name: str
    pairs_tested: int
    max_deviation: float
    worst: Optional[BornCheck]
    passed: bool
    failure: Optional[BornCheck] = None
    quadrature: str = ""
    sigma_tolerance: Optional[float] = None

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            'model': self.model_name,
            'passed': self.passed,
            'pairs_tested': self.pairs_tested,
            'max_deviation': self.max_deviation,
        }
        if self.worst is not None:
            record['worst_psi'] = str(ray_to_bloch(self.worst.psi))
            record['worst_phi'] = str(self.worst.measurement.axis)
            record['worst_outcome'] = self.worst.outcome
        if self.failure is not None:
            record['failing_psi'] = str(ray_to_bloch(self.failure.psi))
            record['failing_phi'] = str(self.failure.measurement.axis)
            record['failing_outcome'] = self.failure.outcome
            record['failing_deviation'] = self.failure.deviation
        record['quadrature'] = self.quadrature
        if self.sigma_tolerance is not None:
            # Monte Carlo: umbral en errores estándar
            record['mc_sigma_tolerance'] = self.sigma_tolerance
        return record

    def raise_if_failed(self):
        if self.passed or self.failure is None:
            return
        f = self.failure
        raise NotAQuantumModelError(
            f"{self.model_name} no es un modelo de la teoría cuántica: "
            f"psi={ray_to_bloch(f.psi)}, phi={f.measurement.axis}, resultado {f.outcome}, "
            f"desviación {f.deviation:.3e} > {f.tolerance:.1e}",
            psi=f.psi, measurement=f.measurement, outcome=f.outcome, deviation=f.deviation,
        )


def born_test_pairs(n_pairs: int = config.BORN_PAIRS,
                    seed: int = config.BORN_SEED) -> List[Tuple[Ray, ProjectiveMeasurement]]:
    """Pares (psi, M) pseudoaleatorios y deterministas"""
    states = uniform_sphere_samples(seed, 0, 0, n_pairs)
    axes = uniform_sphere_samples(seed, 1, 0, n_pairs)
    return [
        (bloch_to_ray(BlochVector.from_array(s)), ProjectiveMeasurement.from_axis(BlochVector.from_array(a), f"M{i}"))
        for i, (s, a) in enumerate(zip(states, axes))
    ]


def _single_threaded(cfg: QuadratureConfig) -> QuadratureConfig:
    return dataclasses.replace(cfg, workers=1)


def verify_born_rule(model: OntologicalModel, cfg: Optional[QuadratureConfig] = None,
                     n_pairs: int = config.BORN_PAIRS) -> BornCheckReport:
    """
    Comprobar que el modelo reproduce |<phi|psi>|^2 para pares deterministas

    Args:
        model: Modelo a verificar
        cfg: Configuración de cuadratura
        n_pairs: Número de pares (psi, M)

    Returns:
        Reporte con la peor desviación y el primer fallo, si lo hay
    """
    cfg = cfg or QuadratureConfig()
    inner = _single_threaded(cfg)
    pairs = born_test_pairs(n_pairs)

    def check_pair(pair: Tuple[Ray, ProjectiveMeasurement]) -> List[BornCheck]:
        psi, m = pair
        state = model.prepare(psi)
        indicator = model.indicator(m)
        checks = []
        for k, basis_ray in enumerate(m.basis):
            estimate = expectation_estimate(state, indicator.outcome(k), inner)
            expected = born_probability(psi, basis_ray)
            tolerance = config.BORN_TOLERANCE
            if cfg.is_monte_carlo:
                tolerance = max(config.BORN_TOLERANCE, config.MC_SIGMA_TOLERANCE * estimate.std_error)
            checks.append(BornCheck(psi, m, k, estimate.value, expected,
                                    abs(estimate.value - expected), tolerance))
        return checks

    results = [c for checks in ordered_map(check_pair, pairs, cfg.workers) for c in checks]
    worst = max(results, key=lambda c: c.deviation, default=None)
    failure = next((c for c in results if not c.passed), None)
    report = BornCheckReport(
        model_name=model.name,
        pairs_tested=len(pairs),
        max_deviation=worst.deviation if worst is not None else 0.0,
        worst=worst,
        passed=failure is None,
        failure=failure,
        quadrature=cfg.describe(),
        sigma_tolerance=config.MC_SIGMA_TOLERANCE if cfg.is_monte_carlo else None,
    )
    logger.info(f"Regla de Born [{model.name}]: {len(pairs)} pares, desviación máxima {report.max_deviation:.3e}")
    return report


# ---------------------------------------------------------------------------
# Clasificación
# ---------------------------------------------------------------------------

class ModelClassifier:
    """Clasificador psi-completo / psi-suplementado / psi-epistémico"""

    def __init__(self, cfg: Optional[QuadratureConfig] = None, sampler: Optional[StatePairSampler] = None):
        """
        Inicializar el clasificador

        Args:
            cfg: Configuración de cuadratura
            sampler: Familia de pares de estados (por defecto StatePairSampler.default())
        """
        self.cfg = cfg or QuadratureConfig()
        self.sampler = sampler or StatePairSampler.default()
        self.logger = logging.getLogger(__name__)

    def is_psi_complete(self, model: OntologicalModel) -> bool:
        """Espacio = espacio de Hilbert proyectivo y cada preparación es una delta en su propio rayo"""
        if model.space().kind is not SpaceKind.PROJECTIVE_HILBERT:
            return False
        for psi in self.sampler.states():
            state = model.prepare(psi)
            if not isinstance(state, PointMass):
                return False
            if not state.point.coords[0].isclose(ray_to_bloch(psi)):
                return False
        return True

    def classify(self, model: OntologicalModel) -> ClassificationReport:
        """
        Clasificar un modelo

        Args:
            model: Modelo ontológico (se verifica la regla de Born primero)

        Returns:
            Reporte con veredicto, testigo y número de pares probados
        """
        verify_born_rule(model, self.cfg).raise_if_failed()

        inner = _single_threaded(self.cfg)
        distinct = [(psi, phi) for psi, phi in self.sampler.pairs if not psi == phi]
        if not distinct:
            raise DomainError("No hay pares de estados distintos para clasificar")

        def fidelity(pair: Tuple[Ray, Ray]) -> float:
            return classical_fidelity(model.prepare(pair[0]), model.prepare(pair[1]), inner)

        fidelities = ordered_map(fidelity, distinct, self.cfg.workers)

        witness = None
        for (psi, phi), value in zip(distinct, fidelities):
            if value > config.FIDELITY_THRESHOLD:
                overlap = support_overlap(model.prepare(psi), model.prepare(phi), inner)
                witness = Witness(psi, phi, value, overlap.witness)
                break

        is_psi_ontic = witness is None
        if not is_psi_ontic:
            verdict = Verdict.PSI_EPISTEMIC
        elif self.is_psi_complete(model):
            verdict = Verdict.PSI_COMPLETE
        else:
            verdict = Verdict.PSI_SUPPLEMENTED

        self.logger.debug(f"{model.name}: {len(distinct)} pares, fidelidad máxima {max(fidelities, default=0.0):.3e}")
        return ClassificationReport(
            model_name=model.name,
            verdict=verdict,
            is_psi_ontic=is_psi_ontic,
            pairs_tested=len(distinct),
            witness=witness,
            quadrature=self.cfg.describe(),
        )


def classify(model: OntologicalModel, sampler: Optional[StatePairSampler] = None,
             cfg: Optional[QuadratureConfig] = None) -> ClassificationReport:
    return ModelClassifier(cfg, sampler).classify(model)


# ---------------------------------------------------------------------------
# Conexiones Bell-Mermin -> Beltrametti-Bugajski / Kochen-Specker
# ---------------------------------------------------------------------------

def bm_conditional_indicator(phi: Ray, lambda_prime: BlochVector, cfg: Optional[QuadratureConfig] = None) -> float:
    """
    Respuesta Bell-Mermin marginalizada sobre lambda'' uniforme

    Args:
        phi: Rayo del resultado
        lambda_prime: Primera coordenada óntica (unitaria)
        cfg: Configuración de cuadratura

    Returns:
        p(phi|lambda') = integral de Theta(phi . (lambda' + lambda'')) / 4pi
    """
    if not lambda_prime.is_pure():
        raise DomainError(f"lambda' debe ser unitario: norma {lambda_prime.norm()!r}")
    model = BellMerminModel()
    state = Product(OnticSpace.product(2), (PointMass(SPHERE, OnticPoint((lambda_prime,))), uniform_density()))
    response = model.indicator(ProjectiveMeasurement.from_ray(phi)).outcome(0)
    return expectation(state, response, cfg)


@dataclass(frozen=True)
class ConnectionReport:
    pairs_tested: int
    max_deviation: float
    tolerance: float
    passed: bool
    quadrature: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {
            'connection': 'bm-marginal=bb-indicator',
            'passed': self.passed,
            'pairs_tested': self.pairs_tested,
            'max_deviation': self.max_deviation,
            'tolerance': self.tolerance,
            'quadrature': self.quadrature,
        }


def check_bm_bb_connection(n_pairs: int = config.CONNECTION_PAIRS,
                           cfg: Optional[QuadratureConfig] = None) -> ConnectionReport:
    """Comparar la respuesta marginalizada con (1 + phi . lambda')/2 en pares deterministas"""
    cfg = cfg or QuadratureConfig()
    inner = _single_threaded(cfg)
    phis = uniform_sphere_samples(config.BORN_SEED, 2, 0, n_pairs)
    primes = uniform_sphere_samples(config.BORN_SEED, 3, 0, n_pairs)

    def deviation(index: int) -> float:
        phi = bloch_to_ray(BlochVector.from_array(phis[index]))
        lambda_prime = BlochVector.from_array(primes[index])
        expected = 0.5 * (1.0 + float(phis[index] @ primes[index]))
        return abs(bm_conditional_indicator(phi, lambda_prime, inner) - expected)

    deviations = ordered_map(deviation, list(range(n_pairs)), cfg.workers)
    worst = max(deviations, default=0.0)
    tolerance = config.BORN_TOLERANCE
    if cfg.is_monte_carlo:
        tolerance = max(tolerance, config.MC_SIGMA_TOLERANCE * 0.5 / math.sqrt(cfg.scheme.n_samples))
    return ConnectionReport(n_pairs, worst, tolerance, worst <= tolerance, cfg.describe())


@dataclass(frozen=True)
class ReductionReport:
    psi: BlochVector
    n_samples: int
    discarded: int
    max_deviation: float
    max_z: float
    lower_counts: int
    passed: bool
    bands: pd.DataFrame = field(repr=False, compare=False, default=None)

    def to_record(self) -> Dict[str, Any]:
        return {
            'connection': 'bm-to-ks-reduction',
            'psi': str(self.psi),
            'passed': self.passed,
            'n_samples': self.n_samples,
            'discarded': self.discarded,
            'bands': 0 if self.bands is None else len(self.bands),
            'max_deviation': self.max_deviation,
            'max_z': self.max_z,
            'lower_hemisphere_counts': self.lower_counts,
        }


def bm_to_ks_reduction(psi: Ray, n_samples: int = config.REDUCTION_SAMPLES, seed: int = config.SEED,
                       bands: int = config.REDUCTION_BANDS, workers: int = config.WORKERS) -> ReductionReport:
    """
    Histograma de la dirección u = (psi + lambda'')/|psi + lambda''| frente a la densidad Kochen-Specker

    Las bandas son de igual área (equiespaciadas en psi . u) y promedian el
    azimut. Cada banda se compara con su masa esperada integral de
    (1/pi) Theta(psi . u) psi . u, en errores estándar binomiales.

    Args:
        psi: Estado preparado
        n_samples: Muestras de lambda'' (al menos REDUCTION_MIN_SAMPLES)
        seed: Semilla del flujo Philox
        bands: Número de bandas
        workers: Hilos (no cambia el resultado)

    Returns:
        Reporte con la tabla de bandas
    """
    if n_samples < config.REDUCTION_MIN_SAMPLES:
        raise DomainError(f"Se requieren al menos {config.REDUCTION_MIN_SAMPLES} muestras, recibidas {n_samples}")
    if bands < 2:
        raise DomainError(f"Se requieren al menos 2 bandas, recibidas {bands}")

    axis = ray_to_bloch(psi).as_array()
    edges = np.linspace(-1.0, 1.0, bands + 1)
    block = config.MC_BLOCK_SIZE
    ranges = [(start, min(start + block, n_samples)) for start in range(0, n_samples, block)]

    def histogram(bounds: Tuple[int, int]) -> Tuple[np.ndarray, int]:
        lambda_second = uniform_sphere_samples(seed, 0, bounds[0], bounds[1] - bounds[0])
        u = axis + lambda_second
        norms = np.linalg.norm(u, axis=1)
        keep = norms >= config.REDUCTION_DEGENERATE_NORM
        directions = u[keep] / norms[keep, None]
        cosines = np.clip(directions @ axis, -1.0, 1.0)
        counts, _ = np.histogram(cosines, bins=edges)
        return counts, int(np.count_nonzero(~keep))

    partials = ordered_map(histogram, ranges, workers)
    counts = np.zeros(bands, dtype=np.int64)
    discarded = 0
    for band_counts, band_discarded in partials:
        counts += band_counts
        discarded += band_discarded
    if discarded:
        logger.warning(f"Reducción: {discarded} muestras degeneradas (|u| < {config.REDUCTION_DEGENERATE_NORM}) descartadas")

    kept = n_samples - discarded
    low, high = edges[:-1], edges[1:]
    expected = np.clip(high, 0.0, None) ** 2 - np.clip(low, 0.0, None) ** 2
    observed = counts / kept
    std_error = np.sqrt(expected * (1.0 - expected) / kept)
    deviation = np.abs(observed - expected)
    with np.errstate(divide='ignore', invalid='ignore'):
        z_scores = np.where(std_error > 0.0, deviation / std_error, np.where(counts > 0, np.inf, 0.0))
    solid_angle = 2.0 * math.pi * (high - low)

    frame = pd.DataFrame({
        'band': np.arange(bands),
        'cos_low': low,
        'cos_high': high,
        'count': counts,
        'observed_mass': observed,
        'expected_mass': expected,
        'std_error': std_error,
        'z_score': z_scores,
        'observed_density': observed / solid_angle,
        'expected_density': expected / solid_angle,
    })

    lower_counts = int(counts[high <= 0.0].sum())
    max_z = float(np.max(z_scores))
    passed = max_z <= config.REDUCTION_SIGMA and lower_counts == 0
    report = ReductionReport(
        psi=ray_to_bloch(psi),
        n_samples=n_samples,
        discarded=discarded,
        max_deviation=float(np.max(deviation)),
        max_z=max_z,
        lower_counts=lower_counts,
        passed=passed,
        bands=frame,
    )
    logger.info(f"Reducción BM->KS: max z = {max_z:.2f}, cuentas en el hemisferio inferior = {lower_counts}")
    return report
