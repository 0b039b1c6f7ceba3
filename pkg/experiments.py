"""
Versiones ejecutables de los argumentos de no localidad.

- Preparación remota por steering sobre |psi+> y el chequeo theorem1:
  certificado de disjunción de cuatro pares de estados epistémicos.
- Argumento de detección única de 1927 (solo para modelos psi-completos).
- Diagnósticos: residuo de causalidad local y separabilidad.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

import config
from analysis import ClassificationReport, Verdict, classify, verify_born_rule
from bloch import (
    KET_PLUS,
    M_01,
    M_PM,
    ProjectiveMeasurement,
    Ray,
    joint_detection_probability,
    psi_plus,
    ray_to_bloch,
    schmidt_rank,
    steered_ensemble,
)
from errors import HypothesisRefusedError
from measures import (
    EpistemicState,
    OnticPoint,
    expectation,
    mix,
    support_overlap,
    total_variation_distance,
)
from models import OntologicalModel
from sphere_quadrature import QuadratureConfig, ordered_map

logger = logging.getLogger(__name__)

BLOCKED_1927 = "blocked: model is not psi-complete"
BLOCKED_1927_EXPLANATION = (
    "En un modelo psi-suplementado lambda = (psi, omega) y no hay razón para suponer "
    "que p(1A|psi,omega) = p(1A|psi): la causalidad local no obliga a que la probabilidad "
    "conjunta factorice dado solo psi, así que la contradicción no se sigue "
    "(no reason to assume that p(1A|psi,omega) = p(1A|psi))."
)


@dataclass(frozen=True)
class RemotePreparations:
    """Preparaciones de B dirigidas desde A y sus mezclas sin condicionar"""

    P0: EpistemicState
    P1: EpistemicState
    Pplus: EpistemicState
    Pminus: EpistemicState
    P01: EpistemicState
    Ppm: EpistemicState
    states: Tuple[Ray, Ray, Ray, Ray]
    weights: Tuple[float, float, float, float]

    def named(self) -> Dict[str, EpistemicState]:
        return {'P0': self.P0, 'P1': self.P1, 'P+': self.Pplus, 'P-': self.Pminus}


def _steered_pair(joint: np.ndarray, m: ProjectiveMeasurement) -> Tuple[Tuple[Ray, float], Tuple[Ray, float]]:
    """Estados dirigidos de B, ordenados como la base de m cuando la coinciden"""
    ensemble = steered_ensemble(joint, m)
    if len(ensemble.outcomes) != 2:
        raise HypothesisRefusedError(
            f"La medición {m.label} no dirige dos estados de B",
            "el estado conjunto debe estar entrelazado para que A prepare remotamente dos estados",
        )
    pairs = [(o.state, o.probability) for o in ensemble.outcomes]
    if pairs[0][0] == m.basis[1] and pairs[1][0] == m.basis[0]:
        pairs.reverse()
    return pairs[0], pairs[1]


def build_remote_preparations(model: OntologicalModel,
                              measurements: Sequence[ProjectiveMeasurement] = (M_01, M_PM)) -> RemotePreparations:
    """
    Construir las preparaciones remotas y sus mezclas

    Args:
        model: Modelo de un qubit
        measurements: Par de mediciones sobre A (por defecto M01 y M+-)

    Returns:
        P0, P1, P+, P- y las mezclas P01, P+- con las probabilidades del steering
    """
    joint = psi_plus()
    first, second = measurements
    (s0, w0), (s1, w1) = _steered_pair(joint, first)
    (sp, wp), (sm, wm) = _steered_pair(joint, second)

    p0, p1 = model.prepare(s0), model.prepare(s1)
    pplus, pminus = model.prepare(sp), model.prepare(sm)

    logger.debug(f"Steering [{model.name}]: pesos {w0:.15f}, {w1:.15f}, {wp:.15f}, {wm:.15f}")
    return RemotePreparations(
        P0=p0,
        P1=p1,
        Pplus=pplus,
        Pminus=pminus,
        P01=mix([(w0, p0), (w1, p1)]),
        Ppm=mix([(wp, pplus), (wm, pminus)]),
        states=(s0, s1, sp, sm),
        weights=(w0, w1, wp, wm),
    )


class LocalityKind(Enum):
    NONLOCAL_BY_THEOREM1 = 'nonlocal-by-theorem1'
    ESCAPES_THEOREM1 = 'escapes-theorem1'


THEOREM1_PAIRS = (('P+', 'P0'), ('P+', 'P1'), ('P-', 'P0'), ('P-', 'P1'))


@dataclass(frozen=True)
class LocalityVerdict:
    model_name: str
    kind: LocalityKind
    fidelities: Dict[str, float]
    overlap_witness: Optional[Tuple[str, Optional[OnticPoint]]] = None

    def __post_init__(self):
        overlapping = [v for v in self.fidelities.values() if v > config.FIDELITY_THRESHOLD]
        if (self.kind is LocalityKind.ESCAPES_THEOREM1) != bool(overlapping):
            raise ValueError(f"Veredicto {self.kind.value} incompatible con las fidelidades {self.fidelities}")

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {'model': self.model_name, 'verdict': self.kind.value}
        for pair, value in self.fidelities.items():
            record[f"fidelity[{pair}]"] = value
        if self.overlap_witness is not None:
            pair, point = self.overlap_witness
            record['witness_pair'] = pair
            if point is not None:
                record['witness_lambda'] = str(point)
        return record


def theorem1_check(model: OntologicalModel, cfg: Optional[QuadratureConfig] = None) -> LocalityVerdict:
    """
    Certificado de no localidad: fidelidades de los cuatro pares (P+-, P0/1)

    Si las cuatro son nulas, los estados epistémicos son disjuntos y la
    igualdad de mezclas que exigiría la causalidad local es imposible.

    Args:
        model: Modelo (se verifica la regla de Born primero)
        cfg: Configuración de cuadratura

    Returns:
        NONLOCAL_BY_THEOREM1 o ESCAPES_THEOREM1 con el par solapado
    """
    cfg = cfg or QuadratureConfig()
    verify_born_rule(model, cfg).raise_if_failed()
    named = build_remote_preparations(model).named()

    def overlap(pair: Tuple[str, str]):
        return support_overlap(named[pair[0]], named[pair[1]], cfg)

    overlaps = ordered_map(overlap, list(THEOREM1_PAIRS), cfg.workers)
    fidelities = {f"{a},{b}": o.fidelity for (a, b), o in zip(THEOREM1_PAIRS, overlaps)}

    witness = None
    for (a, b), o in zip(THEOREM1_PAIRS, overlaps):
        if o.fidelity > config.FIDELITY_THRESHOLD:
            witness = (f"{a},{b}", o.witness)
            break

    kind = LocalityKind.ESCAPES_THEOREM1 if witness is not None else LocalityKind.NONLOCAL_BY_THEOREM1
    return LocalityVerdict(model.name, kind, fidelities, witness)


def local_causality_residual(model: OntologicalModel, cfg: Optional[QuadratureConfig] = None) -> float:
    """Distancia de variación total entre P01 y P+-; 0 si la mezcla no depende de la elección de A"""
    preparations = build_remote_preparations(model)
    return total_variation_distance(preparations.P01, preparations.Ppm, cfg)


@dataclass(frozen=True)
class Diffraction1927Report:
    model_name: str
    psi: Ray
    p_1a: float
    p_1b: float
    p_joint_factorized: float
    p_joint_quantum: float
    contradiction: bool = field(init=False)

    def __post_init__(self):
        contradiction = abs(self.p_joint_factorized - self.p_joint_quantum) > config.FIDELITY_THRESHOLD
        object.__setattr__(self, 'contradiction', contradiction)

    def to_record(self) -> Dict[str, Any]:
        return {
            'model': self.model_name,
            'psi': str(ray_to_bloch(self.psi)),
            'p_1a': self.p_1a,
            'p_1b': self.p_1b,
            'p_joint_factorized': self.p_joint_factorized,
            'p_joint_quantum': self.p_joint_quantum,
            'contradiction': self.contradiction,
        }


DETECTION_SITES = ProjectiveMeasurement(M_01.basis, 'A/B')


def einstein_1927_check(model: OntologicalModel, cfg: Optional[QuadratureConfig] = None, psi: Ray = KET_PLUS,
                        classification: Optional[ClassificationReport] = None) -> Diffraction1927Report:
    """
    Detección en dos sitios A/B de una sola partícula

    Los sitios se codifican en la base |0>=|A>, |1>=|B>. Si lambda = psi, la
    causalidad local factoriza p(1A y 1B|psi) = p(1A|psi) p(1B|psi), que
    para psi = (|A> + |B>)/sqrt(2) vale 1/4 frente al 0 cuántico.

    Args:
        model: Modelo psi-completo (otro modelo se rechaza)
        cfg: Configuración de cuadratura
        psi: Estado de la partícula
        classification: Clasificación ya calculada (opcional)

    Returns:
        Reporte con la probabilidad conjunta factorizada y la cuántica
    """
    cfg = cfg or QuadratureConfig()
    classification = classification or classify(model, cfg=cfg)
    if classification.verdict is not Verdict.PSI_COMPLETE:
        logger.warning(f"1927 [{model.name}]: {classification.verdict.value}, argumento bloqueado")
        raise HypothesisRefusedError(BLOCKED_1927, BLOCKED_1927_EXPLANATION)

    state = model.prepare(psi)
    indicator = model.indicator(DETECTION_SITES)
    detect_a, detect_b = indicator.outcome(0), indicator.outcome(1)
    p_1a = expectation(state, detect_a, cfg)
    p_1b = expectation(state, detect_b, cfg)
    # Respuestas independientes dado lambda = psi
    p_joint = expectation(state, lambda *coords: detect_a(*coords) * detect_b(*coords), cfg)

    return Diffraction1927Report(
        model_name=model.name,
        psi=psi,
        p_1a=p_1a,
        p_1b=p_1b,
        p_joint_factorized=p_joint,
        p_joint_quantum=joint_detection_probability(psi, DETECTION_SITES),
    )


class SeparabilityKind(Enum):
    NON_SEPARABLE = 'non-separable'
    UNDECIDED = 'undecided'


@dataclass(frozen=True)
class SeparabilityReport:
    model_name: str
    kind: SeparabilityKind
    schmidt_rank: int
    psi_complete: bool
    explanation: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {
            'model': self.model_name,
            'verdict': self.kind.value,
            'schmidt_rank': self.schmidt_rank,
            'psi_complete': self.psi_complete,
            'explanation': self.explanation,
        }


def separability_check(model: OntologicalModel, joint: Optional[Sequence[complex]] = None,
                       cfg: Optional[QuadratureConfig] = None,
                       classification: Optional[ClassificationReport] = None) -> SeparabilityReport:
    """
    En un modelo psi-completo el estado óntico del par es el rayo conjunto;
    si está entrelazado no es un punto del producto de los espacios locales.
    """
    joint = psi_plus() if joint is None else np.asarray(joint, dtype=complex)
    rank = schmidt_rank(joint)
    classification = classification or classify(model, cfg=cfg)
    complete = classification.verdict is Verdict.PSI_COMPLETE

    if complete and rank > 1:
        kind = SeparabilityKind.NON_SEPARABLE
        explanation = "estado conjunto entrelazado: no es un par de estados ónticos locales"
    elif complete:
        kind = SeparabilityKind.UNDECIDED
        explanation = "estado conjunto producto: compatible con separabilidad"
    else:
        kind = SeparabilityKind.UNDECIDED
        explanation = f"modelo {classification.verdict.value}: el estado óntico del par no está fijado por psi"
    return SeparabilityReport(model.name, kind, rank, complete, explanation)
