#!/usr/bin/env python3
"""
ontolab - laboratorio de modelos ontológicos de un qubit

Comandos: verify, classify, experiment, plot, connection, reduction.
Códigos de salida: 0 ok, 1 fallo cuantitativo, 2 uso, 3 hipótesis rechazada, 4 E/S.
"""

import argparse
import asyncio
import re
import sys
import traceback
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

import config
from analysis import bm_to_ks_reduction, check_bm_bb_connection, classify, verify_born_rule
from bloch import parse_state_spec
from errors import DomainError, HypothesisRefusedError, NotAQuantumModelError, UnknownModelError
from experiments import einstein_1927_check, local_causality_residual, separability_check, theorem1_check
from logger import LabLogger
from measures import density_grid_frame
from models import MODEL_REGISTRY, OntologicalModel, get_model
from reports import FORMATS, ReportWriter
from sphere_quadrature import GaussGrid, MonteCarlo, QuadratureConfig

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_REFUSED = 3
EXIT_IO = 4

MODEL_COMMANDS = ('verify', 'classify', 'experiment', 'plot')
EXPERIMENTS = ('theorem1', 'einstein1927', 'residual', 'separability')


def parse_grid(text: str) -> GaussGrid:
    match = re.fullmatch(r'\s*(\d+)\s*[xX]\s*(\d+)\s*', text)
    if not match:
        raise argparse.ArgumentTypeError(f"malla inválida '{text}' (formato NPxNA, p. ej. 128x256)")
    return GaussGrid(int(match.group(1)), int(match.group(2)))


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"se esperaba un entero: '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"se esperaba un entero positivo: {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    scheme = common.add_mutually_exclusive_group()
    scheme.add_argument('--grid', type=parse_grid, help='malla de Gauss NPxNA (por defecto 128x256)')
    scheme.add_argument('--mc', type=positive_int, metavar='N', help='Monte Carlo con N muestras')
    common.add_argument('--seed', type=int, default=config.SEED, help='semilla de Monte Carlo')
    common.add_argument('--out', metavar='PATH', help='archivo de salida (por defecto stdout)')
    common.add_argument('--format', choices=FORMATS, default='text', dest='fmt')
    common.add_argument('--workers', type=positive_int, default=config.WORKERS,
                        help='hilos de trabajo (no cambia la salida)')

    with_model = argparse.ArgumentParser(add_help=False, parents=[common])
    with_model.add_argument('--model', required=True,
                            help=f"modelo ({', '.join(MODEL_REGISTRY)} o all)")

    parser = argparse.ArgumentParser(prog='ontolab', description='Clasificación de modelos ontológicos de un qubit')
    commands = parser.add_subparsers(dest='command', required=True)

    commands.add_parser('verify', parents=[with_model], help='reproducción de la regla de Born')
    commands.add_parser('classify', parents=[with_model], help='psi-completo / psi-suplementado / psi-epistémico')

    experiment = commands.add_parser('experiment', parents=[with_model], help='argumentos de no localidad')
    experiment.add_argument('name', choices=EXPERIMENTS)
    experiment.add_argument('--state', default='x+', help='estado de la partícula para einstein1927')

    plot = commands.add_parser('plot', parents=[with_model], help='exportar el estado epistémico en la malla')
    plot.add_argument('--state', default='z+', help="estado: z+, z-, x+, x-, y+, y- o 'theta,phi'")

    commands.add_parser('connection', parents=[common], help='respuesta Bell-Mermin marginalizada vs Beltrametti-Bugajski')

    reduction = commands.add_parser('reduction', parents=[common], help='reducción Bell-Mermin -> Kochen-Specker')
    reduction.add_argument('--state', default='z+')
    reduction.add_argument('--samples', type=positive_int, default=config.REDUCTION_SAMPLES)
    reduction.add_argument('--bands', type=positive_int, default=config.REDUCTION_BANDS)
    return parser


@dataclass
class RunConfig:
    command: str
    model_names: List[str]
    quadrature: QuadratureConfig
    seed: int
    fmt: str = 'text'
    output_path: Optional[str] = None
    experiment: Optional[str] = None
    state: Optional[str] = None
    samples: int = config.REDUCTION_SAMPLES
    bands: int = config.REDUCTION_BANDS

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        if args.mc is not None:
            scheme = MonteCarlo(args.mc, args.seed)
        else:
            scheme = args.grid or GaussGrid()
        model = getattr(args, 'model', None)
        if model is None:
            names: List[str] = []
        elif model.strip().lower() == 'all':
            names = list(MODEL_REGISTRY)
        else:
            names = [model]
        return cls(
            command=args.command,
            model_names=names,
            quadrature=QuadratureConfig(scheme, args.workers),
            seed=args.seed,
            fmt=args.fmt,
            output_path=args.out,
            experiment=getattr(args, 'name', None),
            state=getattr(args, 'state', None),
            samples=getattr(args, 'samples', config.REDUCTION_SAMPLES),
            bands=getattr(args, 'bands', config.REDUCTION_BANDS),
        )


@dataclass
class CommandResult:
    exit_code: int
    records: List[Dict[str, Any]] = field(default_factory=list)
    frame: Optional[pd.DataFrame] = None


class OntolabRunner:
    """Ejecuta un comando de la CLI y traduce errores a códigos de salida"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.logger: Optional[LabLogger] = None
        self.run_config: Optional[RunConfig] = None
        self.models: List[OntologicalModel] = []
        self.writer: Optional[ReportWriter] = None

    def initialize_components(self):
        """Logger, configuración de la ejecución y modelos; UnknownModelError si un nombre no existe"""
        self.logger = LabLogger()
        self.run_config = RunConfig.from_args(self.args)
        self.logger.log_run_status("STARTING", f"{self.run_config.command} [{self.run_config.quadrature.describe()}]")
        self.models = [get_model(name) for name in self.run_config.model_names]
        self.writer = ReportWriter(self.run_config.fmt, self.run_config.output_path)

    def _run_model_safe(self, model: OntologicalModel) -> CommandResult:
        """Ejecutar el comando para un modelo; los errores de dominio se vuelven registros"""
        rc = self.run_config
        cfg = rc.quadrature
        try:
            if rc.command == 'verify':
                report = verify_born_rule(model, cfg)
                self.logger.log_check(f"born[{model.name}]", report.max_deviation, config.BORN_TOLERANCE, report.passed)
                return CommandResult(EXIT_OK if report.passed else EXIT_FAILURE, [report.to_record()])

            if rc.command == 'classify':
                report = classify(model, cfg=cfg)
                self.logger.log_verdict(model.name, 'classify', report.verdict.value)
                return CommandResult(EXIT_OK, [report.to_record()])

            if rc.command == 'plot':
                frame = density_grid_frame(model.prepare(parse_state_spec(rc.state)), cfg)
                frame.insert(0, 'model', model.name)
                return CommandResult(EXIT_OK, frame=frame)

            return self._run_experiment(model, cfg)

        except NotAQuantumModelError as e:
            self.logger.warning(f"{model.name}: {e}")
            record = {'model': model.name, 'verdict': 'not-a-quantum-model', 'reason': str(e)}
            if e.deviation is not None:
                record['failing_outcome'] = e.outcome
                record['failing_deviation'] = e.deviation
            return CommandResult(EXIT_FAILURE, [record])
        except HypothesisRefusedError as e:
            self.logger.warning(f"{model.name}: {e}")
            return CommandResult(EXIT_REFUSED, [{'model': model.name, 'verdict': 'refused',
                                                 'reason': str(e), 'explanation': e.explanation}])

    def _run_experiment(self, model: OntologicalModel, cfg: QuadratureConfig) -> CommandResult:
        name = self.run_config.experiment
        if name == 'theorem1':
            verdict = theorem1_check(model, cfg)
            self.logger.log_verdict(model.name, name, verdict.kind.value)
            return CommandResult(EXIT_OK, [verdict.to_record()])
        if name == 'einstein1927':
            report = einstein_1927_check(model, cfg, psi=parse_state_spec(self.run_config.state))
            self.logger.log_verdict(model.name, name, f"contradiction={report.contradiction}")
            return CommandResult(EXIT_OK, [report.to_record()])
        if name == 'residual':
            residual = local_causality_residual(model, cfg)
            return CommandResult(EXIT_OK, [{'model': model.name, 'residual': residual, 'quadrature': cfg.describe()}])
        report = separability_check(model, cfg=cfg)
        self.logger.log_verdict(model.name, name, report.kind.value)
        return CommandResult(EXIT_OK, [report.to_record()])

    def _run_global(self) -> CommandResult:
        rc = self.run_config
        if rc.command == 'connection':
            report = check_bm_bb_connection(cfg=rc.quadrature)
            self.logger.log_check('bm->bb', report.max_deviation, report.tolerance, report.passed)
            return CommandResult(EXIT_OK if report.passed else EXIT_FAILURE, [report.to_record()])

        report = bm_to_ks_reduction(parse_state_spec(rc.state), rc.samples, rc.seed, rc.bands,
                                    rc.quadrature.workers)
        self.logger.log_check('bm->ks max z', report.max_z, config.REDUCTION_SIGMA, report.passed)
        code = EXIT_OK if report.passed else EXIT_FAILURE
        if rc.fmt == 'csv':
            return CommandResult(code, frame=report.bands)
        return CommandResult(code, [report.to_record()])

    async def execute(self) -> int:
        """Ejecutar el comando (modelos en paralelo, salida en el orden del registro)"""
        if self.run_config.command in MODEL_COMMANDS:
            results: Sequence[CommandResult] = await asyncio.gather(
                *(asyncio.to_thread(self._run_model_safe, model) for model in self.models)
            )
        else:
            results = [await asyncio.to_thread(self._run_global)]

        frames = [r.frame for r in results if r.frame is not None]
        if frames:
            self.writer.write_frame(pd.concat(frames, ignore_index=True))
        else:
            self.writer.write_records([record for r in results for record in r.records])
        return max(r.exit_code for r in results)

    async def run(self) -> int:
        """
        Ejecutar la CLI con manejo de errores

        Returns:
            Código de salida
        """
        try:
            self.initialize_components()
            exit_code = await self.execute()
            self.logger.log_run_status("DONE", f"código de salida {exit_code}")
            return exit_code

        except (UnknownModelError, DomainError, ValueError) as e:
            self._report_error("Uso inválido", e)
            return EXIT_USAGE
        except OSError as e:
            self._report_error("No se pudo escribir la salida", e)
            return EXIT_IO
        except Exception as e:
            self._report_error("Error inesperado", e)
            if self.logger:
                self.logger.debug(traceback.format_exc())
            return EXIT_FAILURE

    def _report_error(self, message: str, exception: Exception):
        if self.logger:
            self.logger.log_error(message, exception)
        else:
            print(f"ontolab: {message}: {exception}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return asyncio.run(OntolabRunner(args).run())


if __name__ == "__main__":
    sys.exit(main())
