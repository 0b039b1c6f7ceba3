import logging
from typing import Optional

import config


class LabLogger:
    """Sistema de logging del laboratorio"""

    def __init__(self, log_file: Optional[str] = None, log_level: Optional[str] = None):
        """
        Inicializar el sistema de logging

        Args:
            log_file: Nombre del archivo de log (vacío = solo consola)
            log_level: Nivel de logging (DEBUG, INFO, WARNING, ERROR)
        """
        self.log_file = config.LOG_FILE if log_file is None else log_file
        self.log_level = getattr(logging, (log_level or config.LOG_LEVEL).upper())
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        """Configurar el logger raíz y devolver el logger del laboratorio"""
        root = logging.getLogger()
        root.setLevel(self.log_level)

        # Evitar duplicar handlers
        if root.handlers:
            root.handlers.clear()

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # Console handler (stderr: stdout queda reservado para los reportes)
        console_handler = logging.StreamHandler()
        console_handler.setLevel(self.log_level)
        console_handler.setFormatter(formatter)
        root.addHandler(console_handler)

        if self.log_file:
            file_handler = logging.FileHandler(self.log_file)
            file_handler.setLevel(self.log_level)
            file_handler.setFormatter(formatter)
            root.addHandler(file_handler)

        return logging.getLogger('ontolab')

    def log_run_status(self, status: str, details: Optional[str] = None):
        """
        Registrar estado de la ejecución

        Args:
            status: Estado (STARTING, RUNNING, DONE, ERROR)
            details: Detalles adicionales
        """
        message = f"RUN: {status}"
        if details:
            message += f" - {details}"
        self.logger.info(message)

    def log_verdict(self, model_name: str, command: str, verdict: str):
        """
        Registrar el veredicto de un comando

        Args:
            model_name: Modelo evaluado
            command: Comando ejecutado
            verdict: Veredicto obtenido
        """
        self.logger.info(f"VEREDICTO: {command} [{model_name}] -> {verdict}")

    def log_check(self, name: str, value: float, tolerance: float, passed: bool):
        """Registrar una verificación cuantitativa"""
        status = "OK" if passed else "FALLO"
        self.logger.info(f"CHEQUEO: {name} = {value:.3e} (tolerancia {tolerance:.1e}) {status}")

    def log_error(self, error_message: str, exception: Optional[Exception] = None):
        """
        Registrar errores

        Args:
            error_message: Mensaje de error
            exception: Excepción capturada (opcional)
        """
        if exception:
            self.logger.error(f"ERROR: {error_message} - {str(exception)}")
        else:
            self.logger.error(f"ERROR: {error_message}")

    def info(self, message: str):
        self.logger.info(message)

    def debug(self, message: str):
        self.logger.debug(message)

    def warning(self, message: str):
        self.logger.warning(message)

    def error(self, message: str):
        self.logger.error(message)
