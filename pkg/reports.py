"""Serialización de reportes: texto clave=valor, JSON y CSV"""

import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

FORMATS = ('text', 'json', 'csv')


def format_value(value: Any) -> str:
    """Valor en el formato de texto plano (floats con repr, para que sean reproducibles)"""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return repr(value)
    if value is None:
        return ''
    return str(value)


class ReportWriter:
    """Escribe registros planos en stdout o en un archivo"""

    def __init__(self, fmt: str = 'text', out_path: Optional[str] = None):
        """
        Inicializar el escritor

        Args:
            fmt: Formato de salida (text, json, csv)
            out_path: Archivo de salida (None = stdout)
        """
        if fmt not in FORMATS:
            raise ValueError(f"Formato desconocido: {fmt}")
        self.fmt = fmt
        self.out_path = out_path
        self.logger = logging.getLogger(__name__)

    def render(self, records: Sequence[Dict[str, Any]]) -> str:
        if self.fmt == 'json':
            payload: Any = records[0] if len(records) == 1 else list(records)
            return json.dumps(payload, indent=2, default=str) + '\n'
        if self.fmt == 'csv':
            return pd.DataFrame(list(records)).to_csv(index=False)
        blocks = ['\n'.join(f"{key}={format_value(value)}" for key, value in record.items()) for record in records]
        return '\n\n'.join(blocks) + '\n'

    def render_frame(self, frame: pd.DataFrame) -> str:
        if self.fmt == 'json':
            return frame.to_json(orient='records', indent=2) + '\n'
        return frame.to_csv(index=False)

    def write_records(self, records: List[Dict[str, Any]]):
        self._emit(self.render(records))

    def write_frame(self, frame: pd.DataFrame):
        self._emit(self.render_frame(frame))

    def _emit(self, text: str):
        """OSError se propaga: el runner lo convierte en código de salida 4"""
        if not self.out_path:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        with open(self.out_path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        self.logger.debug(f"Reporte guardado en {self.out_path}")
