"""
Result export for eigencomplete runs
Writes CSV and JSON with the resolved config embedded, and hands SVG to a figure writer
"""
import csv
import json
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .config_parser import ExperimentConfig
from .logging_config import get_logger

logger = get_logger(__name__)

SIGNIFICANT_DIGITS = 15

FigureWriter = Callable[[Path, ExperimentConfig, Dict], None]


def format_number(value: float) -> str:
    """Fixed 15-significant-digit text of a float"""
    if not math.isfinite(value):
        return str(value)
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def to_serializable(value):
    """Recursively turn numpy, complex and float values into JSON-safe data"""
    if isinstance(value, dict):
        return {str(k): to_serializable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_serializable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_serializable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': to_serializable(float(value.real)), 'im': to_serializable(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(format_number(value))
    return value


class ResultExporter:
    """Writes the artifacts of one run into an output directory"""

    def __init__(self, output_dir: str = "results", figure_writer: Optional[FigureWriter] = None):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.figure_writer = figure_writer

    def _free_stem(self, name: str) -> str:
        """`name`, or `name_2`, `name_3`... when a run with the same stem already wrote files"""
        stem, n = name, 1
        while any(self.output_dir.glob(f"{stem}.*")):
            n += 1
            stem = f"{name}_{n}"
        return stem

    def _metadata(self, config: ExperimentConfig, results: Dict) -> Dict:
        return {
            'config': to_serializable(config.to_dict()),
            'numerics_report': to_serializable(results.get('numerics_report', {})),
        }

    def write_json(self, path: Path, config: ExperimentConfig, results: Dict):
        data = {
            'config': to_serializable(config.to_dict()),
            'results': to_serializable({**results.get('results', {}), 'partial': results.get('partial', False)}),
            'numerics_report': to_serializable(results.get('numerics_report', {})),
            'rows': to_serializable(results.get('rows', [])),
        }
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write('\n')

    def write_csv(self, path: Path, config: ExperimentConfig, results: Dict):
        rows = results.get('rows', [])
        columns: List[str] = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)

        with open(path, 'w', encoding='utf-8', newline='') as f:
            for key, value in self._metadata(config, results).items():
                f.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([self._cell(row.get(column)) for column in columns])

    @staticmethod
    def _cell(value) -> str:
        if value is None:
            return ''
        if isinstance(value, (bool, np.bool_)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return format_number(float(value))
        return str(value)

    def export(self, name: str, config: ExperimentConfig, results: Dict) -> List[str]:
        """
        Write every requested format for one run
        Returns the written paths
        """
        stem = self._free_stem(name)
        written = []
        for fmt in config.formats:
            path = self.output_dir / f"{stem}.{fmt}"
            if fmt == 'json':
                self.write_json(path, config, results)
            elif fmt == 'csv':
                self.write_csv(path, config, results)
            elif fmt == 'svg':
                if self.figure_writer is None or not results.get('plot'):
                    continue
                self.figure_writer(path, config, results)
            written.append(str(path))
            logger.info(f"wrote {path}")
        return written


def create_result_exporter(output_dir: str = "results",
                           figure_writer: Optional[FigureWriter] = None) -> ResultExporter:
    """Factory function to create a ResultExporter instance"""
    return ResultExporter(output_dir, figure_writer)
