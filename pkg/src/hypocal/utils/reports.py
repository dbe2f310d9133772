import logging
from pathlib import Path

import pandas as pd
from rest_framework.renderers import JSONRenderer

from ..serializers import (
    CalibrationReportSerializer,
    EnsembleReportSerializer,
    ParameterSetSerializer,
    ValidationReportSerializer,
    finite_or_none,
)
from ..services.ensemble import EnsembleResult
from ..services.genetic_algorithm import CalibrationResult
from ..services.hypoplasticity import HypoParams

logger = logging.getLogger(__name__)

# Row label, attribute, format; void ratios in canonical e_d0 < e_c0 < e_i0 order
TABLE_ROWS = (
    ('phi_c [deg]', 'phi_c_deg', '{:.2f}'),
    ('h_s [MPa]', 'h_s', '{:.1f}'),
    ('n [-]', 'n', '{:.3f}'),
    ('e_d0 [-]', 'e_d0', '{:.3f}'),
    ('e_c0 [-]', 'e_c0', '{:.3f}'),
    ('e_i0 [-]', 'e_i0', '{:.3f}'),
    ('alpha [-]', 'alpha', '{:.3f}'),
    ('beta [-]', 'beta', '{:.3f}'),
)


def _format_cost(cost: float | None) -> str:
    value = finite_or_none(cost)
    return 'inf' if value is None else f'{value:.4e}'


class ReportWriter:
    """Writes the text parameter tables and JSON summaries of a run."""

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.renderer = JSONRenderer()

    def parameter_table(self, columns: dict[str, HypoParams], costs: dict[str, float]) -> str:
        """
        Render parameter sets side by side, one column per set.

        Args:
            columns: Column title to parameter set
            costs: Column title to calibration cost (columns without one show '-')

        Returns:
            Fixed-width text table
        """
        table = {}
        for title, params in columns.items():
            cells = []
            for _, attribute, fmt in TABLE_ROWS:
                value = getattr(params, attribute)
                if attribute == 'h_s':
                    value = value / 1000.0
                cells.append(fmt.format(value))
            cells.append(_format_cost(costs[title]) if title in costs else '-')
            table[title] = cells
        frame = pd.DataFrame(table, index=[label for label, _, _ in TABLE_ROWS] + ['cost C(P)'])
        return frame.to_string() + '\n'

    def write_text(self, name: str, text: str) -> Path:
        path = self.output_dir / name
        path.write_text(text, encoding='utf-8')
        return path

    def write_json(self, name: str, serializer_class, payload: dict) -> Path:
        """Validate ``payload`` against its report serializer and render it."""
        serializer = serializer_class(instance=payload)
        path = self.output_dir / name
        path.write_bytes(self.renderer.render(serializer.data, renderer_context={'indent': 2}) + b'\n')
        return path

    def calibration_report(
        self,
        result: CalibrationResult,
        references: dict[str, HypoParams],
        reference_costs: dict[str, float],
        mode: str = 'calibrate',
    ) -> list[Path]:
        """Write ``report.txt`` (reference columns then GA) and ``report.json``."""
        columns = dict(references)
        columns['GA'] = result.params
        costs = dict(reference_costs)
        costs['GA'] = result.cost
        paths = [self.write_text('report.txt', self.parameter_table(columns, costs))]

        payload = {
            'mode': mode,
            'seed': result.seed,
            'feasible': result.feasible,
            'parameters': ParameterSetSerializer.from_params(result.params),
            'lambda_d': result.search.lambda_d,
            'lambda_i': result.search.lambda_i,
            'cost': finite_or_none(result.cost),
            'deltas': {plane.value: finite_or_none(delta) for plane, delta in result.deltas.items()},
            'history': [
                {
                    'iteration': record.iteration,
                    'best_cost': finite_or_none(record.best_cost),
                    'mean_cost': finite_or_none(record.mean_cost),
                    'worst_cost': finite_or_none(record.worst_cost),
                    'n_feasible': record.n_feasible,
                }
                for record in result.history
            ],
            'references': [
                {
                    'name': name,
                    'parameters': ParameterSetSerializer.from_params(params),
                    'cost': finite_or_none(reference_costs.get(name)),
                }
                for name, params in references.items()
            ],
        }
        paths.append(self.write_json('report.json', CalibrationReportSerializer, payload))
        return paths

    def ensemble_report(self, result: EnsembleResult) -> list[Path]:
        """Write the statistics table, ``ensemble.json`` and the per-trial tables."""
        summary_text = result.summary.to_string(float_format=lambda v: f'{v:.6g}') + '\n'
        if result.pearson is not None:
            summary_text += '\nPearson correlation\n'
            summary_text += result.pearson.to_string(float_format=lambda v: f'{v:.3f}') + '\n'
        for line in result.regressions:
            summary_text += f'\n{line.y} = {line.slope:.6g} * {line.x} + {line.intercept:.6g} (r = {line.r:.3f})'
        if result.regressions:
            summary_text += '\n'

        payload = {
            'mode': 'ensemble',
            'n_trials': result.n_trials,
            'n_succeeded': len(result.trials),
            'failures': [failure._asdict() for failure in result.failures],
            'summary': {
                name: {stat: finite_or_none(value) for stat, value in row.items()}
                for name, row in result.summary.to_dict(orient='index').items()
            },
            'pearson': None if result.pearson is None else result.pearson.to_dict(orient='index'),
            'regressions': [line._asdict() for line in result.regressions],
        }
        return [
            self.write_text('summary.txt', summary_text),
            self.write_json('ensemble.json', EnsembleReportSerializer, payload),
        ]

    def validation_report(self, payload: dict) -> Path:
        return self.write_json('validation.json', ValidationReportSerializer, payload)
