import numpy as np

from hypocal.management.base import HypocalCommand
from hypocal.serializers import ParameterSetSerializer, finite_or_none
from hypocal.services.element_tests import (
    TestKind,
    TestSpec,
    convergence_order,
    simulate,
    triaxial_rate,
)
from hypocal.services.hypoplasticity import REFERENCE_SOILS, ElementState
from hypocal.utils.datasets import write_trajectory
from hypocal.utils.reports import ReportWriter

VALIDATION_TESTS = (
    TestSpec(
        name='validation_triaxial',
        kind=TestKind.TRIAXIAL,
        initial=ElementState(T1=-300.0, T2=-300.0, e=0.660),
        eps_fin=0.11,
    ),
    TestSpec(
        name='validation_oedometer',
        kind=TestKind.OEDOMETER,
        initial=ElementState(T1=-10.0, T2=-10.0, e=0.730),
        e_fin=0.680,
    ),
)


class Command(HypocalCommand):
    help = 'Simulate the Hochstetten reference tests and check Euler convergence'
    mode = 'validate'
    config_required = False

    def run(self, **options):
        params = REFERENCE_SOILS['hochstetten_validation']
        if options['config']:
            params = self.load_config(options).params or params
        out = self.output_dir(options)
        writer = ReportWriter(out)

        convergence, clamped = {}, {}
        max_residual = max_drift = 0.0
        for spec in VALIDATION_TESTS:
            trajectory = simulate(spec, params)
            write_trajectory(trajectory, out / f'{spec.label}.csv')
            clamped[spec.label] = trajectory.clamped_steps
            orders = convergence_order(spec, params)
            convergence[spec.label] = {
                key: [finite_or_none(value) for value in values] for key, values in orders.items()
            }
            if spec.kind is TestKind.TRIAXIAL:
                residuals = [
                    abs(triaxial_rate(ElementState(T1=T1, T2=T2, e=e), params).T2_residual)
                    for _, T1, T2, e in trajectory.samples
                ]
                max_residual = max(residuals)
                max_drift = float(np.max(np.abs(trajectory.T2 / spec.initial.T2 - 1.0)))
            self.stdout.write(
                f'  {spec.label}: final T1={trajectory.T1[-1]:.2f} kPa, e={trajectory.e[-1]:.4f}, '
                f'orders T1={convergence[spec.label]["T1"]}'
            )

        writer.validation_report({
            'mode': 'validate',
            'parameters': ParameterSetSerializer.from_params(params),
            'convergence': convergence,
            'max_T2_residual': max_residual,
            'max_T2_drift': max_drift,
            'clamped_steps': clamped,
        })
        self.success(f'Validation curves written to {out}')
