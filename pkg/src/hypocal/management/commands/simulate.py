from hypocal.management.base import HypocalCommand
from hypocal.services.element_tests import simulate
from hypocal.utils.datasets import write_trajectory


class Command(HypocalCommand):
    help = 'Simulate the configured element tests with the [params] parameter set'
    mode = 'simulate'

    def run(self, **options):
        run_config = self.load_config(options)
        out = self.output_dir(options)
        params = run_config.params

        self.stdout.write(
            f'Simulating {len(run_config.tests)} tests '
            f'(phi_c={params.phi_c_deg:.2f} deg, h_s={params.h_s:.4g} kPa)...'
        )
        for entry in run_config.tests:
            trajectory = simulate(entry.spec, params)
            path = write_trajectory(trajectory, out / f'{entry.spec.label}.csv')
            final = trajectory.samples[-1]
            self.stdout.write(
                f'  {entry.spec.label}: {len(trajectory)} samples, '
                f'final T1={final[1]:.2f} kPa, e={final[3]:.4f} -> {path}'
            )
            if trajectory.clamped_steps:
                self.stdout.write(f'  {entry.spec.label}: {trajectory.clamped_steps} clamped steps')

        self.success('Simulation completed')
