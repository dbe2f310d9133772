from hypocal.management.base import HypocalCommand
from hypocal.services.element_tests import TestKind, sample_experimental, simulate
from hypocal.utils.datasets import write_experimental


class Command(HypocalCommand):
    help = 'Write synthetic experimental curves simulated with the [params] parameter set'
    mode = 'synthesize'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--oedometer-points',
            type=int,
            default=15,
            help='Points sampled per oedometer curve',
        )
        parser.add_argument(
            '--triaxial-points',
            type=int,
            default=10,
            help='Points sampled per triaxial curve',
        )

    def run(self, **options):
        run_config = self.load_config(options)
        out = self.output_dir(options)

        for entry in run_config.tests:
            spec = entry.spec
            n_points = (
                options['oedometer_points'] if spec.kind is TestKind.OEDOMETER else options['triaxial_points']
            )
            curve = sample_experimental(simulate(spec, run_config.params), n_points)
            # Written where the config expects the data, so calibrate can run on it directly
            path = entry.data_path or out / f'{spec.label}.csv'
            write_experimental(curve, path, run_config.stress_convention)
            self.stdout.write(f'  {spec.label}: {len(curve)} points -> {path}')

        self.success('Synthetic dataset written')
