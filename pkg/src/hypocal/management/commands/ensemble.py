from hypocal.exceptions import SimulationRejected
from hypocal.management.base import HypocalCommand
from hypocal.services.curve_metrics import CostFunction
from hypocal.services.ensemble import run_ensemble
from hypocal.utils.datasets import load_dataset, write_frame
from hypocal.utils.reports import ReportWriter


class Command(HypocalCommand):
    help = 'Repeat the calibration with independent seeds and report parameter statistics'
    mode = 'ensemble'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_seed_arguments(parser)
        parser.add_argument(
            '--trials',
            type=int,
            default=10,
            help='Number of calibrations (seeds seed, seed+1, ...)',
        )

    def run(self, **options):
        run_config = self.load_config(options)
        out = self.output_dir(options)
        base_seed = self.resolve_seed(options, run_config)
        threads = self.resolve_threads(options)
        ga = run_config.ga.model_copy(update={'seed': base_seed})

        dataset = load_dataset(run_config.tests, run_config.stress_convention)
        cost_function = CostFunction(dataset, ga.weights, ga.lambda_d, ga.lambda_i)

        self.stdout.write(
            f"Running {options['trials']} calibrations from seed {base_seed} on {threads} workers..."
        )
        with self.executor(threads) as executor:
            result = run_ensemble(ga, cost_function, options['trials'], base_seed=base_seed, executor=executor)

        if not result.trials:
            raise SimulationRejected(0, 'all_trials_failed')

        writer = ReportWriter(out)
        writer.ensemble_report(result)
        write_frame(result.trial_table(), out / 'trials.csv')
        write_frame(result.cost_envelope, out / 'cost_envelope.csv')

        self.stdout.write(result.summary.to_string(float_format=lambda v: f'{v:.6g}'))
        if result.failures:
            self.stdout.write(self.style.WARNING(f'{len(result.failures)} trials excluded'))
        self.success(f'Ensemble completed: {len(result.trials)}/{result.n_trials} trials, outputs in {out}')
