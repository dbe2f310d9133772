from hypocal.exceptions import SimulationRejected
from hypocal.management.base import HypocalCommand
from hypocal.services.curve_metrics import CostFunction
from hypocal.services.element_tests import simulate
from hypocal.services.genetic_algorithm import run
from hypocal.utils.datasets import load_dataset, write_frame, write_trajectory
from hypocal.utils.reports import ReportWriter


class Command(HypocalCommand):
    help = 'Calibrate the six free parameters against the configured experiments'
    mode = 'calibrate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_seed_arguments(parser)

    def run(self, **options):
        run_config = self.load_config(options)
        out = self.output_dir(options)
        seed = self.resolve_seed(options, run_config)
        threads = self.resolve_threads(options)
        ga = run_config.ga.model_copy(update={'seed': seed})

        dataset = load_dataset(run_config.tests, run_config.stress_convention)
        cost_function = CostFunction(dataset, ga.weights, ga.lambda_d, ga.lambda_i)

        self.stdout.write(
            f'Calibrating on {len(dataset)} tests: {ga.n_individuals} individuals, '
            f'{ga.n_iterations} iterations, seed={seed}, threads={threads}...'
        )
        with self.executor(threads) as executor:
            result = run(ga, cost_function, executor)

        if not result.feasible:
            raise SimulationRejected(0, 'no_feasible_individual')

        reference_costs = {
            name: cost_function(params) for name, params in run_config.references.items()
        }
        writer = ReportWriter(out)
        writer.calibration_report(result, run_config.references, reference_costs)
        write_frame(result.history_frame(), out / 'history.csv')
        for entry in run_config.tests:
            write_trajectory(simulate(entry.spec, result.params), out / f'{entry.spec.label}.csv')

        self.stdout.write(writer.parameter_table({'GA': result.params}, {'GA': result.cost}))
        self.success(f'Calibration completed: cost={result.cost:.4e}, outputs in {out}')
