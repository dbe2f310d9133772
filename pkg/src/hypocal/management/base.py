import logging
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ..exceptions import (
    ConfigurationError,
    CurveMetricsError,
    DatasetError,
    HypocalError,
)
from ..utils.config_parser import ConfigLoader, RunConfig

logger = logging.getLogger(__name__)

EXIT_DATA_ERROR = 3
EXIT_ALL_REJECTED = 4


class HypocalCommand(BaseCommand):
    """Shared options, config loading and error mapping of the hypocal verbs."""

    requires_system_checks = []
    mode = ''
    config_required = True

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            required=self.config_required,
            help='Run configuration (INI file)',
        )
        parser.add_argument(
            '--out',
            default=None,
            help='Output directory (default: HYPOCAL_OUTPUT_DIR)',
        )

    def add_seed_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=None, help='GA random seed')
        parser.add_argument(
            '--threads',
            type=int,
            default=None,
            help='Worker processes for cost evaluations (default: HYPOCAL_THREADS)',
        )

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except (ConfigurationError, DatasetError, CurveMetricsError) as e:
            raise CommandError(self._error_line(e), returncode=EXIT_DATA_ERROR) from e
        except HypocalError as e:
            logger.error(f"{self.mode} failed: {str(e)}")
            raise CommandError(self._error_line(e), returncode=EXIT_ALL_REJECTED) from e

    def run(self, **options):
        raise NotImplementedError

    @staticmethod
    def _error_line(exc: Exception) -> str:
        message = ' '.join(str(exc).split())
        return f"error={type(exc).__name__} {message}"

    def load_config(self, options) -> RunConfig:
        run_config = ConfigLoader().load(options['config'])
        run_config.require(self.mode)
        return run_config

    def output_dir(self, options) -> Path:
        path = Path(options['out'] or settings.HYPOCAL_OUTPUT_DIR)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def resolve_seed(options, run_config: RunConfig) -> int:
        """Seed precedence: --seed, then [ga] seed, then HYPOCAL_SEED, then 0."""
        for candidate in (options.get('seed'), run_config.seed, settings.HYPOCAL_SEED):
            if candidate is not None:
                return int(candidate)
        return 0

    @staticmethod
    def resolve_threads(options) -> int:
        threads = options.get('threads') or settings.HYPOCAL_THREADS
        if threads < 1:
            raise ConfigurationError(f"threads must be at least 1, got {threads}")
        return threads

    @contextmanager
    def executor(self, threads: int):
        """Process pool for ``threads > 1``, otherwise in-process evaluation."""
        if threads <= 1:
            yield None
            return
        with ProcessPoolExecutor(max_workers=threads) as pool:
            yield pool

    def success(self, message: str):
        self.stdout.write(self.style.SUCCESS(message))
