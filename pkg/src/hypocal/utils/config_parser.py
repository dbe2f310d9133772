import configparser
import logging
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import ValidationError as PydanticValidationError

from ..exceptions import ConfigurationError
from ..serializers import (
    BOUND_FIELDS,
    BoundsSectionSerializer,
    GaSectionSerializer,
    ParamsSectionSerializer,
    RunSectionSerializer,
    TestSectionSerializer,
)
from ..services.curve_metrics import CostWeights
from ..services.element_tests import TestKind, TestSpec, integration_time
from ..services.genetic_algorithm import GaConfig
from ..services.hypoplasticity import ElementState, HypoParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TestEntry:
    """A configured element test and the path of its measured curves, if any."""

    __test__ = False

    spec: TestSpec
    data_path: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs from the configuration file.

    Stresses in ``tests`` are signed (compression negative) whatever the
    file convention was.
    """

    path: Path
    stress_convention: str = 'signed'
    params: HypoParams | None = None
    ga: GaConfig = field(default_factory=GaConfig)
    seed: int | None = None
    tests: tuple[TestEntry, ...] = ()
    references: dict[str, HypoParams] = field(default_factory=dict)

    def require(self, mode: str):
        """Check that the sections ``mode`` depends on are present.

        Raises:
            ConfigurationError: A required section is missing.
        """
        if mode in ('simulate', 'synthesize') and self.params is None:
            raise ConfigurationError(f"mode {mode} needs a [params] section")
        if mode in ('simulate', 'synthesize', 'calibrate', 'ensemble') and not self.tests:
            raise ConfigurationError(f"mode {mode} needs at least one [test:NAME] section")
        if mode in ('calibrate', 'ensemble'):
            kinds = {entry.spec.kind for entry in self.tests}
            if kinds != {TestKind.OEDOMETER, TestKind.TRIAXIAL}:
                raise ConfigurationError(
                    "calibration needs at least one oedometer and one triaxial test"
                )
            missing = [entry.spec.label for entry in self.tests if entry.data_path is None]
            if missing:
                raise ConfigurationError(f"tests without a data file: {', '.join(missing)}")


class ConfigLoader:
    """Reads INI run configurations into a validated ``RunConfig``."""

    def load(self, path) -> RunConfig:
        """
        Parse and validate a configuration file.

        Args:
            path: INI file path

        Returns:
            Validated run configuration
        """
        path = Path(path)
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path, encoding='utf-8') as handle:
                parser.read_file(handle)
        except OSError as e:
            raise ConfigurationError(f"cannot read config {path}: {e.strerror}") from e
        except configparser.Error as e:
            raise ConfigurationError(f"malformed config {path}: {e}") from e

        run = self._validate(RunSectionSerializer, self._section(parser, 'run'), 'run')
        convention = run['stress_convention']

        params = None
        if parser.has_section('params'):
            params = self._validate(ParamsSectionSerializer, self._section(parser, 'params'), 'params')['params']

        ga, seed = self._ga_config(parser)
        tests = tuple(
            self._test_entry(parser, section, path.parent, convention)
            for section in parser.sections()
            if section.startswith('test:')
        )
        references = {
            section.split(':', 1)[1]: self._validate(
                ParamsSectionSerializer, self._section(parser, section), section
            )['params']
            for section in parser.sections()
            if section.startswith('reference:')
        }

        logger.debug(f"Loaded {path}: {len(tests)} tests, {len(references)} references")
        return RunConfig(
            path=path,
            stress_convention=convention,
            params=params,
            ga=ga,
            seed=seed,
            tests=tests,
            references=references,
        )

    @staticmethod
    def _section(parser: configparser.ConfigParser, name: str) -> dict:
        return dict(parser[name]) if parser.has_section(name) else {}

    @staticmethod
    def _validate(serializer_class, data: dict, section: str) -> dict:
        serializer = serializer_class(data=data)
        if not serializer.is_valid():
            errors = '; '.join(
                f"{key}: {' '.join(str(m) for m in messages)}" for key, messages in serializer.errors.items()
            )
            raise ConfigurationError(f"section [{section}] invalid: {errors}")
        return serializer.validated_data

    def _ga_config(self, parser: configparser.ConfigParser) -> tuple[GaConfig, int | None]:
        ga = self._validate(GaSectionSerializer, self._section(parser, 'ga'), 'ga')
        bounds = self._validate(BoundsSectionSerializer, self._section(parser, 'bounds'), 'bounds')
        seed = ga.pop('seed', None)
        try:
            weights = CostWeights(w1=ga.pop('w1'), w2=ga.pop('w2'), w3=ga.pop('w3'))
            config = GaConfig.from_display_bounds(
                [bounds[name][0] for name in BOUND_FIELDS],
                [bounds[name][1] for name in BOUND_FIELDS],
                weights=weights,
                seed=seed or 0,
                **ga,
            )
        except PydanticValidationError as e:
            raise ConfigurationError(f"sections [ga]/[bounds] invalid: {e.errors()[0]['msg']}") from e
        return config, seed

    def _test_entry(self, parser, section: str, base_dir: Path, convention: str) -> TestEntry:
        name = section.split(':', 1)[1]
        values = self._validate(TestSectionSerializer, self._section(parser, section), section)
        sign = -1.0 if convention == 'magnitude' else 1.0
        try:
            spec = TestSpec(
                name=name,
                kind=TestKind(values['kind']),
                initial=ElementState(T1=sign * values['T1'], T2=sign * values['T2'], e=values['e']),
                e_fin=values.get('e_fin'),
                eps_fin=values.get('eps_fin'),
                n_step=values['n_step'],
            )
        except PydanticValidationError as e:
            raise ConfigurationError(f"section [{section}] invalid: {e.errors()[0]['msg']}") from e
        integration_time(spec)

        data_path = None
        if 'data' in values:
            data_path = Path(values['data'])
            if not data_path.is_absolute():
                data_path = base_dir / data_path
        return TestEntry(spec=spec, data_path=data_path)
