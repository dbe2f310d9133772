import math

from pydantic import ValidationError as PydanticValidationError
from rest_framework import serializers

from .services.element_tests import TestKind
from .services.hypoplasticity import REFERENCE_SOILS, HypoParams

PARAMETER_FIELDS = ('phi_c', 'h_s', 'n', 'e_d0', 'e_c0', 'e_i0', 'alpha', 'beta')
BOUND_FIELDS = ('phi_c', 'h_s', 'n', 'e_c0', 'alpha', 'beta')


def _pydantic_errors(exc: PydanticValidationError) -> list[str]:
    return [f"{'.'.join(str(p) for p in err['loc']) or 'value'}: {err['msg']}" for err in exc.errors()]


class RangeField(serializers.Field):
    """A "min, max" pair of floats."""

    default_error_messages = {
        'invalid': 'Expected "min, max", got {value!r}.',
        'order': 'Lower bound {low} is not below upper bound {high}.',
    }

    def to_internal_value(self, data):
        parts = [part.strip() for part in str(data).split(',')]
        if len(parts) != 2:
            self.fail('invalid', value=data)
        try:
            low, high = float(parts[0]), float(parts[1])
        except ValueError:
            self.fail('invalid', value=data)
        if not low < high:
            self.fail('order', low=low, high=high)
        return low, high

    def to_representation(self, value):
        return f"{value[0]}, {value[1]}"


class RunSectionSerializer(serializers.Serializer):
    stress_convention = serializers.ChoiceField(choices=['signed', 'magnitude'], default='signed')


class ParamsSectionSerializer(serializers.Serializer):
    """Material parameters: a named preset or all eight values (phi_c in degrees, h_s in kPa)."""

    preset = serializers.CharField(required=False)
    phi_c = serializers.FloatField(required=False)
    h_s = serializers.FloatField(required=False)
    n = serializers.FloatField(required=False)
    e_d0 = serializers.FloatField(required=False)
    e_c0 = serializers.FloatField(required=False)
    e_i0 = serializers.FloatField(required=False)
    alpha = serializers.FloatField(required=False)
    beta = serializers.FloatField(required=False)

    def validate(self, attrs):
        preset = attrs.get('preset')
        values = {name: attrs[name] for name in PARAMETER_FIELDS if name in attrs}
        if preset is not None:
            if values:
                raise serializers.ValidationError("give either a preset or explicit values, not both")
            if preset not in REFERENCE_SOILS:
                raise serializers.ValidationError(
                    f"unknown preset {preset!r}; choose from {', '.join(sorted(REFERENCE_SOILS))}"
                )
            return {'params': REFERENCE_SOILS[preset]}

        missing = [name for name in PARAMETER_FIELDS if name not in values]
        if missing:
            raise serializers.ValidationError(f"missing parameters: {', '.join(missing)}")
        try:
            params = HypoParams.from_degrees(**values)
        except PydanticValidationError as e:
            raise serializers.ValidationError(_pydantic_errors(e)) from e
        return {'params': params}


class GaSectionSerializer(serializers.Serializer):
    n_individuals = serializers.IntegerField(default=500, min_value=2)
    n_iterations = serializers.IntegerField(default=20, min_value=0)
    elite_fraction = serializers.FloatField(default=0.01, min_value=0.0, max_value=1.0)
    mating_fraction = serializers.FloatField(default=0.50, min_value=0.0, max_value=1.0)
    mutation_start = serializers.FloatField(default=0.5, min_value=0.0, max_value=1.0)
    mutation_end = serializers.FloatField(default=0.1, min_value=0.0, max_value=1.0)
    lambda_d = serializers.FloatField(default=0.60)
    lambda_i = serializers.FloatField(default=1.20)
    w1 = serializers.FloatField(default=1.0, min_value=0.0)
    w2 = serializers.FloatField(default=1.0, min_value=0.0)
    w3 = serializers.FloatField(default=1.0, min_value=0.0)
    seed = serializers.IntegerField(required=False, min_value=0)


class BoundsSectionSerializer(serializers.Serializer):
    """Search box in display units (phi_c in degrees, h_s in kPa)."""

    phi_c = RangeField(default=(25.0, 40.0))
    h_s = RangeField(default=(1.0e6, 9.0e6))
    n = RangeField(default=(0.25, 0.40))
    e_c0 = RangeField(default=(0.6, 1.1))
    alpha = RangeField(default=(0.05, 0.20))
    beta = RangeField(default=(1.0, 2.0))


class TestSectionSerializer(serializers.Serializer):
    __test__ = False

    kind = serializers.ChoiceField(choices=[kind.value for kind in TestKind])
    T1 = serializers.FloatField()
    T2 = serializers.FloatField()
    e = serializers.FloatField(min_value=0.0)
    e_fin = serializers.FloatField(required=False)
    eps_fin = serializers.FloatField(required=False, min_value=0.0)
    n_step = serializers.IntegerField(default=100, min_value=1)
    data = serializers.CharField(required=False)

    def validate(self, attrs):
        if attrs['kind'] == TestKind.OEDOMETER.value:
            if 'e_fin' not in attrs:
                raise serializers.ValidationError("oedometer tests need e_fin")
            if attrs['e_fin'] > attrs['e']:
                raise serializers.ValidationError("e_fin must not exceed the initial void ratio")
        elif 'eps_fin' not in attrs:
            raise serializers.ValidationError("triaxial tests need eps_fin")
        return attrs


def finite_or_none(value):
    """JSON-safe float: infinities and NaN become null."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class ParameterSetSerializer(serializers.Serializer):
    """Eight-parameter set in display units."""

    phi_c_deg = serializers.FloatField()
    h_s_kPa = serializers.FloatField()
    n = serializers.FloatField()
    e_d0 = serializers.FloatField()
    e_c0 = serializers.FloatField()
    e_i0 = serializers.FloatField()
    alpha = serializers.FloatField()
    beta = serializers.FloatField()

    @staticmethod
    def from_params(params: HypoParams) -> dict:
        return {
            'phi_c_deg': params.phi_c_deg,
            'h_s_kPa': params.h_s,
            'n': params.n,
            'e_d0': params.e_d0,
            'e_c0': params.e_c0,
            'e_i0': params.e_i0,
            'alpha': params.alpha,
            'beta': params.beta,
        }


class IterationSerializer(serializers.Serializer):
    iteration = serializers.IntegerField()
    best_cost = serializers.FloatField(allow_null=True)
    mean_cost = serializers.FloatField(allow_null=True)
    worst_cost = serializers.FloatField(allow_null=True)
    n_feasible = serializers.IntegerField()


class ReferenceSerializer(serializers.Serializer):
    name = serializers.CharField()
    parameters = ParameterSetSerializer()
    cost = serializers.FloatField(allow_null=True)


class CalibrationReportSerializer(serializers.Serializer):
    mode = serializers.CharField()
    seed = serializers.IntegerField()
    feasible = serializers.BooleanField()
    parameters = ParameterSetSerializer()
    lambda_d = serializers.FloatField()
    lambda_i = serializers.FloatField()
    cost = serializers.FloatField(allow_null=True)
    deltas = serializers.DictField(child=serializers.FloatField(allow_null=True))
    history = IterationSerializer(many=True)
    references = ReferenceSerializer(many=True)


class RegressionSerializer(serializers.Serializer):
    x = serializers.CharField()
    y = serializers.CharField()
    slope = serializers.FloatField()
    intercept = serializers.FloatField()
    r = serializers.FloatField()


class TrialFailureSerializer(serializers.Serializer):
    trial = serializers.IntegerField()
    seed = serializers.IntegerField()
    reason = serializers.CharField()


class EnsembleReportSerializer(serializers.Serializer):
    mode = serializers.CharField()
    n_trials = serializers.IntegerField()
    n_succeeded = serializers.IntegerField()
    failures = TrialFailureSerializer(many=True)
    summary = serializers.DictField(child=serializers.DictField(child=serializers.FloatField(allow_null=True)))
    pearson = serializers.DictField(
        child=serializers.DictField(child=serializers.FloatField()), allow_null=True
    )
    regressions = RegressionSerializer(many=True)


class ValidationReportSerializer(serializers.Serializer):
    mode = serializers.CharField()
    parameters = ParameterSetSerializer()
    convergence = serializers.DictField(
        child=serializers.DictField(child=serializers.ListField(child=serializers.FloatField(allow_null=True)))
    )
    max_T2_residual = serializers.FloatField()
    max_T2_drift = serializers.FloatField()
    clamped_steps = serializers.DictField(child=serializers.IntegerField())
