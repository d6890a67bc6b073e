"""
Serializers for the JSON output of the command-line frontend.

The same serializers validate JSON read back from a file. Fields rendered
through a dotted source are read-only and skipped on validation.
"""
from rest_framework import serializers

from .models import SCHEMA_VERSION

EXEMPLARS = 10


class SolverQuerySerializer(serializers.Serializer):
    """Serializer for one answered solver query."""

    kind = serializers.CharField(source='kind.value', read_only=True)
    premise = serializers.CharField()
    conclusion = serializers.CharField(allow_null=True)
    verdict = serializers.CharField()


class ProofStepSerializer(serializers.Serializer):
    """Serializer for derivation steps; solver queries only with the trace flag."""

    technique = serializers.CharField(source='technique.value', read_only=True)
    title = serializers.CharField()
    clause = serializers.CharField()
    added = serializers.ListField(child=serializers.CharField(), source='added.atoms', read_only=True)
    exact = serializers.BooleanField()
    accepted = serializers.BooleanField()
    designated = serializers.CharField(allow_null=True, required=False)
    note = serializers.CharField(allow_null=True, required=False)
    queries = SolverQuerySerializer(many=True, required=False)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        if not self.context.get('trace'):
            data.pop('queries', None)
        return data


class AccelResultSerializer(serializers.Serializer):
    """Serializer for acceleration results."""

    success = serializers.BooleanField()
    formula = serializers.CharField()
    atoms = serializers.ListField(child=serializers.CharField(), source='formula.atoms', read_only=True)
    exact = serializers.BooleanField()
    leftover = serializers.ListField(child=serializers.CharField())
    reason = serializers.CharField(allow_null=True, required=False)
    closed_form = serializers.DictField(
        child=serializers.CharField(), source='closed_form.mapping', allow_null=True, read_only=True
    )
    trace = ProofStepSerializer(many=True)


class NontermOutcomeSerializer(serializers.Serializer):
    """Serializer for certificates and failed non-termination proofs."""

    proved = serializers.BooleanField()
    formula = serializers.CharField()
    witness = serializers.DictField(child=serializers.IntegerField(), allow_null=True)
    leftover = serializers.ListField(child=serializers.CharField())
    reason = serializers.CharField(allow_null=True, required=False)
    simulated_steps = serializers.IntegerField(allow_null=True)
    trace = ProofStepSerializer(many=True)


class ViolationSerializer(serializers.Serializer):
    kind = serializers.CharField()
    state = serializers.ListField(child=serializers.IntegerField())
    n = serializers.IntegerField(allow_null=True)
    expected = serializers.BooleanField(allow_null=True)
    got = serializers.BooleanField(allow_null=True)
    detail = serializers.CharField(allow_blank=True)


class VerifyReportSerializer(serializers.Serializer):
    """Serializer for oracle reports; violations are cut to the first few exemplars."""

    kind = serializers.CharField()
    accepted = serializers.BooleanField()
    checked = serializers.IntegerField()
    exact_claimed = serializers.BooleanField()
    bounds = serializers.DictField(child=serializers.IntegerField())
    models_checked = serializers.IntegerField()
    simulated_steps = serializers.IntegerField(allow_null=True)
    soundness_count = serializers.SerializerMethodField()
    exactness_count = serializers.SerializerMethodField()
    soundness_violations = serializers.SerializerMethodField()
    exactness_violations = serializers.SerializerMethodField()

    def get_soundness_count(self, obj):
        return len(obj.soundness_violations)

    def get_exactness_count(self, obj):
        return len(obj.exactness_violations)

    def get_soundness_violations(self, obj):
        return ViolationSerializer(obj.soundness_violations[:EXEMPLARS], many=True).data

    def get_exactness_violations(self, obj):
        return ViolationSerializer(obj.exactness_violations[:EXEMPLARS], many=True).data


class VerificationSerializer(serializers.Serializer):
    acceleration = VerifyReportSerializer(source='acceleration_report', allow_null=True)
    certificate = VerifyReportSerializer(source='certificate_report', allow_null=True)


class AnalysisOutputSerializer(serializers.Serializer):
    """Serializer for the analysis of one loop."""

    schema = serializers.IntegerField()
    file = serializers.CharField()
    mode = serializers.CharField(source='mode.value', read_only=True)
    acceleration = AccelResultSerializer(allow_null=True)
    nontermination = NontermOutcomeSerializer(allow_null=True)
    verification = VerificationSerializer(source='*')
    error = serializers.CharField(allow_null=True, required=False)
    exit_code = serializers.IntegerField()

    def validate_schema(self, value):
        """Only the current schema version is understood."""
        if value != SCHEMA_VERSION:
            raise serializers.ValidationError(f"Unsupported schema version {value}")
        return value


class BatchOutputSerializer(serializers.Serializer):
    """Serializer for directory runs."""

    schema = serializers.IntegerField()
    directory = serializers.CharField()
    mode = serializers.CharField(source='mode.value', read_only=True)
    results = AnalysisOutputSerializer(many=True)
    summary = serializers.DictField(child=serializers.IntegerField())
    exit_code = serializers.IntegerField()
