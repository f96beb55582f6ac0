import re

from rest_framework import serializers

from .models import AttachTo, EntityClass, ExpansionMode, RelationKind, VerbClass


VARIABLE_RE = re.compile(r"\$\w+")


def _choices(enum) -> list[str]:
    return [member.value for member in enum]


class KbLexEntrySerializer(serializers.Serializer):
    """
    Serializer for one lexicon entry.

    Verb-only fields (``transitive``, ``semi_modal``, ``verb_class``) are
    rejected on entries of any other class.
    """

    lemma = serializers.CharField(allow_blank=False)
    surface_forms = serializers.ListField(
        child=serializers.CharField(), required=False, default=list
    )
    entity_class = serializers.ChoiceField(choices=_choices(EntityClass))
    abstract_entity = serializers.BooleanField(required=False, default=False)
    transitive = serializers.BooleanField(required=False, allow_null=True, default=None)
    semi_modal = serializers.BooleanField(required=False, default=False)
    verb_class = serializers.ChoiceField(
        choices=_choices(VerbClass), required=False, allow_null=True, default=None
    )

    def validate(self, attrs):
        if attrs["entity_class"] != EntityClass.VERB.value:
            if attrs.get("transitive") is not None or attrs.get("semi_modal"):
                raise serializers.ValidationError(
                    f"'{attrs['lemma']}': transitive/semi_modal are for verbs only"
                )
        return attrs


class LogicalRewriteRuleSerializer(serializers.Serializer):
    """
    Serializer for a logical rewrite rule.
    """

    rule_order = serializers.IntegerField(min_value=1)
    prepositions = serializers.ListField(
        child=serializers.CharField(), required=False, default=list
    )
    matched_by_source = serializers.CharField(
        required=False, allow_null=True, default=None
    )
    requires_abstract_entity = serializers.BooleanField(
        required=False, allow_null=True, default=None
    )
    requires_verb_class = serializers.ChoiceField(
        choices=_choices(VerbClass), required=False, allow_null=True, default=None
    )
    construct_name = serializers.CharField()
    construct_property = serializers.CharField()

    def validate(self, attrs):
        if not attrs["prepositions"] and not attrs.get("matched_by_source"):
            raise serializers.ValidationError(
                f"logrule/{attrs['rule_order']}: prepositions may be empty only "
                "when matched_by_source is set"
            )
        return attrs


class LogicalFunctionDefSerializer(serializers.Serializer):
    construct_name = serializers.CharField()
    construct_property = serializers.CharField()
    attach_to = serializers.ChoiceField(choices=_choices(AttachTo))
    argument = serializers.CharField()


class SemanticRelationSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=_choices(RelationKind))
    left = serializers.CharField()
    right = serializers.CharField()

    def validate(self, attrs):
        if attrs["kind"] == RelationKind.INCONSISTENT.value and (
            attrs["left"] == attrs["right"]
        ):
            raise serializers.ValidationError(
                f"INCONSISTENT self-loop on '{attrs['left']}'"
            )
        return attrs


class ExpansionRuleSerializer(serializers.Serializer):
    """
    Serializer for an expansion rule.

    Every ``$variable`` used by the rewrite template must be bound by the
    pattern.
    """

    mode = serializers.ChoiceField(choices=_choices(ExpansionMode))
    pattern = serializers.DictField()
    rewrite = serializers.DictField()

    @staticmethod
    def _variables(pattern: dict) -> set[str]:
        slots = [pattern["name"], *pattern["args"], *pattern.get("properties", {}).values()]
        found = set()
        for slot in slots:
            if isinstance(slot, str):
                found.update(VARIABLE_RE.findall(slot))
        return found

    def validate(self, attrs):
        unbound = self._variables(attrs["rewrite"]) - self._variables(attrs["pattern"])
        if unbound:
            raise serializers.ValidationError(
                f"expansion {attrs['pattern']['name']}: unbound template "
                f"variables {sorted(unbound)}"
            )
        return attrs
