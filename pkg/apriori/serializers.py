from rest_framework import serializers

from .models import MeuSource


class MeuEntrySerializer(serializers.Serializer):
    """
    Serializer for one multi-word entity unit match.
    """

    start = serializers.IntegerField(min_value=0)
    end = serializers.IntegerField(min_value=0)
    text = serializers.CharField()
    monad = serializers.CharField(required=False, default="")
    type = serializers.CharField()
    source = serializers.ChoiceField(choices=[source.value for source in MeuSource])
    confidence = serializers.FloatField(min_value=0.0, max_value=1.0)

    def validate(self, attrs):
        if attrs["start"] >= attrs["end"]:
            raise serializers.ValidationError(
                f"'{attrs['text']}': start must precede end"
            )
        return attrs


class DepNodeSerializer(serializers.Serializer):
    id = serializers.IntegerField()
    name = serializers.CharField(allow_blank=True)
    lemma = serializers.CharField(required=False, allow_blank=True, default="")
    pos = serializers.CharField(required=False, allow_blank=True, default="")
    type = serializers.CharField(required=False, default="None")
    min = serializers.IntegerField(required=False, min_value=0, default=0)
    max = serializers.IntegerField(required=False, min_value=0, default=0)
    properties = serializers.DictField(
        child=serializers.ListField(child=serializers.CharField()),
        required=False,
        default=dict,
    )

    def validate(self, attrs):
        if attrs["min"] > attrs["max"]:
            raise serializers.ValidationError(f"node {attrs['id']}: min exceeds max")
        return attrs
