from rest_framework import serializers

from reason.models import Verdict


class SentenceSerializer(serializers.Serializer):
    text = serializers.CharField()
    formula = serializers.CharField(required=False, default=None)
    graph = serializers.CharField(required=False, default=None)

    def validate(self, attrs):
        if attrs["formula"] is None and attrs["graph"] is None:
            raise serializers.ValidationError(
                f"'{attrs['text']}': needs a formula or a dependency graph"
            )
        return attrs


class DatasetSerializer(serializers.Serializer):
    """
    Serializer for a sentence dataset with its expected clusters and pair classes.
    """

    name = serializers.CharField(required=False, default="")
    sentences = SentenceSerializer(many=True)
    expected_clusters = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=1)
    )
    expected_pairs = serializers.DictField(
        child=serializers.ListField(
            child=serializers.ListField(
                child=serializers.IntegerField(min_value=0), min_length=2, max_length=2
            )
        ),
        required=False,
        default=dict,
    )

    def validate_expected_pairs(self, value):
        known = {verdict.value for verdict in Verdict}
        for key in value:
            if key not in known:
                raise serializers.ValidationError(f"unknown class '{key}'")
        return value

    def validate(self, attrs):
        n = len(attrs["sentences"])
        members = [index for cluster in attrs["expected_clusters"] for index in cluster]
        if sorted(members) != list(range(n)):
            raise serializers.ValidationError(
                {"expected_clusters": f"must partition the {n} sentence indices"}
            )
        seen = {}
        for verdict, pairs in attrs["expected_pairs"].items():
            for i, j in pairs:
                if i >= n or j >= n:
                    raise serializers.ValidationError(
                        {"expected_pairs": f"pair ({i}, {j}) outside {n} sentences"}
                    )
                if (i, j) in seen:
                    raise serializers.ValidationError(
                        {"expected_pairs": f"pair ({i}, {j}) is both {seen[i, j]} and {verdict}"}
                    )
                seen[i, j] = verdict
        return attrs
