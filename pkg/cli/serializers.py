from rest_framework import serializers


class RunManifestSerializer(serializers.Serializer):
    command = serializers.CharField()
    version = serializers.CharField()
    created_at = serializers.CharField()
    config_digest = serializers.CharField()
    duration_seconds = serializers.FloatField()
    workers = serializers.IntegerField()
    sweep_param = serializers.CharField(allow_null=True)
    sweep_values = serializers.ListField(child=serializers.FloatField())
    outputs = serializers.DictField(child=serializers.CharField())
