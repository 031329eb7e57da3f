from rest_framework import serializers

from apps.core.digests import is_digest


class IdentityField(serializers.RegexField):
    def __init__(self, **kwargs):
        super().__init__(r"^[^\s,]+$", max_length=128, **kwargs)


class AccessPolicySerializer(serializers.Serializer):
    permission_list = serializers.ListField(child=IdentityField(), required=False, default=list)
    banned_list = serializers.ListField(child=IdentityField(), required=False, default=list)
    tokens = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)


class FileTreeSerializer(serializers.Serializer):
    """Schema check of a file tree against the consortium's (n, k) code."""

    fid = serializers.CharField(min_length=64, max_length=64)
    owner = IdentityField()
    original_length = serializers.IntegerField(min_value=0)
    stripes = serializers.ListField(child=serializers.ListField(child=serializers.CharField()))

    def validate_stripes(self, value):
        n = self.context.get("n")
        for index, chunks in enumerate(value):
            if n is not None and len(chunks) != n:
                raise serializers.ValidationError(
                    f"stripe {index} lists {len(chunks)} chunk hashes, the code needs {n}")
            bad = [h for h in chunks if not is_digest(h)]
            if bad:
                raise serializers.ValidationError(f"stripe {index} has malformed hash {bad[0]!r}")
        return value

    def validate(self, attrs):
        chunk_size = self.context.get("chunk_size")
        k = self.context.get("k")
        if chunk_size and k:
            capacity = len(attrs["stripes"]) * k * chunk_size
            if attrs["original_length"] > capacity:
                raise serializers.ValidationError(
                    f"{attrs['original_length']} bytes do not fit in {len(attrs['stripes'])} stripes")
        return attrs
