from rest_framework import serializers

from apps.ledger.serializers import IdentityField


class ClusterSectionSerializer(serializers.Serializer):
    name = IdentityField()
    chunk_size = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(required=False, default=0)


class CodeSectionSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1)
    k = serializers.IntegerField(min_value=1)
    l = serializers.IntegerField(min_value=1)  # noqa: E741
    x = serializers.IntegerField(min_value=1)
    y = serializers.IntegerField(min_value=1)


class NetworkSectionSerializer(serializers.Serializer):
    rtt_intra_ms = serializers.FloatField(min_value=0, required=False, default=1.0)
    rtt_inter_ms = serializers.FloatField(min_value=0, required=False, default=10.0)


class ClientSectionSerializer(serializers.Serializer):
    name = IdentityField(required=False, default="client")
    organization = IdentityField(required=False, allow_null=True, default=None)
    bandwidth = serializers.FloatField(min_value=0.001, required=False, default=4000)


class NodeSerializer(serializers.Serializer):
    name = IdentityField()
    bandwidth = serializers.FloatField(min_value=0.001)
    capacity = serializers.IntegerField(min_value=1)


class OrganizationSerializer(serializers.Serializer):
    name = IdentityField()
    nodes = NodeSerializer(many=True, allow_empty=False)


class ClusterFileSerializer(serializers.Serializer):
    """Schema of a cluster configuration document."""

    cluster = ClusterSectionSerializer()
    code = CodeSectionSerializer()
    network = NetworkSectionSerializer(required=False)
    client = ClientSectionSerializer(required=False)
    organizations = OrganizationSerializer(many=True, allow_empty=False)

    def validate_organizations(self, value):
        orgs = [o["name"] for o in value]
        if len(set(orgs)) != len(orgs):
            raise serializers.ValidationError("organization names must be unique")
        nodes = [n["name"] for o in value for n in o["nodes"]]
        if len(set(nodes)) != len(nodes):
            raise serializers.ValidationError("node names must be unique across organizations")
        if set(orgs) & set(nodes):
            raise serializers.ValidationError("a node cannot share its name with an organization")
        sizes = {len(o["nodes"]) for o in value}
        if len(sizes) != 1:
            raise serializers.ValidationError("every organization needs the same number of nodes")
        return value

    def validate(self, attrs):
        attrs.setdefault("network", NetworkSectionSerializer().to_internal_value({}))
        attrs.setdefault("client", ClientSectionSerializer().to_internal_value({}))
        home = attrs["client"].get("organization")
        if home is not None and home not in {o["name"] for o in attrs["organizations"]}:
            raise serializers.ValidationError(
                {"client": {"organization": [f"{home!r} is not a declared organization"]}})
        return attrs
