# apps/ledger/contract.py
"""
The file channel contract.

A single logical service holding slot tables, master registrations, file
trees and their access policies. Every mutation runs in a transaction, and
the token decrement takes a row lock so the grant and the decrement are one
step.
"""
import logging

from django.db import transaction
from django.db.models import Max

from apps.core.constants import DEFAULT_CHANNEL
from apps.core.exceptions import (
    ConfigurationError,
    DuplicateFile,
    FileNotFound,
    InvalidFileTree,
    NotInitialized,
    PermissionDenied,
)
from apps.hashslot.tables import SlotTables

from .models import FileRecord, MasterRegistration, SlotTableVersion
from .records import AccessPolicy, FileTree, Grant
from .serializers import FileTreeSerializer

logger = logging.getLogger(__name__)


class FileChannelContract:

    def __init__(self, channel: str = DEFAULT_CHANNEL):
        self.channel = channel

    # -- slot tables -------------------------------------------------------

    @transaction.atomic
    def put_slot_tables(self, tables: SlotTables) -> int:
        latest = (SlotTableVersion.objects.filter(channel=self.channel)
                  .aggregate(v=Max("version"))["v"] or 0)
        row = SlotTableVersion.objects.create(
            channel=self.channel, version=latest + 1, canonical_text=tables.to_canonical())
        logger.info("Slot tables v%d published on %s", row.version, self.channel)
        return row.version

    def get_slot_tables_text(self) -> str:
        row = SlotTableVersion.objects.filter(channel=self.channel).order_by("-version").first()
        if row is None:
            raise NotInitialized("tables not initialized", channel=self.channel)
        return row.canonical_text

    def get_slot_tables(self) -> SlotTables:
        return SlotTables.from_canonical(self.get_slot_tables_text())

    def slot_tables_version(self) -> int:
        return (SlotTableVersion.objects.filter(channel=self.channel)
                .aggregate(v=Max("version"))["v"] or 0)

    # -- masters -----------------------------------------------------------

    @transaction.atomic
    def register_master(self, organization: str, node: str, bandwidth: float) -> str:
        """Record a master bid and return the organization's elected master."""
        tables = self.get_slot_tables()
        if organization not in tables.intra:
            raise ConfigurationError(f"unknown organization {organization!r}",
                                     organization=organization)
        if node not in tables.nodes_of(organization):
            raise ConfigurationError(f"{node!r} is not a node of {organization!r}",
                                     organization=organization, node=node)
        if bandwidth <= 0:
            raise ConfigurationError(f"master bandwidth must be positive, got {bandwidth}")

        MasterRegistration.objects.update_or_create(
            channel=self.channel, organization=organization, node=node,
            defaults={"bandwidth": bandwidth},
        )
        master = self.master_of(organization)
        logger.info("Master of %s is %s", organization, master)
        return master

    def master_of(self, organization: str) -> str | None:
        row = (MasterRegistration.objects
               .filter(channel=self.channel, organization=organization)
               .order_by("-bandwidth", "node").first())
        return row.node if row else None

    def masters(self) -> dict:
        elected = {}
        for row in MasterRegistration.objects.filter(channel=self.channel).order_by(
                "organization", "-bandwidth", "node"):
            elected.setdefault(row.organization, row.node)
        return elected

    # -- files -------------------------------------------------------------

    def has_file(self, fid: str) -> bool:
        return FileRecord.objects.filter(channel=self.channel, fid=fid).exists()

    @transaction.atomic
    def put_file_tree(self, tree: FileTree, policy: AccessPolicy, n: int | None = None,
                      k: int | None = None, chunk_size: int | None = None) -> str:
        serializer = FileTreeSerializer(
            data=tree.as_dict(), context={"n": n, "k": k, "chunk_size": chunk_size})
        if not serializer.is_valid():
            raise InvalidFileTree(f"file tree rejected: {serializer.errors}",
                                  errors=serializer.errors)

        fid = tree.file_hash
        if self.has_file(fid):
            raise DuplicateFile(f"file {fid} is already on the ledger", fid=fid)
        FileRecord.objects.create(
            channel=self.channel,
            fid=fid,
            owner=tree.owner,
            original_length=tree.original_length,
            stripe_count=tree.stripe_count,
            tree_text=tree.to_canonical(),
            permission_list=sorted(policy.permission_list),
            banned_list=sorted(policy.banned_list),
            tokens=policy.tokens,
        )
        logger.info("File %s recorded (%d stripes, owner %s)", fid[:12], tree.stripe_count, tree.owner)
        return fid

    @transaction.atomic
    def get_file_tree(self, fid: str, requester: str) -> Grant:
        record = (FileRecord.objects.select_for_update()
                  .filter(channel=self.channel, fid=fid).first())
        if record is None:
            raise FileNotFound(f"file {fid} not found", fid=fid)

        tree = FileTree.from_canonical(record.tree_text)
        policy = self._policy(record)
        if requester == record.owner:
            return Grant(tree, policy)

        if not policy.admits(requester) or record.tokens == 0:
            logger.warning("Access to %s denied for %s", fid[:12], requester)
            raise PermissionDenied(f"{requester} may not read {fid}", fid=fid, requester=requester)

        if record.tokens is None:
            return Grant(tree, policy)

        record.tokens -= 1
        if record.tokens == 0:
            record.delete()
            logger.info("Tokens of %s exhausted; record removed", fid[:12])
            return Grant(tree, AccessPolicy(policy.permission_list, policy.banned_list, 0), final=True)
        record.save(update_fields=["tokens"])
        return Grant(tree, AccessPolicy(policy.permission_list, policy.banned_list, record.tokens))

    def get_policy(self, fid: str) -> AccessPolicy:
        record = FileRecord.objects.filter(channel=self.channel, fid=fid).first()
        if record is None:
            raise FileNotFound(f"file {fid} not found", fid=fid)
        return self._policy(record)

    @transaction.atomic
    def delete_file(self, fid: str) -> bool:
        deleted, _ = FileRecord.objects.filter(channel=self.channel, fid=fid).delete()
        return bool(deleted)

    def file_ids(self) -> list[str]:
        return list(FileRecord.objects.filter(channel=self.channel)
                    .order_by("created_at", "id").values_list("fid", flat=True))

    @transaction.atomic
    def drop_channel(self) -> None:
        for model in (SlotTableVersion, MasterRegistration, FileRecord):
            model.objects.filter(channel=self.channel).delete()

    @staticmethod
    def _policy(record: FileRecord) -> AccessPolicy:
        return AccessPolicy(record.permission_list, record.banned_list, record.tokens)
