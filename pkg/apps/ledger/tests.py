import hashlib

from django.test import TestCase

from apps.core.exceptions import (
    ConfigurationError,
    DigestMismatch,
    DuplicateFile,
    FileNotFound,
    InvalidFileTree,
    NotInitialized,
    PermissionDenied,
)
from apps.hashslot.tables import SlotTables

from .contract import FileChannelContract
from .models import FileRecord
from .records import AccessPolicy, FileTree
from .serializers import AccessPolicySerializer


def h(label):
    return hashlib.sha256(label.encode()).hexdigest()


def make_tree(owner="alice", stripes=2, n=6, length=5000):
    return FileTree(
        stripes=[[h(f"{owner}-{s}-{i}") for i in range(n)] for s in range(stripes)],
        original_length=length,
        owner=owner,
    )


def make_tables():
    return SlotTables.build(
        {"org-a": 1000, "org-b": 500},
        {"org-a": {"a1": 1, "a2": 1}, "org-b": {"b1": 1, "b2": 1}},
    )


class FileTreeTests(TestCase):

    def test_canonical_round_trip(self):
        tree = make_tree()
        restored = FileTree.from_canonical(tree.to_canonical())
        self.assertEqual(restored, tree)
        self.assertEqual(restored.file_hash, tree.file_hash)

    def test_tampering_changes_fid(self):
        tree = make_tree()
        other = FileTree(tree.stripes, tree.original_length + 1, tree.owner)
        self.assertNotEqual(tree.file_hash, other.file_hash)
        text = tree.to_canonical().replace(tree.stripes[0][0], h("evil"))
        with self.assertRaises(DigestMismatch):
            FileTree.from_canonical(text)

    def test_empty_tree(self):
        tree = FileTree(stripes=[], original_length=0, owner="alice")
        self.assertEqual(tree.stripe_count, 0)
        self.assertEqual(FileTree.from_canonical(tree.to_canonical()), tree)

    def test_policy_canonical_round_trip(self):
        policy = AccessPolicy({"bob", "carol"}, {"mallory"}, 3)
        self.assertEqual(AccessPolicy.from_canonical(policy.to_canonical()), policy)
        self.assertEqual(AccessPolicy.from_canonical(AccessPolicy().to_canonical()), AccessPolicy())

    def test_policy_serializer_rejects_bad_identities(self):
        serializer = AccessPolicySerializer(data={"permission_list": ["bad id"], "tokens": 0})
        self.assertFalse(serializer.is_valid())
        self.assertIn("permission_list", serializer.errors)
        self.assertIn("tokens", serializer.errors)


class SlotTableLedgerTests(TestCase):

    def setUp(self):
        self.ledger = FileChannelContract()

    def test_get_before_put(self):
        with self.assertRaises(NotInitialized) as ctx:
            self.ledger.get_slot_tables()
        self.assertIn("tables not initialized", str(ctx.exception))

    def test_put_then_get_is_identical(self):
        tables = make_tables()
        self.assertEqual(self.ledger.put_slot_tables(tables), 1)
        self.assertEqual(self.ledger.get_slot_tables_text(), tables.to_canonical())

    def test_second_put_bumps_version(self):
        self.ledger.put_slot_tables(make_tables())
        newer = SlotTables.build({"org-a": 1}, {"org-a": {"a1": 1}})
        self.assertEqual(self.ledger.put_slot_tables(newer), 2)
        self.assertEqual(self.ledger.get_slot_tables().organizations, ("org-a",))

    def test_channels_are_isolated(self):
        self.ledger.put_slot_tables(make_tables())
        scratch = FileChannelContract("bench-1")
        with self.assertRaises(NotInitialized):
            scratch.get_slot_tables()


class MasterRegistrationTests(TestCase):

    def setUp(self):
        self.ledger = FileChannelContract()
        self.ledger.put_slot_tables(make_tables())

    def test_highest_bandwidth_wins(self):
        self.ledger.register_master("org-a", "a1", 800)
        self.assertEqual(self.ledger.register_master("org-a", "a2", 1200), "a2")
        self.assertEqual(self.ledger.masters(), {"org-a": "a2"})

    def test_tie_goes_to_lowest_identity(self):
        self.ledger.register_master("org-b", "b2", 1000)
        self.assertEqual(self.ledger.register_master("org-b", "b1", 1000), "b1")

    def test_reregistration_replaces(self):
        self.ledger.register_master("org-a", "a1", 2000)
        self.ledger.register_master("org-a", "a2", 1000)
        self.assertEqual(self.ledger.register_master("org-a", "a1", 500), "a2")

    def test_wrong_organization_rejected(self):
        with self.assertRaises(ConfigurationError):
            self.ledger.register_master("org-a", "b1", 1000)
        with self.assertRaises(ConfigurationError):
            self.ledger.register_master("org-z", "a1", 1000)


class FileTreeLedgerTests(TestCase):

    def setUp(self):
        self.ledger = FileChannelContract()

    def test_put_returns_recomputed_fid(self):
        tree = make_tree()
        self.assertEqual(self.ledger.put_file_tree(tree, AccessPolicy(), n=6), tree.file_hash)
        self.assertTrue(self.ledger.has_file(tree.file_hash))

    def test_duplicate_rejected(self):
        tree = make_tree()
        self.ledger.put_file_tree(tree, AccessPolicy())
        with self.assertRaises(DuplicateFile):
            self.ledger.put_file_tree(tree, AccessPolicy())

    def test_wrong_chunk_count_rejected(self):
        with self.assertRaises(InvalidFileTree):
            self.ledger.put_file_tree(make_tree(n=5), AccessPolicy(), n=6)
        self.assertEqual(FileRecord.objects.count(), 0)

    def test_unknown_fid(self):
        with self.assertRaises(FileNotFound):
            self.ledger.get_file_tree(h("nothing"), "bob")

    def test_permission_list_admits_listed(self):
        tree = make_tree()
        self.ledger.put_file_tree(tree, AccessPolicy(permission_list={"bob"}))
        self.assertEqual(self.ledger.get_file_tree(tree.file_hash, "bob").tree, tree)
        with self.assertRaises(PermissionDenied):
            self.ledger.get_file_tree(tree.file_hash, "carol")

    def test_banned_wins_over_permission(self):
        tree = make_tree()
        self.ledger.put_file_tree(tree, AccessPolicy({"bob"}, {"bob"}))
        with self.assertRaises(PermissionDenied):
            self.ledger.get_file_tree(tree.file_hash, "bob")

    def test_empty_permission_list_is_open(self):
        tree = make_tree()
        self.ledger.put_file_tree(tree, AccessPolicy(banned_list={"mallory"}))
        self.ledger.get_file_tree(tree.file_hash, "anyone")
        with self.assertRaises(PermissionDenied):
            self.ledger.get_file_tree(tree.file_hash, "mallory")

    def test_tokens_run_out(self):
        """tokens=2: two grants, the second final, then not-found."""
        tree = make_tree()
        self.ledger.put_file_tree(tree, AccessPolicy(tokens=2))
        first = self.ledger.get_file_tree(tree.file_hash, "bob")
        self.assertFalse(first.final)
        self.assertEqual(first.policy.tokens, 1)
        second = self.ledger.get_file_tree(tree.file_hash, "carol")
        self.assertTrue(second.final)
        with self.assertRaises(FileNotFound):
            self.ledger.get_file_tree(tree.file_hash, "bob")

    def test_owner_does_not_consume_tokens(self):
        tree = make_tree()
        self.ledger.put_file_tree(tree, AccessPolicy(tokens=1))
        for _ in range(3):
            self.assertFalse(self.ledger.get_file_tree(tree.file_hash, "alice").final)
        self.assertEqual(self.ledger.get_policy(tree.file_hash).tokens, 1)

    def test_drop_channel(self):
        scratch = FileChannelContract("bench-x")
        scratch.put_file_tree(make_tree(), AccessPolicy())
        scratch.drop_channel()
        self.assertEqual(FileRecord.objects.filter(channel="bench-x").count(), 0)
