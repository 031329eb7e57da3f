import hashlib
import random

from django.test import SimpleTestCase

from apps.core.exceptions import ConfigurationError

from .slots import SLOT_COUNT, crc_slot, intra_slot_of, slot_of
from .tables import SlotTables, allocate_inter, allocate_intra, apportion, node_for, org_for

STEPPED = {"org-0": 400, "org-1": 800, "org-2": 1200, "org-3": 1600}


def _hash_where(predicate):
    for i in range(2_000_000):
        candidate = hashlib.sha256(f"sample-{i}".encode()).hexdigest()
        if predicate(candidate):
            return candidate
    raise AssertionError("no sample hash satisfies the predicate")


def _hash_with_slot(slot):
    return _hash_where(lambda c: slot_of(c) == slot)


class SlotOfTests(SimpleTestCase):

    def test_crc16_check_value(self):
        """CRC-16/XMODEM("123456789") is 0x31C3."""
        self.assertEqual(crc_slot(b"123456789"), 0x31C3)
        self.assertEqual(crc_slot(b"123456789"), 12739)

    def test_deterministic(self):
        h = hashlib.sha256(b"chunk").hexdigest()
        self.assertEqual(slot_of(h), slot_of(h))
        self.assertTrue(0 <= slot_of(h) < SLOT_COUNT)

    def test_malformed_hash_rejected(self):
        for bad in ("123456789", "Z" * 64, hashlib.sha256(b"x").hexdigest().upper()):
            with self.assertRaises(ValueError):
                slot_of(bad)


class AllocationTests(SimpleTestCase):

    def test_stepped_bandwidths(self):
        table = allocate_inter(STEPPED)
        self.assertEqual(list(table.counts), [1638, 3277, 4915, 6554])
        self.assertEqual(sum(table.counts), SLOT_COUNT)

    def test_single_org_gets_everything(self):
        table = allocate_inter({"only": 10})
        self.assertEqual(table.slot_counts(), {"only": SLOT_COUNT})

    def test_equal_bandwidths_split_evenly(self):
        table = allocate_inter({f"org-{i}": 1000 for i in range(4)})
        self.assertEqual(set(table.counts), {4096})

    def test_intra_symmetric_and_quarters(self):
        self.assertEqual(list(allocate_intra({"a": 5, "b": 5}).counts), [8192, 8192])
        self.assertEqual(list(allocate_intra({"a": 1, "b": 3}).counts), [4096, 12288])

    def test_remainder_goes_to_lowest_identity(self):
        table = allocate_intra({"n-c": 1, "n-a": 1, "n-b": 1})
        self.assertEqual(table.slot_counts(), {"n-a": 5462, "n-b": 5461, "n-c": 5461})

    def test_non_positive_weight_rejected(self):
        with self.assertRaises(ConfigurationError):
            allocate_inter({"a": 0, "b": 1})
        with self.assertRaises(ConfigurationError):
            allocate_intra({"a": -5})
        with self.assertRaises(ConfigurationError):
            allocate_inter({})

    def test_random_weight_vectors_sum_to_slot_count(self):
        rng = random.Random(42)
        for _ in range(1000):
            weights = {f"t{i}": rng.randint(1, 10_000) for i in range(rng.randint(1, 12))}
            self.assertEqual(sum(apportion(weights).values()), SLOT_COUNT)

    def test_raising_one_weight_never_loses_slots(self):
        rng = random.Random(9)
        for _ in range(300):
            weights = {f"t{i}": rng.randint(1, 500) for i in range(rng.randint(2, 8))}
            target = rng.choice(sorted(weights))
            before = apportion(weights)[target]
            weights[target] += rng.randint(1, 200)
            self.assertGreaterEqual(apportion(weights)[target], before)

    def test_ranges_are_contiguous_in_identity_order(self):
        table = allocate_inter(STEPPED)
        self.assertEqual(list(table.ranges()), [
            ("org-0", 0, 1637),
            ("org-1", 1638, 4914),
            ("org-2", 4915, 9829),
            ("org-3", 9830, 16383),
        ])
        self.assertEqual(len(table.assignments), SLOT_COUNT)


class LookupTests(SimpleTestCase):

    def test_single_org_lookup(self):
        table = allocate_inter({"solo": 1})
        self.assertEqual(org_for(hashlib.sha256(b"x").hexdigest(), table), "solo")

    def test_slot_12739_lands_in_last_stepped_org(self):
        table = allocate_inter(STEPPED)
        self.assertEqual(table.target_at(12739), "org-3")
        self.assertEqual(org_for(_hash_with_slot(12739), table), "org-3")

    def test_rebuild_is_stable(self):
        h = hashlib.sha256(b"stable").hexdigest()
        self.assertEqual(org_for(h, allocate_inter(STEPPED)), org_for(h, allocate_inter(dict(STEPPED))))

    def test_uniform_spread(self):
        table = allocate_inter(STEPPED)
        rng = random.Random(5)
        observed = {org: 0 for org in STEPPED}
        for _ in range(10_000):
            observed[org_for(rng.randbytes(32).hex(), table)] += 1
        for org, count in table.slot_counts().items():
            self.assertLess(abs(observed[org] / 10_000 - count / SLOT_COUNT), 0.05)

    def test_node_for_uses_intra_table(self):
        table = allocate_intra({"p1": 1, "p2": 1}, "org-a")
        h = _hash_where(lambda c: intra_slot_of(c, "org-a") == 100)
        self.assertEqual(node_for(h, table), "p1")
        self.assertEqual(table.organization, "org-a")
        self.assertEqual(table.slot_for(h), 100)

    def test_intra_slot_is_independent_of_inter_slot(self):
        # every chunk of one inter range must still reach every node of the org
        table = allocate_intra({"p1": 1, "p2": 1}, "org-a")
        rng = random.Random(11)
        seen = set()
        for _ in range(2_000):
            h = rng.randbytes(32).hex()
            if slot_of(h) < SLOT_COUNT // 4:
                seen.add(node_for(h, table))
        self.assertEqual(seen, {"p1", "p2"})
        h = hashlib.sha256(b"x").hexdigest()
        self.assertNotEqual(intra_slot_of(h, "org-a"), intra_slot_of(h, "org-b"))


class CanonicalTextTests(SimpleTestCase):

    def setUp(self):
        self.tables = SlotTables.build(
            {"org-a": 1000, "org-b": 400.5},
            {"org-a": {"a1": 100, "a2": 300}, "org-b": {"b1": 1, "b2": 1}},
        )

    def test_import_of_export_is_byte_identical(self):
        text = self.tables.to_canonical()
        restored = SlotTables.from_canonical(text)
        self.assertEqual(restored.to_canonical(), text)
        self.assertEqual(restored.inter.counts, self.tables.inter.counts)
        self.assertEqual(restored.intra["org-b"].targets, ("b1", "b2"))

    def test_designate_composes_layers(self):
        # org-a holds inter slot 0; a1 holds the first quarter of org-a's intra slots
        h = _hash_where(lambda c: slot_of(c) < 100 and intra_slot_of(c, "org-a") < 4096)
        self.assertEqual(self.tables.designate(h), ("org-a", "a1"))
        h = _hash_where(lambda c: slot_of(c) < 100 and intra_slot_of(c, "org-a") >= 4096)
        self.assertEqual(self.tables.designate(h), ("org-a", "a2"))
        self.assertEqual(self.tables.org_of_node("b2"), "org-b")

    def test_malformed_text_rejected(self):
        with self.assertRaises(ConfigurationError):
            SlotTables.from_canonical("table inter\norg-a 1 0\n")
        with self.assertRaises(ConfigurationError):
            SlotTables.from_canonical("table inter\norg-a 1 0 100\n")

    def test_mismatched_layers_rejected(self):
        with self.assertRaises(ConfigurationError):
            SlotTables.build({"a": 1}, {"b": {"n": 1}})


class DesignationShareTests(SimpleTestCase):

    def test_every_node_receives_its_capacity_share(self):
        tables = SlotTables.build(
            {"org-a": 1, "org-b": 1, "org-c": 1},
            {
                "org-a": {"a1": 1, "a2": 3},
                "org-b": {"b1": 1, "b2": 1},
                "org-c": {"c1": 2, "c2": 1, "c3": 1},
            },
        )
        rng = random.Random(23)
        trials = 12_000
        observed = {}
        for _ in range(trials):
            org, node = tables.designate(rng.randbytes(32).hex())
            observed[node] = observed.get(node, 0) + 1

        for org in tables.organizations:
            intra = tables.intra[org]
            org_share = tables.inter.slot_counts()[org] / SLOT_COUNT
            for node, count in intra.slot_counts().items():
                expected = org_share * count / SLOT_COUNT
                self.assertGreater(observed.get(node, 0), 0, node)
                self.assertLess(abs(observed.get(node, 0) / trials - expected), 0.02, node)
