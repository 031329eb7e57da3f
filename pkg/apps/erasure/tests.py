import itertools
import random

from django.test import SimpleTestCase, tag

from apps.core.constants import MB
from apps.core.digests import digest
from apps.core.exceptions import (
    ConfigurationError,
    ConstraintViolation,
    MissingStripe,
    UnrecoverableStripe,
)

from .codec import ErasureCodec
from .params import CodeParams, validate_params
from .stripes import decode_stripe, encode_file, encode_stripe, partition_file, reassemble_file

REFERENCE = dict(N=6, M=3, x=3, y=1, n=6, k=3, l=3)


def _random_chunks(rng, count, size):
    return [rng.randbytes(size) for _ in range(count)]


class CodeParamsTests(SimpleTestCase):

    def test_three_org_configuration_passes(self):
        """Six nodes in three organizations with (6,3) tolerate 3 nodes and 1 org."""
        result = validate_params(CodeParams(**REFERENCE))
        self.assertTrue(result.ok)
        self.assertEqual(result.violations, ())

    def test_too_many_node_failures_names_eq2(self):
        result = validate_params(CodeParams(**{**REFERENCE, "x": 4}))
        self.assertFalse(result.ok)
        self.assertEqual(result.equations, ["Eq. 2"])

    def test_too_many_org_failures_names_eq3(self):
        result = validate_params(CodeParams(**{**REFERENCE, "y": 2}))
        self.assertEqual(result.equations, ["Eq. 3"])

    def test_single_parameter_perturbations_name_eq1(self):
        """n beyond N, l beyond M and an over-full group all break Eq. 1."""
        self.assertIn("Eq. 1", validate_params(CodeParams(**{**REFERENCE, "n": 7, "x": 3})).equations)
        self.assertIn("Eq. 1", validate_params(CodeParams(**{**REFERENCE, "l": 4})).equations)
        self.assertIn("Eq. 1", validate_params(CodeParams(**{**REFERENCE, "l": 2})).equations)

    def test_uneven_organizations_is_configuration_error(self):
        with self.assertRaises(ConfigurationError):
            validate_params(CodeParams(**{**REFERENCE, "N": 7}))

    def test_non_positive_field_is_configuration_error(self):
        with self.assertRaises(ConfigurationError):
            validate_params(CodeParams(**{**REFERENCE, "y": 0}))

    def test_require_valid_raises_constraint_violation(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            CodeParams(**{**REFERENCE, "x": 4}).require_valid()
        self.assertIn("Eq. 2", str(ctx.exception))
        self.assertEqual(ctx.exception.exit_code, 4)

    def test_evaluation_topology_passes(self):
        self.assertTrue(validate_params(CodeParams(N=12, M=4, x=3, y=1, n=6, k=3, l=3)).ok)


class ErasureCodecTests(SimpleTestCase):

    def setUp(self):
        self.params = CodeParams(**REFERENCE)
        self.rng = random.Random(1)

    def test_encoding_is_deterministic(self):
        data = _random_chunks(self.rng, 3, 128)
        first = encode_stripe(data, self.params)
        second = encode_stripe(data, self.params)
        self.assertEqual(len(first.chunks), 6)
        self.assertEqual(first.chunk_hashes, second.chunk_hashes)

    def test_fragments_share_one_length(self):
        stripe = encode_stripe(_random_chunks(self.rng, 3, 1000), self.params)
        lengths = {c.size for c in stripe.chunks}
        self.assertEqual(len(lengths), 1)
        self.assertGreaterEqual(lengths.pop(), 1000)

    def test_unsupported_code_rejected(self):
        with self.assertRaises(ValueError):
            ErasureCodec(3, 3)

    def test_unequal_lengths_rejected(self):
        with self.assertRaises(ValueError):
            encode_stripe([b"abc", b"abcd", b"abc"], self.params)

    def test_decode_from_parity_only(self):
        data = _random_chunks(self.rng, 3, 256)
        stripe = encode_stripe(data, self.params)
        available = {i: stripe.chunks[i].data for i in (3, 4, 5)}
        self.assertEqual(decode_stripe(available, self.params), data)

    def test_below_threshold_is_unrecoverable(self):
        stripe = encode_stripe(_random_chunks(self.rng, 3, 32), self.params)
        with self.assertRaises(UnrecoverableStripe):
            decode_stripe({0: stripe.chunks[0].data, 4: stripe.chunks[4].data}, self.params)

    def test_chunk_hashes_match_content(self):
        stripe = encode_stripe(_random_chunks(self.rng, 3, 32), self.params)
        for chunk in stripe.chunks:
            self.assertEqual(chunk.hash, digest(chunk.data))
        self.assertEqual(len(stripe.stripe_hash), 64)

    def test_every_subset_of_hundred_stripes_decodes(self):
        """100 random (6,3) stripes, all 20 three-chunk subsets decode exactly."""
        subsets = list(itertools.combinations(range(6), 3))
        self.assertEqual(len(subsets), 20)
        for _ in range(100):
            data = _random_chunks(self.rng, 3, 64)
            encoded = [c.data for c in encode_stripe(data, self.params).chunks]
            for subset in subsets:
                decoded = decode_stripe({i: encoded[i] for i in subset}, self.params)
                self.assertEqual(decoded, data)

    def test_larger_code_sampled_subsets(self):
        params = CodeParams(N=12, M=4, x=4, y=1, n=12, k=8, l=4)
        data = _random_chunks(self.rng, 8, 64)
        encoded = [c.data for c in encode_stripe(data, params).chunks]
        for _ in range(30):
            subset = self.rng.sample(range(12), 8)
            self.assertEqual(decode_stripe({i: encoded[i] for i in subset}, params), data)


class PartitionTests(SimpleTestCase):

    def test_ten_megabytes_makes_four_stripes(self):
        data = bytes(range(256)) * (10 * MB // 256) + bytes(10 * MB % 256)
        partition = partition_file(data, MB, 3)
        self.assertEqual(partition.stripe_count, 4)
        last = partition.groups[-1]
        self.assertEqual(last[0], data[9 * MB:])
        self.assertEqual(last[1], bytes(MB))
        self.assertEqual(last[2], bytes(MB))

    def test_empty_file(self):
        partition = partition_file(b"", MB, 3)
        self.assertEqual(partition.groups, [])
        self.assertEqual(partition.original_length, 0)
        self.assertEqual(reassemble_file([], 0), b"")

    def test_exact_fit_has_no_padding(self):
        data = b"\x01" * (3 * 1000)
        partition = partition_file(data, 1000, 3)
        self.assertEqual(partition.stripe_count, 1)
        self.assertEqual(b"".join(partition.groups[0]), data)

    def test_padding_safety_for_every_length(self):
        params = CodeParams(**REFERENCE)
        rng = random.Random(3)
        for length in range(0, 3 * 3 * 8 + 2):
            data = rng.randbytes(length)
            stripes, original = encode_file(data, params, chunk_size=8)
            decoded = [decode_stripe({i: s.chunks[i].data for i in (1, 3, 5)}, params)
                       for s in stripes]
            self.assertEqual(reassemble_file(decoded, original), data)

    def test_missing_stripe_is_named(self):
        with self.assertRaises(MissingStripe) as ctx:
            reassemble_file({0: [b"ab"], 2: [b"cd"]}, 6, stripe_count=3)
        self.assertEqual(ctx.exception.context["stripe"], 1)

    @tag("slow")
    def test_ten_megabyte_round_trip(self):
        params = CodeParams(**REFERENCE)
        data = random.Random(10).randbytes(10 * MB)
        stripes, original = encode_file(data, params, chunk_size=MB)
        decoded = [decode_stripe({i: s.chunks[i].data for i in (2, 4, 5)}, params)
                   for s in stripes]
        self.assertEqual(digest(reassemble_file(decoded, original)), digest(data))
