from django.test import SimpleTestCase

from . import exceptions
from .digests import digest, digest_lines, is_digest, public_key


class DigestTests(SimpleTestCase):

    def test_sha256_hex(self):
        self.assertEqual(digest(b""),
                         "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855")
        self.assertTrue(is_digest(digest(b"chunk")))

    def test_is_digest_rejects_other_text(self):
        self.assertFalse(is_digest("E3B0" + "0" * 60))
        self.assertFalse(is_digest("0" * 63))
        self.assertFalse(is_digest(None))

    def test_line_digest_depends_on_order(self):
        self.assertNotEqual(digest_lines(["a", "b"]), digest_lines(["b", "a"]))
        self.assertEqual(digest_lines(["a", "b"]), digest(b"a\nb"))

    def test_public_key_is_64_bytes(self):
        self.assertEqual(len(public_key("org-1-n1")), 64)
        self.assertNotEqual(public_key("a1"), public_key("a2"))


class ExitCodeTests(SimpleTestCase):

    def test_documented_codes(self):
        expected = {
            exceptions.ConfigurationError: 3,
            exceptions.ConstraintViolation: 4,
            exceptions.FileNotFound: 5,
            exceptions.ChunkNotFound: 5,
            exceptions.PermissionDenied: 6,
            exceptions.UnrecoverableStripe: 7,
            exceptions.DigestMismatch: 7,
            exceptions.PlacementImpossible: 8,
            exceptions.WriteFailed: 9,
            exceptions.DuplicateFile: 10,
            exceptions.NotInitialized: 11,
        }
        for cls, code in expected.items():
            self.assertEqual(cls.exit_code, code, cls.__name__)
            self.assertTrue(issubclass(cls, exceptions.DBNodeError))

    def test_context_is_kept(self):
        error = exceptions.FileNotFound("gone", fid="abc")
        self.assertEqual(error.context, {"fid": "abc"})
        self.assertEqual(str(error), "gone")
