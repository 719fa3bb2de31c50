import unittest
from unittest.mock import patch

from agents.audits import LemmaAuditSuite
from globals.types import IdentityCheck

AUDIT_NAMES = [
    "single_peakon_identity",
    "f_upper_bound",
    "ef_differences",
    "max_height",
    "train_identity",
    "localized_f_bound",
    "partition_consistency",
    "y_plus",
    "modulation_kernel",
]


class TestLemmaAuditSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.results = LemmaAuditSuite(42, cases=10).run()

    def test_every_audit_is_run_in_order(self):
        self.assertListEqual([result.name for result in self.results], AUDIT_NAMES)

    def test_every_audit_passes(self):
        for result in self.results:
            with self.subTest(audit=result.name):
                self.assertTrue(result.passed)
                self.assertTrue(result.asserted)
                self.assertGreaterEqual(result.margin, 0.0)

    def test_same_seed_same_margins(self):
        again = LemmaAuditSuite(42, cases=10).run()
        self.assertListEqual(
            [result.margin for result in again], [result.margin for result in self.results])

    def test_kernel_details(self):
        details = self.results[-1].details
        self.assertTrue(details["monotone"])
        self.assertEqual(details["n0"], 8)

    @patch("agents.audits.single_peakon_identity", return_value=IdentityCheck(0.0, 1.0))
    def test_failing_identity(self, _):
        result = LemmaAuditSuite(42, cases=3).audit_single_peakon_identity()

        self.assertFalse(result.passed)
        self.assertLess(result.margin, 0.0)
        self.assertEqual(result.details["max_gap"], 1.0)


if __name__ == '__main__':
    unittest.main()
