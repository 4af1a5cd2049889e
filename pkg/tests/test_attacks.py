"""
Tests for Byzantine payload policies and schedules
"""
import unittest

import numpy as np

from bygrad.attacks import (AttackContext, ByzantineSchedule, ConstantVector, GaussianNoise, NoAttack,
                            OmniscientOpposite, SignFlip, byzantine_payload, from_spec, schedule_from_spec,
                            select_byzantine_set)
from bygrad.core import RngStream, Stream
from bygrad.exceptions import InvalidArgument, Unsupported


class TestPolicies(unittest.TestCase):
    """
    Test the attack policies
    """

    def setUp(self):
        self.honest = np.array([1.0, -2.0, 0.5])

    def test_signflip(self):
        """
        Test the payload is c times the honest message
        """
        payload, clipped = SignFlip(-2.0).craft(self.honest)
        self.assertTrue(np.array_equal(payload, [-2.0, 4.0, -1.0]))
        self.assertFalse(clipped)

    def test_none(self):
        """
        Test the honest message is sent unchanged
        """
        self.assertTrue(np.array_equal(NoAttack().craft(self.honest)[0], self.honest))

    def test_constant(self):
        """
        Test scalar fill and vector payloads
        """
        self.assertTrue(np.array_equal(ConstantVector(3.0).craft(self.honest)[0], [3.0, 3.0, 3.0]))
        self.assertTrue(np.array_equal(ConstantVector([1.0, 2.0, 3.0]).craft(self.honest)[0], [1.0, 2.0, 3.0]))
        with self.assertRaises(InvalidArgument):
            ConstantVector([1.0, 2.0]).craft(self.honest)

    def test_gaussian(self):
        """
        Test noise is reproducible per stream and needs one
        """
        stream = RngStream(0, (Stream.ATTACK, 1, 2))
        first, _ = GaussianNoise(2.0).craft(self.honest, rng=stream)
        second, _ = GaussianNoise(2.0).craft(self.honest, rng=stream)
        self.assertTrue(np.array_equal(first, second))
        with self.assertRaises(InvalidArgument):
            GaussianNoise(2.0).craft(self.honest)

    def test_opposite(self):
        """
        Test the omniscient policy sends the negated honest mean
        """
        context = AttackContext(t=3, device=1, honest_mean=np.array([0.5, 0.5, -1.0]))
        payload, _ = OmniscientOpposite(2.0).craft(self.honest, context)
        self.assertTrue(np.array_equal(payload, [-1.0, -1.0, 2.0]))
        with self.assertRaises(InvalidArgument):
            OmniscientOpposite().craft(self.honest)

    def test_clipping(self):
        """
        Test huge payloads are scaled down to max_norm and reported
        """
        payload, clipped = SignFlip(-1e20, max_norm=1e3).craft(self.honest)
        self.assertTrue(clipped)
        self.assertAlmostEqual(float(np.linalg.norm(payload)), 1e3, places=6)
        with self.assertLogs('bygrad.attacks.policy', level='WARNING'):
            byzantine_payload(SignFlip(-1e20, max_norm=1e3), self.honest, AttackContext(t=0, device=4))

    def test_non_finite(self):
        """
        Test infinite payloads become finite
        """
        payload, clipped = ConstantVector(np.inf).craft(self.honest)
        self.assertTrue(clipped)
        self.assertTrue(np.all(np.isfinite(payload)))


class TestFromSpec(unittest.TestCase):
    """
    Test attack config strings
    """

    def test_strings(self):
        """
        Test each config string builds its policy
        """
        self.assertEqual(from_spec('signflip').coefficient, -2.0)
        self.assertEqual(from_spec('signflip:-4').coefficient, -4.0)
        self.assertIsInstance(from_spec('none'), NoAttack)
        self.assertEqual(float(from_spec('const:0').value), 0.0)
        self.assertEqual(from_spec('gauss:0.5').scale, 0.5)
        self.assertEqual(from_spec('opposite').scale, 1.0)
        self.assertTrue(from_spec('signflip', applies_after_compression=True).applies_after_compression)
        typed = from_spec({'type': 'bygrad.attacks.SignFlip', 'coefficient': -3.0})
        self.assertEqual(typed.coefficient, -3.0)

    def test_errors(self):
        """
        Test unknown kinds and malformed arguments
        """
        with self.assertRaises(Unsupported):
            from_spec('alie')
        with self.assertRaises(InvalidArgument):
            from_spec('signflip:x')

    def test_max_norm(self):
        """
        Test the clipping norm reaches every built policy
        """
        self.assertEqual(from_spec('signflip:-1e20', max_norm=5.0).max_norm, 5.0)
        self.assertEqual(from_spec('none', max_norm=5.0).max_norm, 5.0)
        self.assertEqual(from_spec({'type': 'bygrad.attacks.GaussianNoise'}, max_norm=5.0).max_norm, 5.0)
        payload, clipped = from_spec('signflip:-1e20', max_norm=5.0).craft(np.ones(4))
        self.assertTrue(clipped)
        self.assertAlmostEqual(float(np.linalg.norm(payload)), 5.0, places=9)


class TestSchedule(unittest.TestCase):
    """
    Test ByzantineSchedule
    """

    def test_fixed_default(self):
        """
        Test the fixed schedule uses the first N - H devices every iteration
        """
        schedule = ByzantineSchedule(10, 7)
        for t in range(3):
            self.assertEqual(select_byzantine_set(schedule, t).tolist(), [0, 1, 2])

    def test_fixed_members(self):
        """
        Test explicit 1-based members
        """
        schedule = schedule_from_spec('fixed:2,5', 10, 7)
        honest, byzantine = schedule.partition(0)
        self.assertEqual(byzantine.tolist(), [1, 4])
        self.assertEqual(len(honest), 8)
        with self.assertRaises(InvalidArgument):
            schedule_from_spec('fixed:0', 10, 7)
        with self.assertRaises(InvalidArgument):
            schedule_from_spec('fixed:2,2,5', 10, 7)

    def test_resample(self):
        """
        Test the resampled set has the right size and is reproducible per iteration
        """
        schedule = schedule_from_spec('resample', 20, 15)
        root = RngStream(4)
        sets = [tuple(schedule.select(t, root).tolist()) for t in range(6)]
        self.assertTrue(all(len(members) == 5 for members in sets))
        self.assertEqual(sets[2], tuple(schedule.select(2, root).tolist()))
        self.assertGreater(len(set(sets)), 1)
        with self.assertRaises(InvalidArgument):
            schedule.select(0)

    def test_budget(self):
        """
        Test more Byzantine devices than N - H is an error
        """
        with self.assertRaises(InvalidArgument):
            ByzantineSchedule(10, 8, count=3).select(0)
        self.assertEqual(ByzantineSchedule(10, 8, count=0).select(0).tolist(), [])

    def test_unknown(self):
        """
        Test unknown schedule modes
        """
        with self.assertRaises(Unsupported):
            schedule_from_spec('adaptive', 10, 8)


if __name__ == '__main__':
    unittest.main()
