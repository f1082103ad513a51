import math
import tempfile
import unittest

import teda


X5 = dict(t1=0.017, t2=0.103, t3=0.001, t4=0.040)


class ScheduleSmoke(unittest.TestCase):
    def test_derive_schedule_x5(self):
        cfg = teda.SchedulerConfig(chunk_size=25, episode_length=120,
                                   weight_decay=0.01, action_dim=7)
        sched = teda.derive_schedule(cfg, teda.TimingModel(**X5))
        self.assertEqual(sched.dropped_per_chunk, 3)
        self.assertEqual(sched.max_predictions, 41)
        self.assertEqual(sched.buffer_cols, 143)

    def test_infeasible_schedule_raises(self):
        cfg = teda.SchedulerConfig(chunk_size=5, episode_length=120)
        with self.assertRaises(teda.InfeasibleScheduleError):
            teda.derive_schedule(cfg, teda.TimingModel(0.017, 0.5, 0.001, 0.040))

    def test_weighted_apply(self):
        blended = teda.weighted_apply([[1.0], [2.0]], [1.0, 0.5])
        self.assertAlmostEqual(blended[0], 4.0 / 3.0, places=12)
        self.assertEqual(teda.ensemble_weights(3, 0.0), [1.0, 1.0, 1.0])


class SimulationSmoke(unittest.TestCase):
    def setUp(self):
        self.cfg = teda.SchedulerConfig(chunk_size=25, episode_length=120,
                                        weight_decay=0.01, action_dim=2)
        self.tm = teda.TimingModel(**X5)
        self.policy = teda.scripted_sine_policy(action_dim=2, chunk_size=25,
                                                staleness=0.01)

    def test_per_step_costs(self):
        pipelined = teda.simulate(self.cfg, self.tm, teda.Mode.teda, self.policy)
        serial = teda.simulate(self.cfg, self.tm, teda.Mode.per_step_te, self.policy)
        self.assertAlmostEqual(pipelined["per_step_s"], 0.041, places=9)
        self.assertAlmostEqual(serial["per_step_s"], 0.161, places=9)
        self.assertEqual(len(pipelined["trajectory"]), 120)

    def test_oracle_matches_simulation(self):
        run = teda.simulate(self.cfg, self.tm, teda.Mode.teda, self.policy)
        oracle = teda.oracle_trajectory(self.cfg, self.tm, teda.Mode.teda,
                                        self.policy)
        for a, b in zip(run["trajectory"], oracle):
            for x, y in zip(a, b):
                self.assertLessEqual(abs(x - y), 1e-12)

    def test_compare_speedup(self):
        report = teda.compare(self.cfg, self.tm, self.policy)
        self.assertAlmostEqual(report["speedup_vs_per_step_te"], 0.161 / 0.041,
                               places=6)

    def test_run_episode_accounting(self):
        episode = teda.run_episode(self.cfg, self.tm, self.policy)
        self.assertEqual(episode["predictions_launched"], 41)
        self.assertEqual(episode["dropped_total"],
                         3 * (episode["predictions_committed"] - 1))

    def test_callable_policy(self):
        def predict(start):
            return [[math.sin(0.1 * (start + j))] for j in range(10)]

        cfg = teda.SchedulerConfig(chunk_size=10, episode_length=30, action_dim=1)
        policy = teda.callable_policy(predict)
        episode = teda.run_episode(cfg, teda.TimingModel(0.0, 0.01, 0.001, 0.02),
                                   policy)
        self.assertEqual(len(episode["trajectory"]), 30)


class CompressionSmoke(unittest.TestCase):
    def test_quantize_round_trip(self):
        t = teda.Tensor.vector1d([2.0, -1.0, 0.5])
        q = teda.quantize(t)
        self.assertEqual(q.data, [32767, -16384, 8192])
        back = teda.dequantize(q)
        self.assertEqual(back.data[0], 2.0)
        for a, b in zip(t.data, back.data):
            self.assertLessEqual(abs(a - b), q.scale / 2 + 1e-7)

    def test_unify_shape(self):
        plan = teda.unify_shape([480, 640, 3], "hwc_image")
        self.assertEqual(plan["nchw_shape"], [1, 3, 480, 640])
        plan = teda.unify_shape([7], "vector")
        self.assertEqual(plan["nchw_shape"], [1, 1, 1, 7])
        self.assertTrue(plan["identity"])

    def test_container_file_round_trip(self):
        t = teda.Tensor.vector1d([0.25, -0.75, 1.5])
        with tempfile.NamedTemporaryFile(suffix=".tdac") as f:
            teda.write_tensor_file(f.name, t)
            back = teda.read_tensor_file(f.name)
            self.assertEqual(list(back.data), list(t.data))
            teda.write_quantized_file(f.name, teda.quantize(t))
            q = teda.read_tensor_file(f.name)
            self.assertIsInstance(q, teda.QuantizedTensor)
            self.assertGreater(q.scale, 0.0)

    def test_accuracy_ratio(self):
        gt = [teda.Tensor.vector1d([0.0])]
        ref = [teda.Tensor.vector1d([0.1])]
        cand = [teda.Tensor.vector1d([0.2])]
        report = teda.accuracy_ratio(gt, ref, cand)
        self.assertAlmostEqual(report["ratio"], 0.25, places=9)


if __name__ == "__main__":
    unittest.main()
