import struct
import time

import numpy as np
import pytest

from config.settings import SKETCH_SETTINGS
from grouper_model import HyperParams, init_params
from grouping_inference import baseline_proximity, group
from metrics import pri
from shared.errors import (CheckpointIntegrityError, CheckpointVersionError, ConfigurationError,
                           ContractError, ValidationError)
from stroke_core import gen_dataset, to_group_matrix
from trainer import (AdamState, Checkpoint, TrainConfig, TrainState, adam_update,
                     clip_by_global_norm, dumps_checkpoint, fit, learning_rate, load_checkpoint,
                     loads_checkpoint, save_checkpoint, train_step)


def _config(**overrides):
    values = dict(iters=3, batch=2, checkpoint_every=0, log_every=1, seed=5)
    values.update(overrides)
    return TrainConfig.from_dict(values)


@pytest.fixture
def dataset():
    return gen_dataset(4, jitter=0.05, rng=np.random.default_rng(2))


class TestOptimizer:
    def test_adam_minimizes_quadratic(self):
        params = {"x": np.array([3.0, -2.0])}
        state = AdamState.zeros_like(params)
        for _ in range(200):
            grads = {"x": 2.0 * params["x"]}
            params, state = adam_update(params, grads, state, 0.05, 0.5, 0.9, 1e-8)
        assert state.step == 200
        assert np.all(np.abs(params["x"]) < 0.1)

    def test_update_does_not_mutate_input(self):
        params = {"x": np.array([1.0])}
        state = AdamState.zeros_like(params)
        adam_update(params, {"x": np.array([1.0])}, state, 0.1, 0.5, 0.9, 1e-8)
        assert params["x"][0] == 1.0
        assert state.step == 0
        assert state.m["x"][0] == 0.0

    def test_first_step_moves_by_lr(self):
        params, _ = adam_update({"x": np.array([0.0])}, {"x": np.array([4.0])},
                                AdamState.zeros_like({"x": np.zeros(1)}), 0.01, 0.5, 0.9, 1e-8)
        assert params["x"][0] == pytest.approx(-0.01, rel=1e-6)

    def test_learning_rate_schedule(self):
        assert learning_rate(1e-3, 0.5, 0) == 1e-3
        assert learning_rate(1e-3, 0.5, 3) == pytest.approx(1.25e-4)

    def test_clipping(self):
        grads = {"a": np.array([3.0]), "b": np.array([4.0])}
        clipped, norm = clip_by_global_norm(grads, 1.0)
        assert norm == pytest.approx(5.0)
        assert clipped["a"][0] == pytest.approx(0.6)
        assert clipped["b"][0] == pytest.approx(0.8)

    def test_no_clipping_below_norm_or_disabled(self):
        grads = {"a": np.array([3.0]), "b": np.array([4.0])}
        assert clip_by_global_norm(grads, 10.0)[0]["a"][0] == 3.0
        assert clip_by_global_norm(grads, 0.0)[0]["b"][0] == 4.0


class TestCheckpoint:
    @pytest.fixture
    def checkpoint(self, tiny_params):
        rng = np.random.default_rng(0)
        adam = AdamState({n: rng.normal(size=a.shape) for n, a in tiny_params.items()},
                         {n: rng.random(a.shape) for n, a in tiny_params.items()}, 17)
        return Checkpoint(tiny_params, adam, {"lr0": 0.001})

    def test_round_trip_is_bit_exact(self, checkpoint, tmp_path):
        path = str(tmp_path / "model.ckpt")
        save_checkpoint(checkpoint, path)
        loaded = load_checkpoint(path)
        assert loaded.hyper == checkpoint.hyper
        assert loaded.step == 17
        assert loaded.config == {"lr0": 0.001}
        for name, array in checkpoint.params.items():
            assert np.array_equal(loaded.params[name], array)
            assert np.array_equal(loaded.adam.m[name], checkpoint.adam.m[name])
            assert np.array_equal(loaded.adam.v[name], checkpoint.adam.v[name])
        assert dumps_checkpoint(loaded) == dumps_checkpoint(checkpoint)

    def test_truncated(self, checkpoint):
        data = dumps_checkpoint(checkpoint)
        with pytest.raises(CheckpointIntegrityError):
            loads_checkpoint(data[:len(data) // 2])

    def test_flipped_byte(self, checkpoint):
        data = bytearray(dumps_checkpoint(checkpoint))
        data[-100] ^= 0xFF
        with pytest.raises(CheckpointIntegrityError):
            loads_checkpoint(bytes(data))

    def test_bad_magic(self, checkpoint):
        data = dumps_checkpoint(checkpoint)
        with pytest.raises(CheckpointIntegrityError):
            loads_checkpoint(b"NOTACKPT" + data[8:])

    def test_future_version(self, checkpoint):
        data = bytearray(dumps_checkpoint(checkpoint))
        data[8:12] = struct.pack("<I", 2)
        with pytest.raises(CheckpointVersionError):
            loads_checkpoint(bytes(data))


class TestTrainConfig:
    def test_defaults(self):
        config = TrainConfig()
        assert (config.beta1, config.beta2) == (0.5, 0.9)
        assert config.augment_params == {"removal_prob": 0.05, "distort_scale": 0.05}

    def test_unknown_option(self):
        with pytest.raises(ConfigurationError):
            TrainConfig.from_dict({"learning_rate": 0.1})

    @pytest.mark.parametrize("overrides", [
        {"lr0": 0.0}, {"decay": 1.5}, {"beta1": 1.0}, {"batch": 0}, {"iters": -1}, {"clip_norm": -1.0}
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ConfigurationError):
            TrainConfig.from_dict(overrides)

    def test_to_dict_round_trip(self):
        config = _config()
        assert TrainConfig.from_dict(config.to_dict()) == config


class TestTrainStep:
    def test_step_updates_state(self, tiny_hyper, dataset):
        state = TrainState.initial(tiny_hyper, 0)
        before = dict(state.params.items())
        state, loss, breakdown = train_step(dataset[:2], state, _config())
        assert np.isfinite(loss)
        assert state.adam.step == 1
        assert breakdown["lr"] == pytest.approx(TrainConfig().lr0)
        assert set(breakdown) >= {"L_A", "L_G", "L_R", "L_KL", "degenerate", "grad_norm"}
        assert any(not np.array_equal(before[n], state.params[n]) for n in before)

    def test_empty_batch(self, tiny_hyper):
        with pytest.raises(ContractError):
            train_step([], TrainState.initial(tiny_hyper, 0), _config())


class TestFit:
    def test_empty_dataset(self, tiny_hyper):
        with pytest.raises(ConfigurationError):
            fit([], _config(), tiny_hyper)

    def test_unlabeled_sketch(self, tiny_hyper, dataset):
        with pytest.raises(ValidationError):
            fit([(dataset[0][0], None)], _config(), tiny_hyper)

    def test_reproducible(self, tiny_hyper, dataset):
        first = fit(dataset, _config(), tiny_hyper)
        second = fit(dataset, _config(), tiny_hyper)
        assert dumps_checkpoint(first.checkpoint) == dumps_checkpoint(second.checkpoint)
        assert first.history["loss"].tolist() == second.history["loss"].tolist()

    def test_workers_do_not_change_result(self, tiny_hyper, dataset):
        serial = fit(dataset, _config(workers=1), tiny_hyper)
        threaded = fit(dataset, _config(workers=2), tiny_hyper)
        a, b = serial.checkpoint, threaded.checkpoint
        assert a.step == b.step == 3
        for name in a.params.names():
            assert np.array_equal(a.params[name], b.params[name])
            assert np.array_equal(a.adam.m[name], b.adam.m[name])
            assert np.array_equal(a.adam.v[name], b.adam.v[name])
        assert serial.history["loss"].tolist() == threaded.history["loss"].tolist()
        # 检查点只在回显的 workers 配置上不同
        assert {k: v for k, v in a.config.items() if k != "workers"} == \
               {k: v for k, v in b.config.items() if k != "workers"}
        relabeled = Checkpoint(a.params, a.adam, dict(a.config, workers=2))
        assert dumps_checkpoint(relabeled) == dumps_checkpoint(b)

    def test_zero_iterations_gives_initialization(self, tiny_hyper, dataset, tmp_path):
        path = str(tmp_path / "init.ckpt")
        result = fit(dataset, _config(iters=0), tiny_hyper, checkpoint_path=path)
        expected = init_params(tiny_hyper, np.random.default_rng(5))
        loaded = load_checkpoint(path)
        assert loaded.step == 0
        assert result.history.empty
        for name, array in expected.items():
            assert np.array_equal(loaded.params[name], array)

    def test_metrics_and_checkpoints(self, tiny_hyper, dataset, tmp_path):
        path = str(tmp_path / "model.ckpt")
        metrics = str(tmp_path / "model.metrics")
        seen = []
        result = fit(dataset, _config(iters=3, checkpoint_every=2), tiny_hyper,
                     checkpoint_path=path, metrics_path=metrics, validation=dataset[:2],
                     on_checkpoint=lambda step, summary: seen.append(step))
        with open(metrics, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
        assert len(lines) == 3
        assert [len(line.split()) for line in lines] == [7, 7, 7]
        assert [int(line.split()[0]) for line in lines] == [1, 2, 3]
        assert seen == [2, 3]
        assert result.validation["step"].tolist() == [2, 3]
        assert load_checkpoint(path).step == 3
        assert list(result.history.columns) == ["step", "loss", "L_A", "L_G", "L_R", "L_KL", "lr"]


def _affinity_accuracy(G_hat, labels):
    G = to_group_matrix(labels).values
    off = ~np.eye(len(labels), dtype=bool)
    return float(np.mean((G_hat.values[off] > 0.5) == (G[off] == 1.0)))


@pytest.mark.slow
class TestLearning:
    """桌面规模模型的完整训练，用 --run-slow 运行"""

    def test_overfits_synthetic_set(self):
        dataset = gen_dataset(20, jitter=0.05, rng=np.random.default_rng(0))
        start = time.perf_counter()
        result = fit(dataset, TrainConfig(), HyperParams())
        elapsed = time.perf_counter() - start

        accuracy, scores = [], []
        for sketch, labels in dataset:
            predicted, G_hat = group(sketch, result.checkpoint)
            accuracy.append(_affinity_accuracy(G_hat, labels))
            scores.append(pri(predicted, labels))
        assert np.mean(accuracy) >= 0.95
        assert np.mean(scores) >= 0.90
        assert elapsed < 600.0
        losses = result.history["loss"]
        assert losses.tail(100).mean() < 0.2 * losses.head(100).mean()

    def test_unseen_category_beats_baselines(self):
        categories = SKETCH_SETTINGS["categories"]
        held_out = "box-with-lid"
        seen = [c for c in categories if c != held_out]
        train = gen_dataset(18, seen, jitter=0.05, rng=np.random.default_rng(1))
        test = gen_dataset(10, [held_out], jitter=0.05, rng=np.random.default_rng(2))
        result = fit(train, TrainConfig(), HyperParams())

        model = np.mean([pri(group(s, result.checkpoint)[0], labels) for s, labels in test])
        single = np.mean([pri(np.zeros(len(labels), dtype=int), labels) for _, labels in test])
        proximity = np.mean([pri(baseline_proximity(s), labels) for s, labels in test])
        assert model > single
        assert model > proximity
