import numpy as np
import pytest

from saan.errors import InvalidConfigError, LengthMismatchError
from saan.experiment import (
    ABLATION_GRID,
    BASELINE,
    SAAN_FULL,
    MethodFlags,
    ModelSpec,
    compute_metrics,
    method_from_name,
    run_experiment,
)
from saan.model import TrainConfig
from saan.synthetic import GeneratorConfig, ScenarioConfig


def quick_setup(seed=0):
    """A fast, small configuration for protocol-level tests."""
    scenario = ScenarioConfig(total_classes=10, base_classes=4, sessions=3,
                              ways=2, shots=3, seed=seed)
    generator = GeneratorConfig(input_dim=12, train_per_base=40,
                                test_per_base=10, test_per_novel=8)
    model_spec = ModelSpec(hidden_dim=12, embedding_dim=12)
    train = TrainConfig(epochs=16, warmup_epochs=6, incremental_epochs=3,
                        batch_size=16, seed=seed)
    return scenario, generator, model_spec, train


class TestComputeMetrics:
    def test_all_correct(self):
        preds = [np.array([0, 1, 2]), np.array([0, 1, 2, 3])]
        labels = [np.array([0, 1, 2]), np.array([0, 1, 2, 3])]
        m = compute_metrics(preds, labels, {0, 1, 2})
        assert m.per_session_accuracy == [1.0, 1.0]
        assert m.drop == 0.0
        assert m.average_accuracy == 1.0

    def test_harmonic_mean_example(self):
        # base accuracy 0.8 (4/5), novel accuracy 0.4 (2/5) -> 2ab/(a+b) = 8/15
        base_labels = np.zeros(5, dtype=int)
        base_preds = np.array([0, 0, 0, 0, 9])
        novel_labels = np.ones(5, dtype=int)
        novel_preds = np.array([1, 1, 9, 9, 9])
        preds = [np.array([0]), np.concatenate([base_preds, novel_preds])]
        labels = [np.array([0]), np.concatenate([base_labels, novel_labels])]
        m = compute_metrics(preds, labels, {0})
        assert m.base_accuracy == pytest.approx(0.8)
        assert m.novel_accuracy == pytest.approx(0.4)
        assert m.harmonic_mean == pytest.approx(8.0 / 15.0, abs=1e-12)

    def test_zero_novel_accuracy_gives_zero_harmonic_mean(self):
        preds = [np.array([0]), np.array([0, 9])]
        labels = [np.array([0]), np.array([0, 1])]
        m = compute_metrics(preds, labels, {0})
        assert m.novel_accuracy == 0.0
        assert m.harmonic_mean == 0.0

    def test_drop_definition(self):
        preds = [np.array([0, 0]), np.array([0, 9, 9, 9])]
        labels = [np.array([0, 0]), np.array([0, 1, 2, 3])]
        m = compute_metrics(preds, labels, {0})
        assert m.drop == pytest.approx(1.0 - 0.25)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            compute_metrics([np.array([0, 1])], [np.array([0])], {0})
        with pytest.raises(LengthMismatchError):
            compute_metrics([np.array([0])], [np.array([0]), np.array([1])], {0})


class TestMethodFlags:
    def test_known_names(self):
        assert method_from_name("baseline") == BASELINE
        assert method_from_name("saan") == SAAN_FULL
        for flags in ABLATION_GRID:
            assert method_from_name(flags.name).name == flags.name

    def test_unknown_name(self):
        with pytest.raises(InvalidConfigError):
            method_from_name("mystery")

    def test_grid_shape(self):
        assert len(ABLATION_GRID) == 6
        assert ABLATION_GRID[0] == BASELINE
        assert ABLATION_GRID[-1].pull and ABLATION_GRID[-1].push
        assert ABLATION_GRID[-1].two_stage and ABLATION_GRID[-1].norm_distribution
        # strictly increasing component count pattern of the grid
        flags_on = [sum([f.pull, f.push, f.two_stage, f.norm_distribution])
                    for f in ABLATION_GRID]
        assert flags_on == [0, 1, 2, 3, 3, 4]


class TestRunExperiment:
    def test_session_record_structure(self):
        res = run_experiment(*insert_flags(quick_setup(), BASELINE))
        assert [r.session for r in res.records] == [0, 1, 2, 3]
        assert [r.cumulative_classes for r in res.records] == [4, 6, 8, 10]
        sizes = [r.n_test for r in res.records]
        assert sizes == sorted(sizes)  # cumulative test set never shrinks
        assert res.records[0].novel_accuracy == 0.0  # no novel classes yet

    def test_inference_determinism(self):
        a = run_experiment(*insert_flags(quick_setup(), SAAN_FULL))
        b = run_experiment(*insert_flags(quick_setup(), SAAN_FULL))
        assert a.metrics == b.metrics
        assert np.array_equal(a.state.extractor.w2, b.state.extractor.w2)

    def test_all_flags_off_equals_named_baseline(self):
        unnamed = MethodFlags("baseline")  # every component toggled off
        a = run_experiment(*insert_flags(quick_setup(), BASELINE))
        b = run_experiment(*insert_flags(quick_setup(), unnamed))
        assert a.metrics == b.metrics
        assert np.array_equal(a.state.head.weight, b.state.head.weight)

    def test_baseline_has_no_bank_or_norm_model(self):
        res = run_experiment(*insert_flags(quick_setup(), BASELINE))
        assert res.state.bank is None
        assert res.state.norm_model is None

    def test_full_method_state(self):
        res = run_experiment(*insert_flags(quick_setup(), SAAN_FULL))
        assert res.state.bank is not None
        assert len(res.state.bank.assignment) == 10
        assert res.state.norm_model is not None
        assert set(res.state.norm_model.base_params) == {0, 1, 2, 3}
        assert res.state.norm_model.incremental_labels == frozenset(range(4, 10))
        assert len(res.state.reps.reps) == 10

    def test_representative_session_tags(self):
        res = run_experiment(*insert_flags(quick_setup(), SAAN_FULL))
        for label, rep in res.state.reps.reps.items():
            assert rep.session == (0 if label < 4 else (label - 4) // 2 + 1)

    def test_embedding_dim_budget_validated(self):
        scenario, generator, _, train = quick_setup()
        with pytest.raises(InvalidConfigError):
            run_experiment(scenario, generator, ModelSpec(hidden_dim=8, embedding_dim=8),
                           BASELINE, train)

    def test_dataset_override_matches_generated(self):
        from saan.synthetic import generate_synthetic

        scenario, generator, model_spec, train = quick_setup()
        ds = generate_synthetic(scenario, generator, scenario.seed)
        a = run_experiment(scenario, generator, model_spec, BASELINE, train)
        b = run_experiment(scenario, generator, model_spec, BASELINE, train, dataset=ds)
        assert a.metrics == b.metrics


def insert_flags(setup, flags):
    scenario, generator, model_spec, train = setup
    return scenario, generator, model_spec, flags, train
