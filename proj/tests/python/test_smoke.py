"""End-to-end checks of the Python surface against the native module."""

import pytest

import turnover


def test_exports():
    for name in turnover.__all__:
        assert hasattr(turnover, name), name


def test_derive_seed_is_deterministic():
    assert turnover.derive_seed(5, 0) == turnover.derive_seed(5, 0)
    assert turnover.derive_seed(5, 0) != turnover.derive_seed(5, 1)
    assert turnover.derive_seed(6, 0) != turnover.derive_seed(5, 0)


def test_default_bins_and_discretize():
    bins = turnover.default_bins()
    assert len(bins) == 5
    assert bins[0] == (58320.0, 18291986.0)
    assert bins[4] == (300465316.0, 19085311470.0)

    assert turnover.discretize(58320.0) == "A"
    assert turnover.discretize(18294291.0) == "A"   # gap value, nearer the A edge
    assert turnover.discretize(18294292.0) == "B"
    assert turnover.discretize(1.0e12) == "E"
    assert turnover.discretize(35.0, [(0, 10), (20, 30), (40, 50), (60, 70), (80, 90)]) == "B"
    with pytest.raises(Exception):
        turnover.discretize(-1.0)


def test_dataset_construction():
    d = turnover.Dataset(["x", "y"], [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], "ABC")
    assert d.n_rows == 3
    assert d.n_features == 2
    assert d.labels == "ABC"
    assert d.row(1) == [3.0, 4.0]
    narrowed = d.select_features([1])
    assert narrowed.feature_names == ["y"]
    assert narrowed.row(0) == [2.0]
    with pytest.raises(Exception):
        turnover.Dataset(["x", "y"], [[1.0]], "A")


def test_synthetic_generation_and_split():
    d = turnover.generate_synthetic(n_rows=400, n_informative=3, n_noise=1, seed=7)
    assert d.n_rows == 400
    assert d.feature_names == ["inf_01", "inf_02", "inf_03", "noise_01"]
    again = turnover.generate_synthetic(n_rows=400, n_informative=3, n_noise=1, seed=7)
    assert d.labels == again.labels
    assert len(set(d.labels)) == 5

    train, valid = turnover.split(d, train_fraction=0.6, seed=3)
    assert train.n_rows + valid.n_rows == 400
    assert train.n_rows == 240
    train2, _ = turnover.split(d, train_fraction=0.6, seed=3)
    assert train.labels == train2.labels


def test_training_and_accuracy():
    d = turnover.generate_synthetic(n_rows=300, n_informative=3, n_noise=0,
                                    noise_level=0.0, seed=5)
    forest = turnover.train_forest(d, n_trees=20, seed=1)
    assert forest.accuracy(d) > 90.0

    tree = turnover.train_tree(d, variant="rpartlike")
    assert tree.accuracy(d) > 95.0

    logreg = turnover.train_logreg(d, epochs=80)
    assert logreg.accuracy(d) > 40.0

    # the linear margin model converges slowly; just require well above
    # the 20 percent chance rate
    svm = turnover.train_svm(d, epochs=80)
    assert svm.accuracy(d) > 30.0

    prediction = forest.predict(d.row(0))
    assert prediction in "ABCDE"
    assert forest.predict_dataset(d)[0] == prediction


def test_forest_worker_count_is_irrelevant():
    d = turnover.generate_synthetic(n_rows=200, n_informative=2, n_noise=1, seed=9)
    one = turnover.train_forest(d, n_trees=12, seed=4, workers=1)
    four = turnover.train_forest(d, n_trees=12, seed=4, workers=4)
    assert one.to_json() == four.to_json()


def test_model_json_round_trip(tmp_path):
    d = turnover.generate_synthetic(n_rows=150, n_informative=2, n_noise=0, seed=11)
    model = turnover.train_tree(d)
    text = model.to_json()
    clone = turnover.Model.from_json(text)
    assert clone.to_json() == text
    assert clone.predict_dataset(d) == model.predict_dataset(d)
    assert clone.feature_names == ["inf_01", "inf_02"]

    path = tmp_path / "model.json"
    turnover.save_model(str(path), model)
    loaded = turnover.load_model(str(path))
    assert loaded.to_json() == text
    with pytest.raises(Exception):
        turnover.Model.from_json("{not json")


def test_dataset_csv_round_trip(tmp_path):
    d = turnover.generate_synthetic(n_rows=60, n_informative=2, n_noise=1, seed=13)
    path = tmp_path / "rows.csv"
    turnover.write_dataset_csv(str(path), d)
    back = turnover.read_dataset_csv(str(path))
    assert back.feature_names == d.feature_names
    assert back.labels == d.labels
    assert back.row(17) == d.row(17)


def test_run_boruta_selects_planted_features():
    d = turnover.generate_synthetic(n_rows=250, n_informative=2, n_noise=2,
                                    noise_level=0.05, seed=17)
    result = turnover.run_boruta(d, max_iterations=20, n_trees=60, seed=2)
    assert set(result["decisions"]) == set(d.feature_names)
    assert "inf_01" in result["selected"]
    assert "inf_02" in result["selected"]
    assert 1 <= result["iterations"] <= 20
