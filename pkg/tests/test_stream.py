import json

import numpy as np
import pytest

from conftest import make_chunk
from emosam.stream import (
    BiasStreamConfig,
    Chunk,
    Group,
    GroupRates,
    StreamManifest,
    chunk_arrays,
    dataset_discrimination,
    generate_bias_stream,
    ingest,
    manifest_for_generated,
    write_stream_csv,
)


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def basic_manifest(path, **overrides):
    kwargs = dict(
        source=path,
        target_column="y",
        positive_label="yes",
        sensitive_column="s",
        protected_values=("a",),
        unprotected_values=("b",),
        window_size=10,
    )
    kwargs.update(overrides)
    return StreamManifest(**kwargs)


# -- chunk model -------------------------------------------------------------------


def test_chunk_validation():
    with pytest.raises(ValueError):
        make_chunk(np.empty((0, 2)), [], [])
    with pytest.raises(ValueError):
        make_chunk([[0.1, np.nan]], [0], [1])
    with pytest.raises(ValueError):
        make_chunk([[0.1, 0.2]], [2], [1])
    with pytest.raises(ValueError):
        make_chunk([[0.1, 0.2]], [0], [3])
    with pytest.raises(ValueError):
        Chunk(np.ones((1, 2)), np.zeros(1, np.uint8), np.ones(1, np.uint8), 0)


def test_chunk_arrays_are_frozen(random_chunk):
    with pytest.raises(ValueError):
        random_chunk.features[0, 0] = 9.0
    with pytest.raises(ValueError):
        random_chunk.labels[0] = 0


def test_chunk_instances_expose_group_enum(random_chunk):
    inst = random_chunk.instance(0)
    assert inst.group in (Group.PROTECTED, Group.UNPROTECTED)
    assert inst.features.shape == (random_chunk.n_features,)


def test_chunk_arrays_partition(rng):
    chunks = chunk_arrays(rng.random((5, 2)), np.zeros(5, np.uint8), np.ones(5, np.uint8), 2)
    assert [len(c) for c in chunks] == [2, 2, 1]
    assert [c.index for c in chunks] == [1, 2, 3]


# -- manifest ------------------------------------------------------------------------


def test_manifest_requires_disjoint_groups(tmp_path):
    with pytest.raises(ValueError):
        basic_manifest(tmp_path / "x.csv", protected_values=("a",), unprotected_values=("a",)).validate()


def test_manifest_rejects_small_window(tmp_path):
    with pytest.raises(ValueError):
        basic_manifest(tmp_path / "x.csv", window_size=5).validate()


def test_manifest_json_roundtrip_and_unknown_keys(tmp_path):
    csv_path = tmp_path / "data.csv"
    manifest = basic_manifest(csv_path, categorical_columns=("c",))
    mpath = tmp_path / "manifest.json"
    manifest.to_json(mpath)
    loaded = StreamManifest.from_json(mpath)
    assert loaded == manifest

    blob = json.loads(mpath.read_text())
    blob["surprise"] = 1
    mpath.write_text(json.dumps(blob))
    with pytest.raises(ValueError):
        StreamManifest.from_json(mpath)


def test_manifest_resolves_relative_source(tmp_path):
    mpath = tmp_path / "manifest.json"
    manifest = basic_manifest("data.csv")
    manifest = StreamManifest(**{**manifest.__dict__, "source": "data.csv"})
    manifest.to_json(mpath)
    loaded = StreamManifest.from_json(mpath)
    assert loaded.source == tmp_path / "data.csv"


# -- ingestion -----------------------------------------------------------------------


def test_ingest_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest(basic_manifest(tmp_path / "absent.csv"))


def test_ingest_missing_column(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, ["f0", "y"], [[0.5, "yes"]])
    with pytest.raises(ValueError):
        ingest(basic_manifest(path))


def test_ingest_partitions_and_encodes(tmp_path):
    path = tmp_path / "d.csv"
    rows = [[i / 30, "a" if i % 2 else "b", "yes" if i % 3 else "no"] for i in range(30)]
    write_csv(path, ["f0", "s", "y"], rows)
    result = ingest(basic_manifest(path))
    assert [len(c) for c in result.chunks] == [10, 10, 10]
    assert result.rejected_rows == 0
    assert result.n_instances == 30
    # sensitive column kept and auto one-hot in lexicographic order
    assert result.feature_names == ["f0", "s=a", "s=b"]
    for chunk in result.chunks:
        assert chunk.features.min() >= 0.0 and chunk.features.max() <= 1.0


def test_ingest_rejects_bad_rows(tmp_path):
    path = tmp_path / "d.csv"
    rows = [
        ["0.1", "a", "yes"],
        ["0.2", "c", "yes"],  # sensitive value in neither group
        ["oops", "b", "no"],  # unparseable numeric
        ["0.3", "a", ""],  # empty target
        ["0.4", "b", "no", "extra"],  # wrong arity
        ["", "b", "no"],  # empty feature cell
        ["inf", "b", "no"],  # non-finite numeric
    ] + [["0.5", "b", "no"]] * 9
    write_csv(path, ["f0", "s", "y"], rows)
    result = ingest(basic_manifest(path))
    assert result.rejected_rows == 6
    assert result.n_instances == 10


def test_ingest_zero_usable_rows(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, ["f0", "s", "y"], [["0.1", "zzz", "yes"]])
    with pytest.raises(ValueError):
        ingest(basic_manifest(path))


def test_ingest_constant_column_normalizes_to_zero(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, ["f0", "s", "y"], [[7.5, "a" if i % 2 else "b", "yes"] for i in range(12)])
    result = ingest(basic_manifest(path))
    feats = np.vstack([c.features for c in result.chunks])
    assert (feats[:, 0] == 0.0).all()


def test_ingest_running_minmax_never_peeks(tmp_path):
    path = tmp_path / "d.csv"
    values = [5.0, 1.0, 9.0, 5.0]
    rows = [[v, "a" if i % 2 else "b", "yes"] for i, v in enumerate(values)] * 3
    write_csv(path, ["f0", "s", "y"], rows)
    result = ingest(basic_manifest(path))
    feats = np.vstack([c.features for c in result.chunks])
    # first value: constant so far -> 0; second: new minimum -> 0;
    # third: new maximum -> 1; fourth: (5-1)/(9-1) = 0.5
    np.testing.assert_allclose(feats[:4, 0], [0.0, 0.0, 1.0, 0.5])


def test_ingest_drop_sensitive_removes_column(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, ["f0", "s", "y"], [[i / 12, "a" if i % 2 else "b", "yes"] for i in range(12)])
    result = ingest(basic_manifest(path, drop_sensitive=True))
    assert result.feature_names == ["f0"]
    groups = np.concatenate([c.groups for c in result.chunks])
    assert set(groups.tolist()) == {0, 1}


def test_ingest_is_deterministic(tmp_path, rng):
    path = tmp_path / "d.csv"
    rows = [
        [rng.random(), "x" if rng.random() < 0.3 else "z", "a" if i % 2 else "b", "yes" if rng.random() < 0.5 else "no"]
        for i in range(40)
    ]
    write_csv(path, ["f0", "c", "s", "y"], rows)
    manifest = basic_manifest(path, categorical_columns=("c",))
    one = ingest(manifest)
    two = ingest(manifest)
    assert one.feature_names == two.feature_names
    for a, b in zip(one.chunks, two.chunks):
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.groups, b.groups)
        np.testing.assert_array_equal(a.labels, b.labels)


# -- dataset discrimination -----------------------------------------------------------


def test_dataset_discrimination_equal_rates():
    chunk = make_chunk(np.zeros((4, 1)), [1, 1, 0, 0], [1, 1, 1, 1])
    assert dataset_discrimination([chunk]) == 0.0


def test_dataset_discrimination_hand_count():
    groups = [1, 1, 1, 1, 0, 0, 0, 0]
    labels = [1, 1, 1, 0, 1, 0, 0, 0]
    chunk = make_chunk(np.zeros((8, 1)), groups, labels)
    assert dataset_discrimination([chunk]) == pytest.approx(0.5)


def test_dataset_discrimination_needs_both_groups():
    chunk = make_chunk(np.zeros((3, 1)), [1, 1, 1], [1, 0, 1])
    with pytest.raises(ValueError):
        dataset_discrimination([chunk])


def test_dataset_discrimination_matches_counter(rng):
    from oracles import counting_discrimination

    for _ in range(25):
        n = int(rng.integers(2, 500))
        groups = rng.integers(0, 2, n)
        labels = rng.integers(0, 2, n)
        if len(set(groups.tolist())) < 2:
            continue
        chunks = chunk_arrays(rng.random((n, 2)), groups.astype(np.uint8), labels.astype(np.uint8), max(10, n // 3))
        want, _ = counting_discrimination(labels, groups)
        assert dataset_discrimination(chunks) == pytest.approx(want, abs=1e-12)


# -- generator -----------------------------------------------------------------------


def test_generator_deterministic():
    config = BiasStreamConfig(n_instances=500, seed=3, window_size=100)
    a = generate_bias_stream(config)
    b = generate_bias_stream(config)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.features, y.features)
        np.testing.assert_array_equal(x.groups, y.groups)
        np.testing.assert_array_equal(x.labels, y.labels)


def test_generator_zero_proxy_strength_uncorrelated():
    config = BiasStreamConfig(n_instances=10_000, proxy_strength=0.0, seed=1, window_size=1000)
    chunks = generate_bias_stream(config)
    proxy = np.concatenate([c.features[:, -1] for c in chunks])
    groups = np.concatenate([c.groups for c in chunks]).astype(np.float64)
    corr = np.corrcoef(proxy, groups)[0, 1]
    assert abs(corr) <= 0.05


def test_generator_symmetric_config_near_zero_discrimination():
    config = BiasStreamConfig(
        n_instances=10_000,
        proxy_strength=0.0,
        base_rates=GroupRates(0.5, 0.5),
        seed=2,
        window_size=1000,
    )
    chunks = generate_bias_stream(config)
    assert abs(dataset_discrimination(chunks)) <= 0.03


def test_generator_strong_proxy_tracks_group():
    config = BiasStreamConfig(n_instances=10_000, proxy_strength=0.8, seed=4, window_size=1000)
    chunks = generate_bias_stream(config)
    proxy = np.concatenate([c.features[:, -1] for c in chunks])
    groups = np.concatenate([c.groups for c in chunks]).astype(np.float64)
    agree = float((proxy == groups).mean())
    assert agree == pytest.approx(0.9, abs=0.02)  # (1 + 0.8) / 2


def test_generator_biased_config_shows_group_gap():
    config = BiasStreamConfig(
        n_instances=10_000,
        base_rates=GroupRates(0.65, 0.35),
        proxy_strength=0.8,
        seed=5,
        window_size=1000,
    )
    assert dataset_discrimination(generate_bias_stream(config)) == pytest.approx(0.3, abs=0.05)


def test_generator_config_validation():
    with pytest.raises(ValueError):
        BiasStreamConfig(n_instances=0).validate()
    with pytest.raises(ValueError):
        BiasStreamConfig(n_instances=100, proxy_strength=1.5).validate()
    with pytest.raises(ValueError):
        BiasStreamConfig(n_instances=100, drift_points=(50, 50), window_size=10).validate()
    with pytest.raises(ValueError):
        BiasStreamConfig(n_instances=100, drift_points=(100,), window_size=10).validate()


def test_generator_config_json_roundtrip(tmp_path):
    config = BiasStreamConfig(
        n_instances=1000,
        d_informative=4,
        d_noise=1,
        proxy_strength=0.6,
        base_rates=GroupRates(0.7, 0.3),
        drift_points=(400,),
        seed=9,
        window_size=100,
    )
    path = tmp_path / "gen.json"
    config.to_json(path)
    assert BiasStreamConfig.from_json(path) == config


def test_csv_roundtrip_preserves_groups_and_labels(tmp_path):
    config = BiasStreamConfig(n_instances=300, seed=6, window_size=50)
    chunks = generate_bias_stream(config)
    csv_path = tmp_path / "stream.csv"
    write_stream_csv(chunks, csv_path)
    manifest = manifest_for_generated(config, csv_path)
    result = ingest(manifest)
    assert result.n_instances == 300
    got_groups = np.concatenate([c.groups for c in result.chunks])
    got_labels = np.concatenate([c.labels for c in result.chunks])
    np.testing.assert_array_equal(got_groups, np.concatenate([c.groups for c in chunks]))
    np.testing.assert_array_equal(got_labels, np.concatenate([c.labels for c in chunks]))
    assert len(result.feature_names) == config.n_features
