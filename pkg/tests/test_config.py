import pytest

from snakeid.config import PipelineConfig, build_config, parse_kv
from snakeid.errors import ParseError


def test_parse_kv_basics():
    text = """
    # training settings
    seed = 7
    lr = 0.05   # inline comment
    manifest = data/manifest.csv

    feature_kind = dct
    """
    values = parse_kv(text)
    assert values == {
        "seed": "7",
        "lr": "0.05",
        "manifest": "data/manifest.csv",
        "feature_kind": "dct",
    }


def test_parse_kv_rejects_bare_words():
    with pytest.raises(ParseError):
        parse_kv("this is not a key value line\n")


def test_parse_kv_rejects_duplicates():
    with pytest.raises(ParseError):
        parse_kv("seed = 1\nseed = 2\n")


def test_build_config_layering():
    file_values = {"seed": "9", "lr": "0.01", "manifest": "m.csv"}
    cfg = build_config(file_values, {"lr": 0.5, "model": "out.slm1", "seed": None})
    assert cfg.seed == 9  # file value survives a None override
    assert cfg.lr == 0.5  # flag wins
    assert cfg.manifest == "m.csv"
    assert cfg.model == "out.slm1"
    assert cfg.epochs == 20  # default untouched


def test_build_config_unknown_key():
    with pytest.raises(ParseError):
        build_config({"nope": "1"}, {})


def test_build_config_bad_value():
    with pytest.raises(ParseError):
        build_config({"epochs": "many"}, {})


def test_class_filter():
    assert PipelineConfig(classes="12, 1754").class_filter() == [12, 1754]
    assert PipelineConfig().class_filter() is None
    with pytest.raises(ParseError):
        PipelineConfig(classes="a,b").class_filter()


def test_metric_objects_from_config():
    cfg = build_config({"c_v_as_h": "9.5", "w_f1": "2"}, {})
    assert cfg.cost_table().c_v_as_h == 9.5
    assert cfg.track1_weights().w_f1 == 2.0
