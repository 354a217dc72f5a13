import numpy as np
import pytest

from patternguard.config import ConfigError, LearnConfig, load_config
from patternguard.validation import check_nonempty, check_strings


def test_defaults():
    c = LearnConfig()
    assert (c.depth, c.top_k, c.delimiter_support) == (3, 3, 0.8)
    assert c.distance.indel_cost == 4.0 and c.distance.unalign_cost == 4.0


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"depth": 2, "top_k": 5, "beta": 0.5}')
    c = load_config(p)
    assert (c.depth, c.top_k, c.beta) == (2, 5, 0.5)


@pytest.mark.parametrize("text, msg", [
    ('{"depht": 2}', "unknown config keys: depht"),
    ('{"depth": -1}', "depth"),
    ('{"top_k": 0}', "top_k"),
    ('{"delimiter_support": 1.5}', "delimiter_support"),
    ('[1, 2]', "JSON object"),
    ('{"depth": ', "offset"),
])
def test_config_errors(tmp_path, text, msg):
    p = tmp_path / "c.json"
    p.write_text(text)
    with pytest.raises(ConfigError, match=msg):
        load_config(p)


def test_check_strings_shapes():
    assert check_strings(["a", "b"]) == ["a", "b"]
    assert check_strings(np.array([["a"], ["b"]], dtype=object)) == ["a", "b"]
    assert check_strings([["a"], ["b"]]) == ["a", "b"]
    with pytest.raises(ValueError, match="one column"):
        check_strings(np.array([["a", "b"]], dtype=object))
    with pytest.raises(TypeError):
        check_strings("abc")
    with pytest.raises(TypeError, match=r"X\[1\]"):
        check_strings(["a", 3])
    with pytest.raises(ValueError, match="limit"):
        check_strings(["abcd"], max_len=3)


def test_check_nonempty():
    assert check_nonempty(["", "a"]) == ["a"]
    with pytest.raises(ValueError):
        check_nonempty(["", ""])
