import json

import numpy as np
import pytest

from singext.config import build_config, canonical_json, config_hash, fixture_config, load_config
from singext.errors import ConfigurationError


def test_hash_ignores_key_order():
    raw = fixture_config(N=100)
    shuffled = json.loads(json.dumps(dict(reversed(list(raw.items())))))
    assert config_hash(raw) == config_hash(shuffled)
    assert canonical_json({"b": 1, "a": [1j.imag]}) == '{"a":[1.0],"b":1}'
    raw2 = fixture_config(N=101)
    assert config_hash(raw) != config_hash(raw2)


def test_theta_and_grid_parsing():
    raw = fixture_config(N=100)
    raw["theta"] = {"X": [[1.0]], "Y": [[[0.5, 0.0]]]}
    raw["grid"] = {"points": [[0.0, 1.0], 2.0]}
    cfg = build_config(raw)
    assert cfg.theta.self_adjoint and cfg.grid == [1j, 2 + 0j]
    raw["theta"] = {"scalar": 1.0, "X": [[1.0]]}
    with pytest.raises(ConfigurationError):
        build_config(raw)
    raw["theta"] = {"X": [[1.0]]}
    with pytest.raises(ConfigurationError):
        build_config(raw)


def test_antitriangular_nested_hankel():
    raw = fixture_config(d=2, N=100, gram={
        "mode": "antitriangular",
        "hankel": [[[1.0, 2.0], [[0.0, 0.3], 0.4]], [[[0.0, -0.3], 0.4], [0.5, 1.5]]],
    })
    G = build_config(raw).gram
    assert G.flags.gacomm and G.flags.hermitian
    assert np.allclose(G.GA[0, 0], 0) and G.GA[1, 3] == pytest.approx(0.4)


def test_schema_rejections(tmp_path):
    raw = fixture_config(N=100)
    raw["extra"] = 1
    with pytest.raises(ConfigurationError, match="extra"):
        build_config(raw)
    raw = fixture_config(N=100)
    raw["operator"]["eigenvalues"] = [1.0, 2.0]
    with pytest.raises(ConfigurationError):
        build_config(raw)
    raw = fixture_config(N=100)
    raw["schema"] = "singular-ext/2"
    with pytest.raises(ConfigurationError, match="schema"):
        build_config(raw)


def test_with_truncation_and_load(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(fixture_config(N=400)))
    cfg = load_config(p)
    half = cfg.with_truncation(200)
    assert half.op.N == 200 and cfg.op.N == 400
    assert half.sha256 != cfg.sha256
