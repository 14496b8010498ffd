import pytest

from semrank.model import (
    ConfigError,
    DecodeRequest,
    ValidationError,
    request_from_dict,
    request_to_dict,
    validate_config,
    validate_request,
)

from conftest import make_candidate


class TestValidateConfig:
    def test_all_defaults(self):
        cfg = validate_config({})
        assert cfg.sim_threshold == 0.8
        assert cfg.alpha == 0.5
        assert cfg.beta == 0.3
        assert cfg.gamma == 0.5
        assert cfg.base_temperature == 0.95
        assert cfg.k_candidates == 10

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigError, match="alpha"):
            validate_config({"alpha": 1.5})

    def test_boundary_zeros_admitted(self):
        cfg = validate_config({"alpha": 0, "beta": 0, "gamma": 0})
        assert (cfg.alpha, cfg.beta, cfg.gamma) == (0.0, 0.0, 0.0)

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="warp_factor"):
            validate_config({"warp_factor": 9})

    @pytest.mark.parametrize(
        "key,value",
        [
            ("sim_threshold", -0.1),
            ("sim_threshold", 1.2),
            ("beta", 2),
            ("gamma", -1),
            ("base_temperature", 0),
            ("k_candidates", 0),
            ("entropy_normalization", "sqrt"),
            ("seed", -5),
        ],
    )
    def test_rejects_out_of_range(self, key, value):
        with pytest.raises(ConfigError, match=key):
            validate_config({key: value})

    def test_round_trip(self):
        cfg = validate_config({"alpha": 0.25, "seed": 99, "enable_clustering": "false"})
        again = validate_config(cfg.to_dict())
        assert again == cfg

    def test_string_values_from_config_file(self):
        cfg = validate_config({"alpha": "0.7", "k_candidates": "4", "seed": "3"})
        assert cfg.alpha == 0.7
        assert cfg.k_candidates == 4
        assert cfg.seed == 3


class TestValidateRequest:
    def test_valid_passthrough(self):
        req = DecodeRequest(
            request_id="r1",
            history=("a",),
            candidates=tuple(
                make_candidate(f"c{i}", [float(i + 1)] * 8, 0.3) for i in range(3)
            ),
        )
        assert validate_request(req) is req

    def test_empty_candidates(self):
        req = DecodeRequest(request_id="r1", history=(), candidates=())
        with pytest.raises(ValidationError, match="empty candidates"):
            validate_request(req)

    def test_mixed_dims(self):
        req = DecodeRequest(
            request_id="r1",
            history=(),
            candidates=(
                make_candidate("a", [1.0] * 8, 0.5),
                make_candidate("b", [1.0] * 8, 0.3),
                make_candidate("c", [1.0] * 16, 0.2),
            ),
        )
        with pytest.raises(ValidationError, match="inconsistent logit dimension"):
            validate_request(req)

    def test_duplicate_ids(self):
        req = DecodeRequest(
            request_id="r1",
            history=(),
            candidates=(
                make_candidate("a", [1.0, 2.0], 0.5),
                make_candidate("a", [2.0, 1.0], 0.5),
            ),
        )
        with pytest.raises(ValidationError, match="duplicate item id"):
            validate_request(req)

    def test_zero_norm_logits(self):
        req = DecodeRequest(
            request_id="r1",
            history=(),
            candidates=(make_candidate("a", [0.0, 0.0], 0.5),),
        )
        with pytest.raises(ValidationError, match="zero-norm logit vector"):
            validate_request(req)

    def test_non_finite_logits(self):
        req = DecodeRequest(
            request_id="r1",
            history=(),
            candidates=(make_candidate("a", [1.0, float("nan")], 0.5),),
        )
        with pytest.raises(ValidationError, match="non-finite"):
            validate_request(req)

    def test_bad_prob(self):
        req = DecodeRequest(
            request_id="r1",
            history=(),
            candidates=(make_candidate("a", [1.0, 1.0], 0.0),),
        )
        with pytest.raises(ValidationError, match="prob"):
            validate_request(req)


def test_wire_format_round_trip():
    req = DecodeRequest(
        request_id="r9",
        history=("x", "y"),
        candidates=(make_candidate("a", [0.5, -1.25], 0.4),),
        ground_truth="a",
    )
    assert request_from_dict(request_to_dict(req)) == req
