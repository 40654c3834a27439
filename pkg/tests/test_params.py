import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siqnet.errors import RangeError, SubpopulationTooSmall
from siqnet.params import (COVID_BASE, ModelParams, covid_params, params_from_mapping,
                           population_split, read_config, validate, write_config)

unit = st.floats(0.0, 1.0)


def test_covid_base_accepted_with_8210_vaccinated():
    p = validate(covid_params())
    split = population_split(p)
    assert split.n_v == 8210 and split.n_n == 1790
    assert split.is_vaccinated(8209) and not split.is_vaccinated(8210)


def test_npi_scaling():
    p = validate(covid_params(eta=0.5))
    assert p.lam == pytest.approx(0.18, abs=1e-15)
    assert p.eta == 0.0


def test_eta_zero_keeps_lambda_exactly():
    assert validate(covid_params()).lam == 0.36


def test_small_group_with_homophily_rejected():
    with pytest.raises(SubpopulationTooSmall):
        validate(covid_params(n=10, v=0.05, theta=0.5))


def test_small_group_without_homophily_allowed():
    p = validate(covid_params(n=10, v=0.05, theta=0.0))
    assert population_split(p).n_v == 1


@pytest.mark.parametrize("field,value", [
    ("v", 1.2), ("lam", -0.1), ("p_q", 2.0), ("theta", 1.0), ("tau", -1.0),
    ("beta", -0.5), ("sigma_n", float("nan")), ("gamma_q", 1.01), ("n", 0),
])
def test_range_error_names_field(field, value):
    with pytest.raises(RangeError) as err:
        validate(covid_params(**{field: value}))
    assert err.value.field == field


def test_split_rounds_half_up():
    assert population_split(covid_params(n=10, v=0.25, theta=0)).n_v == 3
    assert population_split(covid_params(n=10, v=0.35, theta=0)).n_v == 4


def test_vectorized_fields_validate():
    p = validate(covid_params(v=np.array([0.2, 0.5]), n=None))
    assert not p.is_scalar
    with pytest.raises(RangeError):
        validate(covid_params(v=np.array([0.2, 1.5]), n=None))


@given(lam=unit, eta=unit, v=unit, th=st.floats(0.0, 0.99), s=unit)
@settings(max_examples=200, deadline=None)
def test_validate_idempotent(lam, eta, v, th, s):
    p = covid_params(n=None, lam=lam, eta=eta, v=v, theta=th, sigma_n=s)
    once = validate(p)
    assert validate(once) == once


def test_config_round_trip(tmp_path):
    p = covid_params(eta=0.25)
    path = tmp_path / "run.cfg"
    write_config(p, path)
    assert params_from_mapping(read_config(path)) == p


def test_config_comments_and_errors(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("# header\nlambda = 0.3  # inline\n\nv=0.5\n")
    assert read_config(path) == {"lambda": "0.3", "v": "0.5"}
    path.write_text("lambda 0.3\n")
    with pytest.raises(ValueError):
        read_config(path)
    with pytest.raises(KeyError):
        params_from_mapping({"gamma": 1})


def test_missing_keys_reported():
    with pytest.raises(KeyError, match="missing"):
        params_from_mapping({"lambda": 0.2})


def test_mapping_uses_config_spelling():
    m = ModelParams(**COVID_BASE, tau=0, theta=0, sigma_v=0, sigma_n=0).to_mapping()
    assert m["lambda"] == 0.36 and "lam" not in m
