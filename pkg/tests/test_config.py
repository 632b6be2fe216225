import pytest

from swa_sim.config import ConfigError, ResolvedConfig, from_dict, resolve


def test_defaults_match_protocol():
    rc = resolve()
    assert (rc.n, rc.C, rc.beta, rc.T, rc.x_max) == (5, 20.0, 1.6, 20, 8.0)
    assert rc.lambdas == [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    assert len(rc.seeds) == 10
    assert (rc.alpha, rc.epsilon, rc.margin, rc.gamma_center, rc.k) == (0.3, 1e-6, 0.0, 0.0, 7)
    d = rc.to_dict()
    assert d["belief"]["mu0"] == 4.0 and d["belief"]["W_ref"] == 20.0
    assert d["sweep"]["betas"] == [1.6]


def test_precedence(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("game:\n  beta: 3\n  T: 10\nbelief:\n  alpha: 0.5\n")
    rc = resolve(f, {"T": 7, "alpha": None})
    assert rc.beta == 3.0 and rc.T == 7 and rc.alpha == 0.5


def test_aliases_and_lists(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("run:\n  lambda: 0.4\nsweep:\n  betas: [1.6, 3]\n  seeds: '1,2'\noutput:\n  dir: out\n")
    rc = resolve(f)
    assert rc.lam == 0.4 and rc.betas == [1.6, 3.0] and rc.seeds == [1, 2] and rc.output_dir == "out"


def test_env_output_dir(monkeypatch):
    monkeypatch.setenv("SWA_OUTPUT_DIR", "/tmp/elsewhere")
    assert ResolvedConfig().output_dir == "/tmp/elsewhere"


@pytest.mark.parametrize(
    "text",
    [
        "game:\n  bogus: 1\n",
        "nope:\n  n: 5\n",
        "game:\n  beta: 6\n",
        "game:\n  n: 2.5\n",
        "belief:\n  margin: 25\n",
        "policy:\n  candidate_source: external\n",
        "sweep:\n  seeds: [1, 1]\n",
        "belief:\n  mu0: 9\n",
        "- a list\n",
        "game: [unclosed\n",
    ],
)
def test_invalid(tmp_path, text):
    f = tmp_path / "c.yaml"
    f.write_text(text)
    with pytest.raises(ConfigError):
        resolve(f)


def test_reproduce_from_echo():
    rc = resolve(None, {"beta": 3.0, "lambdas": [0, 0.5], "variant": "exact_utility"})
    again = from_dict(rc.to_dict())
    assert again.to_dict() == rc.to_dict()
