import pytest

from qaccredit.config import ConfigError, load_experiment, parse_experiment, parse_kv, parse_noise


def test_parse_kv_comments_and_lines():
    entries = parse_kv("# header\nseed = 3  # inline\n\ntarget=ghz\n")
    assert entries["seed"].value == "3" and entries["seed"].line == 2
    assert entries["target"].line == 4


@pytest.mark.parametrize(
    "text,line",
    [
        ("seed = 1\nthis line is wrong\n", 2),
        ("seed = 1\nseed = 2\n", 2),
        ("seed = 1\n = 4\n", 2),
    ],
)
def test_parse_kv_errors_are_line_anchored(text, line):
    with pytest.raises(ConfigError, match=rf"^cfg:{line}:"):
        parse_kv(text, "cfg")


def test_experiment_minimal():
    cfg = parse_experiment("seed = 5\ntarget = ghz\ntarget_n = 3\n")
    assert cfg.seed == 5 and cfg.target == "ghz" and cfg.noise is None
    assert (cfg.theta, cfg.alpha, cfg.v, cfg.shots) == (0.13, 0.95, None, 1000)


def test_seed_mandatory():
    with pytest.raises(ConfigError, match="seed"):
        parse_experiment("target = ghz\ntarget_n = 3\n")


def test_exactly_one_target():
    with pytest.raises(ConfigError, match="exactly one"):
        parse_experiment("seed = 1\n")
    with pytest.raises(ConfigError, match="exactly one"):
        parse_experiment("seed = 1\ntarget = ghz\ntarget_n = 2\ntarget_json = c.json\n")


@pytest.mark.parametrize(
    "extra,key,line",
    [
        ("theta = 1.5", "theta", 4),
        ("shots = many", "shots", 4),
        ("colour = blue", "colour", 4),
        ("target_topology = ring", "target_topology", 4),
        ("v = 0", "v", 4),
    ],
)
def test_experiment_value_errors(extra, key, line):
    text = f"seed = 1\ntarget = ghz\ntarget_n = 3\n{extra}\n"
    with pytest.raises(ConfigError, match=rf"^exp:{line}: {key}:"):
        parse_experiment(text, "exp")


def test_random_needs_m():
    with pytest.raises(ConfigError, match="target_m"):
        parse_experiment("seed = 1\ntarget = random\ntarget_n = 3\n")


def test_noise_file():
    cfg = parse_noise("rate_1q = 0.001\nmeas_flip = 0.01, 0.02\nslot.0 = XI:0.1, zz:0.02\nmeas_exact = true\n")
    assert cfg.rate_1q == 0.001 and cfg.meas_flip == [0.01, 0.02] and cfg.meas_exact
    assert cfg.slots == {0: {"XI": 0.1, "ZZ": 0.02}}


@pytest.mark.parametrize(
    "text,line",
    [
        ("rate_1q = 0.1\nslot.x = XI:0.1\n", 2),
        ("slot.1 = XQ:0.1\n", 1),
        ("slot.1 = XI-0.1\n", 1),
        ("rate_2q = 2\n", 1),
        ("epsilon = 0.9\n", 1),
        ("meas_flip = a, b\n", 1),
    ],
)
def test_noise_errors(text, line):
    with pytest.raises(ConfigError, match=rf"^nz:{line}:"):
        parse_noise(text, "nz")


def test_relative_paths(tmp_path):
    (tmp_path / "noise.cfg").write_text("rate_meas = 0.02\n")
    (tmp_path / "exp.cfg").write_text("seed = 1\ntarget = ghz\ntarget_n = 2\nnoise = noise.cfg\nout = results\n")
    cfg = load_experiment(str(tmp_path / "exp.cfg"))
    assert cfg.noise.rate_meas == 0.02
    assert cfg.out == str(tmp_path / "results")


def test_missing_files(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment(str(tmp_path / "absent.cfg"))
    (tmp_path / "exp.cfg").write_text("seed = 1\ntarget = ghz\ntarget_n = 2\nnoise = gone.cfg\n")
    with pytest.raises(ConfigError, match=":4: noise:"):
        load_experiment(str(tmp_path / "exp.cfg"))
