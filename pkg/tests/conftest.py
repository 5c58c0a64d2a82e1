from pathlib import Path

import pytest

from bawopto.config import load_config

ROOT = Path(__file__).resolve().parents[1]
SAMPLE_CONFIG = ROOT / "configs" / "linbo3_split_post.cfg"

MINIMAL = """
[cavity]
f_c = 6.075 GHz
q_loaded = 2500
beta1 = 0.8
beta2 = 0.136

[mode A_5_0_0]
f_m = 8.3 MHz
q_m = 1e6
m_eff = 3.52e-4 g
"""


@pytest.fixture
def sample_config():
    return load_config(SAMPLE_CONFIG)


@pytest.fixture
def write_cfg(tmp_path):
    def _write(text, name="sys.cfg"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
