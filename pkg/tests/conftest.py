import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

N_RANDOM = 500


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_ket():
    """长度 dim 的随机归一化复向量"""
    def make(rng, dim):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return v / np.linalg.norm(v)
    return make


@pytest.fixture
def random_density(random_ket):
    """秩为 rank 的随机密度矩阵（迹为 1）"""
    def make(rng, dim, rank=None):
        rank = rank or dim
        weights = rng.random(rank)
        weights = weights / weights.sum()
        rho = np.zeros((dim, dim), dtype=complex)
        for w in weights:
            v = random_ket(rng, dim)
            rho += w * np.outer(v, v.conj())
        return rho
    return make


@pytest.fixture
def random_unitary():
    """QR 分解得到的 Haar 随机酉矩阵"""
    def make(rng, dim):
        z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        return q * (d / np.abs(d))
    return make


@pytest.fixture
def ledger(tmp_path):
    """临时 sqlite 台账，测试结束后关闭"""
    import db

    path = str(tmp_path / "ledger.db")
    db.init_db(path)
    yield path
    db.close_db()
