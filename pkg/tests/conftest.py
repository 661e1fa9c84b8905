import pytest

from menzerath.corpus import load_distribution, bundled_path
from menzerath.model import MaParams, SmmaParams

# Published fitting results for the two bundled corpora: value, standard error.
TABLE2 = {
    ("MA", "brown"): {"A": (2.5236, 0.4705), "b": (8.2039, 0.1864), "c": (1.1595, 0.0255), "R": 0.9991, "R2": 0.9982},
    ("MA", "metu"): {"A": (0.7454, 0.2858), "b": (8.9357, 0.3200), "c": (1.0303, 0.0359), "R": 0.9973, "R2": 0.9945},
    ("SMMA", "brown"): {"phi": (0.9281, 0.1873), "alpha": (8.2014, 0.1886), "theta": (4.4173, 0.0262),
                        "R": 0.9991, "R2": 0.9982},
    ("SMMA", "metu"): {"phi": (-0.2871, 0.3864), "alpha": (8.9299, 0.3248), "theta": (4.3970, 0.0371),
                       "R": 0.9973, "R2": 0.9945},
}

OMEGA = {"brown": 26, "metu": 29}

# Printed predicted columns, lengths 1..22 (Brown) and 1..25 (METU).
TABLE1_PREDICTED = {
    ("MA", "brown"): [1, 73, 639, 2123, 4154, 5814, 6459, 6059, 4994, 3718, 2549, 1632, 987, 569, 314, 167,
                      86, 43, 21, 10, 5, 2],
    ("SMMA", "brown"): [1, 73, 640, 2124, 4154, 5813, 6457, 6056, 4992, 3716, 2548, 1632, 987, 569, 314, 167,
                        86, 43, 21, 10, 5, 2],
    ("MA", "metu"): [0, 47, 622, 2900, 7601, 13835, 19576, 23040, 23556, 21554, 18028, 14001, 10217, 7071,
                     4675, 2970, 1822, 1084, 627, 354, 195, 106, 56, 29, 15],
    ("SMMA", "metu"): [0, 47, 623, 2903, 7605, 13834, 19570, 23028, 23542, 21541, 18018, 13994, 10214, 7070,
                       4675, 2971, 1823, 1085, 628, 354, 196, 106, 56, 29, 15],
}


def published_ma(corpus):
    t = TABLE2[("MA", corpus)]
    return MaParams(t["A"][0], t["b"][0], t["c"][0])


def published_smma(corpus):
    t = TABLE2[("SMMA", corpus)]
    return SmmaParams(t["phi"][0], t["alpha"][0], t["theta"][0], OMEGA[corpus])


@pytest.fixture(scope="session")
def brown():
    return load_distribution(bundled_path("brown"))


@pytest.fixture(scope="session")
def metu():
    return load_distribution(bundled_path("metu"))


@pytest.fixture(scope="session")
def corpora(brown, metu):
    return {"brown": brown, "metu": metu}


# -- acceptance summary ----------------------------------------------------------

_ACCEPTANCE: list[tuple[str, bool, str]] = []


class _Criterion:
    def __init__(self):
        self.failed = []

    def __call__(self, cid: str, ok: bool, detail: str = "") -> bool:
        ok = bool(ok)
        _ACCEPTANCE.append((cid, ok, detail))
        if not ok:
            self.failed.append(f"{cid}: {detail}")
        return ok

    def verify(self):
        assert not self.failed, "; ".join(self.failed)


@pytest.fixture
def criterion():
    """Record acceptance lines with criterion(id, ok, detail), then call .verify()."""
    return _Criterion()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}  {detail}")
