import numpy as np
import pytest

from gmac_ldpc.protograph import build_repetition_baseline, lift, parse_protograph


@pytest.fixture(scope="session")
def proto36():
    return parse_protograph("1 2\n3 3")


@pytest.fixture(scope="session")
def code36(proto36):
    """(182, 91) regular (3,6) code."""
    return lift(proto36, 91, seed=1)


@pytest.fixture(scope="session")
def baseline_code(code36):
    """(364, 91) rate-1/4 bit-repetition construction."""
    return build_repetition_baseline(code36)


@pytest.fixture(scope="session")
def proto_r14():
    """A rate-1/4 3x4 protograph used where any valid rate-1/4 code will do."""
    return parse_protograph("3 4\n2 1 1 1\n1 2 1 1\n1 1 2 2")


@pytest.fixture(scope="session")
def code_r14(proto_r14):
    return lift(proto_r14, 91, seed=1)


@pytest.fixture(scope="session")
def tree_code():
    """Cycle-free toy code: its Tanner graph is a tree (n=7)."""
    from gmac_ldpc.protograph import code_from_dense
    H = np.array([
        [1, 1, 1, 0, 0, 0, 0],
        [0, 0, 1, 1, 1, 0, 0],
        [0, 0, 0, 0, 1, 1, 1],
    ], dtype=np.uint8)
    return code_from_dense(H)


def enumerate_codewords(code):
    """All 2^k codewords by exhaustive information-vector enumeration."""
    k = code.k
    bits = (np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1
    return code.encode(bits.astype(np.uint8))
