import numpy as np
import pytest

import fapolar as fp


@pytest.fixture(scope="session")
def nr_seq():
    return fp.nr_sequence()


@pytest.fixture(scope="session")
def code8():
    """The textbook N=8 rate-1/2 example with info set {3, 5, 6, 7}."""
    code = fp.construct(8, 3, 1)
    assert list(code.info_set) == [3, 5, 6, 7]
    return code


def random_payload(rng, code):
    return rng.integers(0, 2, code.payload_len, dtype=np.uint8)


def noisy_frame(code, sigma, seed):
    """(payload, tx codeword, channel outputs) for one reproducible frame."""
    rng = np.random.default_rng(seed)
    payload = random_payload(rng, code)
    x = fp.encode(code, fp.assemble_u(code, payload))
    y = (1.0 - 2.0 * x.astype(np.float64)) + sigma * rng.standard_normal(code.block_len)
    return payload, x, y
