import itertools
from pathlib import Path

import numpy as np
import pytest

from ldpcsim.channel import ChannelConfig, llr_init, modulate, transmit
from ldpcsim.code import generate_regular, load_alist

DATA = Path(__file__).parent / "data"

# Feasible (n, wc, wr) triples for small random regular codes, n <= 24.
SMALL_REGULAR_PARAMS = [
    (12, 2, 4),
    (12, 3, 4),
    (16, 2, 4),
    (18, 3, 6),
    (20, 2, 4),
    (20, 3, 4),
    (21, 2, 6),
    (24, 2, 4),
    (24, 3, 4),
    (24, 3, 6),
]


@pytest.fixture(scope="session")
def hamming74():
    """4x7 parity matrix of the (7,4) Hamming code (one redundant row)."""
    return load_alist((DATA / "hamming_4x7.alist").read_text())


@pytest.fixture(scope="session")
def hamming_codewords(hamming74):
    """All 16 codewords, found by exhaustive enumeration of 128 words."""
    from ldpcsim.code import syndrome_ok

    words = [
        np.array(bits, dtype=np.uint8)
        for bits in itertools.product((0, 1), repeat=7)
        if syndrome_ok(hamming74, np.array(bits, dtype=np.uint8))
    ]
    assert len(words) == 16
    return words


@pytest.fixture(scope="session")
def fixture252():
    """The 252x504 (3,6)-regular code used by the scale scenarios."""
    return generate_regular(504, 3, 6, seed=1)


def noisy_prior(H, ebno_db, seed):
    """All-zero transmit at the given Eb/N0; deterministic per seed."""
    cfg = ChannelConfig(ebno_db=ebno_db, rate=0.5, seed=seed)
    return llr_init(transmit(modulate(np.zeros(H.n, dtype=np.uint8)), cfg), cfg)
