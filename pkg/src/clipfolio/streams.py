"""Named, independent random streams derived from one integer seed."""

import numpy as np

STREAMS = {"data": 0, "init": 1, "rollout": 2, "critic": 3, "minibatch": 4}


def rng(seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), STREAMS[stream]])
