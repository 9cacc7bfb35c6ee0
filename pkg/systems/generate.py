"""Regenerate the sample system files in this directory."""

from pathlib import Path

import numpy as np

from ndcstar import samples as S
from ndcstar.algebra import AlgebraDescriptor
from ndcstar.definiteness import lift_scalar
from ndcstar.group_action import Action, FiniteGroup
from ndcstar.systemfile import SystemFile, dumps

HERE = Path(__file__).parent


def z2_scalar() -> SystemFile:
    G, A = FiniteGroup.cyclic(2), AlgebraDescriptor((1,))
    fns = {
        "psi": lift_scalar([0, 2], G, A),
        "phi": lift_scalar([1, 0.5], G, A),
        "bad": lift_scalar([0, -1], G, A),
        "h": lift_scalar([1, 0.5], G, A),
    }
    return SystemFile(A, G, Action.trivial(G, A), fns, {"main": [[0], [0, 1]]}, {"hs": ["h", "h", "h"]})


def s3_m2c() -> SystemFile:
    rng = np.random.default_rng(2024)
    G, A = S.group("S3"), AlgebraDescriptor((2, 1))
    alpha = S.action(G, A, "inner", rng)
    fns = {
        "psi": S.random_nd_positive(alpha, rng),
        "psi_central": S.random_central_nd0_positive(alpha, rng),
        "phi": S.random_pd(alpha, rng),
        "h1": S.random_pd(alpha, rng, central=True),
        "h2": S.random_pd(alpha, rng, central=True),
        "sym": S.random_symmetric(alpha, rng),
    }
    chains = {"main": [[G.identity], [0, 1, 2], list(G)]}
    return SystemFile(A, G, alpha, fns, chains, {"hs": ["h1", "h2"]})


def z4_flip() -> SystemFile:
    rng = np.random.default_rng(7)
    G, A = S.group("Z4"), AlgebraDescriptor((1, 1))
    alpha = S.action(G, A, "flip", rng)
    ex = S.classical_examples(4)
    fns = {
        "one_minus_cos": lift_scalar(ex["one_minus_cos"], G, A),
        "character_1": lift_scalar(ex["character_1"], G, A),
        "psi_central": S.random_central_nd0_positive(alpha, rng),
    }
    return SystemFile(A, G, alpha, fns, {"main": [[0], [0, 2], [0, 1, 2, 3]]})


if __name__ == "__main__":
    for name, make in [("z2_scalar", z2_scalar), ("s3_m2c", s3_m2c), ("z4_flip", z4_flip)]:
        (HERE / f"{name}.json").write_text(dumps(make().to_json()))
