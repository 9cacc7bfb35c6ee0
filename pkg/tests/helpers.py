import numpy as np

from ndcstar.algebra import AlgebraElement
from ndcstar.group_action import Action, GroupFunction


def scalar_fn(G, d, vals):
    return GroupFunction(G, d, [AlgebraElement(d, [v]) for v in vals])


def flip_action(G, d):
    """Swap the two blocks of ``[1, 1]`` on odd elements of an even cyclic group."""
    perms = [[0, 1] if g % 2 == 0 else [1, 0] for g in G]
    return Action(G, d, perms, [[np.eye(1), np.eye(1)] for _ in G])
