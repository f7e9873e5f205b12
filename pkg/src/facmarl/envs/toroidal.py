"""Geometry on the square torus [0, world_size)^2."""

import numpy as np


def wrap(positions, world_size):
    return np.mod(positions, world_size)


def toroidal_delta(p, q, world_size):
    """Shortest displacement from p to q, per axis in (-L/2, L/2].

    Broadcasts over leading axes; the last axis holds coordinates.
    """
    d = np.asarray(q, dtype=np.float64) - np.asarray(p, dtype=np.float64)
    half = world_size / 2.0
    # shift into (-L/2, L/2]: values exactly at -L/2 map to +L/2
    d = np.mod(d + half, world_size) - half
    return np.where(d == -half, half, d)


def toroidal_distance(p, q, world_size):
    d = toroidal_delta(p, q, world_size)
    return np.sqrt(np.sum(d * d, axis=-1))
