"""Uniform experience replay over named transition arrays."""

import numpy as np

_CHUNK = 65536


class ReplayBuffer:
    """Fixed-capacity ring; storage grows in chunks as transitions arrive.

    Eviction is strictly oldest-first and sampling is uniform with
    replacement over the current contents.
    """

    def __init__(self, capacity):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.insert_count = 0
        self._data = None
        self._allocated = 0

    def __len__(self):
        return min(self.insert_count, self.capacity)

    def _ensure(self, transition, rows_needed):
        if self._data is None:
            self._data = {}
            for k, v in transition.items():
                v = np.asarray(v)
                self._data[k] = np.empty((0,) + v.shape, dtype=v.dtype)
        if rows_needed > self._allocated < self.capacity:
            new = min(self.capacity, max(rows_needed, self._allocated + _CHUNK))
            for k, arr in self._data.items():
                grown = np.empty((new,) + arr.shape[1:], dtype=arr.dtype)
                grown[:self._allocated] = arr[:self._allocated]
                self._data[k] = grown
            self._allocated = new

    def push(self, transition):
        slot = self.insert_count % self.capacity
        self._ensure(transition, min(self.capacity, slot + 1))
        for k, v in transition.items():
            self._data[k][slot] = v
        self.insert_count += 1

    def sample(self, batch_size, rng):
        size = len(self)
        if size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, size, size=batch_size)
        return {k: arr[idx] for k, arr in self._data.items()}

    def state_arrays(self):
        """Everything needed to restore the buffer bit-exactly."""
        out = {"replay_insert_count": np.array([self.insert_count])}
        if self._data is not None:
            for k, arr in self._data.items():
                out[f"replay_{k}"] = arr[:self._allocated]
        return out

    def load_state_arrays(self, arrays):
        self.insert_count = int(arrays["replay_insert_count"][0])
        data = {k[len("replay_"):]: np.array(v) for k, v in arrays.items()
                if k.startswith("replay_") and k != "replay_insert_count"}
        if data:
            self._data = data
            self._allocated = next(iter(data.values())).shape[0]


def replay_push(buffer: ReplayBuffer, transition):
    buffer.push(transition)


def replay_sample(buffer: ReplayBuffer, batch_size, rng):
    return buffer.sample(batch_size, rng)
