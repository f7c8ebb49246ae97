"""Bounded instance store with metric-parameterized k-NN search.

Instances are kept in arrival order. Eviction removes the oldest entry;
editing removes specific retrieved neighbours. Search is a linear scan,
which is the right tool here: the base is small (hundreds of instances)
and the metric changes over time, so a spatial index would be stale the
moment it was built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np

from .errors import DimensionMismatchError, EmptyBaseError, SchemaError


@dataclass(eq=False)
class Instance:
    """One labelled stream element.

    raw holds the original attribute values (floats and category strings),
    encoded is the real-valued vector actually used for distances, and
    arrival_index is a globally increasing position in the stream.
    """

    raw: tuple
    encoded: np.ndarray = field(repr=False)
    label: int
    arrival_index: int


class InstanceBase:
    """Arrival-ordered store of at most `capacity` instances.

    Mutations keep a contiguous numpy block of encoded vectors aligned with
    the instance list so that knn is a single vectorized scan. A transient
    overshoot of one instance beyond capacity is allowed between insert and
    evict_to_capacity.
    """

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._items: List[Instance] = []
        self._vectors: np.ndarray | None = None  # row buffer, valid region [start, start+size)
        self._labels: np.ndarray | None = None
        self._arrivals: np.ndarray | None = None
        self._start = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def dim(self) -> int | None:
        return None if self._vectors is None else self._vectors.shape[1]

    @property
    def instances(self) -> List[Instance]:
        """Snapshot of the stored instances in arrival order."""
        return list(self._items)

    def encoded_matrix(self) -> np.ndarray:
        """View of the stored encoded vectors, one row per instance."""
        if self._vectors is None:
            return np.empty((0, 0))
        return self._vectors[self._start : self._start + self._size]

    def labels(self) -> np.ndarray:
        if self._labels is None:
            return np.empty(0, dtype=np.int64)
        return self._labels[self._start : self._start + self._size]

    def _allocate(self, dim: int) -> None:
        rows = max(2 * self.capacity + 2, 16)
        self._vectors = np.empty((rows, dim), dtype=np.float64)
        self._labels = np.empty(rows, dtype=np.int64)
        self._arrivals = np.empty(rows, dtype=np.int64)

    def _make_room(self) -> None:
        rows = self._vectors.shape[0]
        if self._start + self._size < rows:
            return
        if self._size == rows:  # grow, preserving arrival order
            self._vectors = np.concatenate([self._vectors, np.empty_like(self._vectors)])
            self._labels = np.concatenate([self._labels, np.empty_like(self._labels)])
            self._arrivals = np.concatenate([self._arrivals, np.empty_like(self._arrivals)])
            return
        # slide the live region back to the front of the buffer
        region = slice(self._start, self._start + self._size)
        self._vectors[: self._size] = self._vectors[region].copy()
        self._labels[: self._size] = self._labels[region].copy()
        self._arrivals[: self._size] = self._arrivals[region].copy()
        self._start = 0

    def insert(self, inst: Instance) -> None:
        """Append one instance; never evicts."""
        encoded = np.asarray(inst.encoded, dtype=np.float64)
        if encoded.ndim != 1:
            raise SchemaError(f"encoded vector must be 1-D, got shape {encoded.shape}")
        if self._vectors is None:
            self._allocate(encoded.shape[0])
        elif encoded.shape[0] != self._vectors.shape[1]:
            raise SchemaError(
                f"instance dim {encoded.shape[0]} does not match base dim {self._vectors.shape[1]}"
            )
        self._make_room()
        pos = self._start + self._size
        self._vectors[pos] = encoded
        self._labels[pos] = inst.label
        self._arrivals[pos] = inst.arrival_index
        self._items.append(inst)
        self._size += 1

    def knn(self, query, k: int, metric: np.ndarray) -> List[Tuple[Instance, float]]:
        """The min(k, size) nearest instances, ascending by distance.

        Exact distance ties are broken towards the higher arrival index so
        the newest instances win. Raises EmptyBaseError when no neighbours
        exist.
        """
        if self._size == 0:
            raise EmptyBaseError("no neighbours: the instance base is empty")
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(query, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self._vectors.shape[1]:
            raise DimensionMismatchError(
                f"query dim {q.shape} does not match base dim {self._vectors.shape[1]}"
            )
        region = slice(self._start, self._start + self._size)
        diffs = self._vectors[region] - q
        quad = np.einsum("ij,ij->i", diffs @ metric, diffs)
        distances = np.sqrt(np.maximum(quad, 0.0))
        order = np.lexsort((-self._arrivals[region], distances))
        top = order[: min(k, self._size)]
        return [(self._items[i], float(distances[i])) for i in top]

    def _compact(self, keep: np.ndarray) -> int:
        removed = int(self._size - keep.sum())
        if removed == 0:
            return 0
        region = slice(self._start, self._start + self._size)
        kept = int(keep.sum())
        self._vectors[self._start : self._start + kept] = self._vectors[region][keep]
        self._labels[self._start : self._start + kept] = self._labels[region][keep]
        self._arrivals[self._start : self._start + kept] = self._arrivals[region][keep]
        self._items = [item for item, flag in zip(self._items, keep) if flag]
        self._size = kept
        return removed

    def edit_after_correct(self, arriving: Instance, neighbours: Iterable[Instance]) -> int:
        """Drop retrieved neighbours that share the arriving instance's label.

        Only called after a correct prediction. Neighbours already gone from
        the base are ignored. Returns the number of removals.
        """
        targets = {n.arrival_index for n in neighbours if n.label == arriving.label}
        if not targets or self._size == 0:
            return 0
        region = slice(self._start, self._start + self._size)
        keep = ~np.isin(self._arrivals[region], list(targets))
        return self._compact(keep)

    def evict_to_capacity(self) -> int:
        """Remove oldest instances until size <= capacity."""
        removed = 0
        while self._size > self.capacity:
            self._start += 1
            self._size -= 1
            self._items.pop(0)
            removed += 1
        return removed

    def clear(self) -> None:
        self._items = []
        self._start = 0
        self._size = 0
