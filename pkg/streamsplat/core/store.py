from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from streamsplat.core.errors import InvariantError
from streamsplat.core.gaussian import UNASSIGNED, Gaussian, GaussianArrays


class GlobalGaussianStore:
    """
    Identity-indexed set of live Gaussians.
    Ids are issued by a monotone counter and never reused after removal.
    """

    def __init__(self) -> None:
        self._gaussians: Dict[int, Gaussian] = {}
        self._next_id = 0
        self.frame_index = 0
        self._snapshot: Optional[GaussianArrays] = None

    @property
    def gaussians(self) -> Mapping[int, Gaussian]:
        return MappingProxyType(self._gaussians)

    @property
    def next_id(self) -> int:
        return self._next_id

    def __len__(self) -> int:
        return len(self._gaussians)

    def __contains__(self, id: object) -> bool:
        return id in self._gaussians

    def get(self, id: int) -> Optional[Gaussian]:
        return self._gaussians.get(id)

    def ids(self) -> List[int]:
        return sorted(self._gaussians)

    def insert(self, candidates: Sequence[Gaussian], frame: Optional[int] = None) -> List[int]:
        """
        Stores every candidate under a fresh id. Either the whole batch is inserted or nothing is.

        Raises:
            InvariantError: A candidate already carries an id.
        """
        for index, candidate in enumerate(candidates):
            if candidate.id != UNASSIGNED:
                raise InvariantError(f"candidate {index} already has id {candidate.id}")

        birth_frame = self.frame_index if frame is None else frame
        assigned: List[int] = []
        for candidate in candidates:
            id = self._next_id
            self._gaussians[id] = candidate.with_id(id, birth_frame)
            self._next_id += 1
            assigned.append(id)

        if assigned:
            self._snapshot = None

        return assigned

    def remove(self, ids: Iterable[int]) -> int:
        removed = 0
        for id in set(ids):
            if self._gaussians.pop(int(id), None) is not None:
                removed += 1

        if removed:
            self._snapshot = None

        return removed

    def snapshot(self) -> GaussianArrays:
        """
        Read-only struct-of-arrays view of the live Gaussians, sorted by id.
        """
        if self._snapshot is None:
            self._snapshot = GaussianArrays.from_gaussians([self._gaussians[id] for id in self.ids()])

        return self._snapshot
