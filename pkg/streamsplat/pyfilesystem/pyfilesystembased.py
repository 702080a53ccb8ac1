import os
from pathlib import PurePosixPath
from typing import BinaryIO, List, TextIO, cast

import fs.base
import fs.errors

from streamsplat.core.filesystem import Filesystem


class PyFilesystemBased(Filesystem):
    """
    A Filesystem based on PyFilesystem2
    """

    def __init__(self, internal_fs: fs.base.FS, dir: str = "/", home: str = "/") -> None:
        self._internal_fs = internal_fs
        self._curdir = PurePosixPath(dir)
        self._homedir = PurePosixPath(home)

    @property
    def current_dir(self) -> PurePosixPath:
        return self._curdir

    @property
    def home(self) -> PurePosixPath:
        return self._homedir

    @property
    def internal_fs(self) -> fs.base.FS:
        """Returns the internally used PyFilesystem

        Returns:
            fs.base.FS: The internal PyFilesystem
        """
        return self._internal_fs

    def _resolve(self, path: str) -> str:
        path = path.replace("~", str(self._homedir))
        return str(self._curdir.joinpath(path))

    def exists(self, path: str) -> bool:
        return self.internal_fs.exists(self._resolve(path))

    def openread(self, path: str) -> TextIO:
        resolved = self._resolve(path)
        try:
            return cast(TextIO, self.internal_fs.open(resolved, mode="r"))
        except (fs.errors.ResourceNotFound, fs.errors.FileExpected):
            raise FileNotFoundError(path)

    def openbin(self, path: str, mode: str = "r") -> BinaryIO:
        resolved = self._resolve(path)
        if mode == "w":
            self._create_missing_parent_dirs(resolved)

        try:
            return cast(BinaryIO, self.internal_fs.openbin(resolved, mode=mode))
        except (fs.errors.ResourceNotFound, fs.errors.FileExpected):
            raise FileNotFoundError(path)

    def makedirs(self, path: str) -> None:
        self.internal_fs.makedirs(self._resolve(path), recreate=True)

    def listdir(self, path: str) -> List[str]:
        try:
            return sorted(self.internal_fs.listdir(self._resolve(path)))
        except (fs.errors.ResourceNotFound, fs.errors.DirectoryExpected):
            raise FileNotFoundError(path)

    def _create_missing_parent_dirs(self, path: str) -> None:
        parent = os.path.dirname(path)
        if parent and not self.internal_fs.exists(parent):
            self.internal_fs.makedirs(parent, recreate=True)
