from abc import ABC, abstractmethod
from typing import BinaryIO, List, TextIO


class Filesystem(ABC):
    """
    Abstract base class for all Filesystems
    """

    @abstractmethod
    def exists(self, path: str) -> bool:
        """Checks if a file exists on the Filesystem

        Args:
            path (str): The path to a file

        Returns:
            bool: True if the file exists
        """

    @abstractmethod
    def openread(self, path: str) -> TextIO:
        """Opens a text file in read mode

        Args:
            path (str): The path to a file

        Raises:
            FileNotFoundError: The file does not exist
        """

    @abstractmethod
    def openbin(self, path: str, mode: str = "r") -> BinaryIO:
        """Opens a binary file. Parent directories are created when writing.

        Args:
            path (str): The path to a file
            mode (str): "r" to read, "w" to write

        Raises:
            FileNotFoundError: The file does not exist and mode is "r"
        """

    @abstractmethod
    def makedirs(self, path: str) -> None:
        """Creates a directory and all missing parents. Existing directories are left untouched.

        Args:
            path (str): The directory path
        """

    @abstractmethod
    def listdir(self, path: str) -> List[str]:
        """Lists the names of the entries of a directory in sorted order

        Args:
            path (str): The directory path

        Raises:
            FileNotFoundError: The directory does not exist
        """

    def readbytes(self, path: str) -> bytes:
        with self.openbin(path, "r") as file:
            return file.read()

    def writebytes(self, path: str, data: bytes) -> None:
        with self.openbin(path, "w") as file:
            file.write(data)

    def readtext(self, path: str) -> str:
        with self.openread(path) as file:
            return file.read()

    def writetext(self, path: str, text: str) -> None:
        self.writebytes(path, text.encode("utf-8"))
