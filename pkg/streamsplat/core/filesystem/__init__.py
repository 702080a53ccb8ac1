from ._filesystem import Filesystem

__all__ = ["Filesystem"]
