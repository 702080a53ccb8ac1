from typing import Optional

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CANCELED = 130


class StreamSplatError(RuntimeError):
    """
    Base class of all errors raised by streamsplat.
    Every error knows the process exit code it maps to.
    """

    exit_code = EXIT_DATA


class ConfigurationError(StreamSplatError):
    exit_code = EXIT_USAGE


class InvariantError(StreamSplatError):
    pass


class PredictorContractError(StreamSplatError):
    pass


class SpecError(StreamSplatError):
    exit_code = EXIT_USAGE


class FormatError(StreamSplatError):
    pass


class SceneFormatError(FormatError):
    def __init__(self, message: str, record: Optional[int] = None) -> None:
        if record is not None:
            message = f"record {record}: {message}"

        super().__init__(message)
        self.record = record


class GirFormatError(FormatError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class MissingFileError(StreamSplatError, FileNotFoundError):
    def __init__(self, path: str) -> None:
        super().__init__(f"File {path} does not exist!")
        self.path = path


class FrameProcessingError(StreamSplatError):
    """
    Wraps an error raised while processing a single frame of a sequence.
    Keeps the exit code of the underlying error.
    """

    def __init__(self, frame_index: int, cause: Exception) -> None:
        super().__init__(f"frame {frame_index}: {get_error_message(cause)}")
        self.frame_index = frame_index
        self.cause = cause
        self.exit_code = exit_code_of(cause)


def error_type(err: Exception) -> str:
    """
    Returns the type of the exception as a string.
    """
    return type(err).__name__


def get_error_message(err: Exception) -> str:
    """
    Returns the error message of the exception as a string in the form '{error_type(err)}: {str(err)}'
    """
    return f"{error_type(err)}: {err}"


def exit_code_of(err: Exception) -> int:
    if isinstance(err, StreamSplatError):
        return err.exit_code

    if isinstance(err, (FileNotFoundError, ValueError)):
        return EXIT_DATA

    return EXIT_USAGE
