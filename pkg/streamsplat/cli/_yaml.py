import os
from typing import Any, Dict, Union

import yaml

from streamsplat.core.filesystem import Filesystem


class ParseError(RuntimeError):
    def __init__(self, reason: str) -> None:
        super().__init__()
        self._reason = reason

    def __str__(self) -> str:
        return self._reason


def expand_vars(value: Any) -> Any:
    """
    Expands $VAR and ${VAR} in every string of a parsed YAML document.
    """
    if isinstance(value, str):
        return os.path.expandvars(value)

    if isinstance(value, list):
        return [expand_vars(v) for v in value]

    if isinstance(value, dict):
        return {k: expand_vars(v) for k, v in value.items()}

    return value


def parse_yaml(path: str, filesystem: Filesystem) -> Union[Dict[str, Any], ParseError]:
    try:
        with filesystem.openread(path) as file:
            document = yaml.load(file, Loader=yaml.SafeLoader)  # type: ignore
    except FileNotFoundError:
        return ParseError(f"File {path} does not exist!")
    except yaml.YAMLError as err:
        return ParseError(f"File {path} is not valid YAML: {err}")

    if document is None:
        return {}

    if not isinstance(document, dict):
        return ParseError(f"File {path} must contain a mapping")

    return expand_vars(document)
