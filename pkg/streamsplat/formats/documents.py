from typing import Any, Dict, Mapping

import yaml

from streamsplat.core.errors import FormatError, MissingFileError
from streamsplat.core.filesystem import Filesystem


def read_document(fs: Filesystem, path: str) -> Dict[str, Any]:
    """
    Reads a YAML mapping.

    Raises:
        MissingFileError: The file does not exist.
        FormatError: The file is not valid YAML or not a mapping.
    """
    if not fs.exists(path):
        raise MissingFileError(path)

    try:
        with fs.openread(path) as file:
            document = yaml.load(file, Loader=yaml.SafeLoader)
    except yaml.YAMLError as err:
        raise FormatError(f"{path}: invalid YAML ({err})") from None

    if document is None:
        return {}

    if not isinstance(document, dict):
        raise FormatError(f"{path}: expected a mapping at the top level")

    return document


def write_document(fs: Filesystem, path: str, document: Mapping[str, Any]) -> None:
    fs.writetext(path, yaml.safe_dump(dict(document), sort_keys=False, default_flow_style=None))


def require(document: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in document:
        raise FormatError(f"{path}: missing key '{key}'")

    return document[key]
