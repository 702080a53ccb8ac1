from typing import List, Union

from streamsplat.core.filesystem import Filesystem
from streamsplat.core.options import Options

from ._builders import create_options
from ._parsers import get_parser
from ._yaml import ParseError


def parse_cli_args(args: List[str], filesystem: Filesystem) -> Union[Options, ParseError]:
    parser = get_parser()
    try:
        config = parser.parse_args(args)
    except ParseError as err:
        return err

    return create_options(config, filesystem)


__all__ = ["parse_cli_args", "ParseError"]
