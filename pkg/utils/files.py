"""
File output helpers.
Every file the simulator produces is written next to its destination under
a temporary name and renamed into place only once complete, so a failed run
never leaves a partial file behind.
"""

import os
import tempfile
from contextlib import contextmanager
from typing import IO, Iterator

from utils.logger import setup_logger

logger = setup_logger("files")


@contextmanager
def atomic_write(path: str, prefix: str = ".tmp-") -> Iterator[IO[str]]:
    """
    Open a text stream whose content replaces `path` when the block succeeds.

    If the block raises, the temporary file is removed and `path` is left
    untouched.

    Args:
        path: Destination file path
        prefix: Prefix of the temporary file name

    Yields:
        Writable text stream

    Raises:
        OSError: if the temporary file cannot be created or renamed
    """
    directory = os.path.dirname(os.path.abspath(path))
    suffix = os.path.splitext(path)[1]
    handle, temp_path = tempfile.mkstemp(prefix=prefix, suffix=suffix, dir=directory)
    try:
        with os.fdopen(handle, 'w', newline='') as out:
            yield out
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        logger.debug(f"Discarded partial output for {path}")
        raise
