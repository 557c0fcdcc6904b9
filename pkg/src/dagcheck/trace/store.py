"""
Persistent set of trace hashes used for rejection sampling.

On-disk format: one 64-character lowercase hex digest per line, append-only.
A torn last line (crash during append) is ignored on reopen.
"""

from __future__ import annotations

import os
import re
from pathlib import Path
from threading import Lock
from typing import Iterator, Set, Union

import structlog

from dagcheck.errors import StoreError

logger = structlog.getLogger(__name__)

DIGEST_WIDTH = 64
_HEX = re.compile(r"^[0-9a-f]{64}$")


class TraceStore:
    """Trace-hash store; one writer per file."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._hashes: Set[str] = set()
        self._lock = Lock()
        self._file = None
        self._open()

    def _open(self) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            torn = False
            if self.path.exists():
                with open(self.path, "r", encoding="ascii", newline="") as f:
                    for raw in f:
                        line = raw.strip()
                        if _HEX.match(line) and raw.endswith("\n"):
                            self._hashes.add(line)
                        elif line:
                            logger.warning("Ignoring malformed store line.", path=str(self.path), line=line[:80])
                        torn = not raw.endswith("\n")
            self._file = open(self.path, "a", encoding="ascii")
            if torn:
                # terminate the torn record so the next append starts a fresh line
                self._file.write("\n")
        except OSError as e:
            raise StoreError(f"cannot open trace store {self.path}: {e}") from e
        logger.debug("Trace store opened.", path=str(self.path), size=len(self._hashes))

    def __contains__(self, digest: str) -> bool:
        return digest in self._hashes

    def contains(self, digest: str) -> bool:
        return digest in self._hashes

    def __len__(self) -> int:
        return len(self._hashes)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._hashes))

    def insert(self, digest: str) -> bool:
        """Returns True iff the digest was new."""
        digest = digest.lower()
        if not _HEX.match(digest):
            raise ValueError(f"not a {DIGEST_WIDTH}-hex digest: {digest!r}")
        with self._lock:
            if digest in self._hashes:
                return False
            if self._file is None:
                raise StoreError(f"trace store {self.path} is closed")
            try:
                self._file.write(digest + "\n")
                self._file.flush()
            except OSError as e:
                raise StoreError(f"cannot append to trace store {self.path}: {e}") from e
            self._hashes.add(digest)
            return True

    def flush(self) -> None:
        if self._file is not None:
            try:
                self._file.flush()
                os.fsync(self._file.fileno())
            except OSError as e:
                raise StoreError(f"cannot flush trace store {self.path}: {e}") from e

    def close(self) -> None:
        if self._file is not None:
            self.flush()
            self._file.close()
            self._file = None

    def __enter__(self) -> "TraceStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def store_insert(store: TraceStore, digest: str) -> bool:
    return store.insert(digest)
