"""Worker-count plumbing shared by the parallel code paths."""

import os

_override: int | None = None


def default_workers() -> int:
    if _override is not None:
        return _override
    try:
        return max(1, int(os.environ.get("CONEKIT_THREADS", "1")))
    except ValueError:
        return 1


def set_default_workers(n: int | None) -> None:
    global _override
    _override = None if n is None else max(1, int(n))
