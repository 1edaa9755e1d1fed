"""Worker-count policy: COSTLENS_THREADS caps parallelism package-wide."""

import os

ENV_THREADS = "COSTLENS_THREADS"

_DEFAULT_WORKERS = 4


def worker_count(requested: int | None = None) -> int:
    """Resolve the effective worker count.

    ``requested`` wins when given; otherwise min(default, cpu count). The
    COSTLENS_THREADS environment variable caps the result either way.
    """
    if requested is not None:
        workers = max(1, int(requested))
    else:
        workers = max(1, min(_DEFAULT_WORKERS, os.cpu_count() or 1))
    cap = os.environ.get(ENV_THREADS)
    if cap is not None:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            pass
    return workers
