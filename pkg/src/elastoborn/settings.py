"""Process-wide runtime knobs read from the environment."""
import os

THREADS_ENV = 'ELASTOBORN_THREADS'


def thread_count() -> int:
    """Worker cap from ELASTOBORN_THREADS, defaulting to the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            value = 0
        if value > 0:
            return value
    return os.cpu_count() or 1
