"""Replica worker pool.

Replicas run in worker processes behind an asyncio loop on uvloop; results come
back in replica order whatever the completion order.
"""

import logging
import asyncio
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

import uvloop
from typeguard import typechecked

from .exceptions import DomainError

LOG = logging.getLogger(__name__)

T = TypeVar("T")


class ReplicaPool:
    """Runs independent replicas on up to `threads` worker processes."""

    __slots__ = ("_threads",)

    @staticmethod
    @typechecked
    def _check_threads(threads: int) -> None:
        if threads < 1:
            raise DomainError(f"thread count ({threads}) must be at least 1")

    def __init__(self, threads: int = 1) -> None:
        """Create a pool.

        Args:
            threads (int): worker count, 1 runs every replica inline
        """
        self._check_threads(threads)
        self._threads = threads

    @property
    def threads(self) -> int:
        """Return the worker count."""
        return self._threads

    async def async_map(
        self, func: Callable[..., T], arguments: Sequence[tuple[Any, ...]]
    ) -> list[T]:
        """Run func(*args) for each argument tuple.

        func must be a picklable module-level function when threads > 1.

        Returns:
            list[T]: results in the order of arguments
        """
        if self._threads == 1 or len(arguments) <= 1:
            return [func(*args) for args in arguments]
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=self._threads) as executor:
            task_list = [
                loop.run_in_executor(executor, func, *args) for args in arguments
            ]
            return list(await asyncio.gather(*task_list))

    def map(
        self, func: Callable[..., T], arguments: Sequence[tuple[Any, ...]]
    ) -> list[T]:
        """Run async_map to completion on a fresh uvloop loop."""
        LOG.debug(
            "running %d replicas of %s on %d workers",
            len(arguments),
            getattr(func, "__name__", func),
            self._threads,
        )
        if self._threads == 1:
            return [func(*args) for args in arguments]
        asyncio.set_event_loop_policy(uvloop.EventLoopPolicy())
        loop = asyncio.new_event_loop()
        try:
            return loop.run_until_complete(self.async_map(func, arguments))
        finally:
            loop.close()

    def __repr__(self) -> str:
        return f"ReplicaPool(threads={self._threads})"
