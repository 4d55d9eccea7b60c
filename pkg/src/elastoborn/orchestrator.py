"""Expansion orchestrator for running several channels in parallel."""
import asyncio
from collections.abc import Callable, Iterable
import json
import logging
from pathlib import Path
from typing import Any

from elastoborn.calculus import Direction
from elastoborn.channels import BaseChannel, ExpansionResult, PPChannel, PSChannel, SPChannel, SSChannel
from elastoborn.channels.base import DEFAULT_TOLERANCE
from elastoborn.settings import thread_count
from elastoborn.tensors import Background, Perturbation
from elastoborn.utils.field_io import write_any

logger = logging.getLogger(__name__)

CHANNEL_MAP: dict[str, type[BaseChannel]] = {
    'pp': PPChannel,
    'sp': SPChannel,
    'ps': PSChannel,
    'ss': SSChannel,
}


async def gather_in_threads[T, R](fn: Callable[[T], R], items: Iterable[T], limit: int | None = None) -> list[R]:
    """Map fn over items on worker threads, at most `limit` at a time, keeping input order."""
    semaphore = asyncio.Semaphore(limit or thread_count())

    async def run(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    return list(await asyncio.gather(*(run(item) for item in items)))


class ExpansionOrchestrator:
    """Runs the requested channels for one perturbation and incidence."""

    def __init__(
        self,
        perturbation: Perturbation,
        background: Background,
        theta: Direction | str,
        alpha: Direction | str | None = None,
        tolerance: float = DEFAULT_TOLERANCE,
    ):
        self.perturbation = perturbation
        self.background = background
        self.theta = Direction.parse(theta)
        self.alpha = None if alpha is None else Direction.parse(alpha)
        self.tolerance = tolerance
        self.errors: dict[str, str] = {}
        self._semaphore: asyncio.Semaphore | None = None

    async def run_channel(self, channel_class: type[BaseChannel]) -> tuple[str, ExpansionResult | None]:
        """Run a single channel on a worker thread."""
        channel = channel_class(self.perturbation, self.background, self.theta, self.alpha, self.tolerance)

        if not channel.is_applicable():
            self.errors[channel.name] = f'needs a polarization orthogonal to {self.theta}'
            logger.warning('Skipping %s: %s', channel.name, self.errors[channel.name])
            return channel.name, None

        if self._semaphore is None:
            self._semaphore = asyncio.Semaphore(thread_count())
        try:
            async with self._semaphore:
                result = await asyncio.to_thread(channel.expand)
        except Exception as e:
            print(f"Error running {channel.name}: {e}")
            logger.exception('Channel %s failed', channel.name)
            self.errors[channel.name] = str(e)
            return channel.name, None

        failing = {k: v for k, v in result.residuals.items() if v > self.tolerance}
        if failing:
            logger.warning('Channel %s residuals above %.1e: %s', channel.name, self.tolerance, failing)
        return channel.name, result

    async def run_all_channels(self, channel_names: list[str] | None = None) -> dict[str, ExpansionResult | None]:
        """Run all channels in parallel."""
        if channel_names is None:
            channel_names = list(CHANNEL_MAP.keys())

        for name in channel_names:
            if name not in CHANNEL_MAP:
                self.errors[name] = f'unknown channel, expected one of {", ".join(CHANNEL_MAP)}'
                logger.warning('Skipping %s: %s', name, self.errors[name])
        channel_classes = [
            CHANNEL_MAP[name]
            for name in channel_names
            if name in CHANNEL_MAP
        ]

        self._semaphore = asyncio.Semaphore(thread_count())
        tasks = [self.run_channel(channel_class) for channel_class in channel_classes]
        results = await asyncio.gather(*tasks)

        return dict(results)

    def passed(self, results: dict[str, ExpansionResult | None]) -> bool:
        return not self.errors and all(r is not None and r.within(self.tolerance) for r in results.values())

    def summarize(self, results: dict[str, ExpansionResult | None]) -> dict[str, Any]:
        summary: dict[str, Any] = {}
        for name, result in results.items():
            if result is None:
                summary[name] = {'error': self.errors.get(name, 'not run')}
                continue
            summary[name] = {
                'channel': result.channel.name,
                'theta': str(result.channel.theta),
                'alpha': None if result.channel.alpha is None else str(result.channel.alpha),
                'coefficients': {str(k): v for k, v in result.labels.items()},
                'residuals': result.residuals,
                'passed': result.within(self.tolerance),
            }
        return summary

    def save_results(self, results: dict[str, ExpansionResult | None], output_dir: str | Path) -> None:
        """Write coefficient fields and one residual file per channel."""
        output_path = Path(output_dir)
        output_path.mkdir(parents=True, exist_ok=True)

        summary = self.summarize(results)
        for name, result in results.items():
            if result is not None:
                for singularity, coefficient in result.coefficients.items():
                    write_any(coefficient, output_path / f'{name}_{result.labels[singularity]}.f64')
                write_any(result.front_identity, output_path / f'{name}_front.f64')

            residual_file = output_path / f'{name}-residuals.json'
            with open(residual_file, 'w') as f:
                json.dump({name: summary[name]}, f, indent=2, default=str)
            print(f"Results saved to {residual_file}")
