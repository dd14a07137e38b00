"""Console progress reporting for long-running loops."""
import contextlib
import typing as tp

from rich.progress import BarColumn, Progress

from stressnet.neural.train import EpochRecord


def make_progress(enabled: bool = True) -> Progress:
    return Progress(
        "[progress.description]{task.description}",
        BarColumn(),
        "[progress.percentage]{task.percentage:>3.0f}%",
        "{task.fields[status]}",
        disable=not enabled,
        transient=True
    )


@contextlib.contextmanager
def epoch_progress(
    description: str,
    total: int,
    enabled: bool = True
) -> tp.Iterator[tp.Callable[[EpochRecord], None]]:
    """
    Yield an `on_epoch` hook that advances a progress bar.

    The bar shows the latest epoch loss next to the percentage.
    """
    with make_progress(enabled) as progress:
        task = progress.add_task(description, total=total, status='')

        def advance(record: EpochRecord) -> None:
            progress.update(
                task, advance=1, status=f'loss={record.loss:.4f}'
            )

        yield advance


@contextlib.contextmanager
def step_progress(
    description: str,
    total: int,
    enabled: bool = True
) -> tp.Iterator[tp.Callable[[int, float], None]]:
    """Like `epoch_progress`, for hooks called with (step, loss)."""
    with make_progress(enabled) as progress:
        task = progress.add_task(description, total=total, status='')

        def advance(step: int, loss: float) -> None:
            del step
            progress.update(task, advance=1, status=f'loss={loss:.4f}')

        yield advance


@contextlib.contextmanager
def count_progress(
    description: str,
    total: int,
    enabled: bool = True
) -> tp.Iterator[tp.Callable[[tp.Any], None]]:
    """Yield a hook that advances a bar by one item per call."""
    with make_progress(enabled) as progress:
        task = progress.add_task(description, total=total, status='')

        def advance(item: tp.Any) -> None:
            del item
            progress.update(task, advance=1)

        yield advance
