import timeit
from contextlib import contextmanager
from enum import IntEnum, auto

from sympy import Rational


class Direction(IntEnum):
    """
    Direction of a gradient flow.

    Attributes
    ----------
    ASCENT : Int
        x' = grad F.
    DESCENT : Int
        x' = -grad F.
    """

    ASCENT = auto()
    DESCENT = auto()

    @property
    def sign(self) -> float:
        return 1.0 if self == Direction.ASCENT else -1.0

    @classmethod
    def parse(cls, text: str) -> "Direction":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"direction must be 'ascent' or 'descent', got {text!r}") from None


class TimingData(dict):
    """Accumulated wall-clock seconds per named code block."""

    main_timer_start_time = None

    def record_time(self, code_block_name, elapsed_time):
        self[code_block_name] = self.get(code_block_name, 0.0) + elapsed_time

    def get_block_time(self, code_block_name):
        return self.get(code_block_name, 0.0)

    def get_main_elapsed_time(self):
        if self.main_timer_start_time is None:
            raise ValueError("Main timer has not been started.")
        return timeit.default_timer() - self.main_timer_start_time


@contextmanager
def time_code(timing_data_obj: TimingData, code_block_name: str, is_main_timer=False):
    """Record the time spent inside the block under code_block_name.

    With is_main_timer=True the start time is also kept on the TimingData so
    get_main_elapsed_time() works while the block is still running.
    """
    start_time = timeit.default_timer()
    if is_main_timer:
        timing_data_obj.main_timer_start_time = start_time
    try:
        yield timing_data_obj
    finally:
        timing_data_obj.record_time(code_block_name, timeit.default_timer() - start_time)


def rationalize(value: float, max_denominator: int = 1000) -> Rational:
    """Closest rational with a bounded denominator."""
    return Rational(value).limit_denominator(max_denominator)
