"""
Type protocols for hooks into the time loop.

Writers and test probes implement ``StepObserver`` to receive every state
without the runner knowing about files or assertions.
"""

from typing import Protocol, runtime_checkable

from .integrator import StepReport
from .state import State


@runtime_checkable
class StepObserver(Protocol):
    """Receives the initial state and every subsequent step."""

    def on_start(self, state: State) -> None:
        """Called once with the initial state."""
        ...

    def on_step(self, state: State, report: StepReport) -> None:
        """Called after each completed step."""
        ...

    def on_finish(self, state: State) -> None:
        """Called once after the last step."""
        ...
