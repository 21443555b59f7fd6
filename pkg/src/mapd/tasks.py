"""Task lifecycle, the shared task set, and deterministic stream generation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from mapd.grid import Cell, GridMap

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Fixed 64-bit generator (splitmix64) so task streams are reproducible
    across builds regardless of the host language's default RNG.

    next state: s += 0x9E3779B97F4A7C15; output mixes with two xor-shifts.
    Bounded draws use rejection sampling, so there is no modulo bias.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = _MASK64 - (_MASK64 + 1) % bound
        while True:
            v = self.next_u64()
            if v <= limit:
                return v % bound


class TaskState(enum.Enum):
    UNRELEASED = "unreleased"
    PENDING = "pending"
    EXECUTING = "executing"
    FINISHED = "finished"


@dataclass
class Task:
    """One delivery task: move from pickup to delivery.

    Lifecycle is strictly unreleased -> pending -> executing -> finished.
    The assignee is frozen once execution starts.
    """

    id: int
    pickup: Cell
    delivery: Cell
    release: int
    state: TaskState = TaskState.UNRELEASED
    assignee: int | None = None
    pickup_time: int | None = None
    finish_time: int | None = None

    def mark_released(self) -> None:
        if self.state is not TaskState.UNRELEASED:
            raise ValueError(f"task {self.id}: cannot release from {self.state}")
        self.state = TaskState.PENDING

    def start_execution(self, agent: int, t: int) -> None:
        if self.state is not TaskState.PENDING:
            raise ValueError(f"task {self.id}: cannot start executing from {self.state}")
        self.state = TaskState.EXECUTING
        self.assignee = agent
        self.pickup_time = t

    def finish(self, t: int) -> None:
        if self.state is not TaskState.EXECUTING:
            raise ValueError(f"task {self.id}: cannot finish from {self.state}")
        if t < self.pickup_time:
            raise ValueError(f"task {self.id}: finish before pickup")
        self.state = TaskState.FINISHED
        self.finish_time = t

    @property
    def service_time(self) -> int | None:
        if self.finish_time is None:
            return None
        return self.finish_time - self.release


class TaskSet:
    """Ordered collection of task ids currently in the shared set.

    Under TP a task leaves the set when an agent assigns itself to it;
    under TPTS and CENTRAL it leaves when execution starts.  The owner of
    the set picks the semantics; this container only keeps order.
    """

    def __init__(self, ids: Iterable[int] = ()):  # insertion order preserved
        self._ids: list[int] = list(ids)
        self._present: set[int] = set(self._ids)
        if len(self._present) != len(self._ids):
            raise ValueError("duplicate task ids")

    def add(self, task_id: int) -> None:
        if task_id in self._present:
            raise ValueError(f"task {task_id} already in set")
        self._ids.append(task_id)
        self._present.add(task_id)

    def remove(self, task_id: int) -> None:
        self._present.remove(task_id)
        self._ids.remove(task_id)

    def __contains__(self, task_id: int) -> bool:
        return task_id in self._present

    def __iter__(self):
        return iter(self._ids)

    def __len__(self) -> int:
        return len(self._ids)

    def copy(self) -> "TaskSet":
        return TaskSet(self._ids)

    def restore_from(self, other: "TaskSet") -> None:
        self._ids = list(other._ids)
        self._present = set(other._present)

    def __eq__(self, other) -> bool:
        return isinstance(other, TaskSet) and self._ids == other._ids

    def __repr__(self) -> str:
        return f"TaskSet({self._ids})"


def as_frequency(value) -> Fraction:
    """Normalize a task frequency (tasks per timestep) to an exact rational.

    Accepts ints, Fractions, and decimal strings/floats such as 0.5 ("one
    task every 2 timesteps") or 10 ("ten tasks per timestep").
    """
    if isinstance(value, Fraction):
        freq = value
    elif isinstance(value, int):
        freq = Fraction(value)
    else:
        freq = Fraction(str(value))
    if freq <= 0:
        raise ValueError("frequency must be positive")
    return freq


def release_times(n: int, frequency) -> list[int]:
    """Release timestep per task index under the cumulative quota rule.

    Task j is released at the smallest t such that the quota ceil((t+1)*f)
    exceeds j, i.e. t = floor(j * q / p) for f = p/q in lowest terms.  For
    f = 1/k this yields one task every k timesteps starting at t = 0; for
    integer f it yields exactly f tasks per timestep.
    """
    freq = as_frequency(frequency)
    p, q = freq.numerator, freq.denominator
    return [(j * q) // p for j in range(n)]


def generate_stream(grid: GridMap, n: int, frequency, seed: int) -> list[Task]:
    """Seeded task stream: pickup and delivery drawn uniformly from the task
    endpoints with pickup != delivery, releases per :func:`release_times`."""
    endpoints = sorted(grid.task_endpoints)
    if len(endpoints) < 2:
        raise ValueError("need at least 2 task endpoints to generate tasks")
    rng = SplitMix64(seed)
    releases = release_times(n, frequency)
    tasks = []
    for j in range(n):
        pickup = endpoints[rng.below(len(endpoints))]
        while True:
            delivery = endpoints[rng.below(len(endpoints))]
            if delivery != pickup:
                break
        tasks.append(Task(id=j, pickup=pickup, delivery=delivery, release=releases[j]))
    return tasks


def release_due(tasks: Sequence[Task], t: int, task_set: TaskSet) -> int:
    """Move every task with release == t into the set, in stream order.

    Returns how many tasks were released.  The stream must be sorted by
    release time.
    """
    count = 0
    for task in tasks:
        if task.release > t:
            break
        if task.release == t and task.state is TaskState.UNRELEASED:
            task.mark_released()
            task_set.add(task.id)
            count += 1
    return count


TASK_CSV_HEADER = "release,pickup_row,pickup_col,delivery_row,delivery_col"


def tasks_to_csv(tasks: Sequence[Task]) -> str:
    lines = [TASK_CSV_HEADER]
    for task in tasks:
        lines.append(
            f"{task.release},{task.pickup[0]},{task.pickup[1]},{task.delivery[0]},{task.delivery[1]}"
        )
    return "\n".join(lines) + "\n"


def tasks_from_csv(text: str) -> list[Task]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TASK_CSV_HEADER:
        raise ValueError(f"task file must start with header {TASK_CSV_HEADER!r}")
    tasks = []
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"task file line {i + 2}: expected 5 fields")
        release, pr, pc, dr, dc = (int(x) for x in parts)
        tasks.append(Task(id=i, pickup=(pr, pc), delivery=(dr, dc), release=release))
    tasks.sort(key=lambda task: (task.release, task.id))
    return tasks
