"""Assemble training sets: merge question sources, blend extras on a decay.

Merging concatenates instance sets with equal weight.  Blending starts the
first epoch with everything and shrinks the additional set each epoch by
the factor alpha; the subsamples are nested, so an instance that leaves the
pool never re-enters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .question_gen import QAInstance
from .util import substream


class BlendError(ValueError):
    pass


@dataclass(frozen=True)
class BlendSchedule:
    alpha: float
    n_epochs: int
    n_base: int
    n_extra: int
    per_epoch: tuple[int, ...]
    decay: str = "linear"


def plan(alpha: float, n_epochs: int, n_base: int, n_extra: int,
         decay: str = "linear") -> BlendSchedule:
    """Per-epoch retained-extra counts.

    linear: round(n_extra * max(0, 1 - alpha*(e-1)));
    geometric: round(n_extra * (1 - alpha)**(e-1)).
    Epoch 1 always uses the full extra set.
    """
    if not 0 < alpha <= 1:
        raise BlendError(f"alpha must be in (0, 1], got {alpha}")
    if n_epochs < 1:
        raise BlendError(f"n_epochs must be >= 1, got {n_epochs}")
    if decay not in ("linear", "geometric"):
        raise BlendError(f"decay must be 'linear' or 'geometric', got {decay!r}")
    per_epoch = []
    for e in range(1, n_epochs + 1):
        if decay == "linear":
            kept = round(n_extra * max(0.0, 1.0 - alpha * (e - 1)))
        else:
            kept = round(n_extra * (1.0 - alpha) ** (e - 1))
        per_epoch.append(kept)
    return BlendSchedule(alpha, n_epochs, n_base, n_extra, tuple(per_epoch), decay)


def merge(sets: Iterable[Sequence[QAInstance]]) -> list[QAInstance]:
    """Concatenate instance sets, deduplicated by instance_id, stable order."""
    merged, _ = merge_with_count(sets)
    return merged


def merge_with_count(sets: Iterable[Sequence[QAInstance]]) -> tuple[list[QAInstance], int]:
    """Like merge(), also reporting how many duplicates were collapsed."""
    seen: set[str] = set()
    out: list[QAInstance] = []
    dropped = 0
    for instances in sets:
        for inst in instances:
            if inst.instance_id in seen:
                dropped += 1
                continue
            seen.add(inst.instance_id)
            out.append(inst)
    return out, dropped


def epoch_set(base: Sequence[QAInstance], extra: Sequence[QAInstance],
              schedule: BlendSchedule, epoch: int, seed: int = 0) -> list[QAInstance]:
    """Base plus the epoch's retained extras.

    A single seed-determined priority order over the extras makes the
    samples nested: epoch e+1's sample is a subset of epoch e's.
    """
    if not 1 <= epoch <= schedule.n_epochs:
        raise BlendError(f"epoch {epoch} outside schedule of {schedule.n_epochs}")
    if len(extra) != schedule.n_extra:
        raise BlendError(
            f"schedule was planned for {schedule.n_extra} extras, got {len(extra)}")
    kept = schedule.per_epoch[epoch - 1]
    order = list(range(len(extra)))
    random.Random(substream(seed, "blend")).shuffle(order)
    chosen = set(order[:kept])
    return list(base) + [inst for i, inst in enumerate(extra) if i in chosen]
