"""Margin schedules: per training stage, or per sampled chunk width."""

from dataclasses import dataclass

from .exceptions import ConfigError, DomainError


@dataclass(frozen=True)
class StageSchedule:
    """Margins for consecutive training stages, loosest first."""

    margins: tuple

    def __post_init__(self):
        margins = tuple(float(m) for m in self.margins)
        object.__setattr__(self, "margins", margins)
        if not margins:
            raise ConfigError("stage schedule needs at least one margin")
        if any(not 0 < m < 1 for m in margins):
            raise ConfigError(f"stage margins must lie in (0, 1), got {margins}")
        if any(b > a for a, b in zip(margins, margins[1:])):
            raise ConfigError(f"stage margins must be non-increasing, got {margins}")

    def __len__(self):
        return len(self.margins)


@dataclass(frozen=True)
class ChunkMarginSpec:
    """Margin that shrinks linearly with the chunk width.

    ``m(L) = (1 - lam * (L - L_min) / (L_max - L_min)) * m0``, so short
    (harder) chunks get the full base margin ``m0`` and the longest chunks
    get ``(1 - lam) * m0``.
    """

    m0: float = 0.4
    lam: float = 0.25
    L_min: int = 20
    L_max: int = 40

    def __post_init__(self):
        if not 0 < self.m0 < 1:
            raise ConfigError(f"m0 must lie in (0, 1), got {self.m0}")
        if not 0 <= self.lam <= 1:
            raise ConfigError(f"lambda must lie in [0, 1], got {self.lam}")
        if int(self.L_min) != self.L_min or int(self.L_max) != self.L_max:
            raise ConfigError("chunk-width bounds must be integers")
        if not self.L_min < self.L_max:
            raise ConfigError(f"need L_min < L_max, got [{self.L_min}, {self.L_max}]")


def stage_margin(schedule, stage):
    if not 0 <= stage < len(schedule.margins):
        raise ConfigError(f"stage {stage} outside schedule of {len(schedule.margins)} stages")
    return schedule.margins[stage]


def chunk_margin(spec, L):
    if not spec.L_min <= L <= spec.L_max:
        raise DomainError(f"chunk width {L} outside [{spec.L_min}, {spec.L_max}]")
    frac = (L - spec.L_min) / (spec.L_max - spec.L_min)
    return (1.0 - spec.lam * frac) * spec.m0


def stage_of_epoch(epoch, n_epochs, n_stages, boundaries=None):
    """Stage index (0-based) of a 0-based epoch.

    Without explicit ``boundaries`` the epochs are split into ``n_stages``
    near-equal consecutive blocks.  ``boundaries`` lists the first epoch of
    every stage after the first.
    """
    if boundaries is not None:
        if len(boundaries) != n_stages - 1:
            raise ConfigError(f"need {n_stages - 1} stage boundaries, got {len(boundaries)}")
        if list(boundaries) != sorted(boundaries):
            raise ConfigError("stage boundaries must be increasing")
        return sum(1 for b in boundaries if epoch >= b)
    if n_epochs <= 0:
        return 0
    return min(epoch * n_stages // n_epochs, n_stages - 1)
