"""Piecewise-constant drive waveforms (SOT current, MTJ bias, STT current)."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig


@dataclass(frozen=True)
class DriveSample:
    i_sot: float = 0.0
    v_bias: float = 0.0
    i_stt: float = 0.0


IDLE = DriveSample()


@dataclass(frozen=True)
class Segment:
    """Drive held constant on ``[t_start, t_end)``."""

    t_start: float
    t_end: float
    i_sot: float = 0.0
    v_bias: float = 0.0
    i_stt: float = 0.0

    @property
    def sample(self):
        return DriveSample(self.i_sot, self.v_bias, self.i_stt)

    @property
    def duration(self):
        return self.t_end - self.t_start


@dataclass(frozen=True)
class DriveWaveform:
    """Ordered, non-overlapping segments; zero drive everywhere else."""

    segments: tuple = ()

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for seg in segs:
            if not seg.t_end > seg.t_start:
                raise InvalidConfig(f"segment {seg} has non-positive duration")
            if not all(np.isfinite([seg.i_sot, seg.v_bias, seg.i_stt])):
                raise InvalidConfig(f"segment {seg} has non-finite drive")
        for a, b in zip(segs, segs[1:]):
            if b.t_start < a.t_end:
                raise InvalidConfig(f"segments overlap or are out of order: {a} / {b}")

    @property
    def t_end(self):
        return self.segments[-1].t_end if self.segments else 0.0

    def at(self, t):
        for seg in self.segments:
            if seg.t_start <= t < seg.t_end:
                return seg.sample
        return IDLE

    def scaled(self, factor):
        """Same timing with every duration multiplied by ``factor``."""
        return DriveWaveform(tuple(
            Segment(s.t_start * factor, s.t_end * factor, s.i_sot, s.v_bias, s.i_stt)
            for s in self.segments))

    def segment_index(self, t_mid):
        """Index into ``segments`` for each time in ``t_mid``; ``len(segments)`` means idle."""
        t_mid = np.asarray(t_mid, dtype=float)
        idx = np.full(t_mid.shape, len(self.segments), dtype=np.int64)
        for k, seg in enumerate(self.segments):
            idx[(t_mid >= seg.t_start) & (t_mid < seg.t_end)] = k
        return idx

    def same_timing(self, other):
        return [(s.t_start, s.t_end) for s in self.segments] == \
            [(s.t_start, s.t_end) for s in other.segments]
