"""In-process session state: one loaded volume, its seeds and last mask."""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..volume import LabelVolume, ScalarVolume


@dataclass
class Session:
    """Single-tenant state; mutations are serialized by ``lock``.

    ``session_id`` is reserved for future multi-tenancy; today one process
    holds exactly one session. Readers may run at any time (volumes are
    never mutated in place except the seed array, whose writers hold the
    lock).
    """

    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    image: ScalarVolume | None = None
    truth: LabelVolume | None = None
    seeds: np.ndarray | None = None  # uint8, image shape
    mask: LabelVolume | None = None
    last_summary: dict | None = None
    intensity_min: float = 0.0
    intensity_max: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)

    @classmethod
    def for_image(cls, image: ScalarVolume | None, truth: LabelVolume | None = None) -> "Session":
        session = cls(image=image, truth=truth)
        if image is not None:
            session.seeds = np.zeros(image.data.shape, dtype=np.uint8)
            session.intensity_min = float(image.data.min())
            session.intensity_max = float(image.data.max())
        return session

    def seed_volume(self) -> LabelVolume:
        return LabelVolume(
            data=self.seeds.copy(), spacing=self.image.spacing, origin=self.image.origin
        )

    def clear_seeds(self) -> None:
        self.seeds[...] = 0
