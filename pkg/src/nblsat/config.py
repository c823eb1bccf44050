from __future__ import annotations

from dataclasses import dataclass, fields

BACKENDS = ("stochastic", "exact")
FORMATS = ("text", "json")


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by the algorithms and the command line.

    The sampling defaults follow the published experiment: at most 1e8
    samples, convergence to three significant digits.
    """

    backend: str = "stochastic"
    seed: int = 0
    max_samples: int = 10**8
    block_size: int = 1 << 16
    z_threshold: float = 5.0
    convergence_digits: int = 3
    snr_target: float = 5.0
    min_samples: int = 1 << 16
    threads: int = 1
    kernel: str | None = None
    output_format: str = "text"

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if self.output_format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for f in fields(self):
            if f.name in ("max_samples", "block_size", "z_threshold", "convergence_digits",
                          "snr_target", "min_samples", "threads"):
                if getattr(self, f.name) <= 0:
                    raise ValueError(f"{f.name} must be positive")
