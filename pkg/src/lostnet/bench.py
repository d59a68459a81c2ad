"""Single-image CPU inference latency, and a numba-vs-numpy comparison.

Reports are informational: latency depends on the machine, so nothing here
is asserted beyond orderings. ``REFERENCE_SECONDS_PER_IMAGE`` is the
commonly quoted laptop-CPU figure for this class of network, printed for
context only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .network.model import Network, NetworkSpec, build_network, init_weights

REFERENCE_SECONDS_PER_IMAGE = 1.5


@dataclass(frozen=True)
class LatencyReport:
    backend: str
    resolution: int
    iterations: int
    mean_s: float
    p50_s: float
    p95_s: float
    samples: tuple[float, ...]

    def format(self) -> str:
        return (
            f"{self.backend:>5s} @ {self.resolution:>3d}px  "
            f"mean {self.mean_s * 1000:8.1f} ms  p50 {self.p50_s * 1000:8.1f} ms  "
            f"p95 {self.p95_s * 1000:8.1f} ms  ({self.iterations} iterations)"
        )


def bench_inference(
    spec: NetworkSpec,
    store: dict[str, np.ndarray],
    iterations: int,
    resolution: int | None = None,
    warmup: int = 1,
    seed: int = 0,
) -> LatencyReport:
    """Time single-image forward passes on a fixed random input."""
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    res = resolution or spec.input_resolution
    network = Network(spec, store)
    dtype = next(iter(store.values())).dtype
    x = np.random.default_rng(seed).normal(size=(1, 3, res, res)).astype(dtype)
    for _ in range(warmup):
        network.forward(x)
    samples = []
    for _ in range(iterations):
        t0 = time.perf_counter()
        network.forward(x)
        samples.append(time.perf_counter() - t0)
    arr = np.asarray(samples)
    return LatencyReport(
        backend=backend.active_backend(),
        resolution=res,
        iterations=iterations,
        mean_s=float(arr.mean()),
        p50_s=float(np.percentile(arr, 50)),
        p95_s=float(np.percentile(arr, 95)),
        samples=tuple(samples),
    )


def compare_backends(
    spec: NetworkSpec | None = None,
    store: dict[str, np.ndarray] | None = None,
    iterations: int = 5,
    resolutions: tuple[int, ...] = (96, 160, 224),
) -> list[LatencyReport]:
    """Run the benchmark under every available backend at each resolution."""
    if spec is None:
        spec = build_network(10)
    if store is None:
        store = init_weights(spec, seed=0)
    backends = ["numpy"] + (["numba"] if backend.HAS_NUMBA else [])
    original = backend.active_backend()
    reports = []
    try:
        for name in backends:
            backend.set_backend(name)
            for res in resolutions:
                reports.append(bench_inference(spec, store, iterations, resolution=res))
    finally:
        backend.set_backend(original)
    return reports
