"""Seeded synthetic scenarios, images, and frame sequences.

Everything here is deterministic given the seed, so experiment scripts and
the verification suite can share the exact same instances.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelParams, Scenario, VehicleNode


def random_scenario(seed: int, max_nodes: int = 4, max_subchannels: int = 4) -> Scenario:
    """A feasible random fleet: ego at the origin, others scattered around it.

    Path gain is strictly positive at any distance, so every pair has
    positive capacity and feasibility only requires num_subchannels >=
    min_ego_links, which the construction guarantees.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    c = int(rng.integers(1, max_subchannels + 1))
    nodes = [VehicleNode(id=0, x=0.0, y=0.0)]
    for node_id in range(1, n):
        nodes.append(VehicleNode(id=node_id,
                                 x=float(rng.uniform(-150, 150)),
                                 y=float(rng.uniform(-150, 150))))
    volumes = rng.uniform(1e5, 2e7, size=(n, n))
    volumes[rng.random((n, n)) < 0.2] = 0.0
    np.fill_diagonal(volumes, 0.0)
    channel = ChannelParams(
        total_bandwidth_hz=float(rng.uniform(10e6, 40e6)),
        num_subchannels=c,
        transmit_power_w=float(rng.uniform(0.1, 1.0)),
        noise_level=float(rng.uniform(1e-10, 1e-8)),
        noise_mode="literal-power",
        pathloss_exponent=float(rng.uniform(2.0, 3.5)),
        reference_distance_m=float(rng.uniform(5.0, 15.0)),
        reference_gain=1.0,
    )
    return Scenario(
        nodes=nodes,
        ego_id=0,
        data_volumes_bits=volumes,
        channel=channel,
        beta=float(rng.uniform(0.5, 0.95)),
        distance_scale_m=100.0,
        min_ego_links=int(min(rng.integers(1, 3), c, n - 1)),
    )


def gradient_image(height: int = 32, width: int = 32) -> np.ndarray:
    """Smooth diagonal ramp, the friendliest content for a block transform."""
    yy = np.linspace(0.1, 0.9, height)[:, None]
    xx = np.linspace(0.0, 0.8, width)[None, :]
    return np.clip(0.5 * yy + 0.5 * xx, 0.0, 1.0)


def sine_image(height: int = 32, width: int = 32, cycles: float = 3.0) -> np.ndarray:
    """Product of two low-frequency sinusoids, mid-gray biased."""
    yy = np.arange(height)[:, None] / height
    xx = np.arange(width)[None, :] / width
    img = 0.5 + 0.35 * np.sin(2 * np.pi * cycles * yy) * np.cos(2 * np.pi * cycles * xx)
    return np.clip(img, 0.0, 1.0)


def blocks_image(height: int = 32, width: int = 32, tile: int = 8) -> np.ndarray:
    """Checker of flat tiles at staggered gray levels."""
    yy = (np.arange(height)[:, None] // tile)
    xx = (np.arange(width)[None, :] // tile)
    levels = ((yy * 3 + xx * 5) % 7) / 7.0
    return 0.1 + 0.8 * levels


def codec_fixture_images() -> list[np.ndarray]:
    """The three canonical fixtures used by the codec verification suite."""
    return [gradient_image(), sine_image(), blocks_image()]


def rich_image(height: int = 64, width: int = 64) -> np.ndarray:
    """Strongly textured scene whose periods line up with 8-pixel blocks.

    Block-aligned frequencies repeat the same transform coefficients in every
    block, the kind of redundancy an entropy model can learn from.
    """
    yy = np.arange(height)[:, None] / height
    xx = np.arange(width)[None, :] / width
    fy = height / 8.0
    fx = width / 8.0
    img = (0.5
           + 0.25 * np.sin(2 * np.pi * fy * yy)
           + 0.20 * np.cos(2 * np.pi * 2 * fx * xx))
    return np.clip(img, 0.0, 1.0)


def shifting_sequence(num_frames: int = 30, height: int = 64,
                      width: int = 64) -> list[np.ndarray]:
    """Correlated frame sequence: one textured pattern drifting over time.

    Successive frames are circular shifts of a fixed sinusoid mixture with a
    slow global brightness wobble, mimicking the temporal redundancy of a
    forward-facing camera stream.  Pattern periods line up with 8-pixel
    blocks so frames share transform statistics.
    """
    yy = np.arange(height)[:, None] / height
    xx = np.arange(width)[None, :] / width
    fy = height / 8.0
    fx = width / 8.0
    base = (0.5
            + 0.18 * np.sin(2 * np.pi * fy * yy) * np.cos(2 * np.pi * fx * xx)
            + 0.12 * np.sin(2 * np.pi * 2 * fx * xx)
            + 0.10 * np.cos(2 * np.pi * fy * (yy + xx))
            + 0.06 * np.sin(2 * np.pi * 3 * fy * yy))
    base = np.clip(base, 0.0, 1.0)
    frames = []
    for k in range(num_frames):
        frame = np.roll(base, shift=(2 * k) % height, axis=0)
        frame = np.roll(frame, shift=(3 * k) % width, axis=1)
        frame = np.clip(frame + 0.02 * np.sin(2 * np.pi * k / num_frames), 0.0, 1.0)
        frames.append(frame)
    return frames


def shifted_domain_pair(count: int = 4, height: int = 32, width: int = 32,
                        brightness_shift: float = 0.3,
                        seed: int = 7) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Two image sets separated by a synthetic domain gap.

    Set A holds textured scenes; set B holds the same scenes brightened by a
    constant, the classic exposure mismatch between two vehicle cameras.
    """
    rng = np.random.default_rng(seed)
    set_a, set_b = [], []
    yy = np.arange(height)[:, None] / height
    xx = np.arange(width)[None, :] / width
    for _ in range(count):
        f1, f2 = rng.uniform(1.0, 4.0, size=2)
        p1, p2 = rng.uniform(0, 2 * np.pi, size=2)
        img = (0.35
               + 0.2 * np.sin(2 * np.pi * f1 * yy + p1)
               + 0.15 * np.cos(2 * np.pi * f2 * xx + p2))
        img = np.clip(img, 0.0, 1.0)
        set_a.append(img)
        set_b.append(np.clip(img + brightness_shift, 0.0, 1.0))
    return set_a, set_b
