"""Versioned plain-text scenario files.

Format (version 1): one `key value` pair per line, `#` comments and blank
lines ignored, unknown keys rejected.  Nodes are declared with
`node <id> <x> <y>`; the data-volume matrix sits between `volumes` and `end`
lines, one row per node in declaration order.  Optional `image <id> <path>`
lines attach a picture to a node.

    version 1
    bandwidth_hz 20e6
    subchannels 2
    tx_power_w 0.2
    noise 1e-9
    noise_mode literal-power
    pathloss_exponent 2.7
    reference_distance_m 10
    reference_gain 1.0
    beta 0.8
    distance_scale_m 100
    min_ego_links 1
    ego 0
    node 0 0.0 0.0
    node 1 40.0 30.0
    volumes
    0 0
    2.0e6 0
    end
    image 1 frames/n1.pgm
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, Scenario, VehicleNode
from .errors import ParseError, ValidationError

SCALAR_KEYS = {
    "bandwidth_hz": float,
    "subchannels": int,
    "tx_power_w": float,
    "noise": float,
    "noise_mode": str,
    "pathloss_exponent": float,
    "reference_distance_m": float,
    "reference_gain": float,
    "beta": float,
    "distance_scale_m": float,
    "min_ego_links": int,
    "ego": int,
}

REQUIRED_KEYS = ("bandwidth_hz", "subchannels", "tx_power_w", "noise",
                 "beta", "min_ego_links", "ego")


@dataclass
class ScenarioDocument:
    """A parsed scenario plus the per-node image paths it referenced."""

    scenario: Scenario
    image_paths: dict[int, str] = field(default_factory=dict)


def parse_scenario(text: str) -> Scenario:
    return parse_scenario_document(text).scenario


def parse_scenario_document(text: str) -> ScenarioDocument:
    values: dict[str, object] = {}
    nodes: list[VehicleNode] = []
    image_paths: dict[int, str] = {}
    volume_rows: list[list[float]] = []
    in_volumes = False
    volumes_done = False
    saw_version = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]

        if not saw_version:
            if key != "version":
                raise ParseError(line_no, "file must start with a 'version' line")
            if parts[1:] != ["1"]:
                raise ParseError(line_no, f"unsupported version {' '.join(parts[1:])!r}")
            saw_version = True
            continue

        if in_volumes:
            if key == "end":
                if len(volume_rows) != len(nodes):
                    raise ParseError(
                        line_no, f"volume matrix has {len(volume_rows)} rows, "
                        f"need {len(nodes)}")
                in_volumes = False
                volumes_done = True
                continue
            try:
                row = [float(tok) for tok in parts]
            except ValueError:
                raise ParseError(line_no, f"non-numeric volume entry in {line!r}")
            if len(row) != len(nodes):
                raise ParseError(
                    line_no, f"volume row has {len(row)} entries, need {len(nodes)}")
            volume_rows.append(row)
            continue

        if key == "volumes":
            if not nodes:
                raise ParseError(line_no, "volumes block must follow the node list")
            if volumes_done:
                raise ParseError(line_no, "duplicate volumes block")
            in_volumes = True
        elif key == "node":
            if len(parts) != 4:
                raise ParseError(line_no, "node lines need: node <id> <x> <y>")
            try:
                node = VehicleNode(id=int(parts[1]), x=float(parts[2]), y=float(parts[3]))
            except ValueError:
                raise ParseError(line_no, f"bad node declaration {line!r}")
            if any(n.id == node.id for n in nodes):
                raise ParseError(line_no, f"duplicate node id {node.id}")
            nodes.append(node)
        elif key == "image":
            if len(parts) != 3:
                raise ParseError(line_no, "image lines need: image <id> <path>")
            try:
                node_id = int(parts[1])
            except ValueError:
                raise ParseError(line_no, f"bad node id {parts[1]!r}")
            image_paths[node_id] = parts[2]
        elif key in SCALAR_KEYS:
            if len(parts) != 2:
                raise ParseError(line_no, f"key '{key}' takes exactly one value")
            if key in values:
                raise ParseError(line_no, f"duplicate key '{key}'")
            try:
                values[key] = SCALAR_KEYS[key](parts[1])
            except ValueError:
                raise ParseError(line_no, f"bad value for '{key}': {parts[1]!r}")
        else:
            raise ParseError(line_no, f"unknown key '{key}'")

    if not saw_version:
        raise ParseError(1, "empty scenario: missing 'version' line")
    if in_volumes:
        raise ParseError(len(text.splitlines()), "volumes block not closed with 'end'")
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ParseError(len(text.splitlines()) or 1, f"missing required key '{key}'")
    if not nodes:
        raise ParseError(len(text.splitlines()) or 1, "no nodes declared")
    if not volumes_done:
        raise ParseError(len(text.splitlines()) or 1, "missing volumes block")
    for node_id in image_paths:
        if all(n.id != node_id for n in nodes):
            raise ValidationError(f"image declared for unknown node id {node_id}")

    channel = ChannelParams(
        total_bandwidth_hz=values["bandwidth_hz"],
        num_subchannels=values["subchannels"],
        transmit_power_w=values["tx_power_w"],
        noise_level=values["noise"],
        noise_mode=values.get("noise_mode", "literal-power"),
        pathloss_exponent=values.get("pathloss_exponent", 2.0),
        reference_distance_m=values.get("reference_distance_m", 1.0),
        reference_gain=values.get("reference_gain", 1.0),
    )
    scenario = Scenario(
        nodes=nodes,
        ego_id=values["ego"],
        data_volumes_bits=np.array(volume_rows, dtype=float),
        channel=channel,
        beta=values["beta"],
        distance_scale_m=values.get("distance_scale_m", 100.0),
        min_ego_links=values["min_ego_links"],
    )
    return ScenarioDocument(scenario=scenario, image_paths=image_paths)


def format_scenario(scenario: Scenario, image_paths: dict[int, str] | None = None) -> str:
    """Render a scenario back into the version-1 text format."""
    ch = scenario.channel
    lines = [
        "version 1",
        f"bandwidth_hz {ch.total_bandwidth_hz:.12g}",
        f"subchannels {ch.num_subchannels}",
        f"tx_power_w {ch.transmit_power_w:.12g}",
        f"noise {ch.noise_level:.12g}",
        f"noise_mode {ch.noise_mode}",
        f"pathloss_exponent {ch.pathloss_exponent:.12g}",
        f"reference_distance_m {ch.reference_distance_m:.12g}",
        f"reference_gain {ch.reference_gain:.12g}",
        f"beta {scenario.beta:.12g}",
        f"distance_scale_m {scenario.distance_scale_m:.12g}",
        f"min_ego_links {scenario.min_ego_links}",
        f"ego {scenario.ego_id}",
    ]
    for node in scenario.nodes:
        lines.append(f"node {node.id} {node.x:.12g} {node.y:.12g}")
    lines.append("volumes")
    for row in scenario.data_volumes_bits:
        lines.append(" ".join(f"{v:.12g}" for v in row))
    lines.append("end")
    for node_id, path in (image_paths or {}).items():
        lines.append(f"image {node_id} {path}")
    return "\n".join(lines) + "\n"
