"""Random femto-cell deployments and the low-voltage grid that backhauls them.

The territory is a rectangle with the central coordinator (CCo) at its
center.  Straight radial feeders leave the CCo at evenly spaced angles and
every house connects to its nearest feeder through a perpendicular service
drop.  The resulting cable plant is a tree rooted at the CCo node, which is
the structure the channel model operates on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

CCO = "CCO"
TAP = "TAP"
HOUSE = "HOUSE"

DEFAULT_HOUSE_LOAD_OHM = 50.0

# fixed load value or (low, high) bounds of a uniform draw
LoadSpec = float | tuple[float, float]


@dataclass(frozen=True)
class Territory:
    """Rectangular deployment area and the footprint of one femto-cell."""

    width_m: float = 500.0
    height_m: float = 500.0
    cell_coverage_area_m2: float = 1000.0

    def __post_init__(self) -> None:
        if min(self.width_m, self.height_m, self.cell_coverage_area_m2) <= 0:
            raise ValueError("territory dimensions and coverage area must be positive")

    @property
    def center(self) -> tuple[float, float]:
        return (self.width_m / 2.0, self.height_m / 2.0)


@dataclass(frozen=True)
class CellSite:
    """One femto-cell: a house at (x, y) whose wiring terminates in a resistive load."""

    id: int
    x_m: float
    y_m: float
    house_load_ohm: float


@dataclass(frozen=True)
class Deployment:
    """A random placement of cells at a given normalized density."""

    territory: Territory
    density: float
    cells: tuple[CellSite, ...]


@dataclass(frozen=True)
class GridParams:
    """Layout parameters of the low-voltage grid."""

    n_feeders: int = 4
    backbone_cable: str = "backbone"
    drop_cable: str = "drop"
    min_drop_length_m: float = 5.0
    house_load_ohm: LoadSpec = DEFAULT_HOUSE_LOAD_OHM

    def __post_init__(self) -> None:
        if self.n_feeders < 1:
            raise ValueError("n_feeders must be >= 1")
        if self.min_drop_length_m < 0:
            raise ValueError("min_drop_length_m must be >= 0")
        load = self.house_load_ohm
        if isinstance(load, (int, float)):
            if load <= 0:
                raise ValueError("house_load_ohm must be positive")
        else:
            lo, hi = load
            if not (0 < lo <= hi):
                raise ValueError("house_load_ohm bounds must satisfy 0 < low <= high")


@dataclass(frozen=True)
class GridNode:
    id: int
    kind: str  # CCO | TAP | HOUSE
    x_m: float
    y_m: float
    cell_id: int | None = None     # HOUSE nodes only
    load_ohm: float | None = None  # HOUSE nodes only
    feeder: int | None = None      # TAP and HOUSE nodes


@dataclass(frozen=True)
class CableSegment:
    """Directed parent-to-child cable run; `cable` keys into the cable catalog."""

    from_node: int
    to_node: int
    length_m: float
    cable: str


@dataclass
class PowerGrid:
    """Tree of cable segments rooted at the CCo (node id 0)."""

    nodes: list[GridNode]
    segments: list[CableSegment]
    sector_of: dict[int, int] = field(default_factory=dict)
    n_feeders: int = 1

    def node(self, node_id: int) -> GridNode:
        return self.nodes[node_id]

    @cached_property
    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        """node id -> list of (segment index, neighbor node id), in segment order."""
        adj: dict[int, list[tuple[int, int]]] = {n.id: [] for n in self.nodes}
        for i, seg in enumerate(self.segments):
            adj[seg.from_node].append((i, seg.to_node))
            adj[seg.to_node].append((i, seg.from_node))
        return adj

    @cached_property
    def parent_segment(self) -> dict[int, int]:
        """node id -> index of the segment toward the CCo (absent for the root)."""
        return {seg.to_node: i for i, seg in enumerate(self.segments)}

    @cached_property
    def house_node_of(self) -> dict[int, int]:
        return {n.cell_id: n.id for n in self.nodes if n.kind == HOUSE}

    def path_to_cco(self, node_id: int) -> list[int]:
        """Node ids from `node_id` up to the root, endpoints included."""
        path = [node_id]
        while path[-1] != 0:
            seg = self.segments[self.parent_segment[path[-1]]]
            path.append(seg.from_node)
        return path

    def cable_distance_m(self, cell_id: int) -> float:
        """Total cable length from a cell's house to the CCo."""
        node = self.house_node_of[cell_id]
        dist = 0.0
        while node != 0:
            seg = self.segments[self.parent_segment[node]]
            dist += seg.length_m
            node = seg.from_node
        return dist


def cell_count(territory: Territory, density: float) -> int:
    """Number of cells covering `density` of the territory, one per coverage area."""
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {density}")
    area = territory.width_m * territory.height_m
    return int(round(density * area / territory.cell_coverage_area_m2))


def generate_deployment(
    territory: Territory,
    density: float,
    rng: np.random.Generator,
    house_load_ohm: LoadSpec = DEFAULT_HOUSE_LOAD_OHM,
) -> Deployment:
    """Place cells uniformly at random; draw order is x, y, then loads.

    A fixed load spec consumes no randomness, so switching between fixed and
    uniform loads does not perturb the position stream.
    """
    n = cell_count(territory, density)
    x = rng.uniform(0.0, territory.width_m, n)
    y = rng.uniform(0.0, territory.height_m, n)
    if isinstance(house_load_ohm, (int, float)):
        loads = np.full(n, float(house_load_ohm))
    else:
        lo, hi = house_load_ohm
        loads = rng.uniform(lo, hi, n)
    cells = tuple(
        CellSite(id=i, x_m=float(x[i]), y_m=float(y[i]), house_load_ohm=float(loads[i]))
        for i in range(n)
    )
    return Deployment(territory=territory, density=density, cells=cells)


def _nearest_feeder(rel_xy: np.ndarray, n_feeders: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per house: (feeder index, distance along the ray, perpendicular distance).

    Feeder k is the ray leaving the CCo at angle 2*pi*k/n_feeders.  Points
    whose projection falls behind the ray origin attach at the origin itself.
    Ties go to the lowest feeder index.
    """
    angles = 2.0 * np.pi * np.arange(n_feeders) / n_feeders
    u = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (K, 2)
    t = rel_xy @ u.T                                        # (N, K) projections
    t_clip = np.maximum(t, 0.0)
    # squared point-to-ray distance: |p|^2 - t_clip * (2 t - t_clip)
    p2 = np.sum(rel_xy**2, axis=1, keepdims=True)
    d2 = np.maximum(p2 - t_clip * (2.0 * t - t_clip), 0.0)
    feeder = np.argmin(d2, axis=1)
    rows = np.arange(rel_xy.shape[0])
    return feeder, t_clip[rows, feeder], np.sqrt(d2[rows, feeder])


def build_power_grid(deployment: Deployment, params: GridParams) -> PowerGrid:
    """Synthesize the radial-feeder tree connecting every house to the CCo.

    Feeder taps sit at each house's projection point onto its nearest feeder
    ray, and the feeder is split into backbone segments between consecutive
    taps ordered by distance from the CCo.  Houses closer to the feeder than
    the minimum drop length still get the minimum length of drop cable.
    """
    cx, cy = deployment.territory.center
    nodes = [GridNode(id=0, kind=CCO, x_m=cx, y_m=cy)]
    segments: list[CableSegment] = []
    grid = PowerGrid(nodes=nodes, segments=segments, n_feeders=params.n_feeders)
    if not deployment.cells:
        return grid

    rel = np.array([[c.x_m - cx, c.y_m - cy] for c in deployment.cells])
    feeder, t_along, perp = _nearest_feeder(rel, params.n_feeders)
    angles = 2.0 * np.pi * np.arange(params.n_feeders) / params.n_feeders

    for k in range(params.n_feeders):
        order = sorted(
            (i for i in range(len(deployment.cells)) if feeder[i] == k),
            key=lambda i: (t_along[i], deployment.cells[i].id),
        )
        prev_node, prev_t = 0, 0.0
        ux, uy = np.cos(angles[k]), np.sin(angles[k])
        for i in order:
            cell = deployment.cells[i]
            tap = GridNode(
                id=len(nodes), kind=TAP,
                x_m=cx + t_along[i] * ux, y_m=cy + t_along[i] * uy,
                feeder=k,
            )
            nodes.append(tap)
            segments.append(CableSegment(prev_node, tap.id, float(t_along[i] - prev_t),
                                         params.backbone_cable))
            house = GridNode(
                id=len(nodes), kind=HOUSE, x_m=cell.x_m, y_m=cell.y_m,
                cell_id=cell.id, load_ohm=cell.house_load_ohm, feeder=k,
            )
            nodes.append(house)
            drop_len = max(float(perp[i]), params.min_drop_length_m)
            segments.append(CableSegment(tap.id, house.id, drop_len, params.drop_cable))
            prev_node, prev_t = tap.id, float(t_along[i])

    grid.sector_of = assign_sectors(grid)
    return grid


def assign_sectors(grid: PowerGrid) -> dict[int, int]:
    """Map every cell to the feeder its service drop attaches to."""
    sectors: dict[int, int] = {}
    for node in grid.nodes:
        if node.kind != HOUSE:
            continue
        seg = grid.segments[grid.parent_segment[node.id]]
        attach = grid.node(seg.from_node)
        if attach.feeder is None:
            raise ValueError(f"house node {node.id} attaches to a node without a feeder")
        sectors[node.cell_id] = attach.feeder
    return sectors
