"""Nodal-analysis verification route for the channel model.

Instead of walking the tree path, this solver stamps every cable segment's
exact two-port admittance parameters into one node admittance matrix,

    Y11 = Y22 = coth(gamma*l)/Z0,   Y12 = Y21 = -1/(Z0*sinh(gamma*l)),

adds the house loads and the receiver load as shunts, models the transmitter
as a unit EMF behind its source impedance, and solves the resulting linear
system at every frequency.  It shares nothing with the cascade route beyond
the telegrapher line parameters, which makes it a genuine cross-check.
"""

from __future__ import annotations

import numpy as np

from .channel import (
    CableType,
    ChannelResponse,
    FrequencyGrid,
    PortImpedances,
    _clamp_gl,
    rlgc_at,
    secondary_params,
)
from .topology import HOUSE, PowerGrid


def _merge_zero_length(grid: PowerGrid) -> tuple[dict[int, int], list[int]]:
    """Union nodes joined by zero-length segments; returns (root map, kept segments)."""
    parent = {n.id: n.id for n in grid.nodes}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    kept = []
    for i, seg in enumerate(grid.segments):
        if seg.length_m == 0.0:
            a, b = find(seg.from_node), find(seg.to_node)
            if a != b:
                parent[max(a, b)] = min(a, b)
        else:
            kept.append(i)
    return {n.id: find(n.id) for n in grid.nodes}, kept


def mna_solve(grid: PowerGrid, cables: dict[str, CableType], fgrid: FrequencyGrid,
              ports: PortImpedances, cell_id: int) -> ChannelResponse:
    """House-to-CCo transfer function via a full admittance-matrix solve."""
    if cell_id not in grid.house_node_of:
        raise KeyError(f"cell id {cell_id} not present in the grid")
    root_of, kept_segments = _merge_zero_length(grid)
    roots = sorted(set(root_of.values()))
    index = {r: i for i, r in enumerate(roots)}
    n = len(roots)
    f = fgrid.frequencies_hz()
    nf = f.size

    y = np.zeros((nf, n, n), dtype=complex)
    params = {key: secondary_params(*rlgc_at(cables[key], f), f)
              for key in {grid.segments[i].cable for i in kept_segments}}
    for i in kept_segments:
        seg = grid.segments[i]
        z0, gamma = params[seg.cable]
        gl = _clamp_gl(gamma * seg.length_m)
        sh = np.sinh(gl)
        y_self = np.cosh(gl) / (z0 * sh)
        y_mut = -1.0 / (z0 * sh)
        p, q = index[root_of[seg.from_node]], index[root_of[seg.to_node]]
        y[:, p, p] += y_self
        y[:, q, q] += y_self
        y[:, p, q] += y_mut
        y[:, q, p] += y_mut

    tx_node = grid.house_node_of[cell_id]
    for node in grid.nodes:
        if node.kind == HOUSE and node.id != tx_node:
            i = index[root_of[node.id]]
            y[:, i, i] += 1.0 / node.load_ohm

    cco = index[root_of[0]]
    tx = index[root_of[tx_node]]
    z_load = complex(ports.z_load_ohm)
    if np.isfinite(z_load):
        y[:, cco, cco] += 1.0 / z_load

    # augment with the source branch: unit EMF in series with z_source into tx
    a = np.zeros((nf, n + 1, n + 1), dtype=complex)
    a[:, :n, :n] = y
    a[:, tx, n] = -1.0
    a[:, n, tx] = 1.0
    a[:, n, n] = complex(ports.z_source_ohm)
    rhs = np.zeros((nf, n + 1), dtype=complex)
    rhs[:, n] = 1.0

    try:
        solution = np.linalg.solve(a, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as err:
        raise ArithmeticError(f"singular admittance matrix: {err}") from err
    h = solution[:, cco]
    if not np.all(np.isfinite(h)):
        bad = int(np.flatnonzero(~np.isfinite(h))[0])
        raise ArithmeticError(
            f"singular admittance matrix at frequency index {bad} (f = {f[bad]:.6g} Hz)"
        )
    return ChannelResponse.from_h(h)
