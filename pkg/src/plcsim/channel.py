"""Transmission-line channel model for tree-shaped power grids.

Each cable segment is a two-conductor line described by per-unit-length RLGC
parameters with a sqrt(f) skin-effect resistance and a conductance linear in
f.  A link from a house to the CCo is the ABCD cascade of the line segments
on the tree path, with every branching subtree collapsed into an equivalent
shunt impedance.  The voltage transfer function includes the source and load
impedances of the modems at both ends:

    H(f) = Zload / (A*Zload + B + Zsource*(C*Zload + D))

The average channel gain (ACG) is 10*log10 of the mean squared magnitude of
H over the frequency grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .topology import HOUSE, PowerGrid

# Re(gamma*l) beyond which cosh/sinh would overflow double precision; the
# clamped matrix is the asymptotic matched-line limit with bounded magnitude.
_GL_REAL_MAX = 700.0


@dataclass(frozen=True)
class CableType:
    """Per-unit-length line parameters, referenced to frequency f0.

    R scales as sqrt(f/f0) (skin effect), G as f/f0 (dielectric loss);
    L and C are frequency independent.
    """

    r0_ohm_per_m: float
    f0_hz: float
    l_h_per_m: float
    g0_s_per_m: float
    c_f_per_m: float

    def __post_init__(self) -> None:
        if self.r0_ohm_per_m < 0 or self.g0_s_per_m < 0:
            raise ValueError("R and G must be >= 0")
        if self.f0_hz <= 0 or self.l_h_per_m <= 0 or self.c_f_per_m <= 0:
            raise ValueError("f0, L and C must be > 0")


#: Placeholder catalog standing in for measured cable data.  Values are chosen
#: so that default-scale networks cover the full useful-to-unusable ACG range.
DEFAULT_CABLES: dict[str, CableType] = {
    "backbone": CableType(r0_ohm_per_m=1.0e-3, f0_hz=1.0e6, l_h_per_m=0.3e-6,
                          g0_s_per_m=1.0e-9, c_f_per_m=0.15e-9),
    "drop": CableType(r0_ohm_per_m=5.0e-3, f0_hz=1.0e6, l_h_per_m=0.4e-6,
                      g0_s_per_m=2.0e-9, c_f_per_m=0.1e-9),
}


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency grid over [f_min, f_max] sampled at bin centers."""

    f_min_hz: float = 2.0e6
    f_max_hz: float = 86.0e6
    n_points: int = 1024

    def __post_init__(self) -> None:
        if not 0 < self.f_min_hz < self.f_max_hz:
            raise ValueError("need 0 < f_min < f_max")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")

    @property
    def df_hz(self) -> float:
        return (self.f_max_hz - self.f_min_hz) / self.n_points

    @property
    def bandwidth_hz(self) -> float:
        return self.f_max_hz - self.f_min_hz

    def frequencies_hz(self) -> np.ndarray:
        return self.f_min_hz + (np.arange(self.n_points) + 0.5) * self.df_hz


@dataclass(frozen=True)
class PortImpedances:
    """Modem source impedance (house side) and receiver load impedance (CCo side)."""

    z_source_ohm: complex = 50.0 + 0.0j
    z_load_ohm: complex = 50.0 + 0.0j

    def __post_init__(self) -> None:
        if complex(self.z_source_ohm).real < 0 or complex(self.z_load_ohm).real < 0:
            raise ValueError("port resistances must be >= 0")


@dataclass(frozen=True)
class TwoPortAbcd:
    """Chain matrix [[A, B], [C, D]]; entries are scalars or per-frequency arrays."""

    a: np.ndarray | complex
    b: np.ndarray | complex
    c: np.ndarray | complex
    d: np.ndarray | complex

    def __matmul__(self, other: "TwoPortAbcd") -> "TwoPortAbcd":
        _check_grids(self, other)
        return TwoPortAbcd(
            a=self.a * other.a + self.b * other.c,
            b=self.a * other.b + self.b * other.d,
            c=self.c * other.a + self.d * other.c,
            d=self.c * other.b + self.d * other.d,
        )

    def det(self) -> np.ndarray | complex:
        return self.a * self.d - self.b * self.c

    @staticmethod
    def identity() -> "TwoPortAbcd":
        return TwoPortAbcd(1.0 + 0.0j, 0.0j, 0.0j, 1.0 + 0.0j)


def _check_grids(x: TwoPortAbcd, y: TwoPortAbcd) -> None:
    nx = {np.size(v) for v in (x.a, x.b, x.c, x.d) if np.ndim(v)}
    ny = {np.size(v) for v in (y.a, y.b, y.c, y.d) if np.ndim(v)}
    if nx and ny and nx != ny:
        raise ValueError(f"frequency grids differ: {nx} vs {ny} points")


@dataclass(frozen=True)
class ChannelResponse:
    """Complex transfer function over the frequency grid plus its ACG in dB."""

    h: np.ndarray
    acg_db: float

    @staticmethod
    def from_h(h: np.ndarray) -> "ChannelResponse":
        return ChannelResponse(h=h, acg_db=average_channel_gain(h))


def average_channel_gain(response: "ChannelResponse | np.ndarray") -> float:
    """10*log10 of the mean squared magnitude of the transfer function."""
    h = np.asarray(getattr(response, "h", response))
    if h.size == 0:
        raise ValueError("cannot average an empty channel response")
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(np.mean(np.abs(h) ** 2)))


def rlgc_at(cable: CableType, f: np.ndarray | float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-unit-length (R, L, G, C) at frequency f."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency must be positive")
    ratio = f / cable.f0_hz
    r = cable.r0_ohm_per_m * np.sqrt(ratio)
    g = cable.g0_s_per_m * ratio
    l = np.broadcast_to(cable.l_h_per_m, f.shape).copy()
    c = np.broadcast_to(cable.c_f_per_m, f.shape).copy()
    return r, l, g, c


def secondary_params(r, l, g, c, f) -> tuple[np.ndarray, np.ndarray]:
    """Characteristic impedance and propagation constant from RLGC.

    Z0 = sqrt((R + jwL)/(G + jwC)), gamma = sqrt((R + jwL)(G + jwC)),
    principal branches with Re(gamma) >= 0.
    """
    w = 2.0 * np.pi * np.asarray(f, dtype=float)
    z = r + 1j * w * l
    y = g + 1j * w * c
    z0 = np.sqrt(z / y)
    gamma = np.sqrt(z * y)
    gamma = np.where(gamma.real < 0, -gamma, gamma)
    return z0, gamma


def _clamp_gl(gl: np.ndarray) -> np.ndarray:
    """Keep Re(gamma*l) inside the range where exp() stays representable."""
    re = np.clip(gl.real, -_GL_REAL_MAX, _GL_REAL_MAX)
    return re + 1j * gl.imag


def abcd_line(z0, gamma, length_m: float) -> TwoPortAbcd:
    """Chain matrix of a uniform line: A = D = cosh(gl), B = Z0 sinh(gl), C = sinh(gl)/Z0."""
    if length_m < 0:
        raise ValueError("line length must be >= 0")
    gl = _clamp_gl(np.asarray(gamma) * length_m)
    ch, sh = np.cosh(gl), np.sinh(gl)
    return TwoPortAbcd(a=ch, b=z0 * sh, c=sh / z0, d=ch)


def abcd_shunt(z) -> TwoPortAbcd:
    """Chain matrix of a shunt impedance: [[1, 0], [1/z, 1]]."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("shunt impedance must be nonzero")
    one = np.ones_like(z)
    return TwoPortAbcd(a=one, b=np.zeros_like(z), c=1.0 / z, d=one)


def abcd_shunt_admittance(y) -> TwoPortAbcd:
    """Chain matrix of a shunt admittance: [[1, 0], [y, 1]] (y = 0 is an open)."""
    y = np.asarray(y, dtype=complex)
    one = np.ones_like(y)
    return TwoPortAbcd(a=one, b=np.zeros_like(y), c=y, d=one)


def cascade(ports: "list[TwoPortAbcd] | tuple[TwoPortAbcd, ...]") -> TwoPortAbcd:
    """Left-to-right (source-to-load) chain product; empty input is the identity."""
    total = TwoPortAbcd.identity()
    for p in ports:
        total = total @ p
    return total


def input_impedance(z0, gamma, length_m: float, z_term=None) -> np.ndarray:
    """Impedance looking into a line of the given length terminated by z_term.

    Zin = Z0 (z_term + Z0 tanh(gl)) / (Z0 + z_term tanh(gl)); z_term=None means
    an open end, for which the cotangent limit Zin = Z0 / tanh(gl) applies.
    """
    if length_m < 0:
        raise ValueError("line length must be >= 0")
    t = np.tanh(np.asarray(gamma) * length_m)
    z0 = np.asarray(z0, dtype=complex)
    if z_term is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            return z0 / t
    z_term = np.asarray(z_term, dtype=complex)
    return z0 * (z_term + z0 * t) / (z0 + z_term * t)


def _admittance_into_line(y_term, z0, tanh_gl) -> np.ndarray:
    """Admittance form of `input_impedance`, safe for open ends (y_term = 0)."""
    return (z0 * y_term + tanh_gl) / (z0 * (1.0 + z0 * y_term * tanh_gl))


def transfer_from_abcd(abcd: TwoPortAbcd, ports: PortImpedances) -> np.ndarray:
    """Source-EMF-to-load voltage transfer of a terminated two-port."""
    zs = complex(ports.z_source_ohm)
    zl = complex(ports.z_load_ohm)
    return zl / (abcd.a * zl + abcd.b + zs * (abcd.c * zl + abcd.d))


class ChannelSolver:
    """Per-grid channel engine that shares subtree collapses across cells.

    Collapsed branch admittances depend only on the grid, so one solver can
    serve every transmitting cell of a replication; a subtree never contains
    the cell that is currently transmitting.
    """

    def __init__(self, grid: PowerGrid, cables: dict[str, CableType],
                 fgrid: FrequencyGrid, ports: PortImpedances):
        self.grid = grid
        self.fgrid = fgrid
        self.ports = ports
        f = fgrid.frequencies_hz()
        self._line_params: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for key in {seg.cable for seg in grid.segments}:
            if key not in cables:
                raise KeyError(f"cable type {key!r} missing from the catalog")
            self._line_params[key] = secondary_params(*rlgc_at(cables[key], f), f)
        self._seg_tanh: dict[int, np.ndarray] = {}
        self._seg_abcd: dict[int, TwoPortAbcd] = {}
        self._away: dict[tuple[int, int], np.ndarray] = {}

    def _params(self, seg_idx: int) -> tuple[np.ndarray, np.ndarray, float]:
        seg = self.grid.segments[seg_idx]
        z0, gamma = self._line_params[seg.cable]
        return z0, gamma, seg.length_m

    def _tanh(self, seg_idx: int) -> np.ndarray:
        if seg_idx not in self._seg_tanh:
            z0, gamma, length = self._params(seg_idx)
            self._seg_tanh[seg_idx] = np.tanh(_clamp_gl(gamma * length))
        return self._seg_tanh[seg_idx]

    def _abcd(self, seg_idx: int) -> TwoPortAbcd:
        if seg_idx not in self._seg_abcd:
            self._seg_abcd[seg_idx] = abcd_line(*self._params(seg_idx))
        return self._seg_abcd[seg_idx]

    def _node_shunt_admittance(self, node_id: int, banned: tuple[int, ...]) -> np.ndarray:
        """Sum of branch admittances at a node, excluding the path segments."""
        y = np.zeros(self.fgrid.n_points, dtype=complex)
        for seg_idx, neighbor in self.grid.adjacency[node_id]:
            if seg_idx not in banned:
                y = y + self._admittance_away(neighbor, seg_idx)
        return y

    def _admittance_away(self, node_id: int, via_seg: int) -> np.ndarray:
        """Admittance looking through `via_seg` into the subtree at `node_id`."""
        key = (node_id, via_seg)
        if key not in self._away:
            node = self.grid.node(node_id)
            y_term = np.zeros(self.fgrid.n_points, dtype=complex)
            if node.kind == HOUSE:
                y_term = y_term + 1.0 / node.load_ohm
            for seg_idx, neighbor in self.grid.adjacency[node_id]:
                if seg_idx != via_seg:
                    y_term = y_term + self._admittance_away(neighbor, seg_idx)
            z0, _, _ = self._params(via_seg)
            self._away[key] = _admittance_into_line(y_term, z0, self._tanh(via_seg))
        return self._away[key]

    def transfer(self, cell_id: int) -> np.ndarray:
        if cell_id not in self.grid.house_node_of:
            raise KeyError(f"cell id {cell_id} not present in the grid")
        path = self.grid.path_to_cco(self.grid.house_node_of[cell_id])
        blocks: list[TwoPortAbcd] = []
        for i in range(len(path) - 1):
            seg_idx = self.grid.parent_segment[path[i]]
            blocks.append(self._abcd(seg_idx))
            at_node = path[i + 1]
            next_seg = () if at_node == 0 else (self.grid.parent_segment[at_node],)
            y = self._node_shunt_admittance(at_node, banned=(seg_idx,) + next_seg)
            if np.any(y != 0):
                blocks.append(abcd_shunt_admittance(y))
        return transfer_from_abcd(cascade(blocks), self.ports)

    def response(self, cell_id: int) -> ChannelResponse:
        return ChannelResponse.from_h(self.transfer(cell_id))


def path_transfer(grid: PowerGrid, cell_id: int, cables: dict[str, CableType],
                  fgrid: FrequencyGrid, ports: PortImpedances) -> ChannelResponse:
    """Transfer function of one house-to-CCo link through the cable tree."""
    return ChannelSolver(grid, cables, fgrid, ports).response(cell_id)


def dump_response_csv(path: str | Path, fgrid: FrequencyGrid, response: ChannelResponse) -> None:
    """Write one link's transfer function as `f_hz, re_h, im_h` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f_hz", "re_h", "im_h"])
        for f, h in zip(fgrid.frequencies_hz(), response.h):
            writer.writerow([f"{f:.9g}", f"{h.real:.9g}", f"{h.imag:.9g}"])
