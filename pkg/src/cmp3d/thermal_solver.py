"""Compact grid RC thermal model of a die stack on a spreader and heat sink.

Every material layer is a tensor-product grid of cells, one node per cell.
Die-footprint layers share a uniform ``resolution x resolution`` grid; the
larger spreader and sink reuse the die grid lines over the chip footprint
and add a geometrically graded ring of cells out to their own edge, so
vertically adjacent cells line up exactly. Heat leaves only through the
top (sink) layer into ambient; the bottom face is adiabatic.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from cvxopt import cholmod, matrix, spmatrix
from scipy.optimize import brentq

ROLES = ("cmp_die", "dram_die", "tim", "spreader", "sink")
DIE_ROLES = ("cmp_die", "dram_die")

SILICON_K = 100.0
SILICON_C = 1.75e6
TIM_K = 4.0
TIM_C = 4.0e6
COPPER_K = 400.0
COPPER_C = 3.55e6

DIE_THICKNESS = 0.15e-3
BOND_THICKNESS = 0.02e-3
TIM_THICKNESS = 0.02e-3
SPREADER_SIDE = 30e-3
SPREADER_THICKNESS = 1e-3
SINK_SIDE = 60e-3
SINK_THICKNESS = 6.9e-3

RESIDUAL_RTOL = 1e-8


class StackError(ValueError):
    """Material stack is incomplete, unordered or inconsistent with the floorplan."""


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class MaterialLayer:
    role: str
    thickness: float  # m
    conductivity: float  # W/(m K)
    vol_heat_capacity: float  # J/(m^3 K)
    lateral_extent: float = None  # m; None means the chip side

    def __post_init__(self):
        if self.role not in ROLES:
            raise StackError(f"unknown layer role {self.role!r}")
        for name in ("thickness", "conductivity", "vol_heat_capacity"):
            if not getattr(self, name) > 0:
                raise StackError(f"{self.role}: {name} must be > 0")
        if self.lateral_extent is not None and not self.lateral_extent > 0:
            raise StackError(f"{self.role}: lateral_extent must be > 0")


@dataclass(frozen=True)
class PackageSpec:
    convection_resistance: float = 0.1  # K/W
    convection_capacitance: float = 140.4  # J/K
    ambient: float = 20.0  # degC

    def __post_init__(self):
        if not self.convection_resistance > 0:
            raise StackError("convection_resistance must be > 0")
        if not self.convection_capacitance > 0:
            raise StackError("convection_capacitance must be > 0")


HOTSPOT_AMBIENT = 45.0


def default_stack(cmp_layers=4, dram_layers=1, die_thickness=DIE_THICKNESS):
    """Dies bottom-to-top with thin bond layers between them, then TIM, spreader, sink."""
    die = MaterialLayer("cmp_die", die_thickness, SILICON_K, SILICON_C)
    dram = MaterialLayer("dram_die", die_thickness, SILICON_K, SILICON_C)
    bond = MaterialLayer("tim", BOND_THICKNESS, TIM_K, TIM_C)
    dies = [die] * cmp_layers + [dram] * dram_layers
    stack = []
    for i, d in enumerate(dies):
        if i:
            stack.append(bond)
        stack.append(d)
    stack += [
        MaterialLayer("tim", TIM_THICKNESS, TIM_K, TIM_C),
        MaterialLayer("spreader", SPREADER_THICKNESS, COPPER_K, COPPER_C, SPREADER_SIDE),
        MaterialLayer("sink", SINK_THICKNESS, COPPER_K, COPPER_C, SINK_SIDE),
    ]
    return stack


def check_stack(stack, n_dies=None, package=True):
    """Raise StackError unless ``stack`` is a valid bottom-to-top ordering."""
    problems = []
    if not stack:
        raise StackError("empty stack; missing roles: cmp_die")
    roles = [m.role for m in stack]
    required = ("cmp_die", "tim", "spreader", "sink") if package else ("cmp_die",)
    missing = [r for r in required if r not in roles]
    if missing:
        problems.append("missing roles: " + ", ".join(missing))
    die_idx = [i for i, r in enumerate(roles) if r in DIE_ROLES]
    if die_idx:
        last_die = die_idx[-1]
        for i, r in enumerate(roles[:last_die]):
            if r not in DIE_ROLES + ("tim",):
                problems.append(f"layer {i} ({r}) sits below a die")
        if "dram_die" in roles and "cmp_die" in roles:
            if max(i for i, r in enumerate(roles) if r == "cmp_die") > roles.index("dram_die"):
                problems.append("cmp_die above dram_die")
        tail = roles[last_die + 1:]
        rank = {"tim": 0, "spreader": 1, "sink": 2}
        if any(rank[a] > rank[b] for a, b in zip(tail, tail[1:])):
            problems.append("package layers out of order; expected tim, spreader, sink")
        if tail.count("spreader") > 1 or tail.count("sink") > 1:
            problems.append("more than one spreader or sink")
    if n_dies is not None and len(die_idx) != n_dies:
        problems.append(f"stack has {len(die_idx)} die layers, floorplan has {n_dies}")
    if problems:
        raise StackError("; ".join(problems))


def _graded_margin(margin, first, n):
    """``n`` cell widths growing geometrically from about ``first`` and summing to ``margin``."""
    if margin <= 0:
        return np.zeros(0)
    if n * first >= margin:
        return np.full(n, margin / n)
    q = brentq(lambda q: first * (q ** n - 1) / (q - 1) - margin, 1 + 1e-12, 1e3)
    w = first * q ** np.arange(n)
    return w * (margin / w.sum())


def _edges(side, resolution, extent, inner_edges, ring):
    """Cell edges for a layer of ``extent`` centered on a chip of ``side``."""
    if extent is None or abs(extent - side) <= 1e-12 * side:
        return np.linspace(0.0, side, resolution + 1)
    lo_inner, hi_inner = inner_edges[0], inner_edges[-1]
    margin = (extent - side) / 2 - (0.0 - lo_inner)
    if margin < -1e-15:
        raise StackError("layer extents must not shrink going up the stack")
    pitch = side / resolution
    first = max(pitch, inner_edges[1] - inner_edges[0] if lo_inner < 0 else pitch)
    widths = _graded_margin(max(margin, 0.0), first * 1.2, ring)
    left = lo_inner - np.cumsum(widths)[::-1]
    right = hi_inner + np.cumsum(widths)
    return np.concatenate([left, inner_edges, right])


def _overlap_1d(a, b):
    """Sparse matrix of overlap lengths between intervals of edge arrays ``a`` and ``b``."""
    rows, cols, vals = [], [], []
    j = 0
    for i in range(len(a) - 1):
        while j < len(b) - 1 and b[j + 1] <= a[i]:
            j += 1
        k = j
        while k < len(b) - 1 and b[k] < a[i + 1]:
            ov = min(a[i + 1], b[k + 1]) - max(a[i], b[k])
            if ov > 0:
                rows.append(i)
                cols.append(k)
                vals.append(ov)
            k += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(a) - 1, len(b) - 1))


@dataclass
class GridLayer:
    material: MaterialLayer
    x_edges: np.ndarray  # chip-footprint origin at 0; same edges used for y
    offset: int  # index of first node
    die_index: int = None  # index into the floorplan layers, for die layers

    @property
    def n(self):
        return len(self.x_edges) - 1

    @property
    def size(self):
        return self.n * self.n

    @property
    def widths(self):
        return np.diff(self.x_edges)

    @property
    def centers(self):
        return (self.x_edges[:-1] + self.x_edges[1:]) / 2


@dataclass
class ThermalNetwork:
    layers: list  # GridLayer, bottom to top
    G: sp.csc_matrix  # conductance matrix incl. ground terms, W/K
    ground: np.ndarray  # per-node conductance to ambient, W/K
    capacitance: np.ndarray  # J/K
    package: PackageSpec
    side: float
    resolution: int
    injection: sp.csr_matrix = None  # nodes x blocks, area fractions
    block_names: list = None  # flattened floorplan names, column order of injection
    die_roles: list = None  # floorplan layer roles (cmp/dram) by die index
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self):
        return self.G.shape[0]

    @property
    def ambient(self):
        return self.package.ambient

    def node(self, layer, row, col):
        gl = self.layers[layer]
        return gl.offset + row * gl.n + col

    def die_layer(self, die_index):
        for i, gl in enumerate(self.layers):
            if gl.die_index == die_index:
                return i
        raise KeyError(die_index)

    def with_floorplan(self, fp):
        """Same thermal grid with power injection for another floorplan of identical geometry."""
        if abs(fp.side - self.side) > 1e-12 * self.side or len(fp.layers) != len(self.die_roles):
            raise StackError("floorplan geometry does not match the network")
        net = ThermalNetwork(self.layers, self.G, self.ground, self.capacitance, self.package,
                             self.side, self.resolution, _cache=self._cache)
        _attach_floorplan(net, fp)
        return net

    def power_vector(self, block_power):
        p = np.array([block_power[n] for n in self.block_names], dtype=float)
        return self.injection @ p

    def factor(self, dt=None):
        """Cached Cholesky factor of ``G`` (steady) or ``C/dt + G`` (one backward-Euler step)."""
        key = ("steady",) if dt is None else ("be", float(dt))
        f = self._cache.get(key)
        if f is None:
            stale = [k for k in self._cache if k[0] == "be"]
            for k in stale[:max(0, len(stale) - MAX_CACHED_STEP_FACTORS + 1)]:
                del self._cache[k]
            A = self.G if dt is None else self.G + sp.diags(self.capacitance / dt)
            f = self._cache[key] = CholeskyFactor(A)
        return f


MAX_CACHED_STEP_FACTORS = 4


class CholeskyFactor:
    """Sparse Cholesky (CHOLMOD) of a symmetric positive definite matrix."""

    def __init__(self, A):
        A = sp.tril(sp.csc_matrix(A)).tocoo()
        M = spmatrix(A.data, A.row.astype(int), A.col.astype(int), size=A.shape)
        self._F = cholmod.symbolic(M, uplo="L")
        try:
            cholmod.numeric(M, self._F)
        except ArithmeticError as exc:
            raise SolverError(f"matrix is not positive definite: {exc}") from exc

    def solve(self, b):
        x = matrix(np.array(b, dtype=float, copy=True))
        cholmod.solve(self._F, x)
        return np.array(x).ravel()


def build_network(fp, stack=None, pkg=PackageSpec(), resolution=64, ring=None, package=True):
    """Discretize ``stack`` under floorplan ``fp`` into a sparse conductance network.

    ``ring`` is the number of graded cells added on each side of layers wider
    than the chip; it defaults to half the resolution so the whole grid
    refines together.
    """
    if ring is None:
        ring = max(2, resolution // 2)
    if resolution < 2:
        raise StackError(f"resolution must be >= 2, got {resolution}")
    if stack is None:
        stack = default_stack(len(fp.cmp_layers()), len(fp.layers) - len(fp.cmp_layers()))
    check_stack(stack, n_dies=len(fp.layers), package=package)
    side = fp.side
    base = np.linspace(0.0, side, resolution + 1)

    layers, offset, die_i = [], 0, 0
    edges = base
    for mat in stack:
        extent = mat.lateral_extent
        if extent is not None and extent < side * (1 - 1e-12):
            raise StackError(f"{mat.role}: lateral extent smaller than the chip")
        edges = _edges(side, resolution, extent, edges if extent is not None else base, ring)
        if extent is None:
            edges = base
        gl = GridLayer(mat, edges, offset, die_i if mat.role in DIE_ROLES else None)
        if mat.role in DIE_ROLES:
            die_i += 1
        layers.append(gl)
        offset += gl.size

    n = offset
    rows, cols, vals = [], [], []

    def couple(i, j, g):
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((g, g))

    cap = np.empty(n)
    for gl in layers:
        m, k, t = gl.material, gl.material.conductivity, gl.material.thickness
        w = gl.widths
        c = gl.centers
        idx = gl.offset + np.arange(gl.size).reshape(gl.n, gl.n)  # [row(y), col(x)]
        cap[idx.ravel()] = m.vol_heat_capacity * t * np.outer(w, w).ravel()
        dist = np.diff(c)
        # x-neighbours share an edge of length w[row]; y-neighbours of length w[col]
        gx = k * t * w[:, None] / dist[None, :]
        couple(idx[:, :-1].ravel(), idx[:, 1:].ravel(), gx.ravel())
        gy = k * t * w[None, :] / dist[:, None]
        couple(idx[:-1, :].ravel(), idx[1:, :].ravel(), gy.ravel())

    for lo, hi in zip(layers, layers[1:]):
        ox = _overlap_1d(lo.x_edges, hi.x_edges)
        area = sp.kron(ox, ox).tocoo()  # lo-node x hi-node overlap areas
        r_series = (lo.material.thickness / (2 * lo.material.conductivity)
                    + hi.material.thickness / (2 * hi.material.conductivity))
        couple(lo.offset + area.row, hi.offset + area.col, area.data / r_series)

    rows = np.concatenate([np.atleast_1d(np.asarray(a)) for a in rows])
    cols = np.concatenate([np.atleast_1d(np.asarray(a)) for a in cols])
    vals = np.concatenate([np.atleast_1d(np.asarray(a, dtype=float)) for a in vals])
    off = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    top = layers[-1]
    top_area = np.outer(top.widths, top.widths).ravel()
    ground = np.zeros(n)
    ground[top.offset:top.offset + top.size] = top_area / top_area.sum() / pkg.convection_resistance
    cap[top.offset:top.offset + top.size] += pkg.convection_capacitance * top_area / top_area.sum()

    degree = np.asarray(off.sum(axis=1)).ravel()
    G = (sp.diags(degree + ground) - off).tocsc()
    G.sort_indices()
    net = ThermalNetwork(layers, G, ground, cap, pkg, side, resolution)
    _attach_floorplan(net, fp)
    return net


def _attach_floorplan(net, fp):
    names, rows, cols, vals = [], [], [], []
    die_roles = []
    for li, layer in enumerate(fp.layers):
        die_roles.append(layer.role)
        gl = net.layers[net.die_layer(li)]
        for b in layer.blocks:
            j = len(names)
            names.append(f"L{li}_{b.name}")
            ox = _overlap_1d(gl.x_edges, np.array([b.x, b.x + b.width])).toarray().ravel()
            oy = _overlap_1d(gl.x_edges, np.array([b.y, b.y + b.height])).toarray().ravel()
            iy, ix = np.nonzero(oy)[0], np.nonzero(ox)[0]
            frac = np.outer(oy[iy], ox[ix]).ravel()
            frac /= frac.sum()
            nodes = (gl.offset + iy[:, None] * gl.n + ix[None, :]).ravel()
            rows.append(nodes)
            cols.append(np.full(nodes.size, j))
            vals.append(frac)
    net.injection = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(net.n_nodes, len(names)))
    net.block_names = names
    net.die_roles = die_roles


@dataclass
class ThermalField:
    net: ThermalNetwork
    temps: np.ndarray  # degC per node
    label: str = ""
    power: np.ndarray = None  # W per node

    @property
    def rise(self):
        return self.temps - self.net.ambient

    @property
    def peak(self):
        return float(self.temps.max())

    @property
    def peak_node(self):
        i = int(np.argmax(self.temps))
        for li, gl in enumerate(self.net.layers):
            if gl.offset <= i < gl.offset + gl.size:
                row, col = divmod(i - gl.offset, gl.n)
                return li, row, col
        raise IndexError(i)

    def layer_temps(self, layer):
        gl = self.net.layers[layer]
        return self.temps[gl.offset:gl.offset + gl.size].reshape(gl.n, gl.n)

    def layer_max(self, layer):
        return float(self.layer_temps(layer).max())

    def die_max(self, die_index):
        return self.layer_max(self.net.die_layer(die_index))

    def role_peak(self, role):
        """Peak over floorplan layers of role ``cmp`` or ``dram``; nan when there are none."""
        vals = [self.die_max(i) for i, r in enumerate(self.net.die_roles) if r == role]
        return max(vals) if vals else float("nan")

    @property
    def cmp_peak(self):
        return self.role_peak("cmp")

    @property
    def dram_peak(self):
        return self.role_peak("dram")

    def block_stats(self):
        """Flattened block name -> (max, area-weighted mean) over its cells."""
        inj = self.net.injection.tocsc()
        out = {}
        for j, name in enumerate(self.net.block_names):
            s, e = inj.indptr[j], inj.indptr[j + 1]
            nodes, w = inj.indices[s:e], inj.data[s:e]
            t = self.temps[nodes]
            out[name] = (float(t.max()), float(w @ t / w.sum()))
        return out

    def ambient_heat_flow(self):
        return float(self.net.ground @ self.rise)

    def rows(self):
        """(layer, row, col, x_m, y_m, temp_c) for every node."""
        out = []
        for li, gl in enumerate(self.net.layers):
            c = gl.centers
            t = self.layer_temps(li)
            for row in range(gl.n):
                for col in range(gl.n):
                    out.append((li, row, col, c[col], c[row], t[row, col]))
        return out


def solve_rise(net, p):
    """Temperature rise above ambient for nodal power ``p``."""
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        return np.zeros(net.n_nodes)
    dt = net.factor().solve(p)
    res = np.linalg.norm(net.G @ dt - p)
    if not np.all(np.isfinite(dt)) or res > RESIDUAL_RTOL * np.linalg.norm(p):
        # one refinement step before giving up
        dt = dt + net.factor().solve(p - net.G @ dt)
        res = np.linalg.norm(net.G @ dt - p)
        if not np.all(np.isfinite(dt)) or res > RESIDUAL_RTOL * np.linalg.norm(p):
            diag = net.G.diagonal()
            raise SolverError(f"steady solve residual {res:.3e} exceeds tolerance; "
                              f"diagonal ratio {diag.max() / diag.min():.3e}")
    return dt


def solve_steady(net, phase_or_power, label=None):
    """Steady-state field for a PowerPhase, a block-power dict or a nodal power vector."""
    if hasattr(phase_or_power, "block_power"):
        label = label or phase_or_power.label
        p = net.power_vector(phase_or_power.block_power)
    elif isinstance(phase_or_power, dict):
        p = net.power_vector(phase_or_power)
    else:
        p = np.asarray(phase_or_power, dtype=float)
    return ThermalField(net, net.ambient + solve_rise(net, p), label or "", p)


def dense_solve(net, p):
    """Independent dense direct solve of the same system; for verification only."""
    return net.ambient + np.linalg.solve(net.G.toarray(), np.asarray(p, dtype=float))


def solve_transient(net, trace, dt, t_end=None, initial=None, record_every=1):
    """Backward-Euler integration of ``C dT/dt + G (T - Ta) = P(t)``.

    ``trace`` is a PowerTrace (phases played in order, the last phase held
    once the trace runs out) or a single block-power dict held constant.
    Returns (times, fields); the initial state is included at t=0.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if hasattr(trace, "phases"):
        segments = [(ph.duration, net.power_vector(ph.block_power)) for ph in trace.phases]
    else:
        segments = [(math.inf, net.power_vector(trace))]
    if t_end is None:
        t_end = sum(d for d, _ in segments)
    x = np.zeros(net.n_nodes) if initial is None else np.asarray(initial, float) - net.ambient
    times, fields = [0.0], [ThermalField(net, net.ambient + x, "t=0")]
    t, seg, seg_end = 0.0, 0, segments[0][0]
    step = 0
    lu = net.factor(dt)
    c_dt = net.capacitance / dt
    while t < t_end * (1 - 1e-12):
        h = min(dt, t_end - t)
        while seg < len(segments) - 1 and t >= seg_end * (1 - 1e-12):
            seg += 1
            seg_end += segments[seg][0]
        p = segments[seg][1]
        if abs(h - dt) > 1e-12 * dt:
            x = net.factor(h).solve(net.capacitance / h * x + p)
        else:
            x = lu.solve(c_dt * x + p)
        t += h
        step += 1
        if step % record_every == 0 or t >= t_end * (1 - 1e-12):
            times.append(t)
            fields.append(ThermalField(net, net.ambient + x, f"t={t:.6g}"))
    return times, fields


@dataclass
class TraceResult:
    phase_fields: dict  # label -> steady ThermalField under that phase's power
    average: ThermalField  # steady field under duration-weighted mean power
    hottest: ThermalField  # hottest state reached while replaying the trace
    peak_c: float
    cmp_peak_c: float
    dram_peak_c: float
    peak_layer: int  # stack layer index of the global peak

    @property
    def steady_peak_c(self):
        """Largest per-phase steady-state peak."""
        return max(f.peak for f in self.phase_fields.values())


def solve_trace(net, trace, steps_per_phase=20):
    """Peak temperatures of a phase trace.

    The trace is replayed with backward Euler starting from the steady field of
    its duration-weighted mean power, which approximates the periodic regime
    of a program executed back to back. Per-phase steady fields are kept for
    reference; a single-phase trace reduces to that phase's steady field.
    """
    phase_fields = {ph.label: solve_steady(net, ph) for ph in trace.phases}
    if len(trace.phases) == 1:
        average = next(iter(phase_fields.values()))
    else:
        average = solve_steady(net, trace.average_power(), label="average")

    best = average
    cmp_peak, dram_peak = average.cmp_peak, average.dram_peak
    if len(trace.phases) > 1:
        x = average.rise
        for ph in trace.phases:
            if ph.duration <= 0:
                continue
            h = ph.duration / steps_per_phase
            lu = net.factor(h)
            c_h = net.capacitance / h
            p = net.power_vector(ph.block_power)
            for k in range(steps_per_phase):
                x = lu.solve(c_h * x + p)
                state = ThermalField(net, net.ambient + x, f"{ph.label}:{k + 1}")
                if state.peak > best.peak:
                    best = state
                cmp_peak = max(cmp_peak, state.cmp_peak)
                dram_peak = np.fmax(dram_peak, state.dram_peak)
    return TraceResult(phase_fields, average, best, best.peak, cmp_peak, float(dram_peak),
                       best.peak_node[0])
