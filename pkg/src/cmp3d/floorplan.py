"""Per-layer block layouts and the stacked CMP + DRAM floorplan.

Coordinates are meters, origin at the lower-left corner of the layer.
"""

import math
import os
from dataclasses import dataclass, field

from .power_model import DomainError

AREA_RTOL = 1e-9


@dataclass(frozen=True)
class Block:
    name: str
    x: float
    y: float
    width: float
    height: float
    kind: str = "core"  # core | dram | fill
    core_index: int = None

    @property
    def area(self):
        return self.width * self.height

    @property
    def center(self):
        return (self.x + self.width / 2, self.y + self.height / 2)


@dataclass
class Layer2D:
    blocks: list
    side: float
    role: str = "cmp"  # cmp | dram

    def block(self, name):
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)


@dataclass
class Floorplan3D:
    layers: list  # bottom to top
    r: int
    n_cores_per_layer: int
    topology: str = "symmetric"
    serial_core: str = None  # flattened name of the core active in the serial phase
    meta: dict = field(default_factory=dict)

    @property
    def side(self):
        return self.layers[0].side

    def cmp_layers(self):
        return [i for i, layer in enumerate(self.layers) if layer.role == "cmp"]

    def flat_blocks(self):
        """(flattened name, layer index, block) bottom-to-top, layer-major."""
        return [(flat_name(i, b.name), i, b)
                for i, layer in enumerate(self.layers) for b in layer.blocks]


def flat_name(layer_index, block_name):
    return f"L{layer_index}_{block_name}"


def grid_shape(n):
    """rows x cols for ``n`` cells, rows = 2**floor(log2(sqrt(n)))."""
    if n < 1:
        raise DomainError(f"cannot tile {n} cells")
    rows = 2 ** int(math.floor(math.log2(math.sqrt(n)) + 1e-12))
    while n % rows:
        rows //= 2
    return rows, n // rows


def _grid(nx, ny, x0, y0, width, height, start_index=0, prefix="core_"):
    w, h = width / nx, height / ny
    blocks = []
    for row in range(ny):
        for col in range(nx):
            k = start_index + row * nx + col
            # right/top edges snap to the region boundary
            x = x0 + col * w
            y = y0 + row * h
            bw = (x0 + width - x) if col == nx - 1 else w
            bh = (y0 + height - y) if row == ny - 1 else h
            blocks.append(Block(f"{prefix}{k}", x, y, bw, bh, "core", k))
    return blocks


def tile_layer(r, budget, side):
    """Tile a square layer with ``budget / r`` equal cores, row-major from bottom-left."""
    if r < 1 or int(r) != r or budget % int(r):
        raise DomainError(f"core size r={r!r} does not divide budget {budget}")
    rows, cols = grid_shape(budget // int(r))
    return Layer2D(_grid(cols, rows, 0.0, 0.0, side, side), side, "cmp")


def _asymmetric_layer(r, budget, side):
    if r == 1:
        layer = tile_layer(1, budget, side)
        b0 = layer.blocks[0]
        layer.blocks[0] = Block("serial_core", b0.x, b0.y, b0.width, b0.height, "core", 0)
        return layer
    strip = side * r / budget
    blocks = [Block("serial_core", 0.0, 0.0, strip, side, "core", 0)]
    n_unit = budget - r
    if n_unit:
        region_aspect = (side - strip) / side
        best = None
        for ny in range(1, n_unit + 1):
            if n_unit % ny:
                continue
            nx = n_unit // ny
            err = abs(math.log(region_aspect * ny / nx))
            if best is None or err < best[0] - 1e-12:
                best = (err, nx, ny)
        _, nx, ny = best
        blocks += _grid(nx, ny, strip, 0.0, side - strip, side, start_index=1)
    return Layer2D(blocks, side, "cmp")


def _dram_layer(side):
    return Layer2D([Block("dram", 0.0, 0.0, side, side, "dram")], side, "dram")


def _central_core(layer):
    cx = cy = layer.side / 2
    cores = [b for b in layer.blocks if b.kind == "core"]
    scale = layer.side ** 2
    return min(cores, key=lambda b: (round(((b.center[0] - cx) ** 2 + (b.center[1] - cy) ** 2) / scale, 12),
                                     b.core_index))


def build_symmetric(config):
    side = config.side
    layers = [tile_layer(config.r, config.budget, side) for _ in range(config.cmp_layers)]
    layers += [_dram_layer(side) for _ in range(config.dram_layers)]
    fp = Floorplan3D(layers, config.r, config.budget // config.r, "symmetric")
    fp.serial_core = flat_name(0, _central_core(layers[0]).name)
    return fp


def build_asymmetric(config):
    side = config.side
    layers = [_asymmetric_layer(config.r, config.budget, side) for _ in range(config.cmp_layers)]
    layers += [_dram_layer(side) for _ in range(config.dram_layers)]
    fp = Floorplan3D(layers, config.r, config.budget - config.r + 1, "asymmetric")
    fp.serial_core = flat_name(0, "serial_core")
    return fp


def build_floorplan(config):
    if config.topology == "symmetric":
        return build_symmetric(config)
    return build_asymmetric(config)


def _overlap(a, b):
    ox = min(a.x + a.width, b.x + b.width) - max(a.x, b.x)
    oy = min(a.y + a.height, b.y + b.height) - max(a.y, b.y)
    return ox > 0 and oy > 0 and ox * oy > AREA_RTOL * min(a.area, b.area)


def validate(fp):
    """List of human-readable invariant violations; empty when the floorplan is sound."""
    problems = []
    if not fp.layers:
        return ["floorplan has no layers"]
    side = fp.layers[0].side
    eps = AREA_RTOL * side
    for i, layer in enumerate(fp.layers):
        if abs(layer.side - side) > eps:
            problems.append(f"layer {i}: side {layer.side} differs from {side}")
        names = set()
        for b in layer.blocks:
            if b.name in names:
                problems.append(f"layer {i}: duplicate block name {b.name}")
            names.add(b.name)
            if not (b.width > 0 and b.height > 0):
                problems.append(f"layer {i}: block {b.name} has non-positive size")
            if b.kind not in ("core", "dram", "fill"):
                problems.append(f"layer {i}: block {b.name} has unknown kind {b.kind!r}")
            if (b.x < -eps or b.y < -eps or b.x + b.width > layer.side + eps
                    or b.y + b.height > layer.side + eps):
                problems.append(f"layer {i}: block {b.name} extends outside the layer")
        total = sum(b.area for b in layer.blocks)
        if abs(total - layer.side ** 2) > AREA_RTOL * layer.side ** 2:
            problems.append(f"layer {i}: block areas sum to {total!r}, expected {layer.side ** 2!r}")
        # sweep by x to keep the pairwise check near-linear for grid layouts
        ordered = sorted(layer.blocks, key=lambda b: b.x)
        for j, a in enumerate(ordered):
            for b in ordered[j + 1:]:
                if b.x >= a.x + a.width - eps:
                    break
                if _overlap(a, b):
                    problems.append(f"layer {i}: blocks {a.name} and {b.name} overlap")
        if layer.role == "cmp":
            n = sum(1 for b in layer.blocks if b.kind == "core")
            if n != fp.n_cores_per_layer:
                problems.append(f"layer {i}: {n} cores, expected {fp.n_cores_per_layer}")
    return problems


# HotSpot .flp: name<TAB>width<TAB>height<TAB>left-x<TAB>bottom-y, meters

def format_flp(layer):
    lines = ["# Line Format: <unit-name>\\t<width>\\t<height>\\t<left-x>\\t<bottom-y>"]
    for b in layer.blocks:
        lines.append(f"{b.name}\t{b.width!r}\t{b.height!r}\t{b.x!r}\t{b.y!r}")
    return "\n".join(lines) + "\n"


def parse_flp(text, role="cmp"):
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = line.split()
        if len(cols) < 5:
            raise ValueError(f"line {lineno}: expected 5 fields, got {raw!r}")
        name = cols[0]
        w, h, x, y = (float(c) for c in cols[1:5])
        if name == "dram":
            kind, idx = "dram", None
        elif name.startswith("core_") or name == "serial_core":
            kind = "core"
            idx = 0 if name == "serial_core" else int(name[5:])
        else:
            kind, idx = "fill", None
        blocks.append(Block(name, x, y, w, h, kind, idx))
    side = max(b.x + b.width for b in blocks) if blocks else 0.0
    return Layer2D(blocks, side, role)


def write_stack(fp, out_dir, stem="layer"):
    """Write one ``.flp`` per layer plus ``stack.manifest``; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    rows = ["# index\trole\tflp_file (bottom to top)"]
    for i, layer in enumerate(fp.layers):
        fname = f"{stem}{i}_{layer.role}.flp"
        with open(os.path.join(out_dir, fname), "w") as fh:
            fh.write(format_flp(layer))
        rows.append(f"{i}\t{layer.role}\t{fname}")
    manifest = os.path.join(out_dir, "stack.manifest")
    with open(manifest, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    return manifest


def read_stack(manifest):
    """Parse a manifest and its ``.flp`` files into a list of Layer2D, bottom to top."""
    base = os.path.dirname(manifest)
    layers = []
    with open(manifest) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            _, role, fname = line.split("\t")
            with open(os.path.join(base, fname)) as flp:
                layers.append(parse_flp(flp.read(), role))
    return layers
