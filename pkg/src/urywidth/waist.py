"""Waist constants, the width recurrence, and the inductive skeletal
construction assembling per-fiber foliations of a product bundle into one
low-width map.

The construction extends over the base skeleton: vertex foliations are
given, each edge interpolates its endpoint foliations against the edge's
center foliation, and each triangle interpolates the boundary family
against its own center foliation (cone over the boundary).  Every step is
certified against the recurrence w_k = (beta+2) w_{k-1} + (beta+1) c + eps
evaluated with measured inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .complexes import Simplex, SimplicialComplex, h1_rank
from .foliation import (Foliation, ParametricFoliation, WidthBoundViolation,
                        interpolate, member_width, parametric_interpolate,
                        swap_member_coords)


@dataclass(frozen=True)
class WaistConstants:
    """The two closed-form constants: the chain-audited value and the plain
    recurrence value."""

    m: int
    beta: int

    def __post_init__(self):
        if self.m < 1 or self.beta < 0:
            raise ValueError("need m >= 1 and beta >= 0")

    @property
    def c_improved(self) -> float:
        return 1.0 / (2 * self.beta * self.m + self.m ** 2 + self.m + 1)

    @property
    def c_basic(self) -> float:
        return 1.0 / (2.0 * (self.beta + 2) ** self.m - 1.0)


def waist_constant(m: int, beta: int, variant: str = "improved") -> float:
    wc = WaistConstants(m, beta)
    if variant == "improved":
        return wc.c_improved
    if variant == "basic":
        return wc.c_basic
    raise ValueError("variant must be 'improved' or 'basic'")


def recurrence_width(w0: float, c: float, beta: int, m: int,
                     eps: float = 0.0) -> list[float]:
    """The sequence w_k = (beta+2) w_{k-1} + (beta+1) c + eps, k = 1..m."""
    if min(w0, c, eps) < 0 or beta < 0 or m < 0:
        raise ValueError("inputs must be nonnegative")
    out = []
    w = w0
    for _ in range(m):
        w = (beta + 2) * w + (beta + 1) * c + eps
        out.append(w)
    return out


def recurrence_closed_form(w0: float, beta: int, k: int) -> float:
    """Limit value (2 (beta+2)^k - 1) w0 of the recurrence at eps=0, c=w0."""
    return (2.0 * (beta + 2) ** k - 1.0) * w0


# -- product bundle data ----------------------------------------------------------


@dataclass
class ProductBundleData:
    """Product bundle over a base of dimension <= 2 with per-cell fiber
    metrics and foliations.

    cell_metrics[cell] embeds the fiber's vertices for the cell's center
    metric; vertex_foliations[v] is the simple foliation installed over the
    base vertex v; center_foliations[cell] is the center foliation used when
    extending over a positive-dimensional cell.
    """

    base: SimplicialComplex
    fiber: SimplicialComplex
    cell_metrics: dict[Simplex, dict[int, np.ndarray]]
    vertex_foliations: dict[int, Foliation]
    center_foliations: dict[Simplex, Foliation]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.base.dim > 2:
            raise ValueError("base dimension capped at 2")
        for v in self.base.vertices:
            if v not in self.vertex_foliations:
                raise ValueError(f"missing vertex foliation at {v}")
        for cell in self.positive_cells():
            if cell not in self.center_foliations:
                raise ValueError(f"missing center foliation on {cell}")
            if cell not in self.cell_metrics:
                raise ValueError(f"missing metric on {cell}")

    def positive_cells(self):
        return [s for s in sorted(self.base.simplices) if len(s) >= 2]

    def metric_of(self, cell: Simplex) -> dict[int, np.ndarray]:
        return self.cell_metrics[cell]

    def epsilon_closeness(self) -> float:
        """Measured metric modulus: max deviation of vertex-pair distances
        between a cell's metric and the metrics of its faces."""
        eps = 0.0
        verts = list(self.fiber.vertices)
        for cell in self.positive_cells():
            dc = self.cell_metrics[cell]
            faces = [f for f in self.base.simplices if set(f) < set(cell)]
            for f in faces:
                if f not in self.cell_metrics:
                    continue
                df = self.cell_metrics[f]
                for i in range(len(verts)):
                    for j in range(i + 1, len(verts)):
                        a, b = verts[i], verts[j]
                        d1 = float(np.linalg.norm(dc[a] - dc[b]))
                        d2 = float(np.linalg.norm(df[a] - df[b]))
                        eps = max(eps, abs(d1 - d2))
        return eps


def constant_metric_bundle(base: SimplicialComplex, fiber: SimplicialComplex,
                           vertex_foliations: dict[int, Foliation],
                           center_foliations: dict[Simplex, Foliation],
                           meta: Optional[dict] = None) -> ProductBundleData:
    """Bundle whose fiber metric is the fiber's own embedding on every cell."""
    coords = {v: np.asarray(fiber.coords[v], float) for v in fiber.vertices}
    metrics = {s: coords for s in sorted(base.simplices)}
    return ProductBundleData(base=base, fiber=fiber, cell_metrics=metrics,
                             vertex_foliations=vertex_foliations,
                             center_foliations=center_foliations,
                             meta=dict(meta or {}))


def reembed_foliation(fol: Foliation, coords: dict[int, np.ndarray]) -> Foliation:
    """The same foliation measured in another embedding of its complex."""
    if set(fol.sigma.vertices) - set(coords):
        raise ValueError("re-embedding must cover all vertices")
    sigma = SimplicialComplex(fol.sigma.simplices,
                              {v: coords[v] for v in fol.sigma.vertices})
    return Foliation.build(sigma, fol.leaf_graph, fol.map.vertex_map,
                           meta={**fol.meta, "reembedded": True})


# -- skeletal construction ---------------------------------------------------------


@dataclass
class SkeletalReport:
    """Measured widths of the inductive extension, certified against the
    recurrence evaluated with the measured inputs."""

    m: int
    beta: int
    w0: float
    c: float
    eps: float
    recurrence: list[float]
    step_widths: list[float]
    certified: bool
    per_cell: dict
    meta: dict = field(default_factory=dict)

    def recurrence_rows(self):
        """Rows (k, recurrence bound, measured width) for the w_k-vs-k CSV."""
        rows = [(0, self.w0, self.step_widths[0])]
        for k, bound in enumerate(self.recurrence, start=1):
            measured = self.step_widths[k] if k < len(self.step_widths) else ""
            rows.append((k, bound, measured))
        return rows

    def to_json_dict(self) -> dict:
        return {
            "m": self.m, "beta": self.beta, "w0": self.w0, "c": self.c,
            "eps": self.eps, "recurrence": self.recurrence,
            "step_widths": self.step_widths, "certified": self.certified,
            "per_cell": {repr(k): v for k, v in sorted(self.per_cell.items(),
                                                       key=lambda kv: repr(kv[0]))},
            "meta": {k: self.meta[k] for k in sorted(self.meta)},
        }


@dataclass
class SkeletalConstruction:
    report: SkeletalReport
    edge_families: dict[Simplex, list[ParametricFoliation]]
    triangle_families: dict[Simplex, ParametricFoliation]


def skeletal_construction(B: ProductBundleData,
                          check_bound: bool = True) -> SkeletalConstruction:
    """Extend the vertex foliations over the whole base, certifying width.

    Step 0 installs the vertex foliations; step 1 interpolates over each
    edge between its endpoint foliations and the edge's center foliation
    (two cone halves); step 2 interpolates the boundary family of each
    triangle against the triangle's center foliation.
    """
    m = B.base.dim
    beta = h1_rank(B.fiber)
    eps = B.epsilon_closeness()
    triangles = [s for s in sorted(B.base.simplices) if len(s) == 3]
    edges = [s for s in sorted(B.base.simplices) if len(s) == 2]

    w0 = 0.0
    for v in B.base.vertices:
        cellv = (v,)
        metric = B.cell_metrics.get(cellv, B.fiber.coords)
        w0 = max(w0, reembed_foliation(B.vertex_foliations[v], metric).width)
    c = 0.0
    for cell in B.positive_cells():
        c = max(c, reembed_foliation(B.center_foliations[cell],
                                     B.cell_metrics[cell]).width)
    rec = recurrence_width(w0, c, beta, m, eps)

    per_cell = {}
    edge_families: dict[Simplex, list[ParametricFoliation]] = {}
    want_members = bool(triangles)
    w1 = 0.0
    for e in edges:
        metric = B.cell_metrics[e]
        p_c = reembed_foliation(B.center_foliations[e], metric)
        carry = {}
        extra = {}
        for tcell in triangles:
            if set(e) < set(tcell):
                key = f"tri{'_'.join(map(str, tcell))}"
                carry[key] = B.center_foliations[tcell]
                extra[key] = B.cell_metrics[tcell]
        fams = []
        for v in e:
            p_v = reembed_foliation(B.vertex_foliations[v], metric)
            fam = interpolate(p_v, p_c, carry=carry,
                              want_members=want_members,
                              check_bound=check_bound,
                              extra_coords=extra)
            fams.append(fam)
        edge_families[e] = fams
        wmax = max(f.width for f in fams)
        per_cell[e] = {"width": wmax, "bound": rec[0] if rec else None}
        w1 = max(w1, wmax)

    step_widths = [w0]
    if m >= 1:
        step_widths.append(w1)
    tri_families: dict[Simplex, ParametricFoliation] = {}
    w2 = 0.0
    for tcell in triangles:
        key = f"tri{'_'.join(map(str, tcell))}"
        boundary_events = []
        boundary_params = []
        widths = []
        constant_metric = B.cell_metrics[tcell] is B.cell_metrics.get(
            (tcell[0],), None) or eps == 0.0
        for e in edges:
            if not set(e) < set(tcell):
                continue
            for side, fam in enumerate(edge_families[e]):
                for p, ev in zip(fam.params, fam.events):
                    if ev.member is None:
                        continue
                    if not constant_metric:
                        swap_member_coords(ev.member, key)
                    widths.append(member_width(ev.member))
                    boundary_events.append(ev)
                    boundary_params.append((e, side, p))
        p_tc = reembed_foliation(B.center_foliations[tcell],
                                 B.cell_metrics[tcell])
        family = ParametricFoliation(
            kind="interval", params=boundary_params, events=boundary_events,
            width=max(widths), bound=rec[0], beta=beta,
            input_widths=(w0, c))
        fam_t = parametric_interpolate(family, key, p_tc,
                                       check_bound=check_bound)
        tri_families[tcell] = fam_t
        per_cell[tcell] = {"width": fam_t.width, "bound": rec[1]}
        w2 = max(w2, fam_t.width)
    if triangles:
        step_widths.append(w2)

    certified = all(w <= r + 1e-9 for w, r in zip(step_widths[1:], rec))
    if check_bound and not certified:
        raise WidthBoundViolation(
            f"skeletal step widths {step_widths[1:]} exceed recurrence {rec}")
    report = SkeletalReport(
        m=m, beta=beta, w0=w0, c=c, eps=eps, recurrence=rec,
        step_widths=step_widths, certified=certified, per_cell=per_cell,
        meta={"edges": len(edges), "triangles": len(triangles)})
    return SkeletalConstruction(report=report, edge_families=edge_families,
                                triangle_families=tri_families)


@dataclass
class ContrapositiveReport:
    """The implication record of the waist statement for one run: if every
    fiber admits a width < w0 foliation then the total space maps to a low
    complex with the measured width, which contradicts a larger width
    reference for the total space."""

    m: int
    beta: int
    w0: float
    measured_total_width: float
    x_width_estimate: float
    threshold: float
    contradiction: bool
    note: str

    def to_json_dict(self):
        return self.__dict__.copy()


def contrapositive_report(construction: SkeletalConstruction,
                          x_width_estimate: float) -> ContrapositiveReport:
    rep = construction.report
    m = max(rep.m, 1)
    wc = WaistConstants(m, rep.beta)
    threshold = x_width_estimate * wc.c_basic
    measured = rep.step_widths[-1]
    contradiction = rep.w0 < threshold
    note = ("fibers admit width-<w0 foliations, so the total space maps to "
            f"an (m+1)-complex with width {measured:.6g}; against the "
            f"reference width {x_width_estimate:.6g} this "
            + ("flags the contrapositive: some fiber must exceed w0"
               if contradiction else "is consistent"))
    return ContrapositiveReport(
        m=rep.m, beta=rep.beta, w0=rep.w0,
        measured_total_width=measured,
        x_width_estimate=x_width_estimate, threshold=threshold,
        contradiction=contradiction, note=note)
