"""Command-line interface.

Each subcommand loads its inputs, runs one analysis and writes a single
primary artifact (JSON, CSV or SVG) to ``--out`` or stdout.  ``--check``
replaces the artifact with a pass/fail JSON of invariants evaluated on the
given input.  Exit codes: 0 success, 2 bad input, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import comb
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catalog
from . import io as pio
from .bounds import bound_report, entangled_subspace, find_product_state_in_span
from .errors import InputError, NotFound, NumericError, ParseError, ProdRangeError, UsageError
from .linalg import ComplexMatrix, operator_schmidt
from .minkowski import minkowski_product, minkowski_sum
from .numrange import Membership, contains, numerical_range_boundary
from .product_range import (
    barycenter_witness,
    default_threads,
    pnr_hermitian_extrema,
    pnr_parametrized,
    pnr_sample,
    pnr_tensor_product,
    product_numerical_radius,
    schmidt_outer_bound,
)
from .raster import read_pbm, rasterize, topology
from .regions import ConvexPolygon, Frame, PointCloud, RasterMask, region_to_json
from .svg import Figure

COMMANDS = ("numrange", "pnr-sample", "pnr-param", "pnr-seesaw", "pnr-tensor", "minkowski",
            "schmidt", "barycenter", "bounds", "entangled-subspace", "topology", "figure")
FORMATS = ("json", "csv", "svg")
PARAM_BUDGET = 1_000_000


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    seed: int = 0
    resolution: int = 512
    n_samples: int = 10_000
    n_angles: int = 256
    n_restarts: int = 32
    out: str | None = None
    format: str = "json"
    threads: int | None = None
    check: bool = False
    grid: int | None = None
    terms: int | None = None
    op: str = "product"
    dims: tuple[int, ...] = ()
    figure: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")


@dataclass
class Artifact:
    payload: object
    kind: str = "json"          # json | csv | svg | text
    name: str = "result"
    extra: dict = field(default_factory=dict)   # filename -> text, written alongside


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _need_inputs(cfg: RunConfig, n: int, what: str = "matrix"):
    if len(cfg.inputs) < n:
        raise UsageError(f"{cfg.command} needs {n} --input {what} file(s)")


def _matrix(cfg: RunConfig, i: int = 0) -> ComplexMatrix:
    _need_inputs(cfg, i + 1)
    return pio.load_matrix(cfg.inputs[i])


def _state_json(st):
    if st is None:
        return None
    return [[[float(z.real), float(z.imag)] for z in f] for f in st.factors]


def _auto_grid(dims) -> int:
    """Largest per-factor grid keeping the cloud within PARAM_BUDGET points."""
    def size(g):
        return int(np.prod([comb(g + m - 2, m - 1) for m in dims]))
    g = 3
    while size(g + 1) <= PARAM_BUDGET:
        g += 1
    return g


def _check_result(checks: list[tuple[str, bool, str]]) -> Artifact:
    items = [{"name": n, "pass": bool(ok), "detail": d} for n, ok, d in checks]
    return Artifact({"checks": items, "pass": all(c["pass"] for c in items)}, name="check")


def _cloud_svg(title, points, outline=None, markers=()):
    fig = Figure(title)
    fig.points(points)
    if outline is not None:
        fig.region(outline, "#444444")
    if len(markers):
        fig.markers(markers)
    return fig.render()


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_numrange(cfg: RunConfig) -> Artifact:
    x = _matrix(cfg)
    b = numerical_range_boundary(x, cfg.n_angles)
    poly = b.polygon()
    if cfg.check:
        a = x.data
        rq = np.array([np.vdot(w, a @ w) for w in b.witnesses])
        sup = (np.exp(-1j * b.thetas) * b.points).real
        bary = x.trace() / x.n
        return _check_result([
            ("witnesses attain boundary points", bool(np.max(np.abs(rq - b.points)) <= 1e-9 * (1 + x.norm())), ""),
            ("points lie on support lines", bool(np.max(np.abs(sup - b.support)) <= 1e-9 * (1 + x.norm())), ""),
            ("barycenter inside", contains(b, bary) != Membership.OUTSIDE, str(bary)),
            ("support bounded by norm", bool(np.max(b.support) <= x.norm() * (1 + 1e-12) + 1e-12), ""),
        ])
    if cfg.format == "csv":
        return Artifact(pio.boundary_csv(b), "csv", "numrange")
    if cfg.format == "svg":
        return Artifact(_cloud_svg("W(X)", b.points, poly), "svg", "numrange")
    return Artifact({
        "dims": list(x.dims),
        "thetas": b.thetas, "support": b.support,
        "points": [[z.real, z.imag] for z in b.points],
        "region": region_to_json(poly),
        "degenerate": bool(b.is_degenerate()),
    }, name="numrange")


def cmd_pnr_sample(cfg: RunConfig) -> Artifact:
    x = _matrix(cfg)
    rep = pnr_sample(x, cfg.n_samples, cfg.seed, threads=cfg.threads)
    if cfg.check:
        a = x.data
        idx = np.arange(0, rep.points.size, max(1, rep.points.size // 200))
        err = max((abs(rep.state(int(i)).value(a) - rep.points[i]) for i in idx), default=0.0)
        outer = numerical_range_boundary(x, cfg.n_angles).outer_polygon()
        inside = bool(np.all(outer.contains(rep.points, tol=1e-9 * (1 + x.norm()))))
        again = pnr_sample(x, cfg.n_samples, cfg.seed, threads=1)
        checks = [
            ("points equal Rayleigh quotients", bool(err <= 1e-10 * (1 + x.norm())), f"{err:.3e}"),
            ("cloud inside W(X)", inside, ""),
            ("single-thread rerun identical", bool(np.array_equal(again.points, rep.points)), ""),
        ]
        if x.is_hermitian():
            ev = np.linalg.eigvalsh(x.hermitian_part().data)
            ok = bool(np.all(rep.points.real >= ev[0] - 1e-10) and np.all(rep.points.real <= ev[-1] + 1e-10))
            checks.append(("Hermitian samples within spectrum", ok, ""))
        return _check_result(checks)
    if cfg.format == "csv":
        return Artifact(pio.cloud_csv(rep.points), "csv", "pnr-sample")
    if cfg.format == "svg":
        return Artifact(_cloud_svg("product range (sampled)", rep.points,
                                   numerical_range_boundary(x, cfg.n_angles).polygon()),
                        "svg", "pnr-sample")
    return Artifact(rep.to_json(), name="pnr-sample")


def _param_report(x: ComplexMatrix, cfg: RunConfig):
    us = None
    if len(cfg.inputs) > 1:
        us = [pio.load_matrix(p).data for p in cfg.inputs[1:]]
    g = cfg.grid or _auto_grid(x.dims)
    return pnr_parametrized(x, us, g), us


def cmd_pnr_param(cfg: RunConfig) -> Artifact:
    x = _matrix(cfg)
    rep, _ = _param_report(x, cfg)
    if cfg.check:
        a = x.data
        idx = np.linspace(0, rep.points.size - 1, min(200, rep.points.size)).astype(int)
        err = max(abs(rep.state(int(i)).value(a) - rep.points[i]) for i in idx)
        outer = numerical_range_boundary(x, cfg.n_angles).outer_polygon()
        return _check_result([
            ("grid points equal Rayleigh quotients", bool(err <= 1e-10 * (1 + x.norm())), f"{err:.3e}"),
            ("cloud inside W(X)", bool(np.all(outer.contains(rep.points, tol=1e-9 * (1 + x.norm())))), ""),
        ])
    m = rasterize(rep.points, cfg.resolution)
    topo = topology(m)
    if cfg.format == "csv":
        return Artifact(pio.cloud_csv(rep.points), "csv", "pnr-param")
    if cfg.format == "svg":
        fig = Figure("product range (parametrized)")
        fig.points(rep.points)
        fig.region(m, "#d62728")
        return Artifact(fig.render(), "svg", "pnr-param")
    out = rep.to_json()
    out["grid_per_factor"] = cfg.grid or _auto_grid(x.dims)
    out["covering_radius"] = rep.covering_radius
    out["topology"] = topo.to_json()
    return Artifact(out, name="pnr-param")


def cmd_pnr_seesaw(cfg: RunConfig) -> Artifact:
    x = _matrix(cfg)
    if x.is_hermitian():
        ext = pnr_hermitian_extrema(x, cfg.n_restarts, cfg.seed)
        rad = product_numerical_radius(x, cfg.n_restarts, cfg.seed)
    else:
        ext = None
        rad = product_numerical_radius(x, cfg.n_restarts, cfg.seed)
    if cfg.check:
        checks = []
        if ext is not None:
            ev = np.linalg.eigvalsh(x.data)
            tol = 1e-10 * (1 + x.norm())
            mono_max = bool(np.all(np.diff(ext.max_history, axis=0) >= -tol))
            mono_min = bool(np.all(np.diff(ext.min_history, axis=0) <= tol))
            checks += [
                ("max history non-decreasing", mono_max, ""),
                ("min history non-increasing", mono_min, ""),
                ("interval inside spectrum", bool(ev[0] - tol <= ext.minimum <= ext.maximum <= ev[-1] + tol), ""),
                ("witnesses reproduce extrema",
                 bool(abs(ext.max_witness.value(x.data).real - ext.maximum) <= 1e-9 and
                      abs(ext.min_witness.value(x.data).real - ext.minimum) <= 1e-9), ""),
            ]
            if x.nfactors == 2:
                k, m = x.dims
                checks.append(("index bounds hold",
                               bool(ext.maximum >= ev[k + m - 2] - 1e-8 and
                                    ext.minimum <= ev[(k - 1) * (m - 1)] + 1e-8), ""))
        checks.append(("radius bounds ordered", bool(0 <= rad.lower <= rad.upper + 1e-12), ""))
        return _check_result(checks)
    out = {"dims": list(x.dims),
           "radius": {"lower": rad.lower, "upper": rad.upper, "witness": _state_json(rad.witness)}}
    if ext is not None:
        out["extrema"] = {"min": ext.minimum, "max": ext.maximum,
                          "witnesses": {"min": _state_json(ext.min_witness),
                                        "max": _state_json(ext.max_witness)}}
    return Artifact(out, name="pnr-seesaw")


def _region_out(region, cfg: RunConfig, name: str, title: str, extra_json=None):
    if cfg.format == "svg":
        fig = Figure(title)
        fig.region(region)
        return Artifact(fig.render(), "svg", name)
    if cfg.format == "csv":
        if isinstance(region, RasterMask):
            pts = region.cell_centers()
        elif isinstance(region, PointCloud):
            pts = region.points
        else:
            pts = region.vertices
        return Artifact(pio.cloud_csv(pts), "csv", name)
    out = {"region": region_to_json(region), "kind": type(region).__name__}
    if extra_json:
        out.update(extra_json)
    return Artifact(out, name=name)


def cmd_pnr_tensor(cfg: RunConfig) -> Artifact:
    _need_inputs(cfg, 2)
    mats = [pio.load_matrix(p) for p in cfg.inputs]
    rep = pnr_tensor_product(*mats, resolution=cfg.resolution, n_angles=cfg.n_angles)
    region = rep.region
    if cfg.check:
        big = mats[0].data
        dims = list(mats[0].dims)
        for m in mats[1:]:
            big = np.kron(big, m.data)
            dims += list(m.dims)
        samp = pnr_sample(ComplexMatrix(tuple(dims), big), 4096, cfg.seed, threads=1)
        tol = 2 * region.cell if isinstance(region, RasterMask) else 1e-6 * (1 + np.abs(big).max())
        ok = bool(np.all(region.contains(samp.points, tol=tol)))
        return _check_result([("sampled product range inside result", ok, f"tol {tol:.3e}")])
    extra = None
    if isinstance(region, RasterMask):
        extra = {"topology": topology(region).to_json()}
    return _region_out(region, cfg, "pnr-tensor", "W(A) W(B)", extra)


def cmd_minkowski(cfg: RunConfig) -> Artifact:
    _need_inputs(cfg, 2, "region")
    z1, z2 = (pio.load_region(p) for p in cfg.inputs[:2])
    if cfg.op not in ("product", "sum"):
        raise UsageError("--op must be 'product' or 'sum'")
    f = minkowski_product if cfg.op == "product" else minkowski_sum
    res = f(z1, z2, resolution=cfg.resolution)
    if cfg.check:
        from .rng import stream
        rng = stream(cfg.seed, 1)

        def samples(z):
            if isinstance(z, ConvexPolygon):
                return z.sample_interior(rng, 400) if not z.is_degenerate else z.boundary_samples(z.diameter() / 50 + 1e-12)
            if isinstance(z, RasterMask):
                c = z.cell_centers()
                return c[rng.integers(0, c.size, 400)]
            if isinstance(z, PointCloud):
                return z.points[rng.integers(0, z.points.size, 400)]
            return z.boundary_samples(max(z.bbox()[1] - z.bbox()[0], 1e-9) / 100)

        a, b = samples(z1), samples(z2)
        pts = a[:, None] * b[None, :] if cfg.op == "product" else a[:, None] + b[None, :]
        pts = pts.ravel()[:: 7]
        cell = res.cell if isinstance(res, RasterMask) else 0.0
        tol = 2 * cell + getattr(z1, "covering_radius", 0) + getattr(z2, "covering_radius", 0) + 1e-7
        if isinstance(res, PointCloud):
            ok = True
        else:
            ok = bool(np.all(res.contains(pts, tol=tol)))
        return _check_result([("elementwise results inside", ok, f"{pts.size} points")])
    return _region_out(res, cfg, "minkowski", f"Minkowski {cfg.op}")


def cmd_schmidt(cfg: RunConfig) -> Artifact:
    x = _matrix(cfg)
    sd = operator_schmidt(x)
    bound = schmidt_outer_bound(x, cfg.terms, resolution=min(cfg.resolution, 512))
    if cfg.check:
        err = float(np.linalg.norm(sd.reconstruct() - x.data))
        samp = pnr_sample(x, cfg.n_samples, cfg.seed, threads=1)
        inside = bound.contains(samp.points, tol=1e-9)
        return _check_result([
            ("reconstruction", bool(err <= 1e-10 * max(x.norm(), 1e-300)), f"{err:.3e}"),
            ("coefficients sum to squared HS norm",
             bool(abs(np.sum(sd.coefficients) - x.hs_norm() ** 2) <= 1e-10 * (1 + x.hs_norm() ** 2)), ""),
            ("outer bound contains samples", bool(np.all(inside)),
             f"{int(np.sum(~inside))} violations"),
        ])
    if cfg.format != "json":
        return _region_out(bound, cfg, "schmidt", "Schmidt outer bound")
    return Artifact({
        "dims": list(x.dims),
        "coefficients": sd.coefficients,
        "left": [pio.matrix_to_json(ComplexMatrix((a.shape[0],), a)) for a in sd.left],
        "right": [pio.matrix_to_json(ComplexMatrix((b.shape[0],), b)) for b in sd.right],
        "outer_bound": region_to_json(bound),
    }, name="schmidt")


def cmd_barycenter(cfg: RunConfig) -> Artifact:
    x = _matrix(cfg)
    w = barycenter_witness(x)
    val = w.value(x.data)
    target = x.trace() / x.n
    if cfg.check:
        return _check_result([
            ("value equals tr X / N", bool(abs(val - target) <= 1e-7 * (1 + x.norm())),
             f"{abs(val - target):.3e}"),
            ("factors normalised", bool(w.is_normalized()), ""),
        ])
    return Artifact({"dims": list(x.dims), "value": [val.real, val.imag],
                     "target": [target.real, target.imag], "witness": _state_json(w)},
                    name="barycenter")


def cmd_bounds(cfg: RunConfig) -> Artifact:
    x = _matrix(cfg)
    rep = bound_report(x, seed=cfg.seed, restarts=max(cfg.n_restarts, 16))
    if cfg.check:
        lo, hi = rep.witness_values(x)
        ext = pnr_hermitian_extrema(x, cfg.n_restarts, cfg.seed)
        return _check_result([
            ("max witness reaches bound", hi is not None and hi >= rep.max_bound - 1e-8, str(hi)),
            ("min witness reaches bound", lo is not None and lo <= rep.min_bound + 1e-8, str(lo)),
            ("see-saw max above bound", bool(ext.maximum >= rep.max_bound - 1e-8), ""),
            ("see-saw min below bound", bool(ext.minimum <= rep.min_bound + 1e-8), ""),
        ])
    return Artifact(rep.to_json(), name="bounds")


def cmd_entangled(cfg: RunConfig) -> Artifact:
    if len(cfg.dims) != 2:
        raise UsageError("entangled-subspace needs --dims K M")
    k, m = cfg.dims
    sub = entangled_subspace(k, m)
    if cfg.check:
        g = sub.basis.conj().T @ sub.basis
        try:
            find_product_state_in_span(sub.basis, (k, m), seed=cfg.seed)
            none_found = False
        except NotFound:
            none_found = True
        return _check_result([
            ("orthonormal", bool(np.linalg.norm(g - np.eye(sub.dimension)) <= 1e-12), ""),
            ("dimension (K-1)(M-1)", sub.dimension == (k - 1) * (m - 1), str(sub.dimension)),
            ("search finds no product vector", none_found, ""),
        ])
    return Artifact({"dims": [k, m], "dimension": sub.dimension,
                     "basis": [[[z.real, z.imag] for z in col] for col in sub.basis.T]},
                    name="entangled-subspace")


def _load_any_region(path: str, resolution: int):
    if path.endswith(".pbm"):
        return read_pbm(path)
    reg = pio.load_region(path)
    if isinstance(reg, RasterMask):
        return reg
    if isinstance(reg, PointCloud):
        return rasterize(reg, resolution)
    from .raster import fill_convex, fill_polygon
    box = reg.bbox()
    frame = Frame.covering(*box, resolution=resolution)
    if isinstance(reg, ConvexPolygon):
        return RasterMask(frame, fill_convex(reg, frame, thicken=0.75 * frame.cell))
    return RasterMask(frame, fill_polygon(reg, frame))


def cmd_topology(cfg: RunConfig) -> Artifact:
    _need_inputs(cfg, 1, "region")
    m = _load_any_region(cfg.inputs[0], cfg.resolution)
    t = topology(m)
    if cfg.check:
        return _check_result([
            ("Euler consistency", t.components - t.genus == t.euler or t.components > 1,
             f"{t.components} - {t.genus} vs {t.euler}"),
            ("convex implies genus 0", (not t.is_convex) or t.genus == 0, ""),
        ])
    if cfg.format == "svg":
        fig = Figure(f"genus {t.genus}")
        fig.region(m)
        return Artifact(fig.render(), "svg", "topology")
    return Artifact(t.to_json(), name="topology")


# --------------------------------------------------------------------------
# figures
# --------------------------------------------------------------------------

FIGURE_GRIDS = {"fig1": 1001, "fig3a": 201, "fig3b": 201, "fig4": 48}
EXPECTED_GENUS = {"fig1": 0, "fig2a": 0, "fig2b": 0, "fig2c": 0, "fig3a": 1, "fig3b": 0, "fig4": 2}


def build_figure(name: str, resolution: int = 512, threads: int | None = None) -> tuple[str, dict]:
    """SVG text and report dict for one named figure."""
    if name not in catalog.FIGURES:
        raise UsageError(f"unknown figure {name!r}; choose from {sorted(catalog.FIGURES)}")
    kind, make = catalog.FIGURES[name]
    fig = Figure(name)
    report: dict = {"figure": name}
    if kind == "parametrized":
        x = make()
        rep = pnr_parametrized(x, None, FIGURE_GRIDS[name])
        if name == "fig1":
            m = rasterize(rep.points, resolution)
        else:
            m = rasterize(rep.cloud(), resolution, dilation_radius=0.75)
        wpoly = numerical_range_boundary(x, 256).polygon()
        fig.points(rep.points)
        fig.region(wpoly, "#444444")
        fig.region(m, "#d62728")
        bary = x.trace() / x.n
        fig.markers([bary])
        report.update(dims=list(x.dims), grid_per_factor=FIGURE_GRIDS[name],
                      covering_radius=rep.covering_radius,
                      numerical_range=region_to_json(wpoly), barycenter=[bary.real, bary.imag])
        if name == "fig1":
            t = np.linspace(0, 1, 400)
            fig.polyline(t ** 2 + 1j * (1 - t) ** 2, "#000000", closed=False, dash=True)
    else:
        r1, r2 = make()
        a, b = catalog.jordan_block(r1), catalog.jordan_block(r2)
        rep = pnr_tensor_product(a, b, resolution=resolution)
        m = rep.region
        samp = pnr_sample(catalog.disc_product(r1, r2), 20_000, 0, threads=threads)
        fig.points(samp.points)
        fig.region(m, "#d62728")
        fig.markers([0j])
        report.update(r=[r1, r2], max_modulus=m.max_modulus(), expected_max_modulus=(1 + r1) * (1 + r2))
    topo = topology(m)
    report["topology"] = topo.to_json()
    report["expected_genus"] = EXPECTED_GENUS[name]
    return fig.render(), report


def cmd_figure(cfg: RunConfig) -> Artifact:
    name = cfg.figure
    if not name:
        raise UsageError("figure needs a name, e.g. 'figure fig1'")
    svg, report = build_figure(name, cfg.resolution, cfg.threads)
    if cfg.check:
        t = report["topology"]
        checks = [("genus", t["genus"] == report["expected_genus"], f"{t['genus']}")]
        if name == "fig3b":
            checks.append(("convex", bool(t["is_convex"]), ""))
        if "max_modulus" in report:
            rel = abs(report["max_modulus"] / report["expected_max_modulus"] - 1)
            checks.append(("max modulus within 1%", rel <= 0.01, f"{rel:.4f}"))
        return _check_result(checks)
    if cfg.format == "json":
        return Artifact(report, name=name, extra={f"{name}.svg": svg})
    return Artifact(svg, "svg", name, extra={f"{name}.json": pio.dumps(report)})


HANDLERS = {
    "numrange": cmd_numrange, "pnr-sample": cmd_pnr_sample, "pnr-param": cmd_pnr_param,
    "pnr-seesaw": cmd_pnr_seesaw, "pnr-tensor": cmd_pnr_tensor, "minkowski": cmd_minkowski,
    "schmidt": cmd_schmidt, "barycenter": cmd_barycenter, "bounds": cmd_bounds,
    "entangled-subspace": cmd_entangled, "topology": cmd_topology, "figure": cmd_figure,
}


def run(cfg: RunConfig) -> Artifact:
    return HANDLERS[cfg.command](cfg)


def _text(art: Artifact) -> str:
    return pio.dumps(art.payload) if art.kind == "json" else str(art.payload)


def emit(art: Artifact, cfg: RunConfig, stdout=None) -> list[str]:
    """Write the artifact; returns the written paths (empty for stdout)."""
    stdout = sys.stdout if stdout is None else stdout
    text = _text(art)
    if cfg.out is None:
        stdout.write(text)
        return []
    out = Path(cfg.out)
    written = []
    ext = {"json": "json", "csv": "csv", "svg": "svg"}.get(art.kind, "txt")
    if out.suffix and not out.is_dir():
        out.parent.mkdir(parents=True, exist_ok=True)
        target, folder = out, out.parent
    else:
        out.mkdir(parents=True, exist_ok=True)
        target, folder = out / f"{art.name}.{ext}", out
    target.write_text(text)
    written.append(str(target))
    for fname, content in art.extra.items():
        p = folder / fname
        p.write_text(content)
        written.append(str(p))
    return written


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail({"error": "UsageError", "module": "cli", "message": message}, 2)


def _fail(payload: dict, code: int):
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    raise SystemExit(code)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prodrange", description="Numerical and product numerical ranges.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--input", action="append", default=[], help="input file (repeatable)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--resolution", type=int, default=512)
        sp.add_argument("--samples", type=int, default=10_000)
        sp.add_argument("--angles", type=int, default=256)
        sp.add_argument("--restarts", type=int, default=32)
        sp.add_argument("--out", default=None, help="output directory or file")
        sp.add_argument("--format", choices=FORMATS, default="json")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: PRODRANGE_THREADS or CPU count)")
        sp.add_argument("--check", action="store_true", help="run invariant checks instead")

    for name in COMMANDS:
        sp = sub.add_parser(name)
        common(sp)
        if name == "pnr-param":
            sp.add_argument("--grid", type=int, default=None, help="grid points per simplex edge")
        if name == "schmidt":
            sp.add_argument("--terms", type=int, default=None)
        if name == "minkowski":
            sp.add_argument("--op", choices=("product", "sum"), default="product")
        if name == "entangled-subspace":
            sp.add_argument("--dims", type=int, nargs=2, required=True, metavar=("K", "M"))
        if name == "figure":
            sp.add_argument("name", choices=sorted(catalog.FIGURES))
    return p


def config_from_args(ns) -> RunConfig:
    threads = ns.threads
    if threads is None and os.environ.get("PRODRANGE_THREADS"):
        threads = default_threads()
    return RunConfig(
        command=ns.command, inputs=list(ns.input), seed=ns.seed, resolution=ns.resolution,
        n_samples=ns.samples, n_angles=ns.angles, n_restarts=ns.restarts, out=ns.out,
        format=ns.format, threads=threads, check=ns.check,
        grid=getattr(ns, "grid", None), terms=getattr(ns, "terms", None),
        op=getattr(ns, "op", "product"), dims=tuple(getattr(ns, "dims", None) or ()),
        figure=getattr(ns, "name", None))


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        art = run(cfg)
        emit(art, cfg)
    except ParseError as exc:
        _fail({"error": "ParseError", "module": exc.module, "path": exc.path,
               "message": exc.detail}, 2)
    except InputError as exc:
        _fail({"error": type(exc).__name__, "module": exc.module, "message": str(exc)}, 2)
    except NumericError as exc:
        _fail({"error": type(exc).__name__, "module": exc.module, "message": str(exc)}, 3)
    except ProdRangeError as exc:
        _fail({"error": type(exc).__name__, "module": exc.module, "message": str(exc)}, 3)
    if cfg.check and isinstance(art.payload, dict) and not art.payload.get("pass", True):
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
