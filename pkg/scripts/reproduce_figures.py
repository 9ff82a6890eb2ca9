"""Regenerate every catalogued figure as SVG plus a JSON topology report.

Usage: python scripts/reproduce_figures.py [--out figures] [--resolution 512]
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from prodrange import io as pio
from prodrange.catalog import FIGURES
from prodrange.cli import build_figure


@dataclass
class FigureRun:
    out: Path = Path("figures")
    resolution: int = 512
    names: tuple[str, ...] = tuple(sorted(FIGURES))


def main(cfg: FigureRun) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    failures = 0
    print(f"{'figure':8} {'genus':>5} {'expect':>6} {'convex':>6} {'seconds':>8}")
    for name in cfg.names:
        t0 = time.perf_counter()
        svg, report = build_figure(name, cfg.resolution)
        (cfg.out / f"{name}.svg").write_text(svg)
        (cfg.out / f"{name}.json").write_text(pio.dumps(report))
        topo = report["topology"]
        ok = topo["genus"] == report["expected_genus"]
        failures += not ok
        print(f"{name:8} {topo['genus']:5d} {report['expected_genus']:6d} "
              f"{str(topo['is_convex']):>6} {time.perf_counter() - t0:8.1f}")
    return 1 if failures else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=FigureRun.out)
    ap.add_argument("--resolution", type=int, default=FigureRun.resolution)
    ap.add_argument("names", nargs="*")
    ns = ap.parse_args()
    cfg = FigureRun(ns.out, ns.resolution, tuple(ns.names) or FigureRun.names)
    raise SystemExit(main(cfg))
