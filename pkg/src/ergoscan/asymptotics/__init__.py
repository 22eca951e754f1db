from .classify import classify, forward_statistics, witness_table
from .covering import build_covering
from .hull import HullBuilder, estimate_hull, estimate_orbit_hull
from .scanner import ScanResult, best_distance, find_hits, refine, scan, scan_windows
from .windows import QUANT_BITS, WindowIntegrator, iter_window_chunks, window_starts

__all__ = [
    "HullBuilder",
    "QUANT_BITS",
    "ScanResult",
    "WindowIntegrator",
    "best_distance",
    "build_covering",
    "classify",
    "estimate_hull",
    "estimate_orbit_hull",
    "find_hits",
    "forward_statistics",
    "iter_window_chunks",
    "refine",
    "scan",
    "scan_windows",
    "window_starts",
    "witness_table",
]
