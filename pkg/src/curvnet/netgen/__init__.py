"""Generation of discrete nets of curvature lines."""

from .net import (BOUNDARY, INCOMPLETE, INTERIOR, CurvatureLineNet, assemble_net, read_net,
                  write_net, write_net_obj)
from .revolution import arc_length, revolution_net
from .traced import CurveSet, build_arrangement, find_intersections, seed_lattice, trace_through, traced_net
from .tracing import TraceConfig, TracedCurve, trace_batch, trace_principal_line
from .umbilic import (PATTERNS, classify_umbilic, filler_directions, separatrix_directions, umbilic_net,
                      umbilic_patch)
