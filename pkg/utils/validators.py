from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from config import SIGMA_TOLERANCE


def network_diagnostics(
        vertices: int,
        edges: Sequence[Sequence[Any]],
        partition_a: Optional[Iterable[int]] = None,
        partition_b: Optional[Iterable[int]] = None
) -> List[str]:
    """Report every violated invariant of a weighted simple undirected graph"""
    diagnostics = []
    if vertices < 0:
        diagnostics.append(f"vertex count {vertices} is negative")

    seen: Dict[Tuple[int, int], int] = {}
    for index, edge in enumerate(edges):
        if len(edge) != 3:
            diagnostics.append(f"edge {index} must be [u, v, w], got {list(edge)}")
            continue
        u, v, w = edge
        if not (0 <= u < vertices and 0 <= v < vertices):
            diagnostics.append(f"edge {index} ({u}, {v}) references a vertex outside 0..{vertices - 1}")
        if u == v:
            diagnostics.append(f"edge {index} is a self-loop at vertex {u}")
        if not w > 0:
            diagnostics.append(f"edge {index} ({u}, {v}) has non-positive weight {w}")
        pair = (min(u, v), max(u, v))
        if pair in seen:
            diagnostics.append(f"duplicate edge {pair} at indices {seen[pair]} and {index}")
        else:
            seen[pair] = index

    if partition_a is not None or partition_b is not None:
        diagnostics.extend(partition_diagnostics(vertices, edges, partition_a or [], partition_b or []))
    return diagnostics


def partition_diagnostics(
        vertices: int,
        edges: Sequence[Sequence[Any]],
        partition_a: Iterable[int],
        partition_b: Iterable[int]
) -> List[str]:
    """Check A and B split the vertex set and every edge crosses the cut"""
    diagnostics = []
    part_a, part_b = set(partition_a), set(partition_b)
    overlap = part_a & part_b
    if overlap:
        diagnostics.append(f"partition parts overlap on {sorted(overlap)}")
    missing = set(range(vertices)) - part_a - part_b
    if missing:
        diagnostics.append(f"partition does not cover vertices {sorted(missing)}")
    extra = (part_a | part_b) - set(range(vertices))
    if extra:
        diagnostics.append(f"partition names unknown vertices {sorted(extra)}")
    for index, edge in enumerate(edges):
        if len(edge) != 3:
            continue
        u, v = edge[0], edge[1]
        if (u in part_a) == (v in part_a) or (u in part_b) == (v in part_b):
            diagnostics.append(f"edge {index} ({u}, {v}) does not cross the partition")
    return diagnostics


def distribution_diagnostics(vertices: int, sigma: Mapping[Any, float]) -> List[str]:
    """Check sigma is a probability distribution over 0..vertices-1"""
    diagnostics = []
    total = 0.0
    for key, value in sigma.items():
        try:
            u = int(key)
        except (TypeError, ValueError):
            diagnostics.append(f"sigma key {key!r} is not a vertex id")
            continue
        if not 0 <= u < vertices:
            diagnostics.append(f"sigma names vertex {u} outside 0..{vertices - 1}")
        if value < 0:
            diagnostics.append(f"sigma[{u}] = {value} is negative")
        total += value
    if abs(total - 1.0) > SIGMA_TOLERANCE:
        diagnostics.append(f"sigma sums to {total:.15g}, not 1 (normalization violated)")
    return diagnostics


def marked_diagnostics(vertices: int, marked: Iterable[int]) -> List[str]:
    outside = sorted(u for u in marked if not 0 <= u < vertices)
    if outside:
        return [f"marked vertices {outside} are outside 0..{vertices - 1}"]
    return []


def support_diagnostics(partition_a: Iterable[int], sigma: Mapping[Any, float]) -> List[str]:
    """Check the support of sigma lies inside part A"""
    part_a = set(partition_a)
    outside = sorted(int(u) for u, p in sigma.items() if p != 0 and int(u) not in part_a)
    if outside:
        return [f"support of sigma is not contained in part A: {outside}"]
    return []
