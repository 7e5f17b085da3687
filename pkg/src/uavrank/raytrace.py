"""Exact specular path tracing via the image method.

Facets are the ground plane plus the walls and roofs of axis-aligned box
buildings.  Mirroring the transmitter across one or two facets enumerates
every candidate specular path up to reflection order 2; each candidate is
validated by a forward occlusion test against all geometry.  Tree trunks
block a path outright, canopies only attenuate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .scene import SPEED_OF_LIGHT, Material, Scene, Tree, permittivity

# Segments grazing geometry within this distance count as unblocked, which
# keeps reflection points from occluding their own facet.
GRAZE_TOL = 1e-6
# Containment tolerance for reflection points on facet rectangles.
POINT_TOL = 1e-9

MIN_RX_ALTITUDE = 0.5


@dataclass(frozen=True)
class Reflection:
    """One specular bounce: surface material, incidence angle, polarization."""

    material: Material
    angle: float  # radians from the facet normal
    pol: str  # "TE" or "TM"


@dataclass(frozen=True)
class RayPath:
    kind: str  # "los" or "reflected"
    order: int
    vertices: tuple  # ordered 3D points: tx, bounce points..., rx
    length: float
    delay: float
    aod: tuple[float, float]  # (azimuth, elevation) of departure at tx
    aoa: tuple[float, float]  # (azimuth, elevation) of the arriving direction at rx
    gain: complex
    reflections: tuple[Reflection, ...]
    foliage_db: float


@dataclass(frozen=True)
class _Facet:
    axis: int  # 0, 1 or 2: which coordinate is constant
    value: float
    sign: float  # outward normal direction along `axis`
    lo: tuple[float, float]  # bounds over the two remaining axes
    hi: tuple[float, float]
    material: Material
    infinite: bool = False

    def front_of(self, p) -> bool:
        return self.sign * (p[self.axis] - self.value) > POINT_TOL

    def mirror(self, p) -> np.ndarray:
        q = np.array(p, dtype=float)
        q[self.axis] = 2.0 * self.value - q[self.axis]
        return q

    def contains(self, p) -> bool:
        if self.infinite:
            return True
        others = [i for i in range(3) if i != self.axis]
        for k, i in enumerate(others):
            if p[i] < self.lo[k] - POINT_TOL or p[i] > self.hi[k] + POINT_TOL:
                return False
        return True


def scene_facets(s: Scene) -> list[_Facet]:
    facets = [
        _Facet(axis=2, value=0.0, sign=1.0, lo=(0, 0), hi=(0, 0),
               material=s.ground_material, infinite=True)
    ]
    for b in s.buildings:
        x0, x1 = b.x, b.x + b.w
        y0, y1 = b.y, b.y + b.h
        m = b.material
        facets += [
            _Facet(0, x0, -1.0, (y0, 0.0), (y1, b.height), m),
            _Facet(0, x1, +1.0, (y0, 0.0), (y1, b.height), m),
            _Facet(1, y0, -1.0, (x0, 0.0), (x1, b.height), m),
            _Facet(1, y1, +1.0, (x0, 0.0), (x1, b.height), m),
            _Facet(2, b.height, +1.0, (x0, y0), (x1, y1), m),  # roof
        ]
    return facets


def fresnel_reflection(eps_r: complex, incidence_angle: float, pol: str) -> complex:
    """Fresnel reflection coefficient of a dielectric half-space.

    `incidence_angle` is measured from the surface normal.  Both polarizations
    give (1 - sqrt(eps)) / (1 + sqrt(eps)) at normal incidence; TE tends to -1
    at grazing.
    """
    if not (0 <= incidence_angle < np.pi / 2 + 1e-12):
        raise ValueError(f"incidence angle out of range: {incidence_angle}")
    cos_t = np.cos(incidence_angle)
    sin2 = np.sin(incidence_angle) ** 2
    g = np.sqrt(eps_r - sin2)
    if pol == "TE":
        return complex((cos_t - g) / (cos_t + g))
    if pol == "TM":
        return complex((g - eps_r * cos_t) / (g + eps_r * cos_t))
    raise ValueError(f"polarization must be 'TE' or 'TM', got {pol!r}")


# ---------------------------------------------------------------------------
# Occlusion and foliage
# ---------------------------------------------------------------------------


def _segment_box_blocked(p0, p1, x0, x1, y0, y1, z0, z1) -> bool:
    """True if the segment has a chord longer than GRAZE_TOL inside the box."""
    lo = np.array([x0, y0, z0]) + GRAZE_TOL
    hi = np.array([x1, y1, z1]) - GRAZE_TOL
    if np.any(lo >= hi):
        return False
    d = p1 - p0
    tmin, tmax = 0.0, 1.0
    for i in range(3):
        if abs(d[i]) < 1e-15:
            if p0[i] < lo[i] or p0[i] > hi[i]:
                return False
        else:
            ta = (lo[i] - p0[i]) / d[i]
            tb = (hi[i] - p0[i]) / d[i]
            if ta > tb:
                ta, tb = tb, ta
            tmin = max(tmin, ta)
            tmax = min(tmax, tb)
            if tmin >= tmax:
                return False
    return (tmax - tmin) * np.linalg.norm(d) > GRAZE_TOL


def _quad_le0_interval(A, B, C):
    """Solution of A t^2 + B t + C <= 0 as a list of (lo, hi) intervals."""
    if abs(A) < 1e-15:
        if abs(B) < 1e-15:
            return [(-np.inf, np.inf)] if C <= 0 else []
        t = -C / B
        return [(-np.inf, t)] if B > 0 else [(t, np.inf)]
    disc = B * B - 4 * A * C
    if disc <= 0:
        return [] if A > 0 else [(-np.inf, np.inf)]
    r = np.sqrt(disc)
    t1 = (-B - r) / (2 * A)
    t2 = (-B + r) / (2 * A)
    t1, t2 = min(t1, t2), max(t1, t2)
    if A > 0:
        return [(t1, t2)]
    return [(-np.inf, t1), (t2, np.inf)]


def _clip_intervals(intervals, lo, hi):
    out = []
    for a, b in intervals:
        a, b = max(a, lo), min(b, hi)
        if b > a:
            out.append((a, b))
    return out


def _z_interval(z0, dz, zlo, zhi):
    """t-interval where z0 + t*dz lies in [zlo, zhi]."""
    if abs(dz) < 1e-15:
        return (0.0, 1.0) if zlo <= z0 <= zhi else None
    ta = (zlo - z0) / dz
    tb = (zhi - z0) / dz
    return (min(ta, tb), max(ta, tb))


def _near_trees(trees, p0, p1, radii):
    """Indices of trees whose horizontal reach may touch the segment."""
    if len(trees) == 0:
        return []
    c = np.array([[t.x, t.y] for t in trees])
    u0 = c - p0[:2]
    du = (p1 - p0)[:2]
    L2 = du @ du
    if L2 < 1e-30:
        d2 = np.einsum("ij,ij->i", u0, u0)
    else:
        t = np.clip((u0 @ du) / L2, 0.0, 1.0)
        closest = np.outer(t, du) - u0
        d2 = np.einsum("ij,ij->i", closest, closest)
    return np.nonzero(d2 <= (radii + GRAZE_TOL) ** 2)[0]


def _trunk_blocked(tree: Tree, p0, p1) -> bool:
    d = p1 - p0
    seg_len = np.linalg.norm(d)
    if seg_len < 1e-15:
        return False
    r = tree.trunk_radius - GRAZE_TOL
    if r <= 0:
        return False
    u0 = p0[:2] - np.array([tree.x, tree.y])
    du = d[:2]
    A = du @ du
    B = 2.0 * (u0 @ du)
    C = u0 @ u0 - r * r
    ivs = _quad_le0_interval(A, B, C)
    zi = _z_interval(p0[2], d[2], GRAZE_TOL, tree.trunk_height - GRAZE_TOL)
    if zi is None:
        return False
    ivs = _clip_intervals(ivs, max(0.0, zi[0]), min(1.0, zi[1]))
    chord = sum(b - a for a, b in ivs) * seg_len
    return chord > GRAZE_TOL


def _canopy_chord(tree: Tree, p0, p1) -> float:
    """Chord length (m) of the segment through the canopy cone."""
    d = p1 - p0
    seg_len = np.linalg.norm(d)
    if seg_len < 1e-15:
        return 0.0
    z_base = tree.trunk_height
    z_apex = tree.trunk_height + tree.canopy_height
    k = tree.canopy_base_radius / tree.canopy_height
    u0 = p0[:2] - np.array([tree.x, tree.y])
    du = d[:2]
    w0 = z_apex - p0[2]
    dz = d[2]
    A = du @ du - k * k * dz * dz
    B = 2.0 * (u0 @ du) + 2.0 * k * k * w0 * dz
    C = u0 @ u0 - k * k * w0 * w0
    ivs = _quad_le0_interval(A, B, C)
    zi = _z_interval(p0[2], dz, z_base, z_apex)  # also excludes the mirror cone
    if zi is None:
        return 0.0
    ivs = _clip_intervals(ivs, max(0.0, zi[0]), min(1.0, zi[1]))
    return sum(b - a for a, b in ivs) * seg_len


def foliage_loss(p0, p1, trees) -> float:
    """Foliage attenuation of a segment in dB; +inf if a trunk is crossed."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    trees = list(trees)
    if not trees:
        return 0.0
    reach = np.array([max(t.trunk_radius, t.canopy_base_radius) for t in trees])
    total = 0.0
    for i in _near_trees(trees, p0, p1, reach):
        t = trees[i]
        if _trunk_blocked(t, p0, p1):
            return np.inf
        total += _canopy_chord(t, p0, p1) * t.attenuation_db_per_m
    return total


def _segment_clear(s: Scene, p0, p1) -> bool:
    """True if no building interior or tree trunk interrupts the segment."""
    for b in s.buildings:
        if _segment_box_blocked(
            p0, p1, b.x, b.x + b.w, b.y, b.y + b.h, 0.0, b.height
        ):
            return False
    trees = s.trees
    if trees:
        reach = np.array([t.trunk_radius for t in trees])
        for i in _near_trees(trees, p0, p1, reach):
            if _trunk_blocked(trees[i], p0, p1):
                return False
    return True


# ---------------------------------------------------------------------------
# Path construction
# ---------------------------------------------------------------------------


def _angles(direction) -> tuple[float, float]:
    az = float(np.arctan2(direction[1], direction[0]))
    el = float(np.arcsin(np.clip(direction[2], -1.0, 1.0)))
    return az, el


def _facet_pol(facet: _Facet) -> str:
    # Horizontal facets (ground, roofs) see the vertically polarized component
    # of the field; vertical walls see the horizontal one.
    return "TM" if facet.axis == 2 else "TE"


def _make_path(s: Scene, vertices, facets_hit) -> RayPath | None:
    verts = [np.asarray(v, dtype=float) for v in vertices]
    segs = list(zip(verts[:-1], verts[1:]))
    length = sum(float(np.linalg.norm(b - a)) for a, b in segs)
    fol = 0.0
    for a, b in segs:
        if not _segment_clear(s, a, b):
            return None
        fol += foliage_loss(a, b, s.trees)
    if not np.isfinite(fol):
        return None

    reflections = []
    for i, facet in enumerate(facets_hit):
        q = verts[i + 1]
        d_in = q - verts[i]
        d_in = d_in / np.linalg.norm(d_in)
        n = np.zeros(3)
        n[facet.axis] = facet.sign
        cos_t = abs(float(d_in @ n))
        angle = float(np.arccos(np.clip(cos_t, 0.0, 1.0)))
        reflections.append(
            Reflection(material=facet.material, angle=angle, pol=_facet_pol(facet))
        )

    d_out = verts[1] - verts[0]
    d_out = d_out / np.linalg.norm(d_out)
    d_arr = verts[-1] - verts[-2]
    d_arr = d_arr / np.linalg.norm(d_arr)

    order = len(facets_hit)
    path = RayPath(
        kind="los" if order == 0 else "reflected",
        order=order,
        vertices=tuple(tuple(v) for v in verts),
        length=length,
        delay=length / SPEED_OF_LIGHT,
        aod=_angles(d_out),
        aoa=_angles(d_arr),
        gain=0j,
        reflections=tuple(reflections),
        foliage_db=fol,
    )
    return replace(path, gain=path_gain(path, s))


def path_gain(p: RayPath, s: Scene) -> complex:
    """Complex amplitude: spreading, reflection products, foliage loss, phase."""
    lam = s.wavelength_m
    g = lam / (4.0 * np.pi * p.length)
    for r in p.reflections:
        eps = permittivity(r.material, s.frequency_hz)
        g *= fresnel_reflection(eps, r.angle, r.pol)
    g *= 10.0 ** (-p.foliage_db / 20.0)
    g *= np.exp(-2j * np.pi * p.length / lam)
    return complex(g)


def _reflect_once(facet: _Facet, src_image, target):
    """Reflection point of the mirrored source toward target, or None."""
    a, v = facet.axis, facet.value
    denom = target[a] - src_image[a]
    if abs(denom) < 1e-15:
        return None
    t = (v - src_image[a]) / denom
    if not (POINT_TOL < t < 1.0 - POINT_TOL):
        return None
    q = src_image + t * (target - src_image)
    q[a] = v  # exact by construction
    if not facet.contains(q):
        return None
    return q


def trace_paths(s: Scene, tx, rx, max_reflections: int = 2) -> list[RayPath]:
    """All unblocked specular paths from tx to rx up to the reflection cap.

    Returns an empty list when the receiver is out of coverage.  Receiver
    altitudes below 0.5 m are clamped to 0.5 m.
    """
    if max_reflections not in (0, 1, 2):
        raise ValueError(f"max_reflections must be 0, 1 or 2, got {max_reflections}")
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float).copy()
    rx[2] = max(rx[2], MIN_RX_ALTITUDE)
    if np.allclose(tx, rx):
        raise ValueError("tx and rx must be distinct points")

    facets = scene_facets(s)
    paths = []

    los = _make_path(s, [tx, rx], [])
    if los is not None:
        paths.append(los)

    if max_reflections >= 1:
        for f in facets:
            if not (f.front_of(tx) and f.front_of(rx)):
                continue
            q = _reflect_once(f, f.mirror(tx), rx)
            if q is None:
                continue
            p = _make_path(s, [tx, q, rx], [f])
            if p is not None:
                paths.append(p)

    if max_reflections >= 2:
        for i, f1 in enumerate(facets):
            if not f1.front_of(tx):
                continue
            img1 = f1.mirror(tx)
            for j, f2 in enumerate(facets):
                if j == i or not f2.front_of(rx):
                    continue
                img2 = f2.mirror(img1)
                q2 = _reflect_once(f2, img2, rx)
                if q2 is None:
                    continue
                if not f1.front_of(q2):
                    continue
                q1 = _reflect_once(f1, img1, q2)
                if q1 is None:
                    continue
                if not f2.front_of(q1):
                    continue
                p = _make_path(s, [tx, q1, q2, rx], [f1, f2])
                if p is not None:
                    paths.append(p)

    return paths


def paths_to_csv(paths) -> str:
    """Dump paths as CSV (kind, order, geometry, angles, complex gain)."""
    lines = [
        "kind,order,length_m,delay_s,aod_az,aod_el,aoa_az,aoa_el,gain_re,gain_im"
    ]
    for p in paths:
        lines.append(
            f"{p.kind},{p.order},{p.length:.9f},{p.delay:.12e},"
            f"{p.aod[0]:.9f},{p.aod[1]:.9f},{p.aoa[0]:.9f},{p.aoa[1]:.9f},"
            f"{p.gain.real:.9e},{p.gain.imag:.9e}"
        )
    return "\n".join(lines) + "\n"
