"""Plain SVG output: images of concentric circles and a Lap(phi) heatmap."""

import numpy as np

SIZE = 600
PAD = 30


def _frame(points):
    lo = np.array([points.real.min(), points.imag.min()])
    hi = np.array([points.real.max(), points.imag.max()])
    scale = (SIZE - 2 * PAD) / max(hi - lo)
    centre = 0.5 * (lo + hi)

    def xy(z):
        x = SIZE / 2 + scale * (z.real - centre[0])
        y = SIZE / 2 - scale * (z.imag - centre[1])
        return x, y

    return xy


def _polyline(xy, z, colour, width, closed=True):
    x, y = xy(z)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))
    tag = "polygon" if closed else "polyline"
    return f'<{tag} points="{pts}" fill="none" stroke="{colour}" stroke-width="{width}"/>'


def _doc(body, title):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
            f'viewBox="0 0 {SIZE} {SIZE}">\n<title>{title}</title>\n'
            f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def circle_images(map_, curve, path, radii=(0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 1.0), spokes=16, n=512):
    """Draw ``w(r e^{i theta})`` for a few radii, plus radial spokes and the target curve."""
    theta = 2 * np.pi * np.arange(n) / n
    rings = [map_.eval(r * np.exp(1j * theta)) for r in radii]
    s = np.linspace(0, 1, 64)
    rays = [map_.eval(s * np.exp(2j * np.pi * k / spokes)) for k in range(spokes)]
    target = curve.point(curve.arclength_samples(n)) if curve is not None else rings[-1]
    xy = _frame(np.concatenate([target, *rings]))
    body = [_polyline(xy, target, "#999999", 3)]
    body += [_polyline(xy, z, "#1f5fa8", 1) for z in rings]
    body += [_polyline(xy, z, "#c0392b", 0.6, closed=False) for z in rays]
    _write(path, _doc(body, "images of concentric circles"))


def _colour(u):
    # blue (negative) through white to red (positive)
    u = np.clip(u, -1, 1)
    r = np.where(u < 0, 1 + u, 1.0)
    b = np.where(u > 0, 1 - u, 1.0)
    g = 1 - np.abs(u)
    return [f"#{int(255 * a):02x}{int(255 * c):02x}{int(255 * d):02x}" for a, c, d in zip(r, g, b)]


def lap_phi_heatmap(audit, path, max_points=12000):
    """Scatter of ``Lap phi_w`` over the audited disk points, on a symmetric log colour scale."""
    p = audit.points
    z, lap = p["z"], p["lap_phi"]
    step = max(1, int(np.ceil(len(z) / max_points)))
    z, lap = z[::step], lap[::step]
    top = float(np.max(np.abs(lap))) if lap.size else 1.0
    u = np.sign(lap) * np.log1p(np.abs(lap)) / np.log1p(top or 1.0)
    xy = _frame(np.array([-1 - 1j, 1 + 1j]))
    x, y = xy(z)
    body = [f'<desc>colour scale: symlog(Lap phi), red positive, blue negative, |max| = {top:.6g}; '
            f'min = {audit.min_lap_phi:.6g}</desc>',
            _polyline(xy, np.exp(2j * np.pi * np.arange(256) / 256), "#999999", 1)]
    body += [f'<circle cx="{a:.1f}" cy="{b:.1f}" r="1.6" fill="{c}"/>'
             for a, b, c in zip(x, y, _colour(u))]
    _write(path, _doc(body, "Laplacian of the barrier over the collar preimage"))


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)
