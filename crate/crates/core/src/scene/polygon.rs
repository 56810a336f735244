//! Planar polygon helpers in the world XY plane.

use nalgebra::Point2;
use rand::Rng;

pub type P2 = Point2<f64>;

/// Signed shoelace area; positive for counterclockwise winding.
pub fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        * 0.5
}

pub fn area(poly: &[P2]) -> f64 {
    signed_area(poly).abs()
}

pub fn centroid(poly: &[P2]) -> P2 {
    let a = signed_area(poly);
    if a.abs() < 1e-15 {
        let n = poly.len().max(1) as f64;
        let s = poly.iter().fold(nalgebra::Vector2::zeros(), |acc, p| acc + p.coords);
        return P2::from(s / n);
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    P2::new(cx / (6.0 * a), cy / (6.0 * a))
}

pub fn bounds(poly: &[P2]) -> (P2, P2) {
    let mut lo = P2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        lo = P2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = P2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

fn cross(o: &P2, a: &P2, b: &P2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Monotone-chain hull, counterclockwise, collinear points dropped.
pub fn convex_hull(points: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<P2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// Crossing-number point-in-polygon. Points on the boundary may land either
/// way; callers needing a tolerance use [`contains_with_tolerance`].
pub fn contains(poly: &[P2], p: &P2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn dist_to_segment(p: &P2, a: &P2, b: &P2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

pub fn boundary_distance(poly: &[P2], p: &P2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| dist_to_segment(p, &poly[i], &poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

pub fn contains_with_tolerance(poly: &[P2], p: &P2, tol: f64) -> bool {
    contains(poly, p) || boundary_distance(poly, p) <= tol
}

/// Sutherland–Hodgman: clips an arbitrary polygon against a convex,
/// counterclockwise clip polygon.
pub fn clip_to_convex(subject: &[P2], clip: &[P2]) -> Vec<P2> {
    let mut out: Vec<P2> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % m]);
        let input = std::mem::take(&mut out);
        let inside = |p: &P2| cross(&a, &b, p) >= 0.0;
        let intersect = |p: &P2, q: &P2| {
            let dp = cross(&a, &b, p);
            let dq = cross(&a, &b, q);
            let t = dp / (dp - dq);
            P2::from(p.coords + (q - p) * t)
        };
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            match (inside(&prev), inside(&cur)) {
                (true, true) => out.push(cur),
                (true, false) => out.push(intersect(&prev, &cur)),
                (false, true) => {
                    out.push(intersect(&prev, &cur));
                    out.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    out
}

fn segments_intersect(p1: &P2, p2: &P2, q1: &P2, q2: &P2) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// True when no two non-adjacent edges cross.
pub fn is_simple(poly: &[P2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(&poly[i], &poly[(i + 1) % n], &poly[j], &poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

pub fn is_convex(poly: &[P2]) -> bool {
    let n = poly.len();
    n >= 3 && (0..n).all(|i| cross(&poly[i], &poly[(i + 1) % n], &poly[(i + 2) % n]) >= -1e-12)
}

/// Uniform sample inside a polygon by bounding-box rejection.
pub fn sample_uniform<R: Rng + ?Sized>(poly: &[P2], rng: &mut R) -> Option<P2> {
    let (lo, hi) = bounds(poly);
    for _ in 0..1000 {
        let p = P2::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y));
        if contains(poly, &p) {
            return Some(p);
        }
    }
    None
}

/// Fan triangulation of a convex polygon.
pub fn fan(poly: &[P2]) -> Vec<[usize; 3]> {
    (1..poly.len().saturating_sub(1)).map(|k| [0, k, k + 1]).collect()
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<P2> {
    vec![P2::new(x0, y0), P2::new(x1, y0), P2::new(x1, y1), P2::new(x0, y1)]
}
