//! Convex hull of set-pixel centers and the measurements derived from it.
//! All geometry is on integer lattice points, so hull membership, lattice
//! counts and squared distances are exact.

use super::view::ObjectView;

pub type Point = (i64, i64);

fn cross(o: Point, a: Point, b: Point) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn dist2(a: Point, b: Point) -> i64 {
    (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)
}

/// Strictly convex hull vertices in counter-clockwise order (y up). Only the
/// leftmost and rightmost set pixel of each row can be hull vertices.
pub fn convex_hull(view: &ObjectView) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::with_capacity(2 * view.height);
    for y in 0..view.height {
        let row = view.mask_row(y);
        let first = row.iter().position(|&b| b);
        let last = row.iter().rposition(|&b| b);
        if let (Some(l), Some(r)) = (first, last) {
            pts.push((l as i64, y as i64));
            if r != l {
                pts.push((r as i64, y as i64));
            }
        }
    }
    monotone_chain(pts)
}

fn monotone_chain(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Number of lattice points inside or on the hull.
pub fn lattice_count(hull: &[Point]) -> u64 {
    match hull.len() {
        0 => 0,
        1 => 1,
        2 => (gcd(hull[1].0 - hull[0].0, hull[1].1 - hull[0].1) + 1) as u64,
        n => {
            let y_lo = hull.iter().map(|p| p.1).min().unwrap_or(0);
            let y_hi = hull.iter().map(|p| p.1).max().unwrap_or(0);
            let mut total = 0u64;
            for y in y_lo..=y_hi {
                let (mut lo, mut hi) = (i64::MAX, i64::MIN);
                for i in 0..n {
                    let (p, q) = (hull[i], hull[(i + 1) % n]);
                    if p.1 == q.1 {
                        if p.1 == y {
                            lo = lo.min(p.0.min(q.0));
                            hi = hi.max(p.0.max(q.0));
                        }
                        continue;
                    }
                    if y < p.1.min(q.1) || y > p.1.max(q.1) {
                        continue;
                    }
                    // x = p.x + (y - p.y)(q.x - p.x)/(q.y - p.y), as a fraction
                    let (mut num, mut den) = ((y - p.1) * (q.0 - p.0), q.1 - p.1);
                    if den < 0 {
                        num = -num;
                        den = -den;
                    }
                    let floor = p.0 + num.div_euclid(den);
                    let ceil = p.0 - (-num).div_euclid(den);
                    lo = lo.min(ceil);
                    hi = hi.max(floor);
                }
                if hi >= lo {
                    total += (hi - lo + 1) as u64;
                }
            }
            total
        }
    }
}

/// Maximum and minimum caliper widths by rotating calipers.
pub fn feret(hull: &[Point]) -> (f64, f64) {
    let n = hull.len();
    match n {
        0 | 1 => return (0.0, 0.0),
        2 => return ((dist2(hull[0], hull[1]) as f64).sqrt(), 0.0),
        _ => {}
    }
    let mut max_d2 = 0i64;
    let mut min_width = f64::INFINITY;
    let mut j = 1;
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        while cross(a, b, hull[(j + 1) % n]) > cross(a, b, hull[j]) {
            j = (j + 1) % n;
        }
        let depth = cross(a, b, hull[j]);
        max_d2 = max_d2.max(dist2(a, hull[j])).max(dist2(b, hull[j]));
        // A parallel opposite edge makes both of its ends antipodal.
        let next = hull[(j + 1) % n];
        if cross(a, b, next) == depth {
            max_d2 = max_d2.max(dist2(a, next)).max(dist2(b, next));
        }
        let width = depth as f64 / (dist2(a, b) as f64).sqrt();
        min_width = min_width.min(width);
    }
    ((max_d2 as f64).sqrt(), min_width)
}
