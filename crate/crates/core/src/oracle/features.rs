//! Straightforward per-object reference implementation of all 247
//! features. Shares nothing with the engine kernels except the manifest
//! layout and the declared degenerate-case rules.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::region::{BoundingBox, IntensityPatch, ObjectMask};

struct Obj<'a> {
    w: i64,
    h: i64,
    mask: &'a ObjectMask,
    patch: &'a IntensityPatch,
    /// Set pixels in row-major order with their intensity.
    px: Vec<(i64, i64, f64)>,
}

impl Obj<'_> {
    fn on(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.w && y < self.h && self.mask.get(x as usize, y as usize)
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() as f64 - 1.0);
    let i = pos.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] * (1.0 - (pos - i as f64)) + sorted[i + 1] * (pos - i as f64)
}

/// Reference feature vector of one unpadded object.
pub fn oracle_features(patch: &IntensityPatch, mask: &ObjectMask, bbox: &BoundingBox) -> Result<Vec<f64>> {
    if (patch.width(), patch.height()) != bbox.dims() || (mask.width(), mask.height()) != bbox.dims() {
        return Err(Error::Shape("oracle input dimensions differ".into()));
    }
    let mut px = Vec::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                px.push((x as i64, y as i64, patch.get(x, y) as f64));
            }
        }
    }
    if px.is_empty() {
        return Err(Error::InvalidRegion("oracle needs a non-empty mask".into()));
    }
    let o = Obj {
        w: mask.width() as i64,
        h: mask.height() as i64,
        mask,
        patch,
        px,
    };
    let d2 = distance_map(&o);
    let mut out = Vec::with_capacity(247);
    out.extend(shape(&o, bbox, &d2));
    out.extend(texture(&o));
    out.extend(intensity(&o, bbox));
    out.extend(radial(&o, &d2));
    out.extend(zernike(&o));
    Ok(out)
}

fn centroid(o: &Obj) -> (f64, f64) {
    let n = o.px.len() as f64;
    let sx: f64 = o.px.iter().map(|p| p.0 as f64).sum();
    let sy: f64 = o.px.iter().map(|p| p.1 as f64).sum();
    (sx / n, sy / n)
}

fn mu(o: &Obj, p: i32, q: i32) -> f64 {
    let (cx, cy) = centroid(o);
    o.px.iter()
        .map(|&(x, y, _)| (x as f64 - cx).powi(p) * (y as f64 - cy).powi(q))
        .sum()
}

/// Squared distance from each set pixel to the nearest background pixel
/// center, searching only background pixels that touch the object.
fn distance_map(o: &Obj) -> Vec<i64> {
    let mut border = Vec::new();
    for y in -1..=o.h {
        for x in -1..=o.w {
            if !o.on(x, y) && (o.on(x - 1, y) || o.on(x + 1, y) || o.on(x, y - 1) || o.on(x, y + 1)) {
                border.push((x, y));
            }
        }
    }
    o.px.iter()
        .map(|&(x, y, _)| {
            border
                .iter()
                .map(|&(bx, by)| (bx - x) * (bx - x) + (by - y) * (by - y))
                .min()
                .expect("a non-empty mask has background neighbours")
        })
        .collect()
}

// ---- shape --------------------------------------------------------------

/// Contour length from the cell complex on pixel centers: full 2x2 blocks
/// are squares, 3-pixel blocks are triangles. Face edges used once are on
/// the boundary; links used by no face are bridges walked twice.
fn perimeter(o: &Obj) -> f64 {
    let n = o.px.len();
    if n <= 2 {
        return 4.0 * n as f64;
    }
    use std::collections::HashMap;
    // Edge key: (x0, y0, x1, y1) with endpoints ordered.
    let mut faces: HashMap<(i64, i64, i64, i64), u32> = HashMap::new();
    let key = |a: (i64, i64), b: (i64, i64)| {
        if a <= b {
            (a.0, a.1, b.0, b.1)
        } else {
            (b.0, b.1, a.0, a.1)
        }
    };
    for by in -1..o.h {
        for bx in -1..o.w {
            let c = [(bx, by), (bx + 1, by), (bx + 1, by + 1), (bx, by + 1)];
            let set: Vec<(i64, i64)> = c.iter().copied().filter(|&(x, y)| o.on(x, y)).collect();
            if set.len() == 4 {
                for i in 0..4 {
                    *faces.entry(key(c[i], c[(i + 1) % 4])).or_default() += 1;
                }
            } else if set.len() == 3 {
                for i in 0..3 {
                    *faces.entry(key(set[i], set[(i + 1) % 3])).or_default() += 1;
                }
            }
        }
    }
    let mut total = 0.0;
    // Every 8-neighbour link between set pixels, each once.
    for &(x, y, _) in &o.px {
        for (dx, dy) in [(1, 0), (0, 1), (1, 1), (1, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if !o.on(nx, ny) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal {
                // A diagonal inside a full block is no contour link.
                let full = o.on(x + dx, y) && o.on(x, y + dy);
                if full {
                    continue;
                }
                let len = 2f64.sqrt();
                match faces.get(&key((x, y), (nx, ny))).copied().unwrap_or(0) {
                    0 => total += 2.0 * len,
                    1 => total += len,
                    _ => {}
                }
            } else {
                match faces.get(&key((x, y), (nx, ny))).copied().unwrap_or(0) {
                    0 => total += 2.0,
                    1 => total += 1.0,
                    _ => {}
                }
            }
        }
    }
    total
}

fn turn(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Gift-wrapping hull; on collinear candidates the farthest wins so only
/// true corners are kept.
fn hull(o: &Obj) -> Vec<(i64, i64)> {
    let pts: Vec<(i64, i64)> = o.px.iter().map(|p| (p.0, p.1)).collect();
    let start = *pts.iter().min().expect("non-empty");
    if pts.iter().all(|&p| p == start) {
        return vec![start];
    }
    let d2 = |a: (i64, i64), b: (i64, i64)| (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2);
    let mut out = vec![start];
    let mut cur = start;
    loop {
        let mut next = if pts[0] == cur { pts[1] } else { pts[0] };
        for &p in &pts {
            if p == cur {
                continue;
            }
            let t = turn(cur, next, p);
            if t < 0 || (t == 0 && d2(cur, p) > d2(cur, next)) {
                next = p;
            }
        }
        if next == start {
            break;
        }
        out.push(next);
        cur = next;
        if out.len() > pts.len() {
            break;
        }
    }
    // Orient so that interior points lie on the positive side of every edge.
    let twice_area: i64 = (0..out.len())
        .map(|i| {
            let (a, b) = (out[i], out[(i + 1) % out.len()]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum();
    if twice_area < 0 {
        out.reverse();
    }
    out
}

fn hull_lattice_points(o: &Obj, hull: &[(i64, i64)]) -> f64 {
    let mut count = 0u64;
    for y in 0..o.h {
        for x in 0..o.w {
            let p = (x, y);
            let inside = match hull.len() {
                1 => p == hull[0],
                2 => {
                    let (a, b) = (hull[0], hull[1]);
                    turn(a, b, p) == 0 && (p.0 - a.0) * (p.0 - b.0) <= 0 && (p.1 - a.1) * (p.1 - b.1) <= 0
                }
                n => (0..n).all(|i| turn(hull[i], hull[(i + 1) % n], p) >= 0),
            };
            if inside {
                count += 1;
            }
        }
    }
    count as f64
}

fn feret(hull: &[(i64, i64)]) -> (f64, f64) {
    let n = hull.len();
    let mut max = 0i64;
    for a in hull {
        for b in hull {
            max = max.max((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2));
        }
    }
    if n < 3 {
        return ((max as f64).sqrt(), 0.0);
    }
    let mut min = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        let far = hull.iter().map(|&p| turn(a, b, p)).max().unwrap_or(0);
        let len2 = (b.0 - a.0).pow(2) + (b.1 - a.1).pow(2);
        min = min.min(far as f64 / (len2 as f64).sqrt());
    }
    ((max as f64).sqrt(), min)
}

/// Components (8-connected) minus holes (4-connected background regions
/// not reaching the frame).
fn euler(o: &Obj) -> f64 {
    let (w, h) = (o.w + 2, o.h + 2);
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let fg = |x: i64, y: i64| o.on(x - 1, y - 1);
    let mut seen = vec![false; (w * h) as usize];
    let fill = |sx: i64, sy: i64, want: bool, diag: bool, seen: &mut Vec<bool>| {
        let mut q = VecDeque::from([(sx, sy)]);
        seen[idx(sx, sy)] = true;
        while let Some((x, y)) = q.pop_front() {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if (dx == 0 && dy == 0) || (!diag && dx != 0 && dy != 0) {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    if fg(nx, ny) == want && !seen[idx(nx, ny)] {
                        seen[idx(nx, ny)] = true;
                        q.push_back((nx, ny));
                    }
                }
            }
        }
    };
    fill(0, 0, false, false, &mut seen);
    let mut components = 0;
    let mut holes = 0;
    for y in 0..h {
        for x in 0..w {
            if seen[idx(x, y)] {
                continue;
            }
            if fg(x, y) {
                components += 1;
                fill(x, y, true, true, &mut seen);
            } else {
                holes += 1;
                fill(x, y, false, false, &mut seen);
            }
        }
    }
    (components - holes) as f64
}

fn ellipse(o: &Obj) -> [f64; 4] {
    let n = o.px.len() as f64;
    let a = mu(o, 2, 0) / n + 1.0 / 12.0;
    let c = mu(o, 0, 2) / n + 1.0 / 12.0;
    let b0 = mu(o, 1, 1) / n;
    let eps = 1e-12 * (a + c);
    let b = if b0.abs() <= eps { 0.0 } else { b0 };
    let diff = if (a - c).abs() <= eps { 0.0 } else { a - c };
    let root = (diff * diff / 4.0 + b * b).sqrt();
    let major = (a + c) / 2.0 + root;
    let minor = (a + c) / 2.0 - root;
    let ecc = (1.0 - minor / major).max(0.0).sqrt();
    let orient = if b == 0.0 && diff == 0.0 {
        0.0
    } else {
        let mut t = 0.5 * (if b == 0.0 { 0.0 } else { -2.0 * b }).atan2(diff) * 180.0 / PI;
        if t <= -90.0 {
            t += 180.0;
        }
        t
    };
    [ecc, orient, 4.0 * major.sqrt(), 4.0 * minor.max(0.0).sqrt()]
}

fn hu(o: &Obj) -> [f64; 7] {
    let n = o.px.len() as f64;
    let eta = |p: i32, q: i32| mu(o, p, q) / n.powf(1.0 + (p + q) as f64 / 2.0);
    let (e20, e02, e11) = (eta(2, 0), eta(0, 2), eta(1, 1));
    let (e30, e03, e21, e12) = (eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2));
    let h1 = e20 + e02;
    let h2 = (e20 - e02).powi(2) + 4.0 * e11.powi(2);
    let h3 = (e30 - 3.0 * e12).powi(2) + (3.0 * e21 - e03).powi(2);
    let h4 = (e30 + e12).powi(2) + (e21 + e03).powi(2);
    let h5 = (e30 - 3.0 * e12) * (e30 + e12) * ((e30 + e12).powi(2) - 3.0 * (e21 + e03).powi(2))
        + (3.0 * e21 - e03) * (e21 + e03) * (3.0 * (e30 + e12).powi(2) - (e21 + e03).powi(2));
    let h6 = (e20 - e02) * ((e30 + e12).powi(2) - (e21 + e03).powi(2)) + 4.0 * e11 * (e30 + e12) * (e21 + e03);
    let h7 = (3.0 * e21 - e03) * (e30 + e12) * ((e30 + e12).powi(2) - 3.0 * (e21 + e03).powi(2))
        - (e30 - 3.0 * e12) * (e21 + e03) * (3.0 * (e30 + e12).powi(2) - (e21 + e03).powi(2));
    [h1, h2, h3, h4, h5, h6, h7]
}

fn shape(o: &Obj, bbox: &BoundingBox, d2: &[i64]) -> Vec<f64> {
    let area = o.px.len() as f64;
    let per = perimeter(o);
    let hull = hull(o);
    let convex = hull_lattice_points(o, &hull);
    let (max_feret, min_feret) = feret(&hull);
    let [ecc, orient, major, minor] = ellipse(o);
    let (cx, cy) = centroid(o);
    let radii: Vec<f64> = d2.iter().map(|&d| (d as f64).sqrt()).collect();
    let mean_r = radii.iter().sum::<f64>() / area;
    let radii = sorted(radii);
    let mut v = vec![
        area,
        per,
        convex,
        area / convex,
        area / (bbox.width() * bbox.height()) as f64,
        ecc,
        orient,
        major,
        minor,
        4.0 * PI * area / (per * per),
        per * per / (4.0 * PI * area),
        max_feret,
        min_feret,
        euler(o),
        bbox.min_x as f64,
        bbox.min_y as f64,
        bbox.max_x as f64,
        bbox.max_y as f64,
        bbox.min_x as f64 + cx,
        bbox.min_y as f64 + cy,
        mean_r,
        quantile(&radii, 0.5),
        radii[radii.len() - 1],
    ];
    v.extend(hu(o));
    v
}

// ---- texture ------------------------------------------------------------

fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn haralick(p: &[[f64; 8]; 8]) -> Vec<f64> {
    let px: Vec<f64> = (0..8).map(|i| (0..8).map(|j| p[i][j]).sum()).collect();
    let py: Vec<f64> = (0..8).map(|j| (0..8).map(|i| p[i][j]).sum()).collect();
    let ux: f64 = (0..8).map(|i| i as f64 * px[i]).sum();
    let uy: f64 = (0..8).map(|j| j as f64 * py[j]).sum();
    let sx2: f64 = (0..8).map(|i| (i as f64 - ux).powi(2) * px[i]).sum();
    let sy2: f64 = (0..8).map(|j| (j as f64 - uy).powi(2) * py[j]).sum();

    let mut asm = 0.0;
    let mut contrast = 0.0;
    let mut cov = 0.0;
    let mut idm = 0.0;
    let mut ent = 0.0;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    let mut psum = [0.0; 15];
    let mut pdiff = [0.0; 8];
    for i in 0..8 {
        for j in 0..8 {
            let v = p[i][j];
            asm += v * v;
            contrast += ((i as f64) - (j as f64)).powi(2) * v;
            cov += (i as f64 - ux) * (j as f64 - uy) * v;
            idm += v / (1.0 + ((i as f64) - (j as f64)).powi(2));
            ent += entropy_term(v);
            if v > 0.0 {
                hxy1 -= v * (px[i] * py[j]).log2();
            }
            hxy2 += entropy_term(px[i] * py[j]);
            psum[i + j] += v;
            pdiff[(i as i64 - j as i64).unsigned_abs() as usize] += v;
        }
    }
    let sd = (sx2 * sy2).sqrt();
    let corr = if sx2 <= 1e-12 || sy2 <= 1e-12 { 0.0 } else { cov / sd };
    let savg: f64 = (0..15).map(|k| k as f64 * psum[k]).sum();
    let svar: f64 = (0..15).map(|k| (k as f64 - savg).powi(2) * psum[k]).sum();
    let sent: f64 = psum.iter().map(|&v| entropy_term(v)).sum();
    let dmean: f64 = (0..8).map(|k| k as f64 * pdiff[k]).sum();
    let dvar: f64 = (0..8).map(|k| (k as f64 - dmean).powi(2) * pdiff[k]).sum();
    let dent: f64 = pdiff.iter().map(|&v| entropy_term(v)).sum();
    let hx: f64 = px.iter().map(|&v| entropy_term(v)).sum();
    let hy: f64 = py.iter().map(|&v| entropy_term(v)).sum();
    let imc1 = if hx.max(hy) <= 1e-12 {
        0.0
    } else {
        (ent - hxy1) / hx.max(hy)
    };
    let imc2 = if hxy2 - ent <= 1e-12 {
        0.0
    } else {
        (1.0 - (-2.0 * (hxy2 - ent)).exp()).sqrt()
    };
    vec![
        asm, contrast, corr, sx2, idm, savg, svar, sent, ent, dvar, dent, imc1, imc2,
    ]
}

fn texture(o: &Obj) -> Vec<f64> {
    let lo = o.px.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let hi = o.px.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let level = |x: i64, y: i64| -> usize {
        if hi == lo {
            return 0;
        }
        let v = o.patch.get(x as usize, y as usize) as f64;
        let l = ((v - lo) / (hi - lo) * 8.0).floor() as usize;
        if l > 7 {
            7
        } else {
            l
        }
    };
    let mut out = Vec::with_capacity(104);
    for s in [1i64, 3] {
        for (dx, dy) in [(s, 0), (s, -s), (0, -s), (-s, -s)] {
            let mut counts = [[0u64; 8]; 8];
            for &(x, y, _) in &o.px {
                if o.on(x + dx, y + dy) {
                    let (a, b) = (level(x, y), level(x + dx, y + dy));
                    counts[a][b] += 1;
                    counts[b][a] += 1;
                }
            }
            let total: u64 = counts.iter().map(|r| r.iter().sum::<u64>()).sum();
            if total == 0 {
                out.extend([0.0; 13]);
                continue;
            }
            let mut p = [[0.0; 8]; 8];
            for i in 0..8 {
                for j in 0..8 {
                    p[i][j] = counts[i][j] as f64 / total as f64;
                }
            }
            out.extend(haralick(&p));
        }
    }
    out
}

// ---- intensity ----------------------------------------------------------

fn basic_stats(v: &[f64]) -> [f64; 5] {
    let n = v.len() as f64;
    let sum: f64 = v.iter().sum();
    let mean = sum / n;
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = if hi == lo { 0.0 } else { var.sqrt() };
    [sum, mean, std, lo, hi]
}

fn intensity(o: &Obj, bbox: &BoundingBox) -> Vec<f64> {
    let vals: Vec<f64> = o.px.iter().map(|p| p.2).collect();
    let [sum, mean, std, lo, hi] = basic_stats(&vals);
    let s = sorted(vals.clone());
    let median = quantile(&s, 0.5);
    let mad = quantile(&sorted(vals.iter().map(|v| (v - median).abs()).collect()), 0.5);
    let edge: Vec<f64> =
        o.px.iter()
            .filter(|&&(x, y, _)| !o.on(x - 1, y) || !o.on(x + 1, y) || !o.on(x, y - 1) || !o.on(x, y + 1))
            .map(|p| p.2)
            .collect();
    let (bx, by) = centroid(o);
    let (wx, wy) = if sum > 0.0 && hi != lo {
        (
            o.px.iter().map(|p| p.2 * p.0 as f64).sum::<f64>() / sum,
            o.px.iter().map(|p| p.2 * p.1 as f64).sum::<f64>() / sum,
        )
    } else {
        (bx, by)
    };
    let mut v = vec![
        sum,
        mean,
        std,
        lo,
        hi,
        median,
        mad,
        quantile(&s, 0.25),
        quantile(&s, 0.75),
        ((wx - bx).powi(2) + (wy - by).powi(2)).sqrt(),
    ];
    v.extend(basic_stats(&edge));
    v.push(bbox.min_x as f64 + wx);
    v.push(bbox.min_y as f64 + wy);
    v
}

// ---- distribution -------------------------------------------------------

/// Angular wedge by half-plane tests against the eight 45-degree
/// directions; `(x, y)` are the centroid offsets scaled by the pixel count.
fn wedge(x: i64, y: i64) -> usize {
    const DIRS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
    for k in 0..8 {
        let (a, b) = (DIRS[k], DIRS[(k + 1) % 8]);
        let from = a.0 * y - a.1 * x;
        let to = x * b.1 - y * b.0;
        if from >= 0 && to > 0 {
            return k;
        }
    }
    0
}

fn radial(o: &Obj, d2: &[i64]) -> Vec<f64> {
    let n = o.px.len() as i64;
    let sx: i64 = o.px.iter().map(|p| p.0).sum();
    let sy: i64 = o.px.iter().map(|p| p.1).sum();
    let (cx, cy) = centroid(o);
    let mut bin_of = Vec::with_capacity(o.px.len());
    for (i, &(x, y, _)) in o.px.iter().enumerate() {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let dc = (dx * dx + dy * dy).sqrt();
        let de = (d2[i] as f64).sqrt();
        let b = ((dc / (dc + de) * 12.0).floor() as usize).min(11);
        bin_of.push((b, wedge(n * x - sx, n * y - sy)));
    }
    let total: f64 = o.px.iter().map(|p| p.2).sum();
    let mut frac = vec![0.0; 12];
    let mut mean_frac = vec![0.0; 12];
    let mut cv = vec![0.0; 12];
    if total > 0.0 {
        for b in 0..12 {
            let members: Vec<usize> = (0..o.px.len()).filter(|&i| bin_of[i].0 == b).collect();
            if members.is_empty() {
                continue;
            }
            let s: f64 = members.iter().map(|&i| o.px[i].2).sum();
            frac[b] = s / total;
            mean_frac[b] = frac[b] / (members.len() as f64 / n as f64);
            let mut wsum = [0.0; 8];
            for &i in &members {
                wsum[bin_of[i].1] += o.px[i].2;
            }
            let m = wsum.iter().sum::<f64>() / 8.0;
            if m > 0.0 {
                let sd = (wsum.iter().map(|w| (w - m) * (w - m)).sum::<f64>() / 8.0).sqrt();
                cv[b] = sd / m;
            }
        }
    }
    let mut out = frac;
    out.extend(mean_frac);
    out.extend(cv);
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, i| a * i as f64)
}

fn radial_poly(n: usize, m: usize, rho: f64) -> f64 {
    let mut r = 0.0;
    for k in 0..=(n - m) / 2 {
        let num = factorial(n - k) * if k % 2 == 1 { -1.0 } else { 1.0 };
        let den = factorial(k) * factorial((n + m) / 2 - k) * factorial((n - m) / 2 - k);
        r += num / den * rho.powi((n - 2 * k) as i32);
    }
    r
}

fn zernike(o: &Obj) -> Vec<f64> {
    let pairs: Vec<(usize, usize)> = (0..=9usize)
        .flat_map(|n| (0..=n).filter(move |m| (n - m) % 2 == 0).map(move |m| (n, m)))
        .collect();
    let (cx, cy) = centroid(o);
    let max_d2 =
        o.px.iter()
            .map(|&(x, y, _)| {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                dx * dx + dy * dy
            })
            .fold(0.0, f64::max);
    let total: f64 = o.px.iter().map(|p| p.2).sum();
    if max_d2 == 0.0 || total <= 0.0 {
        return vec![0.0; 60];
    }
    let radius = max_d2.sqrt() + 1.0;
    let da = 1.0 / (radius * radius);
    let mut mags = Vec::with_capacity(30);
    let mut phases = Vec::with_capacity(30);
    for &(n, m) in &pairs {
        let (mut re, mut im) = (0.0, 0.0);
        for &(x, y, v) in &o.px {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let rho = (dx * dx + dy * dy).sqrt() / radius;
            let theta = dy.atan2(dx);
            let r = radial_poly(n, m, rho);
            re += v * r * (m as f64 * theta).cos();
            im -= v * r * (m as f64 * theta).sin();
        }
        let k = (n as f64 + 1.0) / PI * da;
        let (are, aim) = (re * k, im * k);
        mags.push((are * are + aim * aim).sqrt() / total);
        if m == 0 {
            phases.push(0.0);
            continue;
        }
        let clean = |c: f64| {
            let c = c / (total * da);
            if c.abs() <= 1e-10 {
                0.0
            } else {
                c
            }
        };
        let (pr, pi) = (clean(are), clean(aim));
        phases.push(if pr == 0.0 && pi == 0.0 { 0.0 } else { pi.atan2(pr) });
    }
    mags.extend(phases);
    mags
}
