//! Intensity distribution family: 12 radial bins (fraction of intensity,
//! normalized mean fraction, angular CV) and 30 Zernike moments of the
//! intensity image (magnitude and phase).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::moments::PowerSums;
use super::view::ObjectView;

pub const BINS: usize = 12;
pub const WEDGES: usize = 8;
pub const ZERNIKE_MAX_DEGREE: usize = 9;
/// Zernike phase components this small (relative to total intensity) are
/// treated as zero so that symmetric objects report phase 0.
pub const PHASE_SNAP: f64 = 1e-10;

/// `(n, m)` pairs with n <= 9, m >= 0 and n - m even, n-major.
pub fn zernike_pairs() -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(30);
    for n in 0..=ZERNIKE_MAX_DEGREE {
        for m in (n % 2..=n).step_by(2) {
            out.push((n, m));
        }
    }
    out
}

/// Octant of the offset `(dx, dy)` counted anticlockwise from +x, matching
/// `floor(atan2(dy, dx) / 45°)` on `[0°, 360°)`. The origin is octant 0.
pub fn octant(dx: i64, dy: i64) -> usize {
    let (ax, ay) = (dx.abs(), dy.abs());
    if dy >= 0 {
        if dx > 0 {
            if ay < ax {
                0
            } else {
                1
            }
        } else if dx == 0 && dy == 0 {
            0
        } else if ay > ax {
            2
        } else if dy > 0 {
            3
        } else {
            4
        }
    } else if dx < 0 {
        if ay < ax {
            4
        } else {
            5
        }
    } else if ax < ay {
        6
    } else {
        7
    }
}

/// Radial bin from distances to the centroid and to the mask exterior.
#[inline]
pub fn radial_bin(d_center: f64, d_edge: f64) -> usize {
    let r = d_center / (d_center + d_edge);
    ((r * BINS as f64).floor() as usize).min(BINS - 1)
}

pub fn radial_into(view: &ObjectView, sums: &PowerSums, sq_edt: &[f64], out: &mut Vec<f64>) {
    let n = sums.n as i64;
    let (sx, sy) = (sums.sx as i64, sums.sy as i64);
    let (cx, cy) = sums.centroid();
    let mut intensity = [0f64; BINS];
    let mut pixels = [0u64; BINS];
    let mut wedges = [[0f64; WEDGES]; BINS];
    let mut total = 0.0;
    for y in 0..view.height {
        let (mrow, vrow) = (view.mask_row(y), view.value_row(y));
        let dy = y as f64 - cy;
        for x in 0..view.width {
            if !mrow[x] {
                continue;
            }
            let dx = x as f64 - cx;
            let dc = (dx * dx + dy * dy).sqrt();
            let b = radial_bin(dc, sq_edt[y * view.width + x].sqrt());
            let v = vrow[x] as f64;
            let w = octant(n * x as i64 - sx, n * y as i64 - sy);
            intensity[b] += v;
            pixels[b] += 1;
            wedges[b][w] += v;
            total += v;
        }
    }

    let mut frac = [0f64; BINS];
    let mut mean_frac = [0f64; BINS];
    let mut cv = [0f64; BINS];
    if total > 0.0 {
        for b in 0..BINS {
            if pixels[b] == 0 {
                continue;
            }
            frac[b] = intensity[b] / total;
            mean_frac[b] = frac[b] / (pixels[b] as f64 / n as f64);
            let mean = wedges[b].iter().sum::<f64>() / WEDGES as f64;
            if mean > 0.0 {
                let var = wedges[b].iter().map(|w| (w - mean).powi(2)).sum::<f64>() / WEDGES as f64;
                cv[b] = var.sqrt() / mean;
            }
        }
    }
    out.extend_from_slice(&frac);
    out.extend_from_slice(&mean_frac);
    out.extend_from_slice(&cv);
}

/// Radial polynomial coefficients as `(power, coefficient)` terms.
fn radial_terms(n: usize, m: usize) -> Vec<(usize, f64)> {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    (0..=(n - m) / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * fact(n - k) / (fact(k) * fact((n + m) / 2 - k) * fact((n - m) / 2 - k));
            (n - 2 * k, c)
        })
        .collect()
}

pub fn zernike_into(view: &ObjectView, sums: &PowerSums, out: &mut Vec<f64>) {
    let pairs = zernike_pairs();
    let terms: Vec<Vec<(usize, f64)>> = pairs.iter().map(|&(n, m)| radial_terms(n, m)).collect();
    let (cx, cy) = sums.centroid();

    let mut max_d2 = 0f64;
    let mut total = 0f64;
    for (x, y) in view.pixels() {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        max_d2 = max_d2.max(dx * dx + dy * dy);
        total += view.value(x, y);
    }
    if max_d2 == 0.0 || total <= 0.0 {
        out.extend(std::iter::repeat_n(0.0, 2 * pairs.len()));
        return;
    }
    let radius = max_d2.sqrt() + 1.0;
    let area = 1.0 / (radius * radius);

    let mut acc = vec![Complex64::new(0.0, 0.0); pairs.len()];
    let mut rho_pow = [0f64; ZERNIKE_MAX_DEGREE + 1];
    let mut z_pow = [Complex64::new(1.0, 0.0); ZERNIKE_MAX_DEGREE + 1];
    for y in 0..view.height {
        let (mrow, vrow) = (view.mask_row(y), view.value_row(y));
        let dy = y as f64 - cy;
        for x in 0..view.width {
            if !mrow[x] {
                continue;
            }
            let v = vrow[x] as f64;
            let dx = x as f64 - cx;
            let dc = (dx * dx + dy * dy).sqrt();
            let rho = dc / radius;
            rho_pow[0] = 1.0;
            for k in 1..=ZERNIKE_MAX_DEGREE {
                rho_pow[k] = rho_pow[k - 1] * rho;
            }
            let z = if dc > 0.0 {
                Complex64::new(dx / dc, -dy / dc)
            } else {
                Complex64::new(1.0, 0.0)
            };
            for k in 1..=ZERNIKE_MAX_DEGREE {
                z_pow[k] = z_pow[k - 1] * z;
            }
            for (i, &(_, m)) in pairs.iter().enumerate() {
                let r: f64 = terms[i].iter().map(|&(p, c)| c * rho_pow[p]).sum();
                acc[i] += z_pow[m] * (r * v);
            }
        }
    }

    let mut phases = Vec::with_capacity(pairs.len());
    for (i, &(n, m)) in pairs.iter().enumerate() {
        let a = acc[i] * ((n as f64 + 1.0) / PI * area);
        out.push(a.norm() / total);
        phases.push(if m == 0 { 0.0 } else { phase(a / (total * area)) });
    }
    out.extend(phases);
}

/// Argument in (-pi, pi] after snapping negligible components to +0.
pub fn phase(a: Complex64) -> f64 {
    let snap = |c: f64| if c.abs() <= PHASE_SNAP { 0.0 } else { c };
    let (re, im) = (snap(a.re), snap(a.im));
    if re == 0.0 && im == 0.0 {
        0.0
    } else {
        im.atan2(re)
    }
}
