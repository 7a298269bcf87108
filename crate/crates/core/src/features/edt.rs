//! Exact Euclidean distance transform (lower envelope of parabolas, two
//! separable passes).

use super::view::ObjectView;

const FAR: f64 = 1e20;

fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared distance from each pixel of the view to the nearest background
/// pixel center, where everything outside the box is background. Returned
/// row-major over the unpadded `width * height` grid; background is 0.
pub fn squared_edt(view: &ObjectView) -> Vec<f64> {
    // One-pixel background frame around the box.
    let (w, h) = (view.width + 2, view.height + 2);
    let mut grid = vec![0f64; w * h];
    for y in 0..view.height {
        for (x, &b) in view.mask_row(y).iter().enumerate() {
            if b {
                grid[(y + 1) * w + x + 1] = FAR;
            }
        }
    }
    let len = w.max(h);
    let mut f = vec![0f64; len];
    let mut out = vec![0f64; len];
    let mut v = vec![0usize; len];
    let mut z = vec![0f64; len + 1];

    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        envelope_1d(&f[..h], &mut out[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        let row = &mut grid[y * w..(y + 1) * w];
        f[..w].copy_from_slice(row);
        envelope_1d(&f[..w], &mut out[..w], &mut v, &mut z);
        row.copy_from_slice(&out[..w]);
    }

    let mut result = Vec::with_capacity(view.width * view.height);
    for y in 0..view.height {
        result.extend_from_slice(&grid[(y + 1) * w + 1..(y + 1) * w + 1 + view.width]);
    }
    result
}
