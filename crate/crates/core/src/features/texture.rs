//! Haralick texture family: 13 statistics of masked, symmetrized
//! co-occurrence matrices at 2 scales and 4 angles.

use super::view::ObjectView;
use super::SNAP;

pub const LEVELS: usize = 8;
pub const SCALES: [usize; 2] = [1, 3];
pub const ANGLES: [u16; 4] = [0, 45, 90, 135];

pub const HARALICK_NAMES: [&str; 13] = [
    "AngularSecondMoment",
    "Contrast",
    "Correlation",
    "Variance",
    "InverseDifferenceMoment",
    "SumAverage",
    "SumVariance",
    "SumEntropy",
    "Entropy",
    "DifferenceVariance",
    "DifferenceEntropy",
    "InfoMeas1",
    "InfoMeas2",
];

/// Pixel offset `(dx, dy)` for an angle, y pointing down the image.
pub fn offset(scale: usize, angle: u16) -> (i64, i64) {
    let s = scale as i64;
    match angle {
        0 => (s, 0),
        45 => (s, -s),
        90 => (0, -s),
        _ => (-s, -s),
    }
}

/// Quantizes in-mask intensities onto `0..LEVELS` by per-object min-max
/// scaling. Pixels outside the mask get `u8::MAX`.
pub fn quantize(view: &ObjectView) -> Vec<u8> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in view.pixels() {
        let v = view.value(x, y);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mut out = vec![u8::MAX; view.width * view.height];
    let range = hi - lo;
    for y in 0..view.height {
        let (mrow, vrow) = (view.mask_row(y), view.value_row(y));
        for x in 0..view.width {
            if mrow[x] {
                out[y * view.width + x] = if range > 0.0 {
                    (((vrow[x] as f64 - lo) / range * LEVELS as f64).floor() as usize).min(LEVELS - 1) as u8
                } else {
                    0
                };
            }
        }
    }
    out
}

pub type Counts = [[u64; LEVELS]; LEVELS];

/// Unnormalized symmetric co-occurrence counts.
pub fn cooccurrence(levels: &[u8], width: usize, height: usize, offset: (i64, i64)) -> Counts {
    let mut c = [[0u64; LEVELS]; LEVELS];
    let (dx, dy) = offset;
    let x0 = (-dx).max(0) as usize;
    let x1 = (width as i64 - dx.max(0)).max(0) as usize;
    let y0 = (-dy).max(0) as usize;
    let y1 = (height as i64 - dy.max(0)).max(0) as usize;
    for y in y0..y1.max(y0) {
        let ny = (y as i64 + dy) as usize;
        let row = &levels[y * width..(y + 1) * width];
        let nrow = &levels[ny * width..(ny + 1) * width];
        for x in x0..x1.max(x0) {
            let (a, b) = (row[x], nrow[(x as i64 + dx) as usize]);
            if a != u8::MAX && b != u8::MAX {
                c[a as usize][b as usize] += 1;
                c[b as usize][a as usize] += 1;
            }
        }
    }
    c
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// The 13 Haralick statistics; all zero when no pair was counted.
pub fn haralick(counts: &Counts) -> [f64; 13] {
    let total: u64 = counts.iter().flatten().sum();
    if total == 0 {
        return [0.0; 13];
    }
    let t = total as f64;
    let mut p = [[0f64; LEVELS]; LEVELS];
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            p[i][j] = counts[i][j] as f64 / t;
        }
    }
    // Symmetric, so the column marginal equals the row marginal.
    let mut px = [0f64; LEVELS];
    let mut sum = [0f64; 2 * LEVELS - 1];
    let mut diff = [0f64; LEVELS];
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            px[i] += p[i][j];
            sum[i + j] += p[i][j];
            diff[i.abs_diff(j)] += p[i][j];
        }
    }
    let mu: f64 = (0..LEVELS).map(|i| i as f64 * px[i]).sum();
    let var: f64 = (0..LEVELS).map(|i| (i as f64 - mu).powi(2) * px[i]).sum();

    let (mut asm, mut contrast, mut cov, mut idm, mut hxy, mut hxy1, mut hxy2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            let v = p[i][j];
            let d = i as f64 - j as f64;
            asm += v * v;
            contrast += d * d * v;
            cov += (i as f64 - mu) * (j as f64 - mu) * v;
            idm += v / (1.0 + d * d);
            hxy -= plogp(v);
            let q = px[i] * px[j];
            if v > 0.0 {
                hxy1 -= v * q.log2();
            }
            hxy2 -= plogp(q);
        }
    }
    let correlation = if var <= SNAP { 0.0 } else { cov / var };
    let sum_avg: f64 = sum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sum_var: f64 = sum
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - sum_avg).powi(2) * v)
        .sum();
    let sum_ent: f64 = -sum.iter().map(|&v| plogp(v)).sum::<f64>();
    let diff_mean: f64 = diff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let diff_var: f64 = diff
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - diff_mean).powi(2) * v)
        .sum();
    let diff_ent: f64 = -diff.iter().map(|&v| plogp(v)).sum::<f64>();
    let hx: f64 = -px.iter().map(|&v| plogp(v)).sum::<f64>();
    let imc1 = if hx <= SNAP { 0.0 } else { (hxy - hxy1) / hx };
    let gap = hxy2 - hxy;
    let imc2 = if gap <= SNAP {
        0.0
    } else {
        (-(-2.0 * gap).exp_m1()).sqrt()
    };
    [
        asm,
        contrast,
        correlation,
        var,
        idm,
        sum_avg,
        sum_var,
        sum_ent,
        hxy,
        diff_var,
        diff_ent,
        imc1,
        imc2,
    ]
}

pub fn texture_into(view: &ObjectView, out: &mut Vec<f64>) {
    let levels = quantize(view);
    for scale in SCALES {
        for angle in ANGLES {
            let c = cooccurrence(&levels, view.width, view.height, offset(scale, angle));
            out.extend_from_slice(&haralick(&c));
        }
    }
}
