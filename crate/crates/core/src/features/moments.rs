//! Image moments of a binary mask, accumulated as exact integers.
//!
//! Central moments are formed from integer power sums so they do not depend
//! on summation order, and a 90° rotation of the mask permutes them exactly.

use super::view::ObjectView;

/// Power sums of set-pixel local coordinates up to order 3.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PowerSums {
    pub n: i128,
    pub sx: i128,
    pub sy: i128,
    pub sxx: i128,
    pub sxy: i128,
    pub syy: i128,
    pub sxxx: i128,
    pub sxxy: i128,
    pub sxyy: i128,
    pub syyy: i128,
}

/// Central moments up to order 3 about the binary centroid.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CentralMoments {
    pub m00: f64,
    pub mu20: f64,
    pub mu02: f64,
    pub mu11: f64,
    pub mu30: f64,
    pub mu03: f64,
    pub mu21: f64,
    pub mu12: f64,
}

impl PowerSums {
    pub fn of(view: &ObjectView) -> PowerSums {
        let mut s = PowerSums::default();
        for y in 0..view.height {
            let yi = y as i128;
            // Row-wise sums keep the inner loop to cheap integer adds.
            let (mut c, mut rx, mut rxx, mut rxxx) = (0i128, 0i128, 0i128, 0i128);
            for (x, &b) in view.mask_row(y).iter().enumerate() {
                if b {
                    let xi = x as i128;
                    c += 1;
                    rx += xi;
                    rxx += xi * xi;
                    rxxx += xi * xi * xi;
                }
            }
            s.n += c;
            s.sx += rx;
            s.sy += c * yi;
            s.sxx += rxx;
            s.sxy += rx * yi;
            s.syy += c * yi * yi;
            s.sxxx += rxxx;
            s.sxxy += rxx * yi;
            s.sxyy += rx * yi * yi;
            s.syyy += c * yi * yi * yi;
        }
        s
    }

    /// Binary centroid in local coordinates.
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.n as f64;
        (self.sx as f64 / n, self.sy as f64 / n)
    }

    pub fn central(&self) -> CentralMoments {
        self.central_exact().unwrap_or_else(|| self.central_float())
    }

    fn central_exact(&self) -> Option<CentralMoments> {
        let n = self.n;
        let second = |sab: i128, sa: i128, sb: i128| -> Option<f64> {
            let num = n.checked_mul(sab)?.checked_sub(sa.checked_mul(sb)?)?;
            Some(num as f64 / n as f64)
        };
        // N^2 mu_{aab} = N^2 S_aab - N S_b S_aa - 2 N S_a S_ab + 2 S_a^2 S_b
        let third = |saab: i128, sa: i128, sb: i128, saa: i128, sab: i128| -> Option<f64> {
            let n2 = n.checked_mul(n)?;
            let t1 = n2.checked_mul(saab)?;
            let t2 = n.checked_mul(sb)?.checked_mul(saa)?;
            let t3 = n.checked_mul(sa)?.checked_mul(sab)?.checked_mul(2)?;
            let t4 = sa.checked_mul(sa)?.checked_mul(sb)?.checked_mul(2)?;
            let num = t1.checked_sub(t2)?.checked_sub(t3)?.checked_add(t4)?;
            Some(num as f64 / n2 as f64)
        };
        Some(CentralMoments {
            m00: n as f64,
            mu20: second(self.sxx, self.sx, self.sx)?,
            mu02: second(self.syy, self.sy, self.sy)?,
            mu11: second(self.sxy, self.sx, self.sy)?,
            mu30: third(self.sxxx, self.sx, self.sx, self.sxx, self.sxx)?,
            mu03: third(self.syyy, self.sy, self.sy, self.syy, self.syy)?,
            mu21: third(self.sxxy, self.sx, self.sy, self.sxx, self.sxy)?,
            mu12: third(self.sxyy, self.sy, self.sx, self.syy, self.sxy)?,
        })
    }

    /// Floating fallback for objects too large for exact accumulation.
    fn central_float(&self) -> CentralMoments {
        let n = self.n as f64;
        let (cx, cy) = self.centroid();
        let f = |v: i128| v as f64;
        CentralMoments {
            m00: n,
            mu20: f(self.sxx) - cx * f(self.sx),
            mu02: f(self.syy) - cy * f(self.sy),
            mu11: f(self.sxy) - cx * f(self.sy),
            mu30: f(self.sxxx) - 3.0 * cx * f(self.sxx) + 2.0 * cx * cx * f(self.sx),
            mu03: f(self.syyy) - 3.0 * cy * f(self.syy) + 2.0 * cy * cy * f(self.sy),
            mu21: f(self.sxxy) - cy * f(self.sxx) - 2.0 * cx * f(self.sxy) + 2.0 * cx * cx * f(self.sy),
            mu12: f(self.sxyy) - cx * f(self.syy) - 2.0 * cy * f(self.sxy) + 2.0 * cy * cy * f(self.sx),
        }
    }
}

impl CentralMoments {
    /// Scale-normalized moment eta_pq.
    fn eta(&self, mu: f64, order: i32) -> f64 {
        mu / self.m00.powf(1.0 + order as f64 / 2.0)
    }

    /// The seven Hu invariants; the seventh keeps its sign.
    pub fn hu(&self) -> [f64; 7] {
        let n20 = self.eta(self.mu20, 2);
        let n02 = self.eta(self.mu02, 2);
        let n11 = self.eta(self.mu11, 2);
        let n30 = self.eta(self.mu30, 3);
        let n03 = self.eta(self.mu03, 3);
        let n21 = self.eta(self.mu21, 3);
        let n12 = self.eta(self.mu12, 3);

        let a = n30 + n12;
        let b = n21 + n03;
        let c = n30 - 3.0 * n12;
        let d = 3.0 * n21 - n03;
        [
            n20 + n02,
            (n20 - n02).powi(2) + 4.0 * n11 * n11,
            c * c + d * d,
            a * a + b * b,
            c * a * (a * a - 3.0 * b * b) + d * b * (3.0 * a * a - b * b),
            (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b,
            d * a * (a * a - 3.0 * b * b) - c * b * (3.0 * a * a - b * b),
        ]
    }
}
