//! Size and shape family: 30 values from the binary mask.

use std::f64::consts::PI;

use super::hull::{convex_hull, feret, lattice_count};
use super::moments::PowerSums;
use super::view::ObjectView;
use super::{median_sorted, SNAP};

pub const SHAPE_NAMES: [&str; 30] = [
    "Area",
    "Perimeter",
    "ConvexArea",
    "Solidity",
    "Extent",
    "Eccentricity",
    "Orientation",
    "MajorAxisLength",
    "MinorAxisLength",
    "FormFactor",
    "Compactness",
    "MaxFeretDiameter",
    "MinFeretDiameter",
    "EulerNumber",
    "BBoxMinX",
    "BBoxMinY",
    "BBoxMaxX",
    "BBoxMaxY",
    "CenterX",
    "CenterY",
    "MeanRadius",
    "MedianRadius",
    "MaxRadius",
    "Hu1",
    "Hu2",
    "Hu3",
    "Hu4",
    "Hu5",
    "Hu6",
    "Hu7",
];

/// Counts gathered from one sweep over every 2x2 block touching the mask.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct BlockCounts {
    /// Axial pixel links on the contour, counted with multiplicity.
    pub axial: u64,
    /// Diagonal pixel links on the contour, counted with multiplicity.
    pub diagonal: u64,
    pub q1: i64,
    pub q3: i64,
    pub qd: i64,
}

impl BlockCounts {
    pub fn of(view: &ObjectView) -> BlockCounts {
        let mut c = BlockCounts::default();
        for by in -1..view.height as i64 {
            for bx in -1..view.width as i64 {
                let tl = view.get_signed(bx, by);
                let tr = view.get_signed(bx + 1, by);
                let bl = view.get_signed(bx, by + 1);
                let br = view.get_signed(bx + 1, by + 1);
                let n = tl as u8 + tr as u8 + bl as u8 + br as u8;
                match n {
                    0 | 4 => {}
                    1 => c.q1 += 1,
                    3 => {
                        c.q3 += 1;
                        c.diagonal += 1;
                    }
                    _ => {
                        if tl == br {
                            c.qd += 1;
                            c.diagonal += 2;
                        } else {
                            c.axial += 1;
                        }
                    }
                }
            }
        }
        c
    }

    /// Length of the 8-connected contour through pixel centers; every link
    /// bordering a block with fewer than three set pixels lies on it.
    pub fn perimeter(&self, area: u64) -> f64 {
        if area <= 2 {
            return 4.0 * area as f64;
        }
        self.axial as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    /// Components minus holes with 8-connected foreground.
    pub fn euler(&self) -> f64 {
        ((self.q1 - self.q3 - 2 * self.qd) / 4) as f64
    }
}

/// Best-fit ellipse of the second moments, with the variance of a unit
/// pixel (1/12) added on each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub eccentricity: f64,
    pub orientation: f64,
    pub major: f64,
    pub minor: f64,
}

pub fn ellipse(mu20: f64, mu02: f64, mu11: f64, area: f64) -> Ellipse {
    let a = mu20 / area + 1.0 / 12.0;
    let c = mu02 / area + 1.0 / 12.0;
    let mut b = mu11 / area;
    let mut d = a - c;
    let tol = SNAP * (a + c);
    if b.abs() <= tol {
        b = 0.0;
    }
    if d.abs() <= tol {
        d = 0.0;
    }
    let half = (a + c) / 2.0;
    let disc = ((d / 2.0).powi(2) + b * b).sqrt();
    let (l1, l2) = (half + disc, half - disc);
    let orientation = if b == 0.0 && d == 0.0 {
        0.0
    } else {
        let num = if b == 0.0 { 0.0 } else { -2.0 * b };
        let deg = 0.5 * num.atan2(d).to_degrees();
        if deg <= -90.0 {
            deg + 180.0
        } else {
            deg
        }
    };
    Ellipse {
        eccentricity: (1.0 - l2 / l1).max(0.0).sqrt(),
        orientation,
        major: 4.0 * l1.sqrt(),
        minor: 4.0 * l2.max(0.0).sqrt(),
    }
}

pub fn shape_into(view: &ObjectView, sums: &PowerSums, sq_edt: &[f64], out: &mut Vec<f64>) {
    let area = sums.n as u64;
    let n = area as f64;
    let blocks = BlockCounts::of(view);
    let perimeter = blocks.perimeter(area);
    let hull = convex_hull(view);
    let convex_area = lattice_count(&hull) as f64;
    let (max_feret, min_feret) = feret(&hull);
    let central = sums.central();
    let e = ellipse(central.mu20, central.mu02, central.mu11, n);
    let (cx, cy) = sums.centroid();
    let (ox, oy) = view.origin;

    let mut radii: Vec<f64> = Vec::with_capacity(area as usize);
    for y in 0..view.height {
        for (x, &b) in view.mask_row(y).iter().enumerate() {
            if b {
                radii.push(sq_edt[y * view.width + x].sqrt());
            }
        }
    }
    let mean_radius = radii.iter().sum::<f64>() / n;
    radii.sort_by(f64::total_cmp);
    let median_radius = median_sorted(&radii);
    let max_radius = radii.last().copied().unwrap_or(0.0);

    out.extend_from_slice(&[
        n,
        perimeter,
        convex_area,
        n / convex_area,
        n / (view.width * view.height) as f64,
        e.eccentricity,
        e.orientation,
        e.major,
        e.minor,
        4.0 * PI * n / (perimeter * perimeter),
        perimeter * perimeter / (4.0 * PI * n),
        max_feret,
        min_feret,
        blocks.euler(),
        ox as f64,
        oy as f64,
        (ox + view.width as i64) as f64,
        (oy + view.height as i64) as f64,
        ox as f64 + cx,
        oy as f64 + cy,
        mean_radius,
        median_radius,
        max_radius,
    ]);
    out.extend_from_slice(&central.hu());
}
