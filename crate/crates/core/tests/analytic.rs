//! Closed-form values on simple shapes.

use approx::assert_abs_diff_eq;
use pathex::features::features;
use pathex::oracle::oracle_features;
use pathex::{BoundingBox, FeatureManifest, IntensityPatch, ObjectMask};

struct Shape {
    values: Vec<f64>,
    reference: Vec<f64>,
    manifest: FeatureManifest,
}

impl Shape {
    fn new(w: usize, h: usize, inside: impl Fn(usize, usize) -> bool, value: impl Fn(usize, usize) -> f32) -> Self {
        let mask = ObjectMask::from_fn(w, h, inside).unwrap();
        let patch = IntensityPatch::from_fn(w, h, value).unwrap();
        let bbox = BoundingBox::from_origin(100, 200, w, h).unwrap();
        Shape {
            values: features(&patch, &mask, &bbox).unwrap(),
            reference: oracle_features(&patch, &mask, &bbox).unwrap(),
            manifest: FeatureManifest::v1(),
        }
    }

    fn get(&self, name: &str) -> f64 {
        let i = self
            .manifest
            .index_of(name)
            .unwrap_or_else(|| panic!("no feature {name}"));
        self.values[i]
    }

    fn all(&self, prefix: &str) -> Vec<(String, f64)> {
        self.manifest
            .entries
            .iter()
            .zip(&self.values)
            .filter(|(e, _)| e.name.starts_with(prefix))
            .map(|(e, &v)| (e.name.clone(), v))
            .collect()
    }
}

fn disk(r: i64) -> Shape {
    let n = (2 * r + 1) as usize;
    Shape::new(
        n,
        n,
        |x, y| {
            let (dx, dy) = (x as i64 - r, y as i64 - r);
            dx * dx + dy * dy <= r * r
        },
        |_, _| 0.8,
    )
}

#[test]
fn square_ten() {
    let s = Shape::new(10, 10, |_, _| true, |x, y| ((x + 2 * y) % 7) as f32 / 7.0);
    assert_eq!(s.get("SizeShape_Area"), 100.0);
    assert_eq!(s.get("SizeShape_Perimeter"), 36.0);
    assert_eq!(s.get("SizeShape_Eccentricity"), 0.0);
    assert_abs_diff_eq!(s.get("SizeShape_Hu1"), 0.165, epsilon = 1e-12);
    assert_abs_diff_eq!(s.get("SizeShape_MaxFeretDiameter"), 9.0 * 2f64.sqrt(), epsilon = 1e-9);
    assert_eq!(s.get("SizeShape_MinFeretDiameter"), 9.0);
    assert_eq!(s.get("SizeShape_Extent"), 1.0);
    assert_eq!(s.get("SizeShape_Solidity"), 1.0);
    assert_eq!(s.get("SizeShape_EulerNumber"), 1.0);
    assert_eq!(s.get("SizeShape_CenterX"), 104.5);
    assert_eq!(s.get("SizeShape_BBoxMaxY"), 210.0);
    assert_eq!(s.get("SizeShape_MaxRadius"), 5.0);
}

#[test]
fn square_with_hole() {
    let s = Shape::new(10, 10, |x, y| !((3..7).contains(&x) && (3..7).contains(&y)), |_, _| 0.5);
    assert_eq!(s.get("SizeShape_EulerNumber"), 0.0);
    assert_eq!(s.get("SizeShape_Area"), 84.0);
}

#[test]
fn disk_fifty() {
    let s = disk(50);
    assert!(s.get("SizeShape_Eccentricity") < 0.05);
    let ff = s.get("SizeShape_FormFactor");
    assert!((0.85..=1.05).contains(&ff), "form factor {ff}");
    assert!(s.get("SizeShape_Solidity") > 0.98);
    assert_abs_diff_eq!(s.get("SizeShape_MaxRadius"), 50.0, epsilon = 1.0);
    // Bin 0 is the central disc of ~57 pixels; its wedges differ by whole
    // lattice rays (axial rays hold 4 pixels, diagonal rays 3), which gives
    // a CV near 0.16 at this radius.
    let cv = s.all("Distribution_RadialCV_b");
    assert!(cv[0].1 > 0.1);
    for (name, v) in &cv[1..] {
        assert!(*v < 0.05, "{name} = {v}");
    }
    for (name, v) in s.all("Distribution_ZernikeMag_") {
        if name != "Distribution_ZernikeMag_n0_m0" {
            assert!(v < 0.01, "{name} = {v}");
        }
    }
    let total: f64 = s.all("Distribution_FracAtD_").iter().map(|(_, v)| v).sum();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
}

#[test]
fn constant_intensity() {
    let s = Shape::new(9, 7, |x, y| x * y != 0 || x == 4, |_, _| 0.37);
    for a in [0, 45, 90, 135] {
        for sc in [1, 3] {
            assert_eq!(s.get(&format!("Texture_Contrast_s{sc}_a{a}")), 0.0);
            assert_eq!(s.get(&format!("Texture_AngularSecondMoment_s{sc}_a{a}")), 1.0);
        }
    }
    assert_eq!(s.get("Intensity_StdIntensity"), 0.0);
    assert_eq!(s.get("Intensity_MassDisplacement"), 0.0);
}

#[test]
fn fractions_sum_to_one() {
    let s = Shape::new(13, 11, |x, y| (x + y) % 5 != 0, |x, y| (x * y % 9) as f32 / 9.0 + 0.05);
    let total: f64 = s.all("Distribution_FracAtD_").iter().map(|(_, v)| v).sum();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
}

#[test]
fn single_pixel() {
    let s = Shape::new(1, 1, |_, _| true, |_, _| 0.4);
    assert_eq!(s.get("SizeShape_Perimeter"), 4.0);
    assert_eq!(s.get("SizeShape_MaxFeretDiameter"), 0.0);
    assert_eq!(s.get("SizeShape_MinFeretDiameter"), 0.0);
    assert_eq!(s.get("SizeShape_MaxRadius"), 1.0);
    assert!(s.all("Texture_").iter().all(|(_, v)| *v == 0.0));
    assert!(s.all("Distribution_Zernike").iter().all(|(_, v)| *v == 0.0));
    assert_eq!(s.get("Distribution_FracAtD_b0"), 1.0);
}

#[test]
fn reference_agrees_on_analytic_shapes() {
    for s in [disk(50), disk(7), Shape::new(10, 10, |_, _| true, |_, _| 0.2)] {
        for (i, (a, b)) in s.values.iter().zip(&s.reference).enumerate() {
            assert!(
                pathex::oracle::within_tolerance(*a, *b),
                "{}: {a} vs {b}",
                s.manifest.entries[i].name
            );
        }
    }
}
