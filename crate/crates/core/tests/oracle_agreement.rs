use pathex::features::features;
use pathex::manifest::FeatureManifest;
use pathex::oracle::{oracle_features, within_tolerance};
use pathex::{BoundingBox, IntensityPatch, ObjectMask};
use proptest::prelude::*;

fn check(w: usize, h: usize, bits: Vec<bool>, vals: Vec<f32>, ox: i64, oy: i64) -> Result<(), TestCaseError> {
    let mask = ObjectMask::new(w, h, bits).unwrap();
    let patch = IntensityPatch::new(w, h, vals).unwrap();
    let bbox = BoundingBox::from_origin(ox, oy, w, h).unwrap();
    let a = features(&patch, &mask, &bbox).unwrap();
    let b = oracle_features(&patch, &mask, &bbox).unwrap();
    let names = FeatureManifest::v1();
    for i in 0..a.len() {
        prop_assert!(
            within_tolerance(a[i], b[i]),
            "{}: engine {} reference {}",
            names.entries[i].name,
            a[i],
            b[i]
        );
    }
    Ok(())
}

fn object() -> impl Strategy<Value = (usize, usize, Vec<bool>, Vec<f32>)> {
    (1usize..14, 1usize..14).prop_flat_map(|(w, h)| {
        (
            Just(w),
            Just(h),
            prop::collection::vec(prop::bool::weighted(0.7), w * h),
            prop::collection::vec(
                prop::sample::select(vec![0.0f32, 0.25, 0.5, 0.75, 1.0, 0.3, 0.9]),
                w * h,
            ),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn engine_matches_reference((w, h, mut bits, vals) in object(), ox in 0i64..50, oy in 0i64..50) {
        // Guarantee a non-empty mask.
        bits[0] = true;
        check(w, h, bits, vals, ox, oy)?;
    }

    #[test]
    fn engine_matches_reference_on_constant((w, h, mut bits, _) in object()) {
        bits[w * h - 1] = true;
        check(w, h, bits, vec![0.6; w * h], 0, 0)?;
    }
}

#[test]
fn filled_disk() {
    let r = 20.0f64;
    let n = 41;
    let bits: Vec<bool> = (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) as f64 - 20.0, (i / n) as f64 - 20.0);
            x * x + y * y <= r * r
        })
        .collect();
    let vals: Vec<f32> = (0..n * n).map(|i| ((i * 7919) % 97) as f32 / 97.0).collect();
    check(n, n, bits, vals, 3, 4).unwrap();
}
