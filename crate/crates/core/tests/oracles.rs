use proptest::prelude::*;
use specbench::camera::project_clean;
use specbench::io::codec::{decode_rgb8, encode_jpeg, JpegSettings};
use specbench::metrics::{mrae, rmse, MetricConfig};
use specbench::{CameraResponse, HsiCube, Rgb8Image, WavelengthGrid};

const BANDS: usize = 31;

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01..2.0f64, n)
}

proptest! {
    #[test]
    fn projection_matches_dot_products(data in samples(2 * 2 * BANDS), w in samples(3 * BANDS)) {
        let g = WavelengthGrid::default();
        let cube = HsiCube::new(2, 2, g, data.clone()).unwrap();
        let css = CameraResponse::new(g, w.clone()).unwrap();
        let rgb = project_clean(&cube, &css).unwrap();
        for p in 0..4 {
            for ch in 0..3 {
                let mut want = 0.0;
                for b in 0..BANDS {
                    want += w[ch * BANDS + b] * data[b * 4 + p];
                }
                let got = rgb.pixel(p)[ch];
                prop_assert!((got - want).abs() <= 1e-12 * want.abs(), "{} vs {}", got, want);
            }
        }
    }

    #[test]
    fn metrics_match_loops(gt in samples(3 * 2 * 4), rec in samples(3 * 2 * 4)) {
        let g = WavelengthGrid::new(400.0, 10.0, 4).unwrap();
        let a = HsiCube::new(3, 2, g, gt.clone()).unwrap();
        let b = HsiCube::new(3, 2, g, rec.clone()).unwrap();
        let n = gt.len() as f64;
        let want_mrae = gt.iter().zip(&rec).map(|(x, y)| (x - y).abs() / x).sum::<f64>() / n;
        let want_rmse = (gt.iter().zip(&rec).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt();
        let got = mrae(&a, &b, &MetricConfig::default()).unwrap();
        prop_assert!((got - want_mrae).abs() <= 1e-12 * want_mrae, "{} vs {}", got, want_mrae);
        let got = rmse(&a, &b).unwrap();
        prop_assert!((got - want_rmse).abs() <= 1e-12 * want_rmse, "{} vs {}", got, want_rmse);
    }
}

#[test]
fn mid_gray_jpeg_within_two_codes() {
    let img = Rgb8Image::new(8, 8, vec![128; 8 * 8 * 3], 1.0).unwrap();
    let back = decode_rgb8(&encode_jpeg(&img, &JpegSettings::with_quality(95)).unwrap()).unwrap();
    assert_eq!((back.height(), back.width()), (8, 8));
    let worst = img.data().iter().zip(back.data()).map(|(&a, &b)| a.abs_diff(b)).max().unwrap();
    assert!(worst <= 2, "{worst}");
}
