mod common;

use common::{dims, naive_linf, naive_psnr};
use downscale_attack::imagecore::{from_float, linf_diff, load_image, psnr, save_image, to_float, ImageError, Psnr};
use downscale_attack::{synth, Image};
use proptest::prelude::*;
use rand::Rng;

fn arb_image() -> impl Strategy<Value = Image> {
    (1usize..12, 1usize..12, prop_oneof![Just(1usize), Just(3usize)]).prop_flat_map(|(w, h, ch)| {
        proptest::collection::vec(any::<u8>(), w * h * ch).prop_map(move |px| Image::new(dims(w, h), ch, px).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn file_round_trip_is_lossless(img in arb_image()) {
        let dir = tempfile::tempdir().unwrap();
        let pnm = if img.channels() == 1 { "a.pgm" } else { "a.ppm" };
        for name in ["a.png", pnm] {
            let path = dir.path().join(name);
            save_image(&img, &path).unwrap();
            prop_assert_eq!(&load_image(&path).unwrap(), &img);
        }
    }

    #[test]
    fn float_round_trip(img in arb_image()) {
        prop_assert_eq!(from_float(&to_float(&img)).unwrap(), img);
    }
}

proptest! {
    #[test]
    fn metrics_symmetric(a in arb_image(), seed in any::<u64>()) {
        let b = synth::uniform_noise(&mut synth::rng(seed), a.dims(), a.channels());
        prop_assert_eq!(linf_diff(&a, &b).unwrap(), linf_diff(&b, &a).unwrap());
        prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        prop_assert_eq!(linf_diff(&a, &a).unwrap(), 0);
        prop_assert_eq!(linf_diff(&a, &b).unwrap() == 0, a == b);
    }
}

#[test]
fn metrics_match_naive_oracles() {
    let mut rng = synth::rng(11);
    for _ in 0..200 {
        let d = dims(rng.random_range(1..20), rng.random_range(1..20));
        let ch = if rng.random_bool(0.5) { 1 } else { 3 };
        let a = synth::uniform_noise(&mut rng, d, ch);
        let b = synth::uniform_noise(&mut rng, d, ch);
        assert_eq!(linf_diff(&a, &b).unwrap(), naive_linf(&a, &b));
        match (psnr(&a, &b).unwrap(), naive_psnr(&a, &b)) {
            (Psnr::Decibels(x), Some(y)) => assert!((x - y).abs() < 1e-9, "{x} vs {y}"),
            (Psnr::Identical, None) => {}
            other => panic!("mismatch {other:?}"),
        }
    }
}

#[test]
fn zero_pgm_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.pgm");
    std::fs::write(&path, b"P5\n2 2\n255\n\0\0\0\0").unwrap();
    let img = load_image(&path).unwrap();
    assert_eq!(img, Image::filled(dims(2, 2), 1, 0).unwrap());
}

#[test]
fn wide_png_keeps_header_dims() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wide.png");
    let img = synth::uniform_noise(&mut synth::rng(2), dims(672, 224), 3);
    save_image(&img, &path).unwrap();
    let back = load_image(&path).unwrap();
    assert_eq!((back.width(), back.height()), (672, 224));
    assert_eq!(back, img);
}

#[test]
fn truncated_png_file_is_corrupt_not_unreadable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.png");
    save_image(&synth::uniform_noise(&mut synth::rng(3), dims(32, 32), 3), &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(load_image(&path), Err(ImageError::Corrupt(_))));
}

#[test]
fn io_errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_image(dir.path().join("missing.png")),
        Err(ImageError::Unreadable { .. })
    ));
    let img = Image::filled(dims(2, 2), 3, 1).unwrap();
    assert!(matches!(
        save_image(&img, dir.path().join("x.pgm")),
        Err(ImageError::UnsupportedCombination { .. })
    ));
    assert!(matches!(
        save_image(&img, dir.path().join("x.bmp")),
        Err(ImageError::UnsupportedExtension(_))
    ));
    assert!(matches!(
        save_image(&img, dir.path().join("no/such/dir/x.png")),
        Err(ImageError::Unwritable { .. })
    ));
}
