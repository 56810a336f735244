use std::collections::BTreeSet;

use image::{Rgb, RgbImage};
use pointgen_core::affordance::NormPoint;
use pointgen_core::raster::Mask;
use pointgen_core::viz::{cross_footprint, render_overlay, GT_CROSS};

fn noisy(w: u32, h: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| Rgb([(x * 7 + y) as u8, (y * 13) as u8, (x ^ y) as u8]))
}

fn changed(a: &RgbImage, b: &RgbImage) -> BTreeSet<(u32, u32)> {
    a.enumerate_pixels()
        .filter(|(x, y, p)| b.get_pixel(*x, *y) != *p)
        .map(|(x, y, _)| (x, y))
        .collect()
}

// 4-connected components over a pixel set
fn components(px: &BTreeSet<(u32, u32)>) -> usize {
    let mut seen = BTreeSet::new();
    let mut n = 0;
    for &start in px {
        if !seen.insert(start) {
            continue;
        }
        n += 1;
        let mut stack = vec![start];
        while let Some((x, y)) = stack.pop() {
            let nb = [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)];
            for q in nb {
                if px.contains(&q) && seen.insert(q) {
                    stack.push(q);
                }
            }
        }
    }
    n
}

#[test]
fn four_points_four_crosses() {
    let img = RgbImage::from_pixel(100, 80, Rgb([10, 10, 10]));
    let pts: Vec<NormPoint> = [(0.1, 0.1), (0.9, 0.1), (0.1, 0.9), (0.5, 0.5)]
        .map(|(x, y)| NormPoint::new(x, y))
        .to_vec();
    let out = render_overlay(&img, None, &pts, &[]).unwrap();
    let diff = changed(&img, &out);
    assert_eq!(components(&diff), 4);
    assert!(diff.iter().all(|&(x, y)| out.get_pixel(x, y) == &Rgb(GT_CROSS)));
    for p in &pts {
        let (x, y) = p.to_pixel(100, 80);
        assert_eq!(out.get_pixel(x, y), &Rgb(GT_CROSS));
    }
}

#[test]
fn untouched_outside_mask_and_crosses() {
    let img = noisy(64, 48);
    let mask = Mask::from_fn(64, 48, |x, y| (20..40).contains(&x) && (10..30).contains(&y));
    let gt = [NormPoint::new(0.2, 0.7), NormPoint::new(0.45, 0.4)];
    let pred = [NormPoint::new(0.0, 0.0), NormPoint::new(1.0, 1.0)];
    let out = render_overlay(&img, Some(&mask), &gt, &pred).unwrap();
    let mut allowed: BTreeSet<(u32, u32)> = mask.pixels().collect();
    allowed.extend(cross_footprint(&gt, 64, 48));
    allowed.extend(cross_footprint(&pred, 64, 48));
    for (x, y, p) in img.enumerate_pixels() {
        if !allowed.contains(&(x, y)) {
            assert_eq!(out.get_pixel(x, y), p, "pixel ({x}, {y}) changed");
        }
    }
}

#[test]
fn empty_points_tint_only() {
    let img = noisy(32, 32);
    let mask = Mask::from_fn(32, 32, |x, _| x < 8);
    let out = render_overlay(&img, Some(&mask), &[], &[]).unwrap();
    let diff = changed(&img, &out);
    assert!(diff.iter().all(|&(x, y)| mask.get(x, y)));
    assert!(!diff.is_empty());
}

#[test]
fn mismatched_mask_rejected() {
    let img = noisy(32, 32);
    let mask = Mask::new(16, 16);
    assert!(render_overlay(&img, Some(&mask), &[], &[]).is_err());
}
