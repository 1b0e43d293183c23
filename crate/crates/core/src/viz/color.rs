//! CIELab to sRGB conversion and the sequential blue ramp.

/// sRGB colour, 8 bits per channel.
pub type Rgb = [u8; 3];

const D65: [f64; 3] = [0.95047, 1.0, 1.08883];

const XYZ_TO_LINEAR_RGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

/// Lightness used for unit colouring.
pub const UNIT_LIGHTNESS: f64 = 60.0;
/// Half-range of the blue (negative) to yellow (positive) b* axis.
pub const UNIT_B_RANGE: f64 = 60.0;

/// 9-class single-hue sequential blues, light to dark.
pub const BLUES9: [Rgb; 9] = [
    [0xf7, 0xfb, 0xff],
    [0xde, 0xeb, 0xf7],
    [0xc6, 0xdb, 0xef],
    [0x9e, 0xca, 0xe1],
    [0x6b, 0xae, 0xd6],
    [0x42, 0x92, 0xc6],
    [0x21, 0x71, 0xb5],
    [0x08, 0x51, 0x9c],
    [0x08, 0x30, 0x6b],
];

pub const IDLE_GREY: Rgb = [0xbd, 0xbd, 0xbd];

fn lab_f_inv(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

fn srgb_compand(c: f64) -> f64 {
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

/// CIELab (D65 white) to gamma-encoded sRGB in `[0, 1]`, clipped to gamut.
pub fn lab_to_srgb_unit(l: f64, a: f64, b: f64) -> [f64; 3] {
    let fy = (l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let xyz = [
        D65[0] * lab_f_inv(fx),
        D65[1] * lab_f_inv(fy),
        D65[2] * lab_f_inv(fz),
    ];
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(&XYZ_TO_LINEAR_RGB) {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        *o = srgb_compand(lin.clamp(0.0, 1.0)).clamp(0.0, 1.0);
    }
    out
}

pub fn lab_to_srgb(l: f64, a: f64, b: f64) -> Rgb {
    lab_to_srgb_unit(l, a, b).map(|c| (c * 255.0).round() as u8)
}

/// Maps `v` in `[lo, hi]` onto b* in `[-60, 60]` at L* = 60, a* = 0.
/// A degenerate range maps to b* = 0.
pub fn blue_yellow(v: f64, lo: f64, hi: f64) -> Rgb {
    lab_to_srgb(UNIT_LIGHTNESS, 0.0, b_star(v, lo, hi))
}

pub fn b_star(v: f64, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let u = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    -UNIT_B_RANGE + 2.0 * UNIT_B_RANGE * u
}

/// Linear interpolation through [`BLUES9`]: `lo` is lightest, `hi` darkest.
/// A degenerate range gives the middle class.
pub fn sequential_blue(v: f64, lo: f64, hi: f64) -> Rgb {
    let u = if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    let pos = u * (BLUES9.len() - 1) as f64;
    let k = (pos.floor() as usize).min(BLUES9.len() - 2);
    let frac = pos - k as f64;
    let (a, b) = (BLUES9[k], BLUES9[k + 1]);
    [0, 1, 2].map(|c| (a[c] as f64 + frac * (b[c] as f64 - a[c] as f64)).round() as u8)
}

pub fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scikit-image's `lab2rgb` (D65), rounded to 8 bits.
    #[test]
    fn matches_reference_conversion() {
        assert_eq!(lab_to_srgb(60.0, 0.0, -60.0), [0, 151, 251]);
        assert_eq!(lab_to_srgb(60.0, 0.0, -30.0), [108, 147, 197]);
        assert_eq!(lab_to_srgb(60.0, 0.0, 0.0), [145, 145, 145]);
        assert_eq!(lab_to_srgb(60.0, 0.0, 30.0), [163, 143, 92]);
        assert_eq!(lab_to_srgb(60.0, 0.0, 60.0), [171, 142, 24]);
    }

    #[test]
    fn neutral_midpoint() {
        let c = lab_to_srgb_unit(60.0, 0.0, 0.0);
        assert!((c[0] - 0.566868).abs() < 1e-4);
        assert!((c[0] - c[1]).abs() < 1e-4 && (c[1] - c[2]).abs() < 1e-4);
        assert_eq!(blue_yellow(0.5, 0.0, 1.0), [145, 145, 145]);
        assert_eq!(blue_yellow(3.0, 3.0, 3.0), [145, 145, 145]);
    }

    #[test]
    fn endpoints() {
        assert_eq!(blue_yellow(-2.0, -2.0, 5.0), lab_to_srgb(60.0, 0.0, -60.0));
        assert_eq!(blue_yellow(5.0, -2.0, 5.0), lab_to_srgb(60.0, 0.0, 60.0));
        assert_eq!(sequential_blue(0.0, 0.0, 1.0), BLUES9[0]);
        assert_eq!(sequential_blue(1.0, 0.0, 1.0), BLUES9[8]);
        assert_eq!(sequential_blue(0.5, 0.0, 1.0), BLUES9[4]);
        assert_eq!(sequential_blue(7.0, 7.0, 7.0), BLUES9[4]);
    }

    #[test]
    fn blue_ramp_darkens_monotonically() {
        let lum = |c: Rgb| c.iter().map(|&x| x as u32).sum::<u32>();
        let mut prev = u32::MAX;
        for k in 0..=40 {
            let l = lum(sequential_blue(k as f64 / 40.0, 0.0, 1.0));
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn hex_format() {
        assert_eq!(hex([0, 15, 255]), "#000fff");
    }
}
