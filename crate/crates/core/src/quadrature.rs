//! Adaptive Gauss-Kronrod quadrature (7-15 pair) on finite intervals.

use crate::error::{Error, Result};

// Nonnegative abscissae of the 15-point Kronrod rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

// Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// 7-point Gauss weights, applied at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod 7-15 evaluation over [a, b].
/// Returns (integral, error estimate).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut result_kronrod = WGK[7] * fc;
    let mut result_gauss = WG[3] * fc;

    for j in 0..7 {
        let abscissa = half * XGK[j];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        result_kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let integral = result_kronrod * half;
    let err = ((result_kronrod - result_gauss) * half).abs();
    (integral, err)
}

/// Adaptive quadrature of `f` over [a, b] by recursive bisection of the
/// Gauss-Kronrod 7-15 pair.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // (a, b, integral, error) intervals pending refinement.
    let (i0, e0) = qk15(&f, a, b);
    let mut intervals = vec![(a, b, i0, e0)];
    let mut total: f64 = i0;
    let mut total_err: f64 = e0;
    let max_subdivisions = 2000;
    let mut splits = 0;

    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if splits >= max_subdivisions {
            return Err(Error::Quadrature(format!(
                "residual error {total_err:.3e} over [{a}, {b}] after {max_subdivisions} subdivisions"
            )));
        }
        // Split the interval with the largest error estimate.
        let (worst_idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, old_i, old_e) = intervals.swap_remove(worst_idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature(format!(
                "interval [{lo}, {hi}] cannot be subdivided further"
            )));
        }
        let (il, el) = qk15(&f, lo, mid);
        let (ir, er) = qk15(&f, mid, hi);
        total += il + ir - old_i;
        total_err += el + er - old_e;
        intervals.push((lo, mid, il, el));
        intervals.push((mid, hi, ir, er));
        splits += 1;
    }

    if !total.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integral over [{a}, {b}]"
        )));
    }
    Ok(total)
}
