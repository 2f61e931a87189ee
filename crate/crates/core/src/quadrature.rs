//! Adaptive 7/15-point Gauss-Kronrod quadrature.

use crate::scalar::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 20_000;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error_estimate: T,
    pub intervals: usize,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let center = (a + b) / T::lit(2.0);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` by bisecting the interval with the largest
/// error estimate until the summed estimate falls below `abs_tol`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T) -> Integral<T> {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total_err = e;
    while total_err > abs_tol && parts.len() < MAX_INTERVALS {
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = (lo + hi) / T::lit(2.0);
        if !(mid > lo && mid < hi) {
            // interval exhausted at working precision
            break;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        total_err = parts.iter().map(|p| p.3).sum();
    }
    Integral {
        value: parts.iter().map(|p| p.2).sum(),
        error_estimate: total_err,
        intervals: parts.len(),
    }
}

/// Integrates `f` over `[a, inf)` through the map `r = a + s / (1 - s)`.
pub fn integrate_to_infinity<T: Real, F: Fn(T) -> T>(f: F, a: T, abs_tol: T) -> Integral<T> {
    let one = T::one();
    integrate(
        |s: T| {
            let w = one - s;
            let v = f(a + s / w) / (w * w);
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        },
        T::zero(),
        one,
        abs_tol,
    )
}
