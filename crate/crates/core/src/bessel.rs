//! Modified Bessel functions I0, I1, K0, K1 on the non-negative real axis.
//!
//! The I functions use the power series below `I_SEAM` and the large-argument
//! asymptotic expansion above it. The K functions use the series-with-logarithm
//! form below `K_SEAM` and a convergent Chebyshev expansion in 1/w beyond.
//! Exponentially scaled variants (`e^-w I`, `e^w K`) are exposed so kernel
//! formulas that pair growing I with decaying K never overflow.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series/asymptotic crossover for I0, I1. Above this point the truncation
/// floor of the asymptotic expansion (~e^{-2w}) is below 2e-14 relative.
pub(crate) const I_SEAM: f64 = 16.0;
/// Log-series/Chebyshev crossover for K0, K1.
pub(crate) const K_SEAM: f64 = 2.0;

// Chebyshev coefficients of e^w sqrt(w) K0(w) in the variable (8/w - 2)/2,
// valid on w in [2, inf); truncation error below 1e-19.
const K0E_CHEB: [f64; 28] = [
    2.440_303_082_065_955_5,
    -0.031_448_101_311_964_5,
    1.569_883_885_730_053_4e-3,
    -1.284_954_958_162_780_3e-4,
    1.394_981_371_887_650_0e-5,
    -1.831_755_522_719_119_5e-6,
    2.766_813_639_445_015_0e-7,
    -4.660_489_897_687_947_7e-8,
    8.574_034_017_414_226_0e-9,
    -1.697_534_509_389_061_5e-9,
    3.577_397_281_400_328_4e-10,
    -7.957_489_244_477_397_0e-11,
    1.855_949_114_954_926_6e-11,
    -4.514_597_883_374_519_2e-12,
    1.140_340_588_207_344_2e-12,
    -2.980_096_923_148_178_4e-13,
    8.032_890_775_068_374_4e-14,
    -2.227_513_326_746_296_4e-14,
    6.340_076_476_276_646_0e-15,
    -1.848_593_377_920_907_2e-15,
    5.512_055_999_404_333_4e-16,
    -1.678_231_125_754_900_6e-16,
    5.210_391_777_643_554_1e-17,
    -1.647_580_593_984_263_3e-17,
    5.300_433_771_177_335_4e-18,
    -1.733_171_200_582_099_2e-18,
    5.755_109_202_882_710_4e-19,
    -1.939_095_605_318_312_6e-19,
];

// Same for e^w sqrt(w) K1(w).
const K1E_CHEB: [f64; 28] = [
    2.720_626_190_484_442_7,
    0.103_923_736_576_817_24,
    -2.857_816_859_622_779_4e-3,
    1.952_155_184_713_516_3e-4,
    -1.936_197_974_166_083_0e-5,
    2.406_484_947_837_217_1e-6,
    -3.501_960_603_087_812_5e-7,
    5.741_084_125_450_049_3e-8,
    -1.034_576_246_567_809_7e-8,
    2.015_049_755_197_034_6e-9,
    -4.190_354_759_341_925_6e-10,
    9.218_315_187_605_314_1e-11,
    -2.129_967_838_427_791_0e-11,
    5.139_639_673_482_343_5e-12,
    -1.289_173_960_949_822_9e-12,
    3.348_419_666_052_243_1e-13,
    -8.976_705_182_010_146_1e-14,
    2.477_154_424_219_598_7e-14,
    -7.019_837_089_214_768_9e-15,
    2.038_703_166_239_860_9e-15,
    -6.057_047_270_643_017_8e-16,
    1.838_093_575_243_045_4e-16,
    -5.689_462_849_193_648_4e-17,
    1.794_051_047_886_357_3e-17,
    -5.756_744_482_073_302_0e-18,
    1.877_865_190_162_325_9e-18,
    -6.221_645_287_352_589_4e-19,
    2.091_912_526_983_068_9e-19,
];

fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let mut b0 = 0.0;
    let mut b1 = 0.0;
    for &c in coeffs[1..].iter().rev() {
        let next = 2.0 * x * b0 - b1 + c;
        b1 = b0;
        b0 = next;
    }
    x * b0 - b1 + coeffs[0] / 2.0
}

pub(crate) fn i0_series(w: f64) -> f64 {
    let x = w * w / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=120u32 {
        term *= x / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

pub(crate) fn i1_series(w: f64) -> f64 {
    let x = w * w / 4.0;
    let mut term = 0.5;
    let mut sum = 0.5;
    for k in 1..=120u32 {
        term *= x / (k as f64 * (k + 1) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    w * sum
}

/// Large-argument expansion of `e^-w I_nu(w)`; caller guarantees w > I_SEAM.
pub(crate) fn i_asymptotic_scaled(order: u8, w: f64) -> f64 {
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=40u32 {
        let k = k as f64;
        let next = term * -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * w * k);
        if next.abs() >= term.abs() {
            break; // divergent tail reached
        }
        term = next;
        sum += term;
        if term.abs() < sum.abs() * 1e-18 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * w).sqrt()
}

/// K0 on (0, K_SEAM] via the series-with-logarithm form.
pub(crate) fn k0_log_series(w: f64) -> f64 {
    let x = w * w / 4.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..=60u32 {
        let k = k as f64;
        harmonic += 1.0 / k;
        term *= x / (k * k);
        sum += term * harmonic;
        if term * harmonic < sum.abs() * 1e-17 + 1e-300 {
            break;
        }
    }
    -((w / 2.0).ln() + EULER_GAMMA) * i0_series(w) + sum
}

/// The regular part of K1: K1(w) = 1/w + ln(w/2) I1(w) - (w/4) S(w).
fn k1_log_series_tail(w: f64) -> f64 {
    let x = w * w / 4.0;
    let mut term = 1.0;
    let mut h_k = 0.0;
    let mut h_k1 = 1.0;
    let mut sum = (h_k + h_k1 - 2.0 * EULER_GAMMA) * term;
    for k in 1..=60u32 {
        let kf = k as f64;
        term *= x / (kf * (kf + 1.0));
        h_k += 1.0 / kf;
        h_k1 += 1.0 / (kf + 1.0);
        let add = (h_k + h_k1 - 2.0 * EULER_GAMMA) * term;
        sum += add;
        if add.abs() < sum.abs() * 1e-17 + 1e-300 {
            break;
        }
    }
    (w / 2.0).ln() * i1_series(w) - (w / 4.0) * sum
}

/// `I_0(w)` for w >= 0.
pub fn i0(w: f64) -> f64 {
    if w <= I_SEAM {
        i0_series(w)
    } else {
        w.exp() * i_asymptotic_scaled(0, w)
    }
}

/// `I_1(w)` for w >= 0.
pub fn i1(w: f64) -> f64 {
    if w <= I_SEAM {
        i1_series(w)
    } else {
        w.exp() * i_asymptotic_scaled(1, w)
    }
}

/// `e^-w I_0(w)`.
pub fn i0_scaled(w: f64) -> f64 {
    if w <= I_SEAM {
        (-w).exp() * i0_series(w)
    } else {
        i_asymptotic_scaled(0, w)
    }
}

/// `e^-w I_1(w)`.
pub fn i1_scaled(w: f64) -> f64 {
    if w <= I_SEAM {
        (-w).exp() * i1_series(w)
    } else {
        i_asymptotic_scaled(1, w)
    }
}

/// `K_0(w)` for w > 0; diverges as w -> 0+, caller guards the domain.
pub fn k0(w: f64) -> f64 {
    if w <= K_SEAM {
        k0_log_series(w)
    } else {
        (-w).exp() * clenshaw(&K0E_CHEB, (8.0 / w - 2.0) / 2.0) / w.sqrt()
    }
}

/// `K_1(w)` for w > 0.
pub fn k1(w: f64) -> f64 {
    if w <= K_SEAM {
        1.0 / w + k1_log_series_tail(w)
    } else {
        (-w).exp() * clenshaw(&K1E_CHEB, (8.0 / w - 2.0) / 2.0) / w.sqrt()
    }
}

/// `e^w K_0(w)`.
pub fn k0_scaled(w: f64) -> f64 {
    if w <= K_SEAM {
        w.exp() * k0_log_series(w)
    } else {
        clenshaw(&K0E_CHEB, (8.0 / w - 2.0) / 2.0) / w.sqrt()
    }
}

/// `e^w K_1(w)`.
pub fn k1_scaled(w: f64) -> f64 {
    if w <= K_SEAM {
        w.exp() * (1.0 / w + k1_log_series_tail(w))
    } else {
        clenshaw(&K1E_CHEB, (8.0 / w - 2.0) / 2.0) / w.sqrt()
    }
}

/// `w K_1(w)` continuously extended to 1 at w = 0; strictly decreasing.
pub fn scaled_wk1(w: f64) -> Result<f64> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::domain(format!("scaled_wk1 requires w >= 0, got {w}")));
    }
    if w == 0.0 {
        return Ok(1.0);
    }
    if w <= K_SEAM {
        // 1/w cancels analytically against the weight; no division round trip.
        Ok(1.0 + w * k1_log_series_tail(w))
    } else {
        Ok(w * k1(w))
    }
}

/// Checked `I_order(w)`, order in {0, 1}, w >= 0.
pub fn bessel_i(order: u8, w: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::domain(format!("bessel_i supports order 0 or 1, got {order}")));
    }
    if !w.is_finite() || w < 0.0 {
        return Err(Error::domain(format!("bessel_i requires w >= 0, got {w}")));
    }
    Ok(if order == 0 { i0(w) } else { i1(w) })
}

/// Checked `K_order(w)`, order in {0, 1}, w > 0. The value diverges at 0;
/// the finite limits there are only reachable through [`scaled_wk1`] or the
/// kernel quotients that absorb them.
pub fn bessel_k(order: u8, w: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::domain(format!("bessel_k supports order 0 or 1, got {order}")));
    }
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::domain(format!("bessel_k requires w > 0, got {w}")));
    }
    Ok(if order == 0 { k0(w) } else { k1(w) })
}

/// All four function values at one argument, for table dumps.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BesselValue {
    pub w: f64,
    pub i0: f64,
    pub i1: f64,
    pub k0: f64,
    pub k1: f64,
}

impl BesselValue {
    pub fn evaluate(w: f64) -> Result<Self> {
        Ok(BesselValue {
            w,
            i0: bessel_i(0, w)?,
            i1: bessel_i(1, w)?,
            k0: bessel_k(0, w)?,
            k1: bessel_k(1, w)?,
        })
    }
}
