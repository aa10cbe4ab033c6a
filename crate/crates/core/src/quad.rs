//! One-dimensional quadrature.

// Gauss-Kronrod 15-point nodes and weights (7-point Gauss embedded at odd indices).
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `rel_tol * |value|` (or an absolute floor of 1e-300).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Integral {
    let mut pieces = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let (value, error) = pieces
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.2 .0, e + p.2 .1));
        if error <= rel_tol * value.abs() || error < 1e-300 {
            return Integral { value, error };
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gk15(&f, lo, mid)));
        pieces.push((mid, hi, gk15(&f, mid, hi)));
    }
    let (value, error) = pieces
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.2 .0, e + p.2 .1));
    Integral { value, error }
}

/// Trapezoid rule for a `2π`-periodic function: the mean over `q` equispaced points
/// times `2π`. Spectrally accurate for analytic periodic integrands.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, q: usize) -> f64 {
    let h = std::f64::consts::TAU / q as f64;
    (0..q).map(|k| f(k as f64 * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_exponentials() {
        let r = integrate(|x| x.powi(6), 0.0, 1.0, 1e-14);
        assert!((r.value - 1.0 / 7.0).abs() < 1e-15);
        let r = integrate(f64::exp, -1.0, 2.0, 1e-13);
        assert!((r.value - (2f64.exp() - (-1f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // ∫_0^1 sqrt(x) dx = 2/3
        let r = integrate(f64::sqrt, 0.0, 1.0, 1e-12);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn trapezoid_is_exact_for_low_harmonics() {
        let v = periodic_trapezoid(|t| (3.0 * t).cos().powi(2), 16);
        assert!((v - PI).abs() < 1e-14);
    }
}
