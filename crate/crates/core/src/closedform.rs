//! Exact reference values.
//!
//! Rational-valued formulas are evaluated in arbitrary-precision integer
//! arithmetic and returned as [`BigRational`]; convert with [`to_f64`] only
//! at the point of comparison.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dynamics::EntropySeries;
use crate::{Error, Result};

/// The three entangling-power settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// (a) CUE map, complex product states (a fixed one suffices).
    CueComplex,
    /// (b) COE map, complex product states averaged over both spheres.
    CoeComplex,
    /// (c) COE map, real product states (a fixed one suffices).
    CoeReal,
}

impl CaseTag {
    pub const ALL: [CaseTag; 3] = [CaseTag::CueComplex, CaseTag::CoeComplex, CaseTag::CoeReal];

    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::CueComplex => "a",
            CaseTag::CoeComplex => "b",
            CaseTag::CoeReal => "c",
        }
    }
}

fn int(x: usize) -> BigInt {
    BigInt::from(x)
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn check_dims(d_a: usize, d_b: usize) -> Result<()> {
    if d_a == 0 || d_b == 0 {
        return Err(Error::InvalidDimension(format!(
            "subsystem dimensions must be positive, got d_A={d_a}, d_B={d_b}"
        )));
    }
    Ok(())
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Entangling power of a single application (`n = 1`).
///
/// Case (a) is the mean linear entropy of a random complex state,
/// `(d − d_A − d_B + 1)/(d + 1)`; cases (b) and (c) share
/// `[d³ − (s−4)d² − (3s−1)d + 2(s−1)] / [d(d+1)(d+3)]` with `s = d_A + d_B`.
pub fn ep1(case: CaseTag, d_a: usize, d_b: usize) -> Result<BigRational> {
    check_dims(d_a, d_b)?;
    let d = int(d_a * d_b);
    let s = int(d_a + d_b);
    let one = BigInt::from(1);
    Ok(match case {
        CaseTag::CueComplex => ratio(&d - &s + &one, &d + &one),
        CaseTag::CoeComplex | CaseTag::CoeReal => {
            let d2 = &d * &d;
            let d3 = &d2 * &d;
            let num =
                d3 - (&s - 4) * &d2 - (BigInt::from(3) * &s - 1) * &d + BigInt::from(2) * (&s - 1);
            let den = &d * (&d + 1) * (&d + 3);
            ratio(num, den)
        }
    })
}

/// CUE average of the operator entanglement,
/// `(d² − d_A² − d_B² + 1)/(d² − 1)`. Undefined for `d = 1`.
pub fn op_ent_cue(d_a: usize, d_b: usize) -> Result<BigRational> {
    check_dims(d_a, d_b)?;
    let d = d_a * d_b;
    if d < 2 {
        return Err(Error::InvalidDimension(
            "operator entanglement average needs d ≥ 2".into(),
        ));
    }
    let d2 = int(d) * int(d);
    let num = &d2 - int(d_a * d_a) - int(d_b * d_b) + 1;
    Ok(ratio(num, d2 - 1))
}

/// Asymptotic (`n → ∞`) entangling power.
pub fn ep_inf(case: CaseTag, d_a: usize, d_b: usize) -> Result<BigRational> {
    check_dims(d_a, d_b)?;
    let d = int(d_a * d_b);
    let s = int(d_a + d_b);
    let d2 = &d * &d;
    let d3 = &d2 * &d;
    let d4 = &d3 * &d;
    Ok(match case {
        // Coincides with the n = 1 value of the COE cases.
        CaseTag::CueComplex => ep1(CaseTag::CoeReal, d_a, d_b)?,
        CaseTag::CoeReal => {
            let num = &d4
                - (&s - 13) * &d3
                - (BigInt::from(12) * &s - 47) * &d2
                - BigInt::from(35) * (&s - 1) * &d;
            let den = (&d + 1) * (&d + 2) * (&d + 4) * (&d + 6);
            ratio(num, den)
        }
        CaseTag::CoeComplex => {
            let q = int(d_a * d_a + d_b * d_b);
            let d5 = &d4 * &d;
            let x = d5 + BigInt::from(12) * &d4
                - (&q - 41) * &d3
                - (BigInt::from(12) * &q + BigInt::from(2) * &s - 30) * &d2
                - (BigInt::from(38) * &q + 18) * &d
                - BigInt::from(16) * &q
                + BigInt::from(56) * &s
                - 40;
            let y = int(d_a + 1) * int(d_b + 1) * (&d + 1) * (&d + 2) * (&d + 4) * (&d + 6);
            ratio(x, y)
        }
    })
}

/// CUE form factor `⟨|tr Uⁿ|²⟩ = min(n, d)`.
pub fn cue_form_factor(n: u64, d: u64) -> u64 {
    n.min(d)
}

/// CUE fourth moment `⟨|tr Uⁿ|⁴⟩ = 2K(n)² + K(2n) − 2K(n)`, `K = min(·, d)`.
pub fn cue_fourth_moment(n: u64, d: u64) -> u64 {
    let k = cue_form_factor(n, d);
    2 * k * k + cue_form_factor(2 * n, d) - 2 * k
}

/// Leading large-`d_B` term of `ep1 − ep_inf` at `d_A = 2`.
pub fn gap_leading(case: CaseTag, d_a: usize, d_b: usize) -> Result<f64> {
    if d_a != 2 {
        return Err(Error::Unsupported(format!(
            "gap expansion is only known for d_A = 2, got {d_a}"
        )));
    }
    if d_b < 2 {
        return Err(Error::InvalidDimension(format!(
            "gap expansion needs d_B ≥ 2, got {d_b}"
        )));
    }
    let coeff = match case {
        CaseTag::CueComplex => 1.0 / 4.0,
        CaseTag::CoeComplex => 1.0 / 3.0,
        CaseTag::CoeReal => 7.0 / 8.0,
    };
    Ok(coeff / (d_b * d_b) as f64)
}

/// Exact `ep1 − ep_inf`.
pub fn gap_exact(case: CaseTag, d_a: usize, d_b: usize) -> Result<BigRational> {
    Ok(ep1(case, d_a, d_b)? - ep_inf(case, d_a, d_b)?)
}

/// Least-squares coefficients of
/// `S(n) = c₁ + c₂K(n)² + c₃K(2n) + c₄K(n)`, `K(m) = min(m, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub residual_rms: f64,
}

fn basis_row(n: u64, d: u64) -> [f64; 4] {
    let k = cue_form_factor(n, d) as f64;
    let k2 = cue_form_factor(2 * n, d) as f64;
    [1.0, k * k, k2, k]
}

impl FitResult {
    pub fn evaluate(&self, n: u64, d: u64) -> f64 {
        let [b1, b2, b3, b4] = basis_row(n, d);
        self.c1 * b1 + self.c2 * b2 + self.c3 * b3 + self.c4 * b4
    }

    /// Value of the model for `n ≥ d`, where every basis function is saturated.
    pub fn plateau(&self, d: u64) -> f64 {
        self.evaluate(d, d)
    }
}

/// Ordinary least squares over all points of `series`.
pub fn fit_form_factor_model(series: &EntropySeries, d: u64) -> Result<FitResult> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be positive".into()));
    }
    let m = series.len();
    if m < 4 {
        return Err(Error::RankDeficient(format!(
            "{m} points for 4 coefficients"
        )));
    }
    let design = DMatrix::from_fn(m, 4, |i, j| basis_row(series.n_values[i], d)[j]);
    let rhs = DVector::from_column_slice(&series.entropies);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax.is_zero() || smin / smax < 1e-12 {
        return Err(Error::RankDeficient(format!(
            "design condition {:.3e}; the series must span the linear, kinked and saturated regimes",
            smax / smin
        )));
    }
    let coef = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let resid = design * &coef - rhs;
    let residual_rms = (resid.norm_squared() / m as f64).sqrt();
    Ok(FitResult {
        c1: coef[0],
        c2: coef[1],
        c3: coef[2],
        c4: coef[3],
        residual_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ep1_values() {
        assert_eq!(ep1(CaseTag::CueComplex, 4, 5).unwrap(), r(4, 7));
        assert_eq!(ep1(CaseTag::CoeComplex, 4, 5).unwrap(), r(5496, 9660));
        assert_eq!(ep1(CaseTag::CoeReal, 4, 5).unwrap(), r(5496, 9660));
        for db in 1..10 {
            assert!(ep1(CaseTag::CueComplex, 1, db).unwrap().is_zero());
        }
        assert!(ep1(CaseTag::CueComplex, 0, 3).is_err());
    }

    #[test]
    fn op_ent_values() {
        assert_eq!(op_ent_cue(4, 5).unwrap(), r(360, 399));
        assert!(op_ent_cue(1, 7).unwrap().is_zero());
        assert_eq!(op_ent_cue(2, 2).unwrap(), r(3, 5));
        for q in 2..8i64 {
            assert_eq!(
                op_ent_cue(q as usize, q as usize).unwrap(),
                r(q * q - 1, q * q + 1)
            );
        }
        assert!(op_ent_cue(1, 1).is_err());
    }

    #[test]
    fn ep_inf_values() {
        assert_eq!(ep_inf(CaseTag::CueComplex, 4, 5).unwrap(), r(5496, 9660));
        assert_eq!(ep_inf(CaseTag::CoeReal, 4, 5).unwrap(), r(162000, 288288));
        assert_eq!(
            ep_inf(CaseTag::CoeComplex, 4, 5).unwrap(),
            r(4896288, 8648640)
        );
        assert!((to_f64(&ep_inf(CaseTag::CoeComplex, 4, 5).unwrap()) - 0.566134).abs() < 1e-6);
    }

    #[test]
    fn asymptote_below_first_step() {
        assert!(ep_inf(CaseTag::CoeReal, 4, 5).unwrap() < ep1(CaseTag::CoeReal, 4, 5).unwrap());
    }

    #[test]
    fn form_factor_and_moment() {
        assert_eq!(cue_form_factor(1, 20), 1);
        assert_eq!(cue_form_factor(20, 20), 20);
        assert_eq!(cue_form_factor(1_000_000, 20), 20);
        assert_eq!(cue_fourth_moment(1, 20), 2);
        assert_eq!(cue_fourth_moment(20, 20), 780);
        for d in 1..30 {
            for n in d..d + 5 {
                assert_eq!(cue_fourth_moment(n, d), 2 * d * d - d);
            }
        }
    }

    #[test]
    fn gap_leading_values() {
        assert!((gap_leading(CaseTag::CueComplex, 2, 100).unwrap() - 2.5e-5).abs() < 1e-18);
        assert!((gap_leading(CaseTag::CoeReal, 2, 100).unwrap() - 8.75e-5).abs() < 1e-18);
        assert!(matches!(
            gap_leading(CaseTag::CoeReal, 3, 100),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn gap_remainder_is_third_order() {
        for case in CaseTag::ALL {
            let mut scaled = Vec::new();
            for db in [50usize, 100, 200, 400] {
                let exact = to_f64(&gap_exact(case, 2, db).unwrap());
                let lead = gap_leading(case, 2, db).unwrap();
                scaled.push(((exact - lead) * (db as f64).powi(3)).abs());
            }
            // bounded and settling: successive values change by < 5%
            for w in scaled.windows(2) {
                assert!((w[1] - w[0]).abs() < 0.05 * w[0], "{case:?}: {scaled:?}");
            }
            assert!(scaled.iter().all(|&x| x < 10.0), "{case:?}: {scaled:?}");
        }
    }

    #[test]
    fn synthetic_fit_round_trip() {
        let (c1, c2, c3, c4) = (0.57, -1.3e-5, 2.1e-4, -8.0e-4);
        let d = 20;
        let values = (1..=40)
            .map(|n| {
                let [b1, b2, b3, b4] = basis_row(n, d);
                c1 * b1 + c2 * b2 + c3 * b3 + c4 * b4
            })
            .collect();
        let fit = fit_form_factor_model(&EntropySeries::from_values(values), d).unwrap();
        assert!((fit.c1 - c1).abs() < 1e-10);
        assert!((fit.c2 - c2).abs() < 1e-10);
        assert!((fit.c3 - c3).abs() < 1e-10);
        assert!((fit.c4 - c4).abs() < 1e-10);
        assert!(fit.residual_rms < 1e-12);
        let plateau = c1 + c2 * 400.0 + c3 * 20.0 + c4 * 20.0;
        assert!((fit.plateau(d) - plateau).abs() < 1e-10);
        assert_eq!(fit.evaluate(25, d), fit.evaluate(40, d));
    }

    #[test]
    fn short_series_is_rank_deficient() {
        // n ≤ d/2 makes K(2n) = 2K(n).
        let values = (1..=8).map(|n| 0.5 - 0.001 * n as f64).collect();
        assert!(matches!(
            fit_form_factor_model(&EntropySeries::from_values(values), 20),
            Err(Error::RankDeficient(_))
        ));
        assert!(fit_form_factor_model(&EntropySeries::from_values(vec![0.1, 0.2]), 20).is_err());
    }
}
