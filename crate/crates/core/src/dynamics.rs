//! Iterated maps `ψ ↦ Uⁿψ` and their spectral shortcuts.
//!
//! Every sampled unitary is diagonalized once; powers, evolved states and
//! form factors then cost `O(d²)` or `O(d)` per iteration instead of a matrix
//! product. A unitary is normal, so its complex Schur factor is diagonal and
//! the Schur vectors are an orthonormal eigenbasis.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::ensembles::{BipartiteDims, EnsembleTag, PureState, UnitaryMatrix};
use crate::entanglement::linear_entropy_of_amplitudes;
use crate::{c64, Error, Result};

/// Largest off-diagonal mass tolerated in the Schur factor.
const SCHUR_OFFDIAG_TOL: f64 = 1e-10;
const SCHUR_MAX_ITER: usize = 10_000;

/// Minimum separation of eigenphase pair sums for the pairing formula.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Eigenphases `φ_α ∈ [0, 2π)` and eigenvectors (columns) of a unitary.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    dims: BipartiteDims,
    phases: Vec<f64>,
    vectors: DMatrix<c64>,
}

impl SpectralDecomposition {
    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn vectors(&self) -> &DMatrix<c64> {
        &self.vectors
    }

    /// `max |U − Σ_α e^{iφ_α}|e_α⟩⟨e_α||`.
    pub fn reconstruction_residual(&self, u: &UnitaryMatrix) -> f64 {
        let rebuilt = self.power_matrix(1);
        (&rebuilt - u.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Expansion coefficients `c_α = ⟨e_α|ψ⟩`.
    pub fn coefficients(&self, psi: &PureState) -> DVector<c64> {
        self.vectors.ad_mul(psi.vector())
    }

    /// Writes `Uⁿψ = Σ_α e^{inφ_α} c_α |e_α⟩` into `out`, using `scratch` for
    /// the rotated coefficients.
    #[inline]
    pub fn evolve_into(
        &self,
        coeffs: &DVector<c64>,
        n: u64,
        scratch: &mut DVector<c64>,
        out: &mut DVector<c64>,
    ) {
        let nf = n as f64;
        for ((s, c), &phi) in scratch.iter_mut().zip(coeffs.iter()).zip(&self.phases) {
            *s = c * c64::from_polar(1.0, nf * phi);
        }
        out.gemv(
            c64::new(1.0, 0.0),
            &self.vectors,
            scratch,
            c64::new(0.0, 0.0),
        );
    }

    /// Dense `Uⁿ = V·diag(e^{inφ})·V†`.
    pub fn power_matrix(&self, n: u64) -> DMatrix<c64> {
        let nf = n as f64;
        let mut scaled = self.vectors.clone();
        for (mut col, &phi) in scaled.column_iter_mut().zip(&self.phases) {
            let z = c64::from_polar(1.0, nf * phi);
            for x in col.iter_mut() {
                *x *= z;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Diagonalizes `u` through its complex Schur form.
pub fn spectral_decompose(u: &UnitaryMatrix) -> Result<SpectralDecomposition> {
    let d = u.dims().d();
    let schur = nalgebra::linalg::Schur::try_new(u.matrix().clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Numerical {
            reason: "Schur iteration did not converge".into(),
            residual: f64::NAN,
        })?;
    let (vectors, t) = schur.unpack();
    let mut offdiag = 0.0;
    for j in 0..d {
        for i in 0..j {
            offdiag += t[(i, j)].norm_sqr();
        }
    }
    let offdiag = offdiag.sqrt();
    if offdiag > SCHUR_OFFDIAG_TOL {
        return Err(Error::Numerical {
            reason: "Schur factor is not diagonal".into(),
            residual: offdiag,
        });
    }
    let phases = (0..d)
        .map(|i| {
            let p = t[(i, i)].arg().rem_euclid(TAU);
            if p >= TAU {
                0.0
            } else {
                p
            }
        })
        .collect();
    Ok(SpectralDecomposition {
        dims: u.dims(),
        phases,
        vectors,
    })
}

/// `Uⁿ` from a spectral decomposition.
pub fn matrix_power(spec: &SpectralDecomposition, n: u64) -> UnitaryMatrix {
    UnitaryMatrix::from_parts(spec.dims, spec.power_matrix(n), EnsembleTag::Fixed)
}

/// `Uⁿ` by repeated multiplication.
pub fn matrix_power_direct(u: &UnitaryMatrix, n: u64) -> UnitaryMatrix {
    let d = u.dims().d();
    let mut acc = DMatrix::<c64>::identity(d, d);
    for _ in 0..n {
        acc = u.matrix() * acc;
    }
    UnitaryMatrix::from_parts(u.dims(), acc, EnsembleTag::Fixed)
}

/// Linear entropies `S_L⁽ⁿ⁾` for consecutive `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub n_values: Vec<u64>,
    pub entropies: Vec<f64>,
}

impl EntropySeries {
    /// Series indexed `n = 1, 2, …, values.len()`.
    pub fn from_values(values: Vec<f64>) -> Self {
        let n_values = (1..=values.len() as u64).collect();
        Self {
            n_values,
            entropies: values,
        }
    }

    pub fn len(&self) -> usize {
        self.entropies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entropies.is_empty()
    }
}

fn check_state(u: &UnitaryMatrix, psi: &PureState) -> Result<()> {
    if u.dims() != psi.dims() {
        return Err(Error::DimensionMismatch(format!(
            "operator {:?} vs state {:?}",
            u.dims(),
            psi.dims()
        )));
    }
    Ok(())
}

/// `S_L⁽ⁿ⁾(ψ)` for `n = 1..=n_max`.
pub fn entropy_series(u: &UnitaryMatrix, psi: &PureState, n_max: u64) -> Result<EntropySeries> {
    check_state(u, psi)?;
    let spec = spectral_decompose(u)?;
    Ok(entropy_series_spectral(&spec, psi, n_max))
}

pub fn entropy_series_spectral(
    spec: &SpectralDecomposition,
    psi: &PureState,
    n_max: u64,
) -> EntropySeries {
    let coeffs = spec.coefficients(psi);
    let d = spec.dims.d();
    let mut scratch = DVector::zeros(d);
    let mut out = DVector::zeros(d);
    let values = (1..=n_max)
        .map(|n| {
            spec.evolve_into(&coeffs, n, &mut scratch, &mut out);
            linear_entropy_of_amplitudes(out.as_slice(), spec.dims)
        })
        .collect();
    EntropySeries::from_values(values)
}

/// `(1/N) Σ_{n=1..N} S_L⁽ⁿ⁾(ψ)`, the finite-time approximation of the
/// asymptotic entropy.
pub fn time_average_entropy(u: &UnitaryMatrix, psi: &PureState, n_terms: u64) -> Result<f64> {
    check_state(u, psi)?;
    if n_terms == 0 {
        return Err(Error::Config("time average needs at least one term".into()));
    }
    let spec = spectral_decompose(u)?;
    Ok(time_average_entropy_spectral(&spec, psi, n_terms))
}

pub fn time_average_entropy_spectral(
    spec: &SpectralDecomposition,
    psi: &PureState,
    n_terms: u64,
) -> f64 {
    let coeffs = spec.coefficients(psi);
    let d = spec.dims.d();
    let mut scratch = DVector::zeros(d);
    let mut out = DVector::zeros(d);
    let mut sum = 0.0;
    for n in 1..=n_terms {
        spec.evolve_into(&coeffs, n, &mut scratch, &mut out);
        sum += linear_entropy_of_amplitudes(out.as_slice(), spec.dims);
    }
    sum / n_terms as f64
}

/// Fails when two pair sums `φ_α+φ_β` (α ≤ β, taken mod 2π) come closer
/// than `tol`. This covers repeated phases as well as resonances
/// `φ_α+φ_β = φ_γ+φ_δ` beyond the trivial pairings.
pub fn check_resonances(phases: &[f64], tol: f64) -> Result<()> {
    let d = phases.len();
    let mut sums = Vec::with_capacity(d * (d + 1) / 2);
    for a in 0..d {
        for b in a..d {
            sums.push((phases[a] + phases[b]).rem_euclid(TAU));
        }
    }
    sums.sort_by(f64::total_cmp);
    let mut gap = f64::INFINITY;
    for w in sums.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    if sums.len() > 1 {
        gap = gap.min(sums[0] + TAU - sums[sums.len() - 1]);
    }
    if gap < tol {
        return Err(Error::Degenerate { gap });
    }
    Ok(())
}

/// Infinite-time average of `S_L⁽ⁿ⁾(ψ)` from the eigenbasis alone.
///
/// With `p_α = |⟨e_α|ψ⟩|²` and `ρ_{A,B}^α` the reduced matrices of `|e_α⟩`,
/// the surviving index pairings give the purity
///
/// `Σ_α p_α² tr(ρ_A^α)² + Σ_{α≠β} p_α p_β [tr(ρ_A^α ρ_A^β) + tr(ρ_B^α ρ_B^β)]`,
///
/// evaluated here as `tr A² + tr B² − Σ_α p_α² tr(ρ_A^α)²` with
/// `A = Σ p_α ρ_A^α`, `B = Σ p_α ρ_B^α`.
pub fn asymptotic_entropy_spectral(u: &UnitaryMatrix, psi: &PureState) -> Result<f64> {
    check_state(u, psi)?;
    let spec = spectral_decompose(u)?;
    asymptotic_entropy_from_spectrum(&spec, psi)
}

pub fn asymptotic_entropy_from_spectrum(
    spec: &SpectralDecomposition,
    psi: &PureState,
) -> Result<f64> {
    check_resonances(&spec.phases, RESONANCE_TOL)?;
    let coeffs = spec.coefficients(psi);
    let (da, db) = (spec.dims.d_a(), spec.dims.d_b());
    let mut sum_a = DMatrix::<c64>::zeros(da, da);
    let mut sum_b = DMatrix::<c64>::zeros(db, db);
    let mut self_terms = 0.0;
    for (alpha, c) in coeffs.iter().enumerate() {
        let p = c.norm_sqr();
        let col = spec.vectors.column(alpha);
        let m = DMatrix::from_row_slice(da, db, col.as_slice());
        let rho_a = &m * m.adjoint();
        // Only tr(B²) is needed, and it is transpose-invariant.
        let rho_b_t = m.adjoint() * &m;
        self_terms += p * p * rho_a.norm_squared();
        sum_a += rho_a * c64::new(p, 0.0);
        sum_b += rho_b_t * c64::new(p, 0.0);
    }
    let purity = sum_a.norm_squared() + sum_b.norm_squared() - self_terms;
    Ok(1.0 - purity)
}

/// `|t_n|² = |tr Uⁿ|²`.
pub fn form_factor(u: &UnitaryMatrix, n: u64) -> Result<f64> {
    let spec = spectral_decompose(u)?;
    Ok(form_factor_from_phases(&spec.phases, n))
}

#[inline]
pub fn trace_power(phases: &[f64], n: u64) -> c64 {
    let nf = n as f64;
    phases.iter().map(|&p| c64::from_polar(1.0, nf * p)).sum()
}

#[inline]
pub fn form_factor_from_phases(phases: &[f64], n: u64) -> f64 {
    trace_power(phases, n).norm_sqr()
}

/// Nearest-neighbour spacings of eigenphases around the unit circle.
pub fn phase_spacings(phases: &[f64]) -> Vec<f64> {
    let mut sorted = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    if let (Some(first), Some(last)) = (sorted.first(), sorted.last()) {
        out.push(first + TAU - last);
    }
    out
}
