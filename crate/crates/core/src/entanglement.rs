//! Bipartite entanglement kernels.
//!
//! Purities are computed as squared Frobenius norms of Gram matrices, always
//! over the smaller subsystem, so no reduced matrix is ever squared
//! explicitly. For a pure state `tr ρ_A² = tr ρ_B²`, so either side works.

use nalgebra::DMatrix;

use crate::ensembles::{BipartiteDims, PureState, UnitaryMatrix};
use crate::{c64, Error, Result};

/// Reduced density matrix of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    entries: DMatrix<c64>,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<c64> {
        &self.entries
    }

    pub fn trace(&self) -> c64 {
        self.entries.trace()
    }

    /// `tr ρ²`, as the squared Frobenius norm (valid since `ρ = ρ†`).
    pub fn purity(&self) -> f64 {
        self.entries.norm_squared()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = &self.entries;
        let mut dev = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Amplitudes reshaped as the `d_A×d_B` coefficient matrix `M[a,b] = ψ[a·d_B+b]`.
fn coefficient_matrix(amps: &[c64], dims: BipartiteDims) -> DMatrix<c64> {
    DMatrix::from_row_slice(dims.d_a(), dims.d_b(), amps)
}

/// `ρ_A = tr_B |ψ⟩⟨ψ| = M·M†`.
pub fn reduced_density_a(psi: &PureState) -> ReducedDensityMatrix {
    let m = coefficient_matrix(psi.amplitudes(), psi.dims());
    ReducedDensityMatrix {
        entries: &m * m.adjoint(),
    }
}

/// `ρ_B = tr_A |ψ⟩⟨ψ| = (M†·M)ᵀ`.
pub fn reduced_density_b(psi: &PureState) -> ReducedDensityMatrix {
    let m = coefficient_matrix(psi.amplitudes(), psi.dims());
    ReducedDensityMatrix {
        entries: (m.adjoint() * &m).transpose(),
    }
}

/// Squared Frobenius norm of the Gram matrix of the rows of a row-major
/// `rows×cols` array.
#[inline]
fn row_gram_norm_sq(x: &[c64], rows: usize, cols: usize) -> f64 {
    let mut diag = 0.0;
    let mut off = 0.0;
    for i in 0..rows {
        let ri = &x[i * cols..(i + 1) * cols];
        diag += ri.iter().map(|z| z.norm_sqr()).sum::<f64>().powi(2);
        for j in (i + 1)..rows {
            let rj = &x[j * cols..(j + 1) * cols];
            let g: c64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
            off += g.norm_sqr();
        }
    }
    diag + 2.0 * off
}

/// Same as [`row_gram_norm_sq`] for the Gram matrix of the columns.
#[inline]
fn col_gram_norm_sq(x: &[c64], rows: usize, cols: usize) -> f64 {
    let mut diag = 0.0;
    let mut off = 0.0;
    for i in 0..cols {
        let ni: f64 = (0..rows).map(|r| x[r * cols + i].norm_sqr()).sum();
        diag += ni * ni;
        for j in (i + 1)..cols {
            let g: c64 = (0..rows)
                .map(|r| x[r * cols + i] * x[r * cols + j].conj())
                .sum();
            off += g.norm_sqr();
        }
    }
    diag + 2.0 * off
}

/// `tr ρ_A²` straight from the amplitudes.
pub fn purity_of_amplitudes(amps: &[c64], dims: BipartiteDims) -> f64 {
    debug_assert_eq!(amps.len(), dims.d());
    if dims.d_a() <= dims.d_b() {
        row_gram_norm_sq(amps, dims.d_a(), dims.d_b())
    } else {
        col_gram_norm_sq(amps, dims.d_a(), dims.d_b())
    }
}

/// `1 − tr ρ_A²` straight from the amplitudes.
#[inline]
pub fn linear_entropy_of_amplitudes(amps: &[c64], dims: BipartiteDims) -> f64 {
    1.0 - purity_of_amplitudes(amps, dims)
}

/// Subsystem linear entropy `S_L = 1 − tr ρ_A²` of a pure bipartite state.
pub fn linear_entropy(psi: &PureState) -> f64 {
    linear_entropy_of_amplitudes(psi.amplitudes(), psi.dims())
}

/// Operator entanglement `S_L(U)` via the realignment
/// `R[(k₁,k₂),(i₁,i₂)] = U[k₁i₁, k₂i₂]`, giving `1 − tr[(R·R†)²]/d²`.
pub fn operator_entanglement(u: &UnitaryMatrix) -> f64 {
    operator_entanglement_of_matrix(u.matrix(), u.dims())
}

/// [`operator_entanglement`] for a raw `d×d` matrix with the given bipartition.
pub fn operator_entanglement_of_matrix(u: &DMatrix<c64>, dims: BipartiteDims) -> f64 {
    let (da, db) = (dims.d_a(), dims.d_b());
    let rows = da * da;
    let cols = db * db;
    let mut r = vec![c64::new(0.0, 0.0); rows * cols];
    for k1 in 0..da {
        for k2 in 0..da {
            let row = k1 * da + k2;
            for i1 in 0..db {
                for i2 in 0..db {
                    r[row * cols + i1 * db + i2] = u[(k1 * db + i1, k2 * db + i2)];
                }
            }
        }
    }
    let tr_sq = if rows <= cols {
        row_gram_norm_sq(&r, rows, cols)
    } else {
        col_gram_norm_sq(&r, rows, cols)
    };
    let d = dims.d() as f64;
    1.0 - tr_sq / (d * d)
}

/// Largest total dimension accepted by [`operator_entanglement_naive`].
pub const NAIVE_MAX_DIM: usize = 12;

/// Literal eightfold sum
/// `1 − d⁻² Σ U[k₁i₁,k₂i₂] U[l₁j₁,l₂j₂] U*[l₁i₁,l₂i₂] U*[k₁j₁,k₂j₂]`.
pub fn operator_entanglement_naive(u: &UnitaryMatrix) -> Result<f64> {
    let dims = u.dims();
    if dims.d() > NAIVE_MAX_DIM {
        return Err(Error::CostGuard(format!(
            "naive operator entanglement needs d ≤ {NAIVE_MAX_DIM}, got {}",
            dims.d()
        )));
    }
    let (da, db) = (dims.d_a(), dims.d_b());
    let m = u.matrix();
    let at = |a: usize, i: usize, a2: usize, i2: usize| m[(a * db + i, a2 * db + i2)];
    let mut sum = c64::new(0.0, 0.0);
    for k1 in 0..da {
        for k2 in 0..da {
            for l1 in 0..da {
                for l2 in 0..da {
                    for i1 in 0..db {
                        for i2 in 0..db {
                            for j1 in 0..db {
                                for j2 in 0..db {
                                    sum += at(k1, i1, k2, i2)
                                        * at(l1, j1, l2, j2)
                                        * at(l1, i1, l2, i2).conj()
                                        * at(k1, j1, k2, j2).conj();
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let d = dims.d() as f64;
    Ok(1.0 - sum.re / (d * d))
}
