//! Random unitaries and random states.
//!
//! CUE matrices come from a Ginibre matrix by QR factorization, with each
//! column of `Q` rotated by the phase of the matching diagonal entry of `R`.
//! Without that correction the distribution of `Q` depends on the QR
//! implementation's sign convention and is not Haar. COE matrices are
//! `W·Wᵀ` with `W` from CUE, assembled from one triangle so the result is
//! symmetric bit for bit.
//!
//! Composite indices are A-major: the product basis vector `|a⟩⊗|b⟩` sits at
//! position `a·d_B + b`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{c64, Error, Result};

/// Subsystem dimensions of a bipartite Hilbert space `H_A ⊗ H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    d_a: usize,
    d_b: usize,
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidDimension(format!(
                "subsystem dimensions must be positive, got d_A={d_a}, d_B={d_b}"
            )));
        }
        Ok(Self { d_a, d_b })
    }

    /// A single system of dimension `d`, viewed as `d ⊗ 1`.
    pub fn single(d: usize) -> Result<Self> {
        Self::new(d, 1)
    }

    #[inline]
    pub fn d_a(&self) -> usize {
        self.d_a
    }

    #[inline]
    pub fn d_b(&self) -> usize {
        self.d_b
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Composite index of `|a⟩⊗|b⟩`.
    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.d_b + b
    }

    /// Largest linear entropy a pure state on this space can reach.
    pub fn max_linear_entropy(&self) -> f64 {
        1.0 - 1.0 / self.d_a.min(self.d_b) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleTag {
    Cue,
    Coe,
    /// Deterministic or derived matrix (identity, SWAP, powers, products).
    Fixed,
}

/// Dense `d×d` unitary over a bipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dims: BipartiteDims,
    entries: DMatrix<c64>,
    tag: EnsembleTag,
}

/// Tolerance used when validating caller-supplied matrices.
const UNITARITY_TOL: f64 = 1e-10;

impl UnitaryMatrix {
    /// Wraps `entries`, checking the shape against `dims` and unitarity.
    pub fn new(dims: BipartiteDims, entries: DMatrix<c64>, tag: EnsembleTag) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() != dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {0}x{0} but d_A·d_B = {1}",
                entries.nrows(),
                dims.d()
            )));
        }
        let u = Self { dims, entries, tag };
        let deviation = u.unitarity_deviation();
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub(crate) fn from_parts(dims: BipartiteDims, entries: DMatrix<c64>, tag: EnsembleTag) -> Self {
        debug_assert_eq!(entries.nrows(), dims.d());
        Self { dims, entries, tag }
    }

    pub fn identity(dims: BipartiteDims) -> Self {
        Self::from_parts(
            dims,
            DMatrix::identity(dims.d(), dims.d()),
            EnsembleTag::Fixed,
        )
    }

    /// The SWAP gate on `q ⊗ q`: `|a⟩⊗|b⟩ ↦ |b⟩⊗|a⟩`.
    pub fn swap(q: usize) -> Result<Self> {
        let dims = BipartiteDims::new(q, q)?;
        let d = dims.d();
        let mut m = DMatrix::zeros(d, d);
        for a in 0..q {
            for b in 0..q {
                m[(dims.index(b, a), dims.index(a, b))] = c64::new(1.0, 0.0);
            }
        }
        Ok(Self::from_parts(dims, m, EnsembleTag::Fixed))
    }

    /// `diag(e^{iθ_0}, …, e^{iθ_{d-1}})` in the product basis.
    pub fn from_phases(dims: BipartiteDims, phases: &[f64]) -> Result<Self> {
        if phases.len() != dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} phases for dimension {}",
                phases.len(),
                dims.d()
            )));
        }
        let diag =
            DVector::from_iterator(dims.d(), phases.iter().map(|&t| c64::from_polar(1.0, t)));
        Ok(Self::from_parts(
            dims,
            DMatrix::from_diagonal(&diag),
            EnsembleTag::Fixed,
        ))
    }

    /// Local operator `a ⊗ b`, with subsystem dimensions `(a.d(), b.d())`.
    pub fn kron(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<Self> {
        let dims = BipartiteDims::new(a.dims.d(), b.dims.d())?;
        Ok(Self::from_parts(
            dims,
            a.entries.kronecker(&b.entries),
            EnsembleTag::Fixed,
        ))
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, rhs.dims
            )));
        }
        Ok(Self::from_parts(
            self.dims,
            &self.entries * &rhs.entries,
            EnsembleTag::Fixed,
        ))
    }

    /// Same matrix, reinterpreted over a different bipartition of the same `d`.
    pub fn with_dims(mut self, dims: BipartiteDims) -> Result<Self> {
        if dims.d() != self.dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "cannot view dimension {} as {:?}",
                self.dims.d(),
                dims
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    #[inline]
    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<c64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<c64> {
        self.entries
    }

    #[inline]
    pub fn tag(&self) -> EnsembleTag {
        self.tag
    }

    /// `max_ij |(U·U†)_ij − δ_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = &self.entries * self.entries.adjoint();
        let mut dev = 0.0f64;
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((p[(i, j)] - c64::new(target, 0.0)).norm());
            }
        }
        dev
    }

    /// Exact (bitwise) symmetry `U = Uᵀ`.
    pub fn is_symmetric(&self) -> bool {
        let m = &self.entries;
        (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
    }

    /// `U·ψ`, keeping the state's bipartition.
    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        if psi.dims.d() != self.dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs operator dimension {}",
                psi.dims.d(),
                self.dims.d()
            )));
        }
        let amplitudes = &self.entries * &psi.amplitudes;
        let field = field_of(amplitudes.as_slice());
        Ok(PureState {
            dims: psi.dims,
            amplitudes,
            field,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Normalized state vector over a bipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: BipartiteDims,
    amplitudes: DVector<c64>,
    field: Field,
}

const NORM_TOL: f64 = 1e-10;

fn field_of(amps: &[c64]) -> Field {
    if amps.iter().all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}

impl PureState {
    /// Wraps `amplitudes` after checking length and normalization. The field
    /// tag is `Real` exactly when every imaginary part is zero.
    pub fn new(dims: BipartiteDims, amplitudes: Vec<c64>) -> Result<Self> {
        if amplitudes.len() != dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                dims.d()
            )));
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let field = field_of(amplitudes.as_slice());
        Ok(Self {
            dims,
            amplitudes,
            field,
        })
    }

    pub(crate) fn from_parts(dims: BipartiteDims, amplitudes: DVector<c64>, field: Field) -> Self {
        Self {
            dims,
            amplitudes,
            field,
        }
    }

    /// Product basis state `|a⟩⊗|b⟩`.
    pub fn basis(dims: BipartiteDims, a: usize, b: usize) -> Result<Self> {
        if a >= dims.d_a() || b >= dims.d_b() {
            return Err(Error::InvalidDimension(format!(
                "basis index ({a}, {b}) outside {:?}",
                dims
            )));
        }
        let mut v = DVector::zeros(dims.d());
        v[dims.index(a, b)] = c64::new(1.0, 0.0);
        Ok(Self {
            dims,
            amplitudes: v,
            field: Field::Real,
        })
    }

    #[inline]
    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    #[inline]
    pub fn amplitudes(&self) -> &[c64] {
        self.amplitudes.as_slice()
    }

    #[inline]
    pub fn vector(&self) -> &DVector<c64> {
        &self.amplitudes
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Same amplitudes, reinterpreted over another bipartition of the same `d`.
    pub fn with_dims(mut self, dims: BipartiteDims) -> Result<Self> {
        if dims.d() != self.dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "cannot view dimension {} as {:?}",
                self.dims.d(),
                dims
            )));
        }
        self.dims = dims;
        Ok(self)
    }
}

/// Seed pair identifying one reproducible random stream.
///
/// Each Monte Carlo sample owns one stream, `stream_index` being its sample
/// index, so draws never depend on how samples are spread over workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

#[inline]
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> c64 {
    c64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-distributed unitary on `dims`.
pub fn sample_cue<R: Rng + ?Sized>(dims: BipartiteDims, rng: &mut R) -> UnitaryMatrix {
    let d = dims.d();
    let ginibre = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = ginibre.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for (j, r) in r_diag.iter().enumerate() {
        let modulus = r.norm();
        if modulus > 0.0 {
            let phase = r / modulus;
            for z in q.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
    }
    UnitaryMatrix::from_parts(dims, q, EnsembleTag::Cue)
}

/// COE matrix `W·Wᵀ`, `W` Haar. Symmetric exactly.
pub fn sample_coe<R: Rng + ?Sized>(dims: BipartiteDims, rng: &mut R) -> UnitaryMatrix {
    let w = sample_cue(dims, rng).into_matrix();
    let d = dims.d();
    let mut u = DMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..=j {
            let mut acc = c64::new(0.0, 0.0);
            for k in 0..d {
                acc += w[(i, k)] * w[(j, k)];
            }
            u[(i, j)] = acc;
            u[(j, i)] = acc;
        }
    }
    UnitaryMatrix::from_parts(dims, u, EnsembleTag::Coe)
}

fn random_unit_vector<R: Rng + ?Sized>(d: usize, field: Field, rng: &mut R) -> DVector<c64> {
    let mut v = match field {
        Field::Real => DVector::from_fn(d, |_, _| c64::new(StandardNormal.sample(rng), 0.0)),
        Field::Complex => DVector::from_fn(d, |_, _| complex_gaussian(rng)),
    };
    let norm = v.norm();
    v.unscale_mut(norm);
    v
}

/// Uniformly distributed unit vector in `ℝ^d` or `ℂ^d`, as a `d ⊗ 1` state.
pub fn random_state<R: Rng + ?Sized>(d: usize, field: Field, rng: &mut R) -> Result<PureState> {
    let dims = BipartiteDims::single(d)?;
    Ok(PureState::from_parts(
        dims,
        random_unit_vector(d, field, rng),
        field,
    ))
}

/// `|ψ_A⟩⊗|ψ_B⟩` with both factors drawn independently from their spheres.
pub fn random_product_state<R: Rng + ?Sized>(
    dims: BipartiteDims,
    field: Field,
    rng: &mut R,
) -> PureState {
    let a = random_unit_vector(dims.d_a(), field, rng);
    let b = random_unit_vector(dims.d_b(), field, rng);
    PureState::from_parts(dims, a.kronecker(&b), field)
}

/// Tensor product of two single-system states.
pub fn product_state(psi_a: &PureState, psi_b: &PureState) -> Result<PureState> {
    if psi_a.dims.d_b() != 1 || psi_b.dims.d_b() != 1 {
        return Err(Error::DimensionMismatch(
            "product_state expects single-system factors (d_B = 1)".into(),
        ));
    }
    let dims = BipartiteDims::new(psi_a.dims.d(), psi_b.dims.d())?;
    let field = match (psi_a.field, psi_b.field) {
        (Field::Real, Field::Real) => Field::Real,
        _ => Field::Complex,
    };
    Ok(PureState::from_parts(
        dims,
        psi_a.amplitudes.kronecker(&psi_b.amplitudes),
        field,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn dims(a: usize, b: usize) -> BipartiteDims {
        BipartiteDims::new(a, b).unwrap()
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            BipartiteDims::single(0),
            Err(Error::InvalidDimension(_))
        ));
        assert!(BipartiteDims::new(3, 0).is_err());
    }

    #[test]
    fn cue_is_unitary() {
        for (seed, d) in [(1, 1), (2, 2), (3, 7), (4, 20), (5, 64)] {
            let u = sample_cue(
                BipartiteDims::single(d).unwrap(),
                &mut RandomStream::new(seed, 0).rng(),
            );
            assert!(
                u.unitarity_deviation() < 1e-12,
                "d={d}: {}",
                u.unitarity_deviation()
            );
            assert_eq!(u.tag(), EnsembleTag::Cue);
        }
    }

    #[test]
    fn coe_symmetric_and_unitary() {
        for d in [1, 2, 5, 20, 64] {
            let u = sample_coe(
                BipartiteDims::single(d).unwrap(),
                &mut RandomStream::new(9, d as u64).rng(),
            );
            assert!(u.is_symmetric());
            assert!(u.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn streams_reproduce_bitwise() {
        let dm = dims(4, 5);
        let s = RandomStream::new(42, 17);
        assert_eq!(sample_cue(dm, &mut s.rng()), sample_cue(dm, &mut s.rng()));
        assert_eq!(sample_coe(dm, &mut s.rng()), sample_coe(dm, &mut s.rng()));
        let other = RandomStream::new(42, 18);
        assert_ne!(
            sample_cue(dm, &mut s.rng()),
            sample_cue(dm, &mut other.rng())
        );
        assert_eq!(
            random_product_state(dm, Field::Complex, &mut s.rng()),
            random_product_state(dm, Field::Complex, &mut s.rng())
        );
    }

    #[test]
    fn random_states_normalized() {
        let mut rng = RandomStream::new(3, 0).rng();
        for d in 1..30 {
            let c = random_state(d, Field::Complex, &mut rng).unwrap();
            assert!(close(c.norm(), 1.0, 1e-12));
            let r = random_state(d, Field::Real, &mut rng).unwrap();
            assert!(close(r.norm(), 1.0, 1e-12));
            assert!(r.amplitudes().iter().all(|z| z.im == 0.0));
            assert_eq!(r.field(), Field::Real);
        }
    }

    #[test]
    fn product_of_basis_states() {
        let a = PureState::basis(dims(3, 1), 0, 0).unwrap();
        let b = PureState::basis(dims(4, 1), 0, 0).unwrap();
        let p = product_state(&a, &b).unwrap();
        assert_eq!(p.dims(), dims(3, 4));
        assert_eq!(p.amplitudes()[0], c64::new(1.0, 0.0));
        assert!(p.amplitudes()[1..].iter().all(|z| *z == c64::new(0.0, 0.0)));
        assert_eq!(p.field(), Field::Real);
    }

    #[test]
    fn product_index_is_a_major() {
        let a = PureState::basis(dims(3, 1), 2, 0).unwrap();
        let b = PureState::basis(dims(4, 1), 1, 0).unwrap();
        let p = product_state(&a, &b).unwrap();
        assert_eq!(p.amplitudes()[2 * 4 + 1], c64::new(1.0, 0.0));
    }

    #[test]
    fn product_field_and_norm() {
        let mut rng = RandomStream::new(11, 0).rng();
        let a = random_state(4, Field::Real, &mut rng).unwrap();
        let b = random_state(5, Field::Complex, &mut rng).unwrap();
        let p = product_state(&a, &b).unwrap();
        assert_eq!(p.field(), Field::Complex);
        assert!(close(p.norm(), 1.0, 1e-12));
    }

    #[test]
    fn product_rejects_bipartite_factor() {
        let a = PureState::basis(dims(2, 2), 0, 0).unwrap();
        let b = PureState::basis(dims(2, 1), 0, 0).unwrap();
        assert!(matches!(
            product_state(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn new_validates() {
        let dm = dims(2, 1);
        assert!(matches!(
            PureState::new(dm, vec![c64::new(1.0, 0.0), c64::new(1.0, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(PureState::new(dm, vec![c64::new(1.0, 0.0)]).is_err());
        let m = DMatrix::from_element(2, 2, c64::new(1.0, 0.0));
        assert!(matches!(
            UnitaryMatrix::new(dm, m, EnsembleTag::Fixed),
            Err(Error::NotUnitary { .. })
        ));
        let m3 = DMatrix::<c64>::identity(3, 3);
        assert!(matches!(
            UnitaryMatrix::new(dm, m3, EnsembleTag::Fixed),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn swap_permutes_product_basis() {
        let s = UnitaryMatrix::swap(3).unwrap();
        let psi = PureState::basis(s.dims(), 0, 2).unwrap();
        let out = s.apply(&psi).unwrap();
        assert_eq!(out, PureState::basis(s.dims(), 2, 0).unwrap());
    }
}
