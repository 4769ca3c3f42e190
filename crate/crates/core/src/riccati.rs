//! Exact maintenance of `A⁻¹` for `A = A₀ + Σ wᵢ uᵢuᵢᵀ` through the
//! Sherman–Morrison (Riccati) identity
//!
//! ```text
//! (A + w uuᵀ)⁻¹ = A⁻¹ − w A⁻¹uuᵀA⁻¹ / (1 + w uᵀA⁻¹u)
//! ```
//!
//! Each update costs `O(q²)`. The stored matrix is re-symmetrized after
//! every update so that long runs do not drift away from symmetry.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Denominators at or below this value are treated as a numerical breakdown.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-300;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiccatiError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite update vector or weight")]
    NonFinite,
    #[error("negative update weight {0}")]
    NegativeWeight(f64),
    #[error("rank-one update broke down (denominator {0:e})")]
    Breakdown(f64),
}

/// The inverse of a growing sum of rank-one matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseState {
    inv: DMatrix<f64>,
    updates_applied: u64,
    scratch: DVector<f64>,
}

impl InverseState {
    /// Starts from a symmetric positive definite `A₀⁻¹`.
    pub fn init(a0_inv: DMatrix<f64>) -> Result<Self, RiccatiError> {
        check_spd(&a0_inv)?;
        Ok(Self::from_parts_unchecked(a0_inv, 0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts_unchecked(DMatrix::identity(dim, dim), 0)
    }

    /// Rebuilds a state from a stored inverse (checkpoint restore).
    pub fn from_parts(inv: DMatrix<f64>, updates_applied: u64) -> Result<Self, RiccatiError> {
        check_spd(&inv)?;
        Ok(Self::from_parts_unchecked(inv, updates_applied))
    }

    fn from_parts_unchecked(inv: DMatrix<f64>, updates_applied: u64) -> Self {
        let dim = inv.nrows();
        InverseState {
            inv,
            updates_applied,
            scratch: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inv.nrows()
    }

    pub fn inv(&self) -> &DMatrix<f64> {
        &self.inv
    }

    pub fn updates_applied(&self) -> u64 {
        self.updates_applied
    }

    /// Replaces `A⁻¹` by `(A + w uuᵀ)⁻¹`.
    pub fn rank_one_update(&mut self, u: &DVector<f64>, w: f64) -> Result<(), RiccatiError> {
        if u.len() != self.dim() {
            return Err(RiccatiError::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        if !w.is_finite() || !u.iter().all(|v| v.is_finite()) {
            return Err(RiccatiError::NonFinite);
        }
        if w < 0.0 {
            return Err(RiccatiError::NegativeWeight(w));
        }
        self.updates_applied += 1;
        if w == 0.0 {
            return Ok(());
        }
        self.scratch.gemv(1.0, &self.inv, u, 0.0);
        let denominator = 1.0 + w * u.dot(&self.scratch);
        if !denominator.is_finite() || denominator <= BREAKDOWN_THRESHOLD {
            return Err(RiccatiError::Breakdown(denominator));
        }
        self.inv
            .ger(-w / denominator, &self.scratch, &self.scratch, 1.0);
        symmetrize(&mut self.inv);
        Ok(())
    }

    /// Adds `w_z zzᵀ` and then `φφᵀ`, chaining through the intermediate inverse.
    pub fn double_update(
        &mut self,
        z: &DVector<f64>,
        w_z: f64,
        phi: &DVector<f64>,
    ) -> Result<(), RiccatiError> {
        self.rank_one_update(z, w_z)?;
        self.rank_one_update(phi, 1.0)
    }

    /// The accumulated matrix `A` itself, recovered by inverting `A⁻¹`.
    pub fn matrix(&self) -> Result<DMatrix<f64>, RiccatiError> {
        let chol = self
            .inv
            .clone()
            .cholesky()
            .ok_or(RiccatiError::NotPositiveDefinite)?;
        let mut a = chol.inverse();
        symmetrize(&mut a);
        Ok(a)
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        self.inv.clone().symmetric_eigen().eigenvalues
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().max()
    }

    /// Writes `A⁻¹` as CSV, one matrix row per line.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in self.inv.row_iter() {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        writer.flush()
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

fn check_spd(m: &DMatrix<f64>) -> Result<(), RiccatiError> {
    if !m.is_square() {
        return Err(RiccatiError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(RiccatiError::NonFinite);
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(RiccatiError::NotSymmetric(asym));
    }
    m.clone()
        .cholesky()
        .map(|_| ())
        .ok_or(RiccatiError::NotPositiveDefinite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frob_identity_error(inv: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        (inv * a - DMatrix::<f64>::identity(n, n)).norm()
    }

    #[test]
    fn init_accepts_spd_and_rejects_others() {
        let s = InverseState::init(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.inv(), &DMatrix::<f64>::identity(3, 3));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        assert_eq!(InverseState::init(d.clone()).unwrap().inv(), &d);

        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(
            InverseState::init(indefinite),
            Err(RiccatiError::NotPositiveDefinite)
        );
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            InverseState::init(asym),
            Err(RiccatiError::NotSymmetric(_))
        ));
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            InverseState::init(rect),
            Err(RiccatiError::NotSquare { .. })
        ));
    }

    #[test]
    fn identity_plus_basis_vector() {
        let mut s = InverseState::identity(2);
        s.rank_one_update(&DVector::from_vec(vec![1.0, 0.0]), 1.0)
            .unwrap();
        assert_eq!(
            s.inv(),
            &DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0])
        );
    }

    #[test]
    fn zero_weight_is_a_no_op() {
        let mut s =
            InverseState::init(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap();
        let before = s.inv().clone();
        s.rank_one_update(&DVector::from_vec(vec![3.0, -1.0]), 0.0)
            .unwrap();
        assert_eq!(s.inv(), &before);
    }

    #[test]
    fn rejects_bad_updates() {
        let mut s = InverseState::identity(2);
        let u = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(
            s.rank_one_update(&u, -1.0),
            Err(RiccatiError::NegativeWeight(-1.0))
        );
        assert_eq!(
            s.rank_one_update(&u, f64::NAN),
            Err(RiccatiError::NonFinite)
        );
        let bad = DVector::from_vec(vec![f64::INFINITY, 0.0]);
        assert_eq!(s.rank_one_update(&bad, 1.0), Err(RiccatiError::NonFinite));
        let short = DVector::from_vec(vec![1.0]);
        assert!(matches!(
            s.rank_one_update(&short, 1.0),
            Err(RiccatiError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn breakdown_is_reported() {
        // Indefinite state built without validation forces 1 + w uᵀA⁻¹u = 0.
        let mut s = InverseState::from_parts_unchecked(DMatrix::from_row_slice(1, 1, &[-1.0]), 0);
        let err = s
            .rank_one_update(&DVector::from_vec(vec![1.0]), 1.0)
            .unwrap_err();
        assert!(matches!(err, RiccatiError::Breakdown(_)));
    }

    #[test]
    fn double_update_matches_direct_inverse() {
        let mut s = InverseState::identity(2);
        s.double_update(
            &DVector::from_vec(vec![0.0, 1.0]),
            0.5,
            &DVector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0 / 3.0]);
        assert!((s.inv() - expected).amax() < 1e-15);
    }

    #[test]
    fn double_update_degenerate_cases() {
        let start =
            InverseState::init(DMatrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 0.7])).unwrap();
        let zero = DVector::zeros(2);
        let mut s = start.clone();
        s.double_update(&DVector::from_vec(vec![1.0, 2.0]), 0.0, &zero)
            .unwrap();
        assert_eq!(s.inv(), start.inv());

        let phi = DVector::from_vec(vec![0.4, -1.3]);
        let mut a = start.clone();
        a.double_update(&DVector::from_vec(vec![5.0, 5.0]), 0.0, &phi)
            .unwrap();
        let mut b = start.clone();
        b.rank_one_update(&phi, 1.0).unwrap();
        assert_eq!(a.inv(), b.inv());
    }

    #[test]
    fn fifty_random_updates_against_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut s = InverseState::identity(3);
        let mut acc = DMatrix::<f64>::identity(3, 3);
        for _ in 0..50 {
            let u = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let w = rng.random::<f64>();
            s.rank_one_update(&u, w).unwrap();
            acc.ger(w, &u, &u, 1.0);
        }
        assert!(frob_identity_error(s.inv(), &acc) <= 1e-8);
        assert!((s.matrix().unwrap() - &acc).norm() <= 1e-8 * acc.norm());
        assert_eq!(s.updates_applied(), 50);
    }

    #[test]
    fn update_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let updates: Vec<(DVector<f64>, f64)> = (0..40)
            .map(|_| {
                (
                    DVector::from_fn(4, |_, _| rng.random_range(-2.0..2.0)),
                    rng.random::<f64>(),
                )
            })
            .collect();
        let mut forward = InverseState::identity(4);
        for (u, w) in &updates {
            forward.rank_one_update(u, *w).unwrap();
        }
        let mut backward = InverseState::identity(4);
        for (u, w) in updates.iter().rev() {
            backward.rank_one_update(u, *w).unwrap();
        }
        assert!((forward.inv() - backward.inv()).amax() <= 1e-9);
    }

    #[test]
    fn csv_dump_is_row_major() {
        let s = InverseState::init(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2,0.5\n0.5,1\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn stays_symmetric_positive_definite_and_exact(
            q in 1usize..=6,
            seed in any::<u64>(),
            len in 1usize..=300,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = InverseState::identity(q);
            let mut acc = DMatrix::<f64>::identity(q, q);
            for _ in 0..len {
                let u = DVector::from_fn(q, |_, _| rng.random_range(-1.0..1.0));
                let w = rng.random::<f64>();
                s.rank_one_update(&u, w).unwrap();
                acc.ger(w, &u, &u, 1.0);
            }
            prop_assert!((s.inv() - s.inv().transpose()).amax() == 0.0);
            prop_assert!(s.eigenvalues().iter().all(|&v| v > 0.0));
            prop_assert!(frob_identity_error(s.inv(), &acc) <= 1e-7);
        }
    }
}
