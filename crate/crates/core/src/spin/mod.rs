//! Finite sub-manuals of the spin-one manual: frames of mutually orthogonal
//! projections on C³, density-operator-induced weights via the trace rule,
//! frame coarsening, and least-squares recovery of a density operator from
//! frame data.
//!
//! Projections are canonicalized by their matrices, never by generating
//! vectors, so phase ambiguity cannot leak into outcome identity.

pub mod linalg;
mod lstsq;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::manual::{Manual, OutcomeId};
use crate::scalar::Real;

pub use linalg::{hermitian_eigenvalues, re_trace_product, CVec3, Mat3};

/// Entrywise tolerance for Hermiticity, idempotency, frame orthogonality
/// and completeness checks.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Entrywise tolerance under which two projections are the same outcome.
pub const PROJECTION_EQ_TOL: f64 = 1e-9;
/// Orthogonality tolerance for generating basis vectors.
pub const BASIS_ORTHO_TOL: f64 = 1e-9;
/// Eigenvalue floor below which a fitted matrix is flagged as not positive.
pub const DENSITY_MIN_EIG: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind")]
pub enum SpinError {
    #[error("vector {index} is numerically zero")]
    ZeroVector { index: usize },
    #[error("vectors {i} and {j} are not orthogonal")]
    NotOrthogonal { i: usize, j: usize },
    #[error("matrix is not a projection: {reason}")]
    InvalidProjection { reason: &'static str },
    #[error("projections do not form a frame: {reason}")]
    NotAFrame { reason: &'static str },
    #[error("projection does not belong to the frame")]
    NotInFrame,
    #[error("matrix is not a density operator: {reason}")]
    InvalidDensity { reason: &'static str },
    #[error("no frames given")]
    NoFrames,
    #[error("observed weights for frame {frame_index} do not match its outcome count")]
    ObservationShapeMismatch { frame_index: usize },
    #[error("frame constraints leave a nullspace of dimension {nullspace_dim}")]
    Underdetermined { nullspace_dim: usize },
}

/// A Hermitian idempotent on C³ of rank 1, 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<R: Real> {
    matrix: Mat3<R>,
    rank: u8,
}

impl<R: Real> Projection<R> {
    pub fn from_matrix(matrix: Mat3<R>) -> Result<Self, SpinError> {
        let tol = R::tol(STRUCTURE_TOL);
        if !matrix.is_finite() {
            return Err(SpinError::InvalidProjection {
                reason: "entries are not finite",
            });
        }
        if !matrix.is_hermitian(tol) {
            return Err(SpinError::InvalidProjection {
                reason: "not Hermitian",
            });
        }
        if matrix.matmul(&matrix).max_abs_diff(&matrix) > tol {
            return Err(SpinError::InvalidProjection {
                reason: "not idempotent",
            });
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > R::tol(1e-8) {
            return Err(SpinError::InvalidProjection {
                reason: "trace is not near an integer",
            });
        }
        let rank = rank
            .to_u8()
            .filter(|r| (1..=3).contains(r))
            .ok_or(SpinError::InvalidProjection {
                reason: "rank outside 1..=3",
            })?;
        Ok(Projection { matrix, rank })
    }

    /// Rank-1 projection onto the line spanned by `v`.
    pub fn onto(v: &CVec3<R>) -> Result<Self, SpinError> {
        let unit = v
            .normalized()
            .filter(|_| v.norm() > R::tol(BASIS_ORTHO_TOL))
            .ok_or(SpinError::ZeroVector { index: 0 })?;
        Projection::from_matrix(unit.outer())
    }

    pub fn matrix(&self) -> &Mat3<R> {
        &self.matrix
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    /// Canonical equality: matrices agree entrywise within
    /// [`PROJECTION_EQ_TOL`].
    pub fn same_outcome(&self, other: &Projection<R>) -> bool {
        self.matrix.max_abs_diff(&other.matrix) <= R::tol(PROJECTION_EQ_TOL)
    }

    /// Sum with an orthogonal projection.
    pub fn merge(&self, other: &Projection<R>) -> Result<Self, SpinError> {
        Projection::from_matrix(self.matrix.add(&other.matrix))
    }
}

/// A maximal orthogonal set of projections: pairwise products vanish and
/// the sum is the identity, so ranks sum to 3.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<R: Real> {
    projections: Vec<Projection<R>>,
}

impl<R: Real> Frame<R> {
    pub fn new(projections: Vec<Projection<R>>) -> Result<Self, SpinError> {
        let tol = R::tol(STRUCTURE_TOL);
        if projections.is_empty() {
            return Err(SpinError::NotAFrame {
                reason: "no projections",
            });
        }
        for i in 0..projections.len() {
            for j in (i + 1)..projections.len() {
                let product = projections[i].matrix.matmul(&projections[j].matrix);
                if product.max_abs() > tol {
                    return Err(SpinError::NotAFrame {
                        reason: "projections are not mutually orthogonal",
                    });
                }
            }
        }
        let mut sum = Mat3::zero();
        for p in &projections {
            sum = sum.add(&p.matrix);
        }
        if sum.max_abs_diff(&Mat3::identity()) > tol {
            return Err(SpinError::NotAFrame {
                reason: "projections do not sum to the identity",
            });
        }
        if projections.iter().map(|p| p.rank as u32).sum::<u32>() != 3 {
            return Err(SpinError::NotAFrame {
                reason: "ranks do not sum to 3",
            });
        }
        Ok(Frame { projections })
    }

    /// Frame of rank-1 projections onto three pairwise orthogonal vectors.
    pub fn from_basis(vectors: &[CVec3<R>; 3]) -> Result<Self, SpinError> {
        let mut units = Vec::with_capacity(3);
        for (index, v) in vectors.iter().enumerate() {
            if !v.is_finite() || v.norm() <= R::tol(BASIS_ORTHO_TOL) {
                return Err(SpinError::ZeroVector { index });
            }
            units.push(v.normalized().ok_or(SpinError::ZeroVector { index })?);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                if units[i].dot(&units[j]).norm() > R::tol(BASIS_ORTHO_TOL) {
                    return Err(SpinError::NotOrthogonal { i, j });
                }
            }
        }
        let projections = units
            .iter()
            .map(|u| Projection::from_matrix(u.outer()))
            .collect::<Result<Vec<_>, _>>()?;
        Frame::new(projections)
    }

    pub fn projections(&self) -> &[Projection<R>] {
        &self.projections
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    /// Position of a projection in this frame, by canonical equality.
    pub fn position(&self, p: &Projection<R>) -> Option<usize> {
        self.projections.iter().position(|q| q.same_outcome(p))
    }

    /// Replaces two member projections by their sum, leaving the rest.
    pub fn coarsen(&self, a: &Projection<R>, b: &Projection<R>) -> Result<Frame<R>, SpinError> {
        let ia = self.position(a).ok_or(SpinError::NotInFrame)?;
        let ib = self.position(b).ok_or(SpinError::NotInFrame)?;
        if ia == ib {
            return Err(SpinError::NotInFrame);
        }
        let merged = self.projections[ia].merge(&self.projections[ib])?;
        let (keep, drop) = (ia.min(ib), ia.max(ib));
        let mut projections = Vec::with_capacity(self.projections.len() - 1);
        for (k, p) in self.projections.iter().enumerate() {
            if k == keep {
                projections.push(merged);
            } else if k != drop {
                projections.push(*p);
            }
        }
        Frame::new(projections)
    }

    /// The frame transformed by a unitary: each projection becomes UPU†.
    pub fn conjugated(&self, unitary: &Mat3<R>) -> Result<Frame<R>, SpinError> {
        let projections = self
            .projections
            .iter()
            .map(|p| {
                Projection::from_matrix(
                    unitary.matmul(&p.matrix).matmul(&unitary.adjoint()),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Frame::new(projections)
    }
}

/// A trace-1 positive-semidefinite Hermitian operator on C³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOperator<R: Real> {
    matrix: Mat3<R>,
}

impl<R: Real> DensityOperator<R> {
    pub fn new(matrix: Mat3<R>) -> Result<Self, SpinError> {
        let tol = R::tol(STRUCTURE_TOL);
        if !matrix.is_finite() {
            return Err(SpinError::InvalidDensity {
                reason: "entries are not finite",
            });
        }
        if !matrix.is_hermitian(tol) {
            return Err(SpinError::InvalidDensity {
                reason: "not Hermitian",
            });
        }
        if (matrix.trace().re - R::one()).abs() > tol {
            return Err(SpinError::InvalidDensity {
                reason: "trace is not 1",
            });
        }
        if hermitian_eigenvalues(&matrix)[0] < -R::tol(-DENSITY_MIN_EIG) {
            return Err(SpinError::InvalidDensity {
                reason: "not positive semidefinite",
            });
        }
        Ok(DensityOperator { matrix })
    }

    pub fn maximally_mixed() -> Self {
        DensityOperator {
            matrix: Mat3::identity().scale(R::of(1.0 / 3.0)),
        }
    }

    /// Pure state |v⟩⟨v| for a nonzero vector.
    pub fn pure(v: &CVec3<R>) -> Result<Self, SpinError> {
        let p = Projection::onto(v)?;
        DensityOperator::new(*p.matrix())
    }

    pub fn matrix(&self) -> &Mat3<R> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> R {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    pub fn conjugated(&self, unitary: &Mat3<R>) -> Result<Self, SpinError> {
        DensityOperator::new(unitary.matmul(&self.matrix).matmul(&unitary.adjoint()))
    }
}

/// Weights a density operator assigns to a frame: wᵢ = Re Tr(ρPᵢ). Values
/// straying outside [0, 1] by at most [`STRUCTURE_TOL`] are clamped;
/// anything worse is returned as computed.
pub fn frame_weights<R: Real>(rho: &DensityOperator<R>, frame: &Frame<R>) -> Vec<R> {
    let tol = R::tol(STRUCTURE_TOL);
    frame
        .projections()
        .iter()
        .map(|p| {
            let w = re_trace_product(rho.matrix(), p.matrix());
            if w < R::zero() && w >= -tol {
                R::zero()
            } else if w > R::one() && w <= R::one() + tol {
                R::one()
            } else {
                w
            }
        })
        .collect()
}

/// A manual built from frames, with the table mapping each outcome id back
/// to its projection. Projections equal within [`PROJECTION_EQ_TOL`] across
/// frames receive the same id, realizing operation overlap.
#[derive(Debug, Clone)]
pub struct FrameManual<R: Real> {
    pub manual: Manual,
    pub projections: Vec<(OutcomeId, Projection<R>)>,
}

pub fn manual_from_frames<R: Real>(frames: &[Frame<R>]) -> Result<FrameManual<R>, SpinError> {
    if frames.is_empty() {
        return Err(SpinError::NoFrames);
    }
    let mut table: Vec<(OutcomeId, Projection<R>)> = Vec::new();
    let mut raw: Vec<Vec<OutcomeId>> = Vec::with_capacity(frames.len());
    for frame in frames {
        let mut op = Vec::with_capacity(frame.len());
        for p in frame.projections() {
            let id = match table.iter().find(|(_, q)| q.same_outcome(p)) {
                Some((id, _)) => id.clone(),
                None => {
                    let id = OutcomeId::new(format!("P{}", table.len()));
                    table.push((id.clone(), *p));
                    id
                }
            };
            op.push(id);
        }
        raw.push(op);
    }
    // Frames have rank sum 3, so no frame's outcome set can strictly
    // contain another's; only exact duplicates can occur, and validation
    // collapses those.
    let manual = Manual::validate(raw).expect("frame operations are irredundant");
    Ok(FrameManual {
        manual,
        projections: table,
    })
}

/// Result of a least-squares density fit. The matrix is Hermitian with
/// trace 1 by construction; positivity is checked, not enforced, so data
/// inconsistent with any state remains visible.
#[derive(Debug, Clone)]
pub struct DensityFit<R: Real> {
    matrix: Mat3<R>,
    pub residual: R,
    pub min_eigenvalue: R,
    pub positive: bool,
}

impl<R: Real> DensityFit<R> {
    pub fn matrix(&self) -> &Mat3<R> {
        &self.matrix
    }

    /// The fitted state, when the fit is positive semidefinite.
    pub fn density(&self) -> Option<DensityOperator<R>> {
        DensityOperator::new(self.matrix).ok()
    }
}

/// Least-squares fit of a Hermitian trace-1 matrix to observed frame
/// weights, over the 8 free real parameters (two independent diagonal
/// entries plus three complex off-diagonals).
pub fn fit_density<R: Real>(
    frames: &[Frame<R>],
    observed: &[Vec<R>],
) -> Result<DensityFit<R>, SpinError> {
    if frames.is_empty() {
        return Err(SpinError::NoFrames);
    }
    if observed.len() != frames.len() {
        return Err(SpinError::ObservationShapeMismatch {
            frame_index: observed.len().min(frames.len()),
        });
    }
    let mut rows: Vec<[R; 8]> = Vec::new();
    let mut rhs: Vec<R> = Vec::new();
    for (frame_index, (frame, ws)) in frames.iter().zip(observed).enumerate() {
        if ws.len() != frame.len() || ws.iter().any(|w| !w.is_finite()) {
            return Err(SpinError::ObservationShapeMismatch { frame_index });
        }
        for (p, &w) in frame.projections().iter().zip(ws) {
            let m = &p.matrix().0;
            let two = R::of(2.0);
            rows.push([
                m[0][0].re - m[2][2].re,
                m[1][1].re - m[2][2].re,
                two * m[0][1].re,
                two * m[0][1].im,
                two * m[0][2].re,
                two * m[0][2].im,
                two * m[1][2].re,
                two * m[1][2].im,
            ]);
            rhs.push(w - m[2][2].re);
        }
    }
    let theta = lstsq::solve_least_squares(&rows, &rhs, R::tol(1e-9))
        .map_err(|nullspace_dim| SpinError::Underdetermined { nullspace_dim })?;

    let c = |re: R, im: R| Complex::new(re, im);
    let matrix = Mat3([
        [
            c(theta[0], R::zero()),
            c(theta[2], theta[3]),
            c(theta[4], theta[5]),
        ],
        [
            c(theta[2], -theta[3]),
            c(theta[1], R::zero()),
            c(theta[6], theta[7]),
        ],
        [
            c(theta[4], -theta[5]),
            c(theta[6], -theta[7]),
            c(R::one() - theta[0] - theta[1], R::zero()),
        ],
    ]);

    let mut residual = R::zero();
    for (frame, ws) in frames.iter().zip(observed) {
        for (p, &w) in frame.projections().iter().zip(ws) {
            let r = re_trace_product(&matrix, p.matrix()) - w;
            residual += r * r;
        }
    }
    let min_eigenvalue = hermitian_eigenvalues(&matrix)[0];
    Ok(DensityFit {
        matrix,
        residual,
        min_eigenvalue,
        positive: min_eigenvalue >= -R::tol(-DENSITY_MIN_EIG),
    })
}

/// Name of the seedable generator used by the random constructors below,
/// for output metadata.
pub const GENERATOR_NAME: &str = "ChaCha8";

fn random_gaussian_vector<R: Real>(rng: &mut impl Rng) -> CVec3<R> {
    let mut sample = || -> Complex<R> {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(R::of(re), R::of(im))
    };
    CVec3([sample(), sample(), sample()])
}

/// A Haar-ish random unitary: complex Gaussian matrix, columns
/// orthonormalized by Gram-Schmidt. Resamples on near-degenerate draws.
pub fn random_unitary<R: Real>(rng: &mut impl Rng) -> Mat3<R> {
    loop {
        let cols = [
            random_gaussian_vector::<R>(rng),
            random_gaussian_vector::<R>(rng),
            random_gaussian_vector::<R>(rng),
        ];
        if let Some(basis) = orthonormalize(&cols) {
            let mut m = Mat3::zero();
            for (j, col) in basis.iter().enumerate() {
                for i in 0..3 {
                    m.0[i][j] = col.0[i];
                }
            }
            return m;
        }
    }
}

fn orthonormalize<R: Real>(cols: &[CVec3<R>; 3]) -> Option<[CVec3<R>; 3]> {
    let mut basis: Vec<CVec3<R>> = Vec::with_capacity(3);
    for col in cols {
        let mut v = *col;
        for b in &basis {
            v = v.sub(&b.scale(b.dot(&v)));
        }
        if v.norm() < R::of(1e-6) {
            return None;
        }
        basis.push(v.normalized()?);
    }
    Some([basis[0], basis[1], basis[2]])
}

/// Random frame of three rank-1 projections (the column lines of a random
/// unitary), plus its generating basis.
pub fn random_frame_with_basis<R: Real>(rng: &mut impl Rng) -> ([CVec3<R>; 3], Frame<R>) {
    let u = random_unitary(rng);
    let basis = [u.column(0), u.column(1), u.column(2)];
    let frame = Frame::from_basis(&basis).expect("unitary columns are orthonormal");
    (basis, frame)
}

pub fn random_frame<R: Real>(rng: &mut impl Rng) -> Frame<R> {
    random_frame_with_basis(rng).1
}

/// Random density operator GG†/Tr(GG†) for a complex Gaussian G.
pub fn random_density<R: Real>(rng: &mut impl Rng) -> DensityOperator<R> {
    loop {
        let mut g = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                g.0[i][j] = Complex::new(R::of(re), R::of(im));
            }
        }
        let gram = g.matmul(&g.adjoint());
        let trace = gram.trace().re;
        if trace < R::of(1e-6) {
            continue;
        }
        if let Ok(rho) = DensityOperator::new(gram.scale(trace.recip())) {
            return rho;
        }
    }
}
