//! JSON wire forms for spin-one data: complex numbers as `[re, im]` pairs,
//! frames as three basis vectors, matrices as 3×3 arrays of pairs.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex;
use serde::Deserialize;

use opstat_core::spin::{CVec3, Frame, Mat3, SpinError};

pub type CWire = [f64; 2];
pub type VecWire = [CWire; 3];
pub type FrameWire = [VecWire; 3];
pub type MatWire = [[CWire; 3]; 3];

pub fn cvec_to_wire(v: &CVec3<f64>) -> VecWire {
    [
        [v.0[0].re, v.0[0].im],
        [v.0[1].re, v.0[1].im],
        [v.0[2].re, v.0[2].im],
    ]
}

pub fn cvec_from_wire(w: &VecWire) -> CVec3<f64> {
    CVec3([
        Complex::new(w[0][0], w[0][1]),
        Complex::new(w[1][0], w[1][1]),
        Complex::new(w[2][0], w[2][1]),
    ])
}

pub fn frame_from_wire(w: &FrameWire) -> Result<Frame<f64>, SpinError> {
    Frame::from_basis(&[
        cvec_from_wire(&w[0]),
        cvec_from_wire(&w[1]),
        cvec_from_wire(&w[2]),
    ])
}

pub fn mat_to_wire(m: &Mat3<f64>) -> MatWire {
    let mut out = [[[0.0; 2]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = [m.0[i][j].re, m.0[i][j].im];
        }
    }
    out
}

pub fn mat_from_wire(w: &MatWire) -> Mat3<f64> {
    let mut m = Mat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = Complex::new(w[i][j][0], w[i][j][1]);
        }
    }
    m
}

/// Accepts either a bare value or the same value under a named key, so
/// generating subcommands' envelopes feed consuming ones directly.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum MaybeEnveloped<T> {
    Bare(T),
    Frames { frames: T },
    Weights { weights: T },
    Density { density: T },
}

impl<T> MaybeEnveloped<T> {
    pub fn into_inner(self) -> T {
        match self {
            MaybeEnveloped::Bare(t)
            | MaybeEnveloped::Frames { frames: t }
            | MaybeEnveloped::Weights { weights: t }
            | MaybeEnveloped::Density { density: t } => t,
        }
    }
}
