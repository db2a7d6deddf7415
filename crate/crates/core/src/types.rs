//! Domain types shared across the crate, frame validation, and VA-space geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_LANDMARKS: usize = 68;
pub const N_AUS: usize = 15;
pub const AU_MAX: f64 = 5.0;
/// Length of a normalized per-frame feature vector: 68 (x, y) pairs, 68 uncertainties, 15 AUs.
pub const FEATURE_DIM: usize = 2 * N_LANDMARKS + N_LANDMARKS + N_AUS;

/// FACS codes of the 15 action units, in vector order.
pub const AU_CODES: [u8; N_AUS] = [1, 2, 4, 5, 6, 7, 9, 10, 12, 14, 15, 17, 23, 25, 45];

/// 68 facial landmarks in iBUG order, pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Landmarks68(Vec<[f64; 2]>);

impl Landmarks68 {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() != N_LANDMARKS {
            return Err(Error::WrongArity {
                field: "lm",
                expected: N_LANDMARKS,
                got: points.len(),
            });
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::NonFiniteValue { field: "lm", index: i });
            }
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.0
    }

    pub fn points_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|p| [p[0] * s, p[1] * s]).collect())
    }
}

impl TryFrom<Vec<[f64; 2]>> for Landmarks68 {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Landmarks68> for Vec<[f64; 2]> {
    fn from(l: Landmarks68) -> Self {
        l.0
    }
}

/// One frame of low-level descriptors as produced by the upstream face models.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures {
    pub frame_index: usize,
    pub valid: bool,
    pub landmarks: Landmarks68,
    pub landmark_uncertainties: Vec<f64>,
    pub au_intensities: Vec<f64>,
}

/// Clips AU values into `[0, 5]` and uncertainties into `[0, 1]`.
///
/// Non-finite values and wrong vector lengths are rejected rather than repaired.
pub fn validate_frame(mut raw: FrameFeatures) -> Result<FrameFeatures> {
    if raw.landmark_uncertainties.len() != N_LANDMARKS {
        return Err(Error::WrongArity {
            field: "lmu",
            expected: N_LANDMARKS,
            got: raw.landmark_uncertainties.len(),
        });
    }
    if raw.au_intensities.len() != N_AUS {
        return Err(Error::WrongArity {
            field: "au",
            expected: N_AUS,
            got: raw.au_intensities.len(),
        });
    }
    for (i, p) in raw.landmarks.points().iter().enumerate() {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::NonFiniteValue { field: "lm", index: i });
        }
    }
    for (i, u) in raw.landmark_uncertainties.iter_mut().enumerate() {
        if !u.is_finite() {
            return Err(Error::NonFiniteValue { field: "lmu", index: i });
        }
        *u = u.clamp(0.0, 1.0);
    }
    for (i, a) in raw.au_intensities.iter_mut().enumerate() {
        if !a.is_finite() {
            return Err(Error::NonFiniteValue { field: "au", index: i });
        }
        *a = a.clamp(0.0, AU_MAX);
    }
    Ok(raw)
}

/// A point in valence/arousal space, always inside `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VAPoint {
    pub valence: f64,
    pub arousal: f64,
}

impl VAPoint {
    /// Builds a point, clamping both components into `[-1, 1]`. NaN maps to 0.
    pub fn clamped(valence: f64, arousal: f64) -> Self {
        Self {
            valence: clamp_signed(valence),
            arousal: clamp_signed(arousal),
        }
    }

    /// Builds a point, rejecting components outside `[-1, 1]`.
    pub fn checked(valence: f64, arousal: f64) -> Result<Self> {
        for (field, v) in [("valence", valence), ("arousal", arousal)] {
            if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                return Err(Error::Range {
                    field,
                    value: v,
                    lo: -1.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Self { valence, arousal })
    }

    pub fn get(&self, dim: Dim) -> f64 {
        match dim {
            Dim::Valence => self.valence,
            Dim::Arousal => self.arousal,
        }
    }
}

fn clamp_signed(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1.0, 1.0)
    }
}

fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// The two affect dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dim {
    Valence,
    Arousal,
}

impl Dim {
    pub const BOTH: [Dim; 2] = [Dim::Valence, Dim::Arousal];
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UncertaintyTriple {
    pub epistemic: f64,
    pub aleatoric: f64,
    pub cumulative: f64,
}

impl UncertaintyTriple {
    pub fn clamped(epistemic: f64, aleatoric: f64, cumulative: f64) -> Self {
        Self {
            epistemic: clamp_unit(epistemic),
            aleatoric: clamp_unit(aleatoric),
            cumulative: clamp_unit(cumulative),
        }
    }
}

/// Per-frame model output: a VA point plus one uncertainty triple per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AffectOutput {
    pub va: VAPoint,
    pub uncertainty_valence: UncertaintyTriple,
    pub uncertainty_arousal: UncertaintyTriple,
}

impl AffectOutput {
    pub fn uncertainty(&self, dim: Dim) -> &UncertaintyTriple {
        match dim {
            Dim::Valence => &self.uncertainty_valence,
            Dim::Arousal => &self.uncertainty_arousal,
        }
    }
}

/// Emotion quadrants: Q1 = +V+A, Q2 = -V+A, Q3 = -V-A, Q4 = +V-A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Zero counts as positive on both axes.
pub fn quadrant_of(p: VAPoint) -> Quadrant {
    match (p.valence >= 0.0, p.arousal >= 0.0) {
        (true, true) => Quadrant::Q1,
        (false, true) => Quadrant::Q2,
        (false, false) => Quadrant::Q3,
        (true, false) => Quadrant::Q4,
    }
}

/// Cell of a uniform `R x R` grid over `[-1, 1]²`. Rows index arousal, columns valence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridBin {
    pub row: usize,
    pub col: usize,
}

fn axis_bin(v: f64, resolution: usize) -> usize {
    let idx = ((v + 1.0) / 2.0 * resolution as f64).floor();
    if idx < 0.0 {
        0
    } else {
        (idx as usize).min(resolution - 1)
    }
}

/// Half-open bins, except the top edge `1.0` which lands in the last bin.
///
/// # Panics
/// If `resolution` is zero.
pub fn grid_bin_of(p: VAPoint, resolution: usize) -> GridBin {
    assert!(resolution >= 1, "grid resolution must be at least 1");
    GridBin {
        row: axis_bin(p.arousal, resolution),
        col: axis_bin(p.valence, resolution),
    }
}

/// Quadrant corresponding to a cell of the 2x2 grid.
pub fn quadrant_of_bin2(bin: GridBin) -> Quadrant {
    match (bin.col, bin.row) {
        (1, 1) => Quadrant::Q1,
        (0, 1) => Quadrant::Q2,
        (0, 0) => Quadrant::Q3,
        _ => Quadrant::Q4,
    }
}
