//! Synthetic low-level descriptor streams with known valence/arousal ground truth.
//!
//! Each clip follows a mean-reverting (Ornstein-Uhlenbeck) walk around a random
//! anchor in VA space. VA drives AU intensities through a fixed linear map on
//! `[v, a, v*a, 1]`, and AUs drive landmark displacements on a canonical face.
//! Occlusion episodes corrupt a face region (landmarks, their uncertainties and
//! the AUs read from that region); invalid frames model face-validity failures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{ClipAnnotation, FeatureTrace, ManifestEntry, PoseBin, Split};
use crate::types::{FrameFeatures, Landmarks68, VAPoint, AU_MAX, N_AUS, N_LANDMARKS};

/// Baseline landmark uncertainty on unoccluded points.
pub const BASE_UNCERTAINTY: f64 = 0.05;
/// Landmark-uncertainty rise at the worst capture quality.
pub const QUALITY_UNCERTAINTY_SPAN: f64 = 0.4;
/// Landmark jitter in pixels per unit of `noise_std`.
pub const JITTER_PX_PER_NOISE: f64 = 10.0;
/// Anchors are drawn uniformly from `[-ANCHOR_RANGE, ANCHOR_RANGE]²`.
pub const ANCHOR_RANGE: f64 = 0.9;

const MAP_STREAM: u64 = 1;
const RATER_STREAM: u64 = 2;
const OCCLUSION_LEN: (usize, usize) = (8, 30);
const OCCLUSION_JITTER_PX: f64 = 6.0;
const OCCLUSION_AU_NOISE: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub clip_len_frames: usize,
    pub fps: f64,
    /// Mean-reversion rate per second.
    pub ou_theta: f64,
    /// Volatility per sqrt(second).
    pub ou_sigma: f64,
    /// AU noise std (AU units); landmark jitter is `noise_std * JITTER_PX_PER_NOISE` px.
    pub noise_std: f64,
    /// Per-clip capture quality `q ~ U(0, 1)` scales noise by `(1 + quality_spread)^q`
    /// and lifts landmark uncertainty by `QUALITY_UNCERTAINTY_SPAN * q`; 0 disables.
    pub quality_spread: f64,
    /// Expected fraction of frames inside an occlusion episode.
    pub occlusion_rate: f64,
    /// Per-frame probability of a failed face-validity check.
    pub invalid_rate: f64,
    /// Assign each clip one of the standard head-pose bins.
    pub pose_variation: bool,
    /// Random per-clip scale and translation of the face in the image.
    pub head_motion: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            clip_len_frames: 120,
            fps: 30.0,
            ou_theta: 1.5,
            ou_sigma: 0.4,
            noise_std: 0.1,
            quality_spread: 14.0,
            occlusion_rate: 0.12,
            invalid_rate: 0.08,
            pose_variation: true,
            head_motion: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.clip_len_frames < 1 {
            return bad("clip_len_frames must be >= 1");
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return bad("fps must be positive");
        }
        if !(self.ou_theta >= 0.0
            && self.ou_sigma >= 0.0
            && self.noise_std >= 0.0
            && self.quality_spread >= 0.0)
        {
            return bad("ou_theta, ou_sigma, noise_std and quality_spread must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.occlusion_rate) || !(0.0..=1.0).contains(&self.invalid_rate)
        {
            return bad("rates must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Mean-reverting walk around a uniformly drawn anchor, clipped to `[-1, 1]`.
pub fn sample_va_trajectory<R: Rng>(cfg: &SimConfig, rng: &mut R) -> Vec<VAPoint> {
    let anchor = [
        rng.random_range(-ANCHOR_RANGE..=ANCHOR_RANGE),
        rng.random_range(-ANCHOR_RANGE..=ANCHOR_RANGE),
    ];
    let dt = 1.0 / cfg.fps;
    let step = cfg.ou_sigma * dt.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = anchor;
    let mut out = Vec::with_capacity(cfg.clip_len_frames);
    for _ in 0..cfg.clip_len_frames {
        out.push(VAPoint::clamped(x[0], x[1]));
        for d in 0..2 {
            let xi: f64 = normal.sample(rng);
            x[d] = (x[d] + cfg.ou_theta * (anchor[d] - x[d]) * dt + step * xi).clamp(-1.0, 1.0);
        }
    }
    out
}

/// Face regions that occlusion episodes act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Upper,
    Middle,
    Lower,
}

impl Region {
    const ALL: [Region; 3] = [Region::Upper, Region::Middle, Region::Lower];

    fn landmarks(self) -> Vec<usize> {
        match self {
            Region::Upper => (17..27).chain(36..48).collect(),
            Region::Middle => (27..36).chain(1..4).chain(13..16).collect(),
            Region::Lower => (48..68).chain(4..13).collect(),
        }
    }

    /// Indices into the AU vector read from this region.
    fn aus(self) -> &'static [usize] {
        match self {
            Region::Upper => &[0, 1, 2, 3, 4, 5, 14],
            Region::Middle => &[6, 7],
            Region::Lower => &[8, 9, 10, 11, 12, 13],
        }
    }
}

/// Canonical face and the fixed VA -> AU -> landmark maps.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeMap {
    pub base_shape: Landmarks68,
    /// Rows map `[v, a, v*a, 1]` to a pre-clip AU intensity.
    pub au_gains: [[f64; 4]; N_AUS],
    /// Landmark displacement (px) at full intensity (AU = 5), per AU.
    pub au_displacements: Vec<Vec<[f64; 2]>>,
}

/// Face centre of the canonical shape in pixels.
pub const FACE_CENTER: [f64; 2] = [320.0, 260.0];

// Signs/magnitudes of the dependence of each AU on (v, a, v*a).
const AU_PATTERN: [[f64; 3]; N_AUS] = [
    [-0.3, 0.9, 0.2],  // AU1 inner brow raiser
    [0.1, 0.9, 0.0],   // AU2 outer brow raiser
    [-0.9, 0.3, -0.2], // AU4 brow lowerer
    [0.0, 1.0, 0.2],   // AU5 upper lid raiser
    [0.9, 0.2, 0.2],   // AU6 cheek raiser
    [-0.5, -0.3, 0.3], // AU7 lid tightener
    [-0.8, 0.2, -0.1], // AU9 nose wrinkler
    [-0.7, 0.3, 0.0],  // AU10 upper lip raiser
    [1.0, 0.3, 0.3],   // AU12 lip corner puller
    [0.4, -0.5, 0.0],  // AU14 dimpler
    [-0.8, -0.5, 0.2], // AU15 lip corner depressor
    [-0.6, -0.4, 0.0], // AU17 chin raiser
    [-0.5, 0.6, -0.3], // AU23 lip tightener
    [0.3, 0.9, 0.3],   // AU25 lips part
    [0.0, -0.9, 0.1],  // AU45 blink
];

fn canonical_face() -> Vec<[f64; 2]> {
    let [cx, cy] = FACE_CENTER;
    let mut p = Vec::with_capacity(N_LANDMARKS);
    // jaw 0..=16, left ear -> chin -> right ear
    for k in 0..17 {
        let th = std::f64::consts::PI * (1.0 - k as f64 / 16.0);
        p.push([cx + 78.0 * th.cos(), cy - 10.0 + 95.0 * th.sin()]);
    }
    // brows 17..=26
    for k in 0..5 {
        let t = k as f64 / 4.0;
        p.push([cx - 68.0 + 52.0 * t, cy - 62.0 - 8.0 * (std::f64::consts::PI * t).sin()]);
    }
    for k in 0..5 {
        let t = k as f64 / 4.0;
        p.push([cx + 16.0 + 52.0 * t, cy - 62.0 - 8.0 * (std::f64::consts::PI * t).sin()]);
    }
    // nose bridge 27..=30, nostrils 31..=35
    for k in 0..4 {
        p.push([cx, cy - 48.0 + 14.0 * k as f64]);
    }
    for k in 0..5 {
        let dx = -16.0 + 8.0 * k as f64;
        p.push([cx + dx, cy + 8.0 - 4.0 * (1.0 - (dx / 16.0).abs())]);
    }
    // eyes 36..=47: outer, top x2, inner, bottom x2 (mirrored for the second eye)
    let eye = |ex: f64, mirror: bool| -> Vec<[f64; 2]> {
        let s = if mirror { -1.0 } else { 1.0 };
        let ey = cy - 38.0;
        let pts = [
            [-16.0, 0.0],
            [-6.0, -7.0],
            [6.0, -7.0],
            [16.0, 0.0],
            [6.0, 6.0],
            [-6.0, 6.0],
        ];
        pts.iter().map(|d| [ex + s * d[0], ey + d[1]]).collect()
    };
    p.extend(eye(cx - 38.0, false));
    let right = eye(cx + 38.0, true);
    // the second eye starts at its inner corner
    p.extend([3, 2, 1, 0, 5, 4].iter().map(|&i| right[i]));
    // outer mouth 48..=59
    let my = cy + 42.0;
    let outer = [
        [-30.0, 0.0],
        [-18.0, -9.0],
        [-7.0, -12.0],
        [0.0, -11.0],
        [7.0, -12.0],
        [18.0, -9.0],
        [30.0, 0.0],
        [19.0, 11.0],
        [8.0, 15.0],
        [0.0, 16.0],
        [-8.0, 15.0],
        [-19.0, 11.0],
    ];
    p.extend(outer.iter().map(|d| [cx + d[0], my + d[1]]));
    // inner mouth 60..=67
    let inner = [
        [-24.0, 0.0],
        [-9.0, -4.0],
        [0.0, -4.0],
        [9.0, -4.0],
        [24.0, 0.0],
        [9.0, 4.0],
        [0.0, 4.0],
        [-9.0, 4.0],
    ];
    p.extend(inner.iter().map(|d| [cx + d[0], my + d[1]]));
    debug_assert_eq!(p.len(), N_LANDMARKS);
    p
}

fn displacement_pattern(au: usize, base: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut d = vec![[0.0, 0.0]; N_LANDMARKS];
    let cx = FACE_CENTER[0];
    let mut set = |idx: &[usize], dx: f64, dy: f64, outward: bool| {
        for &i in idx {
            let sx = if outward && base[i][0] < cx { -dx } else { dx };
            d[i][0] += sx;
            d[i][1] += dy;
        }
    };
    match au {
        0 => set(&[19, 20, 21, 22, 23, 24], 0.0, -9.0, false),
        1 => set(&[17, 18, 19, 24, 25, 26], 0.0, -9.0, false),
        2 => set(&(17..27).collect::<Vec<_>>(), -4.0, 6.0, true),
        3 => set(&[37, 38, 43, 44], 0.0, -4.0, false),
        4 => {
            set(&[40, 41, 46, 47], 0.0, -3.0, false);
            set(&[1, 2, 14, 15], 0.0, -3.0, false);
        }
        5 => {
            set(&[37, 38, 43, 44], 0.0, 2.5, false);
            set(&[40, 41, 46, 47], 0.0, -2.5, false);
        }
        6 => set(&[29, 30, 31, 32, 33, 34, 35], 0.0, -5.0, false),
        7 => set(&[49, 50, 51, 52, 53, 61, 62, 63], 0.0, -6.0, false),
        8 => set(&[48, 54, 60, 64], 9.0, -7.0, true),
        9 => set(&[48, 54, 60, 64], 4.0, 1.0, true),
        10 => set(&[48, 54, 60, 64], 0.0, 8.0, false),
        11 => {
            set(&[55, 56, 57, 58, 59, 65, 66, 67], 0.0, -5.0, false);
            set(&[7, 8, 9], 0.0, -5.0, false);
        }
        12 => {
            let mouth: Vec<usize> = (48..68).collect();
            for &i in &mouth {
                let my = FACE_CENTER[1] + 42.0;
                d[i][0] += -(base[i][0] - cx) * 0.15;
                d[i][1] += -(base[i][1] - my) * 0.3;
            }
        }
        13 => {
            set(&[56, 57, 58, 65, 66, 67], 0.0, 9.0, false);
            set(&[61, 62, 63], 0.0, -2.0, false);
            set(&[6, 7, 8, 9, 10], 0.0, 5.0, false);
        }
        14 => {
            set(&[37, 38, 43, 44], 0.0, 9.0, false);
            set(&[40, 41, 46, 47], 0.0, -1.5, false);
        }
        _ => unreachable!("only 15 AUs"),
    }
    d
}

impl GenerativeMap {
    /// Deterministic map for `seed`: pattern magnitudes are jittered by +-20% and
    /// the constant column keeps every AU inside `[0, 5]` for any `(v, a)` in `[-1, 1]²`.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(MAP_STREAM);
        let mut au_gains = [[0.0; 4]; N_AUS];
        for (row, pat) in au_gains.iter_mut().zip(AU_PATTERN) {
            let scale = rng.random_range(1.3..1.9);
            let mut total = 0.0;
            for j in 0..3 {
                let g = pat[j] * scale * rng.random_range(0.8..1.2);
                row[j] = g;
                total += g.abs();
            }
            // keep the active range inside [0.1, 4.9]
            let span = total.min(2.4);
            if total > span {
                for g in &mut row[..3] {
                    *g *= span / total;
                }
            }
            row[3] = span + 0.1;
        }
        let base: Vec<[f64; 2]> = canonical_face()
            .into_iter()
            .map(|p| [p[0] + rng.random_range(-1.0..1.0), p[1] + rng.random_range(-1.0..1.0)])
            .collect();
        let au_displacements = (0..N_AUS).map(|k| displacement_pattern(k, &base)).collect();
        Self {
            base_shape: Landmarks68::new(base).expect("canonical face has 68 finite points"),
            au_gains,
            au_displacements,
        }
    }

    /// Noise-free, pre-clip AU intensities for a VA point.
    pub fn au_mean(&self, p: VAPoint) -> [f64; N_AUS] {
        let z = [p.valence, p.arousal, p.valence * p.arousal, 1.0];
        let mut out = [0.0; N_AUS];
        for (o, g) in out.iter_mut().zip(&self.au_gains) {
            *o = g.iter().zip(&z).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Rounds to six fractional digits, matching the on-disk formats exactly.
pub fn quantize(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Per-clip nuisance parameters: head pose and placement in the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipPose {
    pub pose: Option<PoseBin>,
    pub scale: f64,
    pub offset: [f64; 2],
}

impl ClipPose {
    pub const IDENTITY: ClipPose = ClipPose {
        pose: None,
        scale: 1.0,
        offset: [0.0, 0.0],
    };

    pub fn sample<R: Rng>(cfg: &SimConfig, rng: &mut R) -> Self {
        let pose = cfg
            .pose_variation
            .then(|| PoseBin::STANDARD[rng.random_range(0..PoseBin::STANDARD.len())]);
        let (scale, offset) = if cfg.head_motion {
            (
                rng.random_range(0.8..1.25),
                [rng.random_range(-60.0..60.0), rng.random_range(-40.0..40.0)],
            )
        } else {
            (1.0, [0.0, 0.0])
        };
        Self { pose, scale, offset }
    }

    fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let [cx, cy] = FACE_CENTER;
        let (mut x, mut y) = (p[0] - cx, p[1] - cy);
        if let Some(pb) = self.pose {
            let yaw = (pb.yaw_deg as f64).to_radians();
            let pitch = (pb.pitch_deg as f64).to_radians();
            // orthographic head rotation of a shallow face: compress and shift
            x = x * yaw.cos() + 20.0 * yaw.sin();
            y = y * pitch.cos() + 15.0 * pitch.sin();
        }
        [
            cx + self.offset[0] + self.scale * x,
            cy + self.offset[1] + self.scale * y,
        ]
    }
}

/// Renders a VA trajectory into a feature trace.
pub fn synthesize_features<R: Rng>(
    clip_id: &str,
    traj: &[VAPoint],
    map: &GenerativeMap,
    cfg: &SimConfig,
    pose: &ClipPose,
    rng: &mut R,
) -> FeatureTrace {
    let quality = if cfg.quality_spread > 0.0 { rng.random::<f64>() } else { 0.0 };
    let noise = cfg.noise_std * (1.0 + cfg.quality_spread).powf(quality);
    let base_lmu = BASE_UNCERTAINTY + QUALITY_UNCERTAINTY_SPAN * quality;
    let au_noise = Normal::new(0.0, noise).expect("finite std");
    let lm_noise = Normal::new(0.0, noise * JITTER_PX_PER_NOISE).expect("finite std");
    let occ_lm = Normal::new(0.0, OCCLUSION_JITTER_PX).expect("finite std");
    let occ_au = Normal::new(0.0, OCCLUSION_AU_NOISE).expect("finite std");

    let mean_len = (OCCLUSION_LEN.0 + OCCLUSION_LEN.1) as f64 / 2.0;
    let start_prob = if cfg.occlusion_rate >= 1.0 {
        1.0
    } else {
        (cfg.occlusion_rate / (mean_len * (1.0 - cfg.occlusion_rate))).min(1.0)
    };
    let mut occlusion: Option<(Region, usize)> = None;

    let mut frames = Vec::with_capacity(traj.len());
    for (t, p) in traj.iter().enumerate() {
        if occlusion.is_none() && start_prob > 0.0 && rng.random_bool(start_prob) {
            let region = Region::ALL[rng.random_range(0..Region::ALL.len())];
            let len = rng.random_range(OCCLUSION_LEN.0..=OCCLUSION_LEN.1);
            occlusion = Some((region, len));
        }
        let valid = !(cfg.invalid_rate > 0.0 && rng.random_bool(cfg.invalid_rate));

        let mut au = map.au_mean(*p);
        for a in au.iter_mut() {
            if cfg.noise_std > 0.0 {
                *a += au_noise.sample(rng);
            }
        }
        let mut lmu = vec![base_lmu; N_LANDMARKS];
        let mut occluded_points: &[usize] = &[];
        let occluded_landmarks;
        if let Some((region, _)) = occlusion {
            for &k in region.aus() {
                au[k] += occ_au.sample(rng);
            }
            occluded_landmarks = region.landmarks();
            for &i in &occluded_landmarks {
                lmu[i] = rng.random_range(0.6..1.0);
            }
            occluded_points = &occluded_landmarks;
        }
        for a in au.iter_mut() {
            *a = quantize(a.clamp(0.0, AU_MAX));
        }

        let mut pts: Vec<[f64; 2]> = map.base_shape.points().to_vec();
        for (k, disp) in map.au_displacements.iter().enumerate() {
            let w = au[k] / AU_MAX;
            if w != 0.0 {
                for (q, d) in pts.iter_mut().zip(disp) {
                    q[0] += w * d[0];
                    q[1] += w * d[1];
                }
            }
        }
        if cfg.noise_std > 0.0 {
            for q in pts.iter_mut() {
                q[0] += lm_noise.sample(rng);
                q[1] += lm_noise.sample(rng);
            }
        }
        for &i in occluded_points {
            pts[i][0] += occ_lm.sample(rng);
            pts[i][1] += occ_lm.sample(rng);
        }
        let pts: Vec<[f64; 2]> = pts
            .into_iter()
            .map(|q| {
                let r = pose.apply(q);
                [quantize(r[0]), quantize(r[1])]
            })
            .collect();

        frames.push(FrameFeatures {
            frame_index: t,
            valid,
            landmarks: Landmarks68::new(pts).expect("finite synthetic landmarks"),
            landmark_uncertainties: lmu.into_iter().map(quantize).collect(),
            au_intensities: au.to_vec(),
        });

        if let Some((region, left)) = occlusion {
            occlusion = (left > 1).then_some((region, left - 1));
        }
    }
    FeatureTrace {
        clip_id: clip_id.to_string(),
        fps: cfg.fps,
        frames,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpanKind {
    Invalid,
    Occlude(Vec<usize>),
}

/// A half-open frame range `[start, end)` to corrupt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptionSpan {
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
}

/// Marks spans invalid, or raises listed landmark uncertainties to at least 0.9.
pub fn corrupt(trace: &FeatureTrace, spans: &[CorruptionSpan]) -> Result<FeatureTrace> {
    let mut out = trace.clone();
    let len = out.frames.len();
    for s in spans {
        if s.start > s.end || s.end > len {
            return Err(Error::SpanOutOfRange {
                start: s.start,
                end: s.end,
                len,
            });
        }
        if let SpanKind::Occlude(idx) = &s.kind {
            if let Some(&bad) = idx.iter().find(|&&i| i >= N_LANDMARKS) {
                return Err(Error::WrongArity {
                    field: "occluded landmark index",
                    expected: N_LANDMARKS,
                    got: bad,
                });
            }
        }
        for f in &mut out.frames[s.start..s.end] {
            match &s.kind {
                SpanKind::Invalid => f.valid = false,
                SpanKind::Occlude(idx) => {
                    for &i in idx {
                        f.landmark_uncertainties[i] = f.landmark_uncertainties[i].max(0.9);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A fully generated clip: features, per-frame truth and nuisance metadata.
#[derive(Debug, Clone)]
pub struct SimClip {
    pub entry: ManifestEntry,
    pub trace: FeatureTrace,
    pub truth: Vec<VAPoint>,
}

impl SimClip {
    /// Single-point clip label: the trajectory mean.
    pub fn label(&self) -> VAPoint {
        clip_mean(&self.truth)
    }
}

pub fn clip_mean(traj: &[VAPoint]) -> VAPoint {
    let n = traj.len().max(1) as f64;
    VAPoint::clamped(
        quantize(traj.iter().map(|p| p.valence).sum::<f64>() / n),
        quantize(traj.iter().map(|p| p.arousal).sum::<f64>() / n),
    )
}

/// How many clips go to each split, and how many clips each subject contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetPlan {
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub clips_per_subject: usize,
}

impl Default for DatasetPlan {
    fn default() -> Self {
        Self::from_total(100)
    }
}

impl DatasetPlan {
    /// 70/10/20 split of `n` clips.
    pub fn from_total(n: usize) -> Self {
        let test = n / 5;
        let val = n / 10;
        Self {
            train: n - test - val,
            val,
            test,
            clips_per_subject: 4,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }

    /// Split of clip `i`. Subjects never straddle splits because every split
    /// starts on a fresh subject.
    fn assign(&self, i: usize) -> (Split, usize) {
        let cps = self.clips_per_subject.max(1);
        let subjects = |n: usize| n.div_ceil(cps);
        if i < self.train {
            (Split::Train, i / cps)
        } else if i < self.train + self.val {
            (Split::Val, subjects(self.train) + (i - self.train) / cps)
        } else {
            let j = i - self.train - self.val;
            (Split::Test, subjects(self.train) + subjects(self.val) + j / cps)
        }
    }
}

pub fn clip_id(i: usize) -> String {
    format!("clip{i:05}")
}

/// Generates clip `index` of a dataset. Pure in `(cfg, map, plan, index)`.
pub fn simulate_clip(cfg: &SimConfig, map: &GenerativeMap, plan: &DatasetPlan, index: usize) -> SimClip {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
    let id = clip_id(index);
    let pose = ClipPose::sample(cfg, &mut rng);
    let truth: Vec<VAPoint> = sample_va_trajectory(cfg, &mut rng)
        .into_iter()
        .map(|p| VAPoint::clamped(quantize(p.valence), quantize(p.arousal)))
        .collect();
    let trace = synthesize_features(&id, &truth, map, cfg, &pose, &mut rng);
    let (split, subject) = plan.assign(index);
    let entry = ManifestEntry {
        clip_id: id.clone(),
        trace_path: format!("traces/{id}.jsonl"),
        split,
        subject_id: format!("subj{subject:04}"),
        pose_bin: pose.pose,
        label: Some(clip_mean(&truth)),
        frame_labels_path: Some(format!("labels/{id}.csv")),
    };
    SimClip {
        entry,
        trace,
        truth,
    }
}

/// Generates every clip of `plan`, in parallel, ordered by clip index.
pub fn simulate_dataset(cfg: &SimConfig, plan: &DatasetPlan) -> Result<Vec<SimClip>> {
    use rayon::prelude::*;
    cfg.validate()?;
    let map = GenerativeMap::new(cfg.seed);
    Ok((0..plan.total())
        .into_par_iter()
        .map(|i| simulate_clip(cfg, &map, plan, i))
        .collect())
}

/// Simulated single-point rater annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    pub raters_per_clip: usize,
    pub rater_pool: usize,
    pub noise_valence: f64,
    pub noise_arousal: f64,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        // E|a_i - a_j| = 2 sigma / sqrt(pi) for Gaussian rater noise, so these
        // reproduce pairwise disagreement near 0.17 / 0.19
        Self {
            raters_per_clip: 3,
            rater_pool: 9,
            noise_valence: 0.17 * std::f64::consts::PI.sqrt() / 2.0,
            noise_arousal: 0.19 * std::f64::consts::PI.sqrt() / 2.0,
        }
    }
}

/// Each clip is labelled by `raters_per_clip` distinct raters drawn from the pool,
/// each reporting the clip label plus Gaussian noise (clipped to `[-1, 1]`).
pub fn simulate_annotations(
    seed: u64,
    labels: &[(String, VAPoint)],
    cfg: &AnnotationConfig,
) -> Result<Vec<ClipAnnotation>> {
    if cfg.raters_per_clip < 2 || cfg.rater_pool < cfg.raters_per_clip {
        return Err(Error::Config(
            "need 2 <= raters_per_clip <= rater_pool".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RATER_STREAM);
    let nv = Normal::new(0.0, cfg.noise_valence).map_err(|e| Error::Config(e.to_string()))?;
    let na = Normal::new(0.0, cfg.noise_arousal).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(labels.len() * cfg.raters_per_clip);
    for (clip, label) in labels {
        let raters = rand::seq::index::sample(&mut rng, cfg.rater_pool, cfg.raters_per_clip);
        let mut raters: Vec<usize> = raters.into_iter().collect();
        raters.sort_unstable();
        for r in raters {
            out.push(ClipAnnotation {
                clip_id: clip.clone(),
                rater_id: format!("rater{r:02}"),
                va: VAPoint::clamped(
                    quantize(label.valence + nv.sample(&mut rng)),
                    quantize(label.arousal + na.sample(&mut rng)),
                ),
            });
        }
    }
    Ok(out)
}
