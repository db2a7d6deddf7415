//! On-disk formats: feature traces (JSON lines), rater annotations and per-frame
//! labels (CSV), dataset manifests (JSON) and prediction files (CSV).
//!
//! All writers are deterministic: fixed field order and six fractional digits.
//!
//! Trace files hold one frame per line:
//!
//! ```text
//! {"clip_id":"c0001","fps":30.000000}
//! {"i":0,"valid":1,"lm":[[x,y],...68],"lmu":[...68],"au":[...15]}
//! ```
//!
//! The leading `clip_id`/`fps` header line is optional on input.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    validate_frame, AffectOutput, FrameFeatures, Landmarks68, UncertaintyTriple, VAPoint,
    N_LANDMARKS,
};

pub const DEFAULT_FPS: f64 = 30.0;
pub const ANNOTATION_HEADER: &str = "clip_id,rater_id,valence,arousal";
pub const PREDICTION_HEADER: &str =
    "frame,valence,arousal,u_epi_v,u_ale_v,u_cum_v,u_epi_a,u_ale_a,u_cum_a";
pub const FRAME_LABEL_HEADER: &str = "frame,valence,arousal";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrace {
    pub clip_id: String,
    pub fps: f64,
    pub frames: Vec<FrameFeatures>,
}

impl FeatureTrace {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceHeader {
    clip_id: String,
    fps: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    i: usize,
    valid: u8,
    lm: Vec<Vec<f64>>,
    lmu: Vec<f64>,
    au: Vec<f64>,
}

fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        reason: format!("invalid utf-8: {e}"),
    })
}

/// Parses and validates a trace. Clip id defaults to empty and fps to 30 when
/// the header line is absent.
pub fn parse_trace(bytes: &[u8]) -> Result<FeatureTrace> {
    let text = utf8(bytes)?;
    let mut trace = FeatureTrace {
        clip_id: String::new(),
        fps: DEFAULT_FPS,
        frames: Vec::new(),
    };
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if n == 0 && !line.contains("\"i\"") {
            let h: TraceHeader = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: line_no,
                reason: e.to_string(),
            })?;
            if !h.fps.is_finite() || h.fps <= 0.0 {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("fps must be finite and positive, got {}", h.fps),
                });
            }
            trace.clip_id = h.clip_id;
            trace.fps = h.fps;
            continue;
        }
        let raw: RawFrame = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        let expected = trace.frames.len();
        if raw.i != expected {
            return Err(Error::NonMonotoneFrameIndex {
                line: line_no,
                expected,
                got: raw.i,
            });
        }
        let valid = match raw.valid {
            0 => false,
            1 => true,
            v => {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("`valid` must be 0 or 1, got {v}"),
                })
            }
        };
        if raw.lm.len() != N_LANDMARKS {
            return Err(Error::WrongArity {
                field: "lm",
                expected: N_LANDMARKS,
                got: raw.lm.len(),
            });
        }
        let mut pts = Vec::with_capacity(N_LANDMARKS);
        for p in &raw.lm {
            if p.len() != 2 {
                return Err(Error::WrongArity {
                    field: "lm point",
                    expected: 2,
                    got: p.len(),
                });
            }
            pts.push([p[0], p[1]]);
        }
        let frame = validate_frame(FrameFeatures {
            frame_index: raw.i,
            valid,
            landmarks: Landmarks68::new(pts)?,
            landmark_uncertainties: raw.lmu,
            au_intensities: raw.au,
        })?;
        trace.frames.push(frame);
    }
    Ok(trace)
}

fn push_num(out: &mut String, v: f64) {
    // `{:.6}` never emits exponents, so the output stays valid JSON/CSV
    let _ = write!(out, "{v:.6}");
}

fn push_list(out: &mut String, vals: &[f64]) {
    out.push('[');
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_num(out, *v);
    }
    out.push(']');
}

pub fn write_trace(trace: &FeatureTrace) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("{\"clip_id\":");
    out.push_str(&serde_json::to_string(&trace.clip_id).expect("string serialization"));
    out.push_str(",\"fps\":");
    push_num(&mut out, trace.fps);
    out.push_str("}\n");
    for f in &trace.frames {
        let _ = write!(out, "{{\"i\":{},\"valid\":{},\"lm\":[", f.frame_index, u8::from(f.valid));
        for (k, p) in f.landmarks.points().iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            push_list(&mut out, p);
        }
        out.push_str("],\"lmu\":");
        push_list(&mut out, &f.landmark_uncertainties);
        out.push_str(",\"au\":");
        push_list(&mut out, &f.au_intensities);
        out.push_str("}\n");
    }
    out.into_bytes()
}

/// Reads a trace file; a missing header clip id falls back to the file stem.
pub fn read_trace(path: &Path) -> Result<FeatureTrace> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut t = parse_trace(&bytes)?;
    if t.clip_id.is_empty() {
        t.clip_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipAnnotation {
    pub clip_id: String,
    pub rater_id: String,
    pub va: VAPoint,
}

fn csv_reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &str) -> Result<()> {
    let got = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header `{expected}`, got `{got}`"),
        });
    }
    Ok(())
}

fn field_f64(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<f64> {
    let s = rec.get(idx).ok_or_else(|| Error::Parse {
        line,
        reason: format!("missing column {idx}"),
    })?;
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("`{s}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            reason: format!("`{s}` is not finite"),
        });
    }
    Ok(v)
}

fn record_line(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

fn csv_records(rdr: &mut csv::Reader<&[u8]>) -> Result<Vec<csv::StringRecord>> {
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                line: i + 2,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Parses `clip_id,rater_id,valence,arousal` rows. Duplicate `(clip, rater)` pairs are rejected.
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<ClipAnnotation>> {
    let mut rdr = csv_reader(bytes);
    check_header(&mut rdr, ANNOTATION_HEADER)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in csv_records(&mut rdr)?.into_iter().enumerate() {
        let line = record_line(&rec, i + 2);
        if rec.len() != 4 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 4 columns, got {}", rec.len()),
            });
        }
        let clip_id = rec[0].to_string();
        let rater_id = rec[1].to_string();
        let va = VAPoint::checked(field_f64(&rec, 2, line)?, field_f64(&rec, 3, line)?)?;
        if !seen.insert((clip_id.clone(), rater_id.clone())) {
            return Err(Error::DuplicateAnnotation { clip_id, rater_id });
        }
        out.push(ClipAnnotation {
            clip_id,
            rater_id,
            va,
        });
    }
    Ok(out)
}

pub fn write_annotations(anns: &[ClipAnnotation]) -> Vec<u8> {
    let mut out = String::from(ANNOTATION_HEADER);
    out.push('\n');
    for a in anns {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6}",
            a.clip_id, a.rater_id, a.va.valence, a.va.arousal
        );
    }
    out.into_bytes()
}

/// Ground-truth VA for every frame of one clip.
pub fn parse_frame_labels(bytes: &[u8]) -> Result<Vec<VAPoint>> {
    let mut rdr = csv_reader(bytes);
    check_header(&mut rdr, FRAME_LABEL_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in csv_records(&mut rdr)?.into_iter().enumerate() {
        let line = record_line(&rec, i + 2);
        let frame = field_f64(&rec, 0, line)?;
        if frame != out.len() as f64 {
            return Err(Error::NonMonotoneFrameIndex {
                line,
                expected: out.len(),
                got: frame as usize,
            });
        }
        out.push(VAPoint::checked(field_f64(&rec, 1, line)?, field_f64(&rec, 2, line)?)?);
    }
    Ok(out)
}

pub fn write_frame_labels(labels: &[VAPoint]) -> Vec<u8> {
    let mut out = String::from(FRAME_LABEL_HEADER);
    out.push('\n');
    for (i, p) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.6},{:.6}", p.valence, p.arousal);
    }
    out.into_bytes()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Discrete head-pose bin in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PoseBin {
    pub yaw_deg: i32,
    pub pitch_deg: i32,
}

impl PoseBin {
    pub const FRONTAL: PoseBin = PoseBin {
        yaw_deg: 0,
        pitch_deg: 0,
    };

    /// Frontal, yaw +-30/+-60 and pitch +-25.
    pub const STANDARD: [PoseBin; 7] = [
        PoseBin::FRONTAL,
        PoseBin { yaw_deg: 30, pitch_deg: 0 },
        PoseBin { yaw_deg: -30, pitch_deg: 0 },
        PoseBin { yaw_deg: 60, pitch_deg: 0 },
        PoseBin { yaw_deg: -60, pitch_deg: 0 },
        PoseBin { yaw_deg: 0, pitch_deg: 25 },
        PoseBin { yaw_deg: 0, pitch_deg: -25 },
    ];

    pub fn label(&self) -> String {
        match (self.yaw_deg, self.pitch_deg) {
            (0, 0) => "Frontal".to_string(),
            (y, 0) => format!("Yaw {y:+} deg"),
            (0, p) => format!("Pitch {p:+} deg"),
            (y, p) => format!("Yaw {y:+} deg / Pitch {p:+} deg"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub clip_id: String,
    pub trace_path: String,
    pub split: Split,
    pub subject_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose_bin: Option<PoseBin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<VAPoint>,
    /// Optional per-frame ground truth (`frame,valence,arousal`), relative to the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_labels_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub clips: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Checks unique clip ids and subject-independent splits.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        let mut subject_split: BTreeMap<&str, Split> = BTreeMap::new();
        for c in &self.clips {
            if !ids.insert(c.clip_id.as_str()) {
                return Err(Error::Manifest(format!("duplicate clip id `{}`", c.clip_id)));
            }
            match subject_split.get(c.subject_id.as_str()) {
                Some(s) if *s != c.split => {
                    return Err(Error::Manifest(format!(
                        "subject `{}` appears in both {:?} and {:?} splits",
                        c.subject_id, s, c.split
                    )))
                }
                _ => {
                    subject_split.insert(&c.subject_id, c.split);
                }
            }
        }
        Ok(())
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.clips.iter().filter(move |c| c.split == split)
    }

    pub fn subjects(&self, split: Split) -> BTreeSet<&str> {
        self.split(split).map(|c| c.subject_id.as_str()).collect()
    }
}

pub fn parse_manifest(bytes: &[u8]) -> Result<DatasetManifest> {
    let m: DatasetManifest = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    })?;
    m.validate()?;
    Ok(m)
}

pub fn write_manifest(m: &DatasetManifest) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(m).expect("manifest serialization");
    v.push(b'\n');
    v
}

/// A manifest together with the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: DatasetManifest,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANNOTATIONS_FILE: &str = "annotations.csv";

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            root: dir.to_path_buf(),
            manifest: parse_manifest(&bytes)?,
        })
    }

    pub fn trace(&self, entry: &ManifestEntry) -> Result<FeatureTrace> {
        let mut t = read_trace(&self.root.join(&entry.trace_path))?;
        t.clip_id = entry.clip_id.clone();
        Ok(t)
    }

    /// Per-frame targets: the per-frame label file when present, otherwise the
    /// clip label repeated `len` times.
    pub fn frame_targets(&self, entry: &ManifestEntry, len: usize) -> Result<Option<Vec<VAPoint>>> {
        if let Some(p) = &entry.frame_labels_path {
            let path = self.root.join(p);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let labels = parse_frame_labels(&bytes)?;
            if labels.len() != len {
                return Err(Error::Misalignment(format!(
                    "clip `{}`: {} frame labels for {} frames",
                    entry.clip_id,
                    labels.len(),
                    len
                )));
            }
            return Ok(Some(labels));
        }
        Ok(entry.label.map(|l| vec![l; len]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    pub frame_index: usize,
    pub output: AffectOutput,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionTrace {
    pub clip_id: String,
    pub records: Vec<PredictionRecord>,
}

pub fn write_predictions(trace: &PredictionTrace) -> Vec<u8> {
    let mut out = String::from(PREDICTION_HEADER);
    out.push('\n');
    for r in &trace.records {
        let o = &r.output;
        let (uv, ua) = (&o.uncertainty_valence, &o.uncertainty_arousal);
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.frame_index,
            o.va.valence,
            o.va.arousal,
            uv.epistemic,
            uv.aleatoric,
            uv.cumulative,
            ua.epistemic,
            ua.aleatoric,
            ua.cumulative
        );
    }
    out.into_bytes()
}

pub fn parse_predictions(bytes: &[u8], clip_id: &str) -> Result<PredictionTrace> {
    let mut rdr = csv_reader(bytes);
    check_header(&mut rdr, PREDICTION_HEADER)?;
    let mut records = Vec::new();
    for (i, rec) in csv_records(&mut rdr)?.into_iter().enumerate() {
        let line = record_line(&rec, i + 2);
        if rec.len() != 9 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 9 columns, got {}", rec.len()),
            });
        }
        let frame_index: usize = rec[0].parse().map_err(|_| Error::Parse {
            line,
            reason: format!("bad frame index `{}`", &rec[0]),
        })?;
        if frame_index != records.len() {
            return Err(Error::NonMonotoneFrameIndex {
                line,
                expected: records.len(),
                got: frame_index,
            });
        }
        let mut v = [0.0; 8];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = field_f64(&rec, k + 1, line)?;
        }
        let va = VAPoint::checked(v[0], v[1])?;
        for (k, u) in v[2..].iter().enumerate() {
            if !(0.0..=1.0).contains(u) {
                return Err(Error::Range {
                    field: ["u_epi_v", "u_ale_v", "u_cum_v", "u_epi_a", "u_ale_a", "u_cum_a"][k],
                    value: *u,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        records.push(PredictionRecord {
            frame_index,
            output: AffectOutput {
                va,
                uncertainty_valence: UncertaintyTriple {
                    epistemic: v[2],
                    aleatoric: v[3],
                    cumulative: v[4],
                },
                uncertainty_arousal: UncertaintyTriple {
                    epistemic: v[5],
                    aleatoric: v[6],
                    cumulative: v[7],
                },
            },
        });
    }
    Ok(PredictionTrace {
        clip_id: clip_id.to_string(),
        records,
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
