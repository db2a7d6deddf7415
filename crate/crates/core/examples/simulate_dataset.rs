//! Writes a synthetic dataset to disk and inspects one clip.
//!
//! cargo run --release --example simulate_dataset -- [out_dir] [clips]

use std::path::PathBuf;

use affect_trace::config::{Overrides, RunConfig};
use affect_trace::io::{Dataset, Split};
use affect_trace::run::cmd_simulate;

fn main() -> affect_trace::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("affect-trace-sim"));
    let clips = args.next().and_then(|a| a.parse().ok()).unwrap_or(40);

    let cfg = RunConfig::resolve(None, &Overrides { clips: Some(clips), ..Default::default() })?;
    let summary = cmd_simulate(&cfg, &out)?;
    println!("{summary}");
    println!("written to {}", out.display());

    let ds = Dataset::open(&out)?;
    for split in [Split::Train, Split::Val, Split::Test] {
        println!(
            "{split:?}: {} clips from {} subjects",
            ds.manifest.split(split).count(),
            ds.manifest.subjects(split).len()
        );
    }
    let entry = &ds.manifest.clips[0];
    let trace = ds.trace(entry)?;
    let invalid = trace.frames.iter().filter(|f| !f.valid).count();
    let f = &trace.frames[0];
    println!(
        "{}: {} frames at {} fps, {invalid} invalid, pose {:?}, label {:?}",
        entry.clip_id,
        trace.len(),
        trace.fps,
        entry.pose_bin.map(|b| b.label()),
        entry.label
    );
    println!(
        "frame 0: nose tip at ({:.1}, {:.1}), AU12 {:.2}, mean landmark uncertainty {:.3}",
        f.landmarks.points()[30][0],
        f.landmarks.points()[30][1],
        f.au_intensities[8],
        f.landmark_uncertainties.iter().sum::<f64>() / f.landmark_uncertainties.len() as f64
    );
    Ok(())
}
