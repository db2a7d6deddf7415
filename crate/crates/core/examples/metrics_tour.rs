//! The scalar metrics on small hand-made inputs.

use affect_trace::metrics::{ccc, ced_auc, ced_curve, icc31, mae, nme, spearman, RatingsMatrix, DEFAULT_CED_THRESHOLD};
use affect_trace::types::Landmarks68;

fn main() -> affect_trace::Result<()> {
    let truth = [-0.6, -0.2, 0.1, 0.4, 0.8];
    let close = [-0.5, -0.25, 0.15, 0.35, 0.7];
    let shifted: Vec<f64> = truth.iter().map(|v| v + 0.3).collect();
    println!("CCC close {:.3}, shifted by 0.3 {:.3}", ccc(&close, &truth)?, ccc(&shifted, &truth)?);
    println!("MAE close {:.3}, shifted {:.3}", mae(&close, &truth)?, mae(&shifted, &truth)?);
    // Pearson would call the shifted series perfect; CCC penalises the offset.
    println!("Spearman shifted {:.3}", spearman(&shifted, &truth)?);

    // three raters; rater 2 is offset but consistent, which ICC(3,1) forgives
    let rows = vec![
        vec![0.1, 0.15, 0.4],
        vec![0.5, 0.45, 0.8],
        vec![-0.3, -0.2, 0.0],
        vec![0.9, 0.8, 1.2],
    ];
    println!("ICC(3,1) {:.3}", icc31(&RatingsMatrix::new(&rows)?)?);

    let gt: Vec<[f64; 2]> = (0..68).map(|i| [100.0 + 3.0 * i as f64, 200.0 + (i % 7) as f64]).collect();
    let nmes: Vec<f64> = [0.5, 1.5, 3.0, 6.0]
        .iter()
        .map(|&px| {
            let pred: Vec<[f64; 2]> = gt.iter().map(|p| [p[0] + px, p[1]]).collect();
            nme(&Landmarks68::new(pred).unwrap(), &Landmarks68::new(gt.clone()).unwrap())
        })
        .collect::<affect_trace::Result<_>>()?;
    println!("NME per image {nmes:.4?}");
    println!("CED AUC@{DEFAULT_CED_THRESHOLD}: {:.2}%", ced_auc(&nmes, DEFAULT_CED_THRESHOLD, 81));
    for (e, frac) in ced_curve(&nmes, DEFAULT_CED_THRESHOLD, 5) {
        println!("  NME <= {e:.3}: {:.0}%", 100.0 * frac);
    }
    Ok(())
}
