use std::io::Write;

use std::f64::consts::FRAC_PI_2;

use crate::error::Result;
use crate::loss::{self, AngularDifference, CLAMP_EPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub d: f64,
    pub info: f64,
    pub sigmoid: f64,
    pub loss: f64,
    pub grad: f64,
}

/// `points` evenly spaced angles over `[ε, π/2 − ε]`, endpoints included.
pub fn sweep_loss(points: usize) -> Vec<SweepRow> {
    assert!(points >= 2, "a sweep needs at least two points");
    let (lo, hi) = (CLAMP_EPS, FRAC_PI_2 - CLAMP_EPS);
    (0..points)
        .map(|i| {
            let d = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let a = AngularDifference::new(d).expect("grid inside domain");
            SweepRow {
                d,
                info: loss::information_loss(a),
                sigmoid: loss::sigmoid_loss(a),
                loss: loss::proposed_loss(a),
                grad: loss::proposed_loss_grad(a),
            }
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "d,info_loss,sigmoid_loss,loss,dloss_dy")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.d, r.info, r.sigmoid, r.loss, r.grad)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn minimum_sits_next_to_equilibrium() {
        let rows = sweep_loss(1000);
        let argmin = (0..rows.len())
            .min_by(|&a, &b| rows[a].loss.total_cmp(&rows[b].loss))
            .unwrap();
        let nearest = rows
            .iter()
            .map(|r| (r.d - FRAC_PI_4).abs())
            .fold(f64::INFINITY, f64::min);
        assert!((rows[argmin].d - FRAC_PI_4).abs() <= nearest + 1e-12);
        let step = rows[1].d - rows[0].d;
        // Loss ≈ 0.25 + c·(d − π/4)²; half a grid step away stays very close.
        assert!((rows[argmin].loss - 0.25).abs() < step);
    }

    #[test]
    fn info_column_is_symmetric() {
        let rows = sweep_loss(1000);
        for i in 0..rows.len() {
            let j = rows.len() - 1 - i;
            let diff = (rows[i].info - rows[j].info).abs();
            if (0.01..FRAC_PI_2 - 0.01).contains(&rows[i].d) {
                assert!(diff < 1e-12, "row {i}: {diff:e}");
            } else {
                // Next to the clamp the slope is ~1/d and the mirrored grid
                // point is only known to a few ulps of π/2.
                let slope = 1.0 / rows[i].d.min(rows[j].d);
                assert!(diff < 1e-12 + 8.0 * f64::EPSILON * slope, "row {i}: {diff:e}");
            }
        }
        let mid = rows.len() / 2;
        assert!((rows[mid - 1].info - rows[mid].info).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_sweep_csv(&sweep_loss(1000), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1001);
        assert!(text.starts_with("d,info_loss,sigmoid_loss,loss,dloss_dy\n"));
    }
}
