//! The statistics toolkit on small made-up samples.

use situated_lab::stats::{fdc, gaussian_kde, linreg, paired_t, quantile_table, signed_rank, silverman_bandwidth};

fn main() -> situated_lab::Result<()> {
    let before = [142., 140., 144., 144., 142., 146., 149., 150., 142., 148., 136., 139., 151.];
    let after = [138., 136., 147., 139., 143., 141., 143., 145., 136., 146., 134., 140., 145.];
    let t = paired_t(&before, &after)?;
    let w = signed_rank(&before, &after)?;
    println!("paired t  {:?} p {:.4}", t.statistic, t.p_value);
    println!("signed-rank ({:?}) W {:?} p {:.4}", w.method, w.statistic, w.p_value);

    let xs: Vec<f64> = (0..20).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x + (x * 1.7).sin()).collect();
    let fit = linreg(&xs, &ys)?;
    println!("slope {:.4} +- {:.4}, p {:.2e}", fit.slope, fit.slope_stderr, fit.slope_p_value().unwrap_or(f64::NAN));

    let utilities = [0.9, 0.5, 0.1, -0.3, -0.7];
    let distances = [0.0, 0.4, 0.9, 1.1, 1.6];
    println!("fdc {:.3}", fdc(&utilities, &distances)?);

    let diffs: Vec<f64> = before.iter().zip(&after).map(|(a, b)| a - b).collect();
    let h = silverman_bandwidth(&diffs).unwrap_or(1.0);
    let kde = gaussian_kde(&diffs, h)?;
    let peak = kde.iter().copied().fold((0.0, 0.0), |best, p| if p.1 > best.1 { p } else { best });
    println!("kde bandwidth {h:.3}, mode near {:.2}", peak.0);
    for r in quantile_table(&diffs)?.iter().step_by(3) {
        println!("  q {:.3}: sample {:+.1}  normal {:+.3}", r.position, r.sample, r.normal);
    }
    Ok(())
}
