use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::anova::{anova, GroupSamples};
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: String,
    pub n: usize,
    pub mean: f64,
    /// 95% Student-t interval; `None` with fewer than two runs.
    pub ci95: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub f_value: Option<f64>,
    pub p_value: Option<f64>,
    /// `(mean_b - mean_a) / mean_a * 100`.
    pub delta_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub metric: String,
    pub modes: Vec<ModeSummary>,
    pub pairs: Vec<PairComparison>,
}

pub fn mean_ci95(values: &[f64]) -> (f64, Option<(f64, f64)>) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("dof > 0").inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    (mean, Some((mean - half, mean + half)))
}

/// Per-mode means with confidence intervals and every pairwise comparison
/// in the given mode order.
pub fn summarize(metric: &str, groups: &[GroupSamples]) -> Result<Summary, StatsError> {
    if groups.is_empty() {
        return Err(StatsError::MissingMode("no modes given".into()));
    }
    if let Some(g) = groups.iter().find(|g| g.values.is_empty()) {
        return Err(StatsError::MissingMode(format!("mode `{}` has no runs", g.label)));
    }
    let modes: Vec<ModeSummary> = groups
        .iter()
        .map(|g| {
            let (mean, ci95) = mean_ci95(&g.values);
            ModeSummary { mode: g.label.clone(), n: g.values.len(), mean, ci95 }
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let r = anova(&[groups[i].clone(), groups[j].clone()]).ok();
            let (ma, mb) = (modes[i].mean, modes[j].mean);
            pairs.push(PairComparison {
                a: groups[i].label.clone(),
                b: groups[j].label.clone(),
                f_value: r.map(|r| r.f_value),
                p_value: r.map(|r| r.p_value),
                delta_pct: (ma != 0.0).then(|| (mb - ma) / ma * 100.0),
            });
        }
    }
    Ok(Summary { metric: metric.to_string(), modes, pairs })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl Summary {
    /// Two CSV sections: per-mode rows, then pair rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,metric,mode,other,n,mean,ci_low,ci_high,f_value,p_value,delta_pct\n");
        for m in &self.modes {
            let (lo, hi) = m.ci95.map_or((None, None), |(a, b)| (Some(a), Some(b)));
            let _ = writeln!(s, "mode,{},{},,{},{},{},{},,,", self.metric, m.mode, m.n, m.mean, opt(lo), opt(hi));
        }
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "pair,{},{},{},,,,,{},{},{}",
                self.metric,
                p.a,
                p.b,
                opt(p.f_value),
                opt(p.p_value),
                opt(p.delta_pct)
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("metric: {}\n\n", self.metric);
        let _ = writeln!(s, "{:<10} {:>4} {:>16} {:>16} {:>16}", "mode", "n", "mean", "ci95_low", "ci95_high");
        for m in &self.modes {
            let (lo, hi) = m.ci95.map_or(("-".into(), "-".into()), |(a, b)| (format!("{a:.4}"), format!("{b:.4}")));
            let _ = writeln!(s, "{:<10} {:>4} {:>16.4} {:>16} {:>16}", m.mode, m.n, m.mean, lo, hi);
        }
        if !self.pairs.is_empty() {
            let _ = writeln!(s, "\n{:<10} {:<10} {:>12} {:>12} {:>10}", "a", "b", "F", "p", "delta_%");
            for p in &self.pairs {
                let f = p.f_value.map_or("-".into(), |v| format!("{v:.4}"));
                let pv = p.p_value.map_or("-".into(), |v| format!("{v:.3e}"));
                let d = p.delta_pct.map_or("-".into(), |v| format!("{v:+.3}"));
                let _ = writeln!(s, "{:<10} {:<10} {:>12} {:>12} {:>10}", p.a, p.b, f, pv, d);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_mode_has_no_pairs() {
        let s = summarize("delay", &[GroupSamples::new("default", vec![1.0, 2.0, 3.0])]).unwrap();
        assert_eq!(s.modes[0].mean, 2.0);
        assert!(s.pairs.is_empty());
    }

    #[test]
    fn percentage_delta() {
        let s = summarize(
            "delay",
            &[GroupSamples::new("default", vec![9.0, 11.0]), GroupSamples::new("lstm", vec![7.0, 9.0])],
        )
        .unwrap();
        assert!((s.pairs[0].delta_pct.unwrap() + 20.0).abs() < 1e-12);
    }

    #[test]
    fn ci_matches_hand_value() {
        // n = 4, mean 2.5, s = 1.2910, t(0.975, 3) = 3.182446
        let (m, ci) = mean_ci95(&[1.0, 2.0, 3.0, 4.0]);
        let half = 3.182446305284263 * (5.0f64 / 3.0 / 4.0).sqrt();
        let (lo, hi) = ci.unwrap();
        assert_eq!(m, 2.5);
        assert!((lo - (2.5 - half)).abs() < 1e-9 && (hi - (2.5 + half)).abs() < 1e-9);
    }

    #[test]
    fn empty_mode_is_error() {
        assert!(summarize("x", &[GroupSamples::new("a", vec![])]).is_err());
        assert!(summarize("x", &[]).is_err());
    }
}
