//! Partition agreement and rank statistics for comparing techniques.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn pairs(n: u64) -> f64 {
    (n as f64) * (n.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand Index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "label vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::param("ARI needs at least 2 items"));
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let index: f64 = table.values().map(|&n| pairs(n)).sum();
    let sum_a: f64 = rows.values().map(|&n| pairs(n)).sum();
    let sum_b: f64 = cols.values().map(|&n| pairs(n)).sum();
    let expected = sum_a * sum_b / pairs(a.len() as u64);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        // Both labelings are trivial (all-in-one or all-singletons) in the same way.
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Average rank per technique; rank 1 is the highest score of a dataset and
/// ties share the mean of their ranks. Rows are datasets, columns techniques.
pub fn rank_table(scores: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = scores.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::param("empty score table"));
    }
    let mut sum = vec![0.0; k];
    for (d, row) in scores.iter().enumerate() {
        if row.len() != k {
            return Err(Error::param(format!(
                "dataset {d} has {} scores, expected {k}",
                row.len()
            )));
        }
        if row.iter().any(|x| x.is_nan()) {
            return Err(Error::param(format!("dataset {d} has a missing score")));
        }
        for (r, acc) in dataset_ranks(row).into_iter().zip(sum.iter_mut()) {
            *acc += r;
        }
    }
    let n = scores.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

fn dataset_ranks(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&x, &y| row[y].total_cmp(&row[x]));
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &t in &order[start..end] {
            ranks[t] = shared;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    pub f_f: f64,
    pub df1: usize,
    pub df2: usize,
}

/// Friedman chi-square and its F-distributed (Iman-Davenport) variant.
pub fn friedman(avg_ranks: &[f64], n_datasets: usize) -> Result<FriedmanResult> {
    let k = avg_ranks.len();
    let n = n_datasets;
    if n < 2 || k < 2 {
        return Err(Error::param(format!(
            "Friedman test needs N >= 2 and k >= 2, got N = {n}, k = {k}"
        )));
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let denom = nf * (kf - 1.0) - chi2;
    if denom.abs() < 1e-12 {
        return Err(Error::Degenerate(
            "Friedman chi-square equals N(k-1); F statistic is undefined".into(),
        ));
    }
    Ok(FriedmanResult {
        chi2,
        f_f: (nf - 1.0) * chi2 / denom,
        df1: k - 1,
        df2: (n - 1) * (k - 1),
    })
}

/// Two-tailed Bonferroni-Dunn critical values for `k - 1` comparisons against
/// a control, indexed by `k = 2..=10`.
const DUNN_Q_005: [f64; 9] = [1.960, 2.241, 2.394, 2.498, 2.576, 2.638, 2.690, 2.724, 2.773];
const DUNN_Q_010: [f64; 9] = [1.645, 1.960, 2.128, 2.241, 2.326, 2.394, 2.450, 2.498, 2.539];

pub fn dunn_critical_value(k: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &DUNN_Q_005
    } else if (alpha - 0.10).abs() < 1e-12 {
        &DUNN_Q_010
    } else {
        return Err(Error::param(format!(
            "alpha {alpha} unsupported; supported values are 0.05 and 0.10"
        )));
    };
    if !(2..=10).contains(&k) {
        return Err(Error::param(format!(
            "k = {k} unsupported; supported values are 2..=10"
        )));
    }
    Ok(table[k - 2])
}

/// Critical difference of average ranks for the Bonferroni-Dunn post-hoc test.
pub fn bonferroni_dunn_cd(k: usize, n_datasets: usize, alpha: f64) -> Result<f64> {
    if n_datasets == 0 {
        return Err(Error::param("need at least one dataset"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let q = dunn_critical_value(k, alpha)?;
    let (kf, nf) = (k as f64, n_datasets as f64);
    Ok(q * (kf * (kf + 1.0) / (6.0 * nf)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub datasets: Vec<String>,
    pub techniques: Vec<String>,
    /// Rows are datasets, columns techniques.
    pub ari_table: Vec<Vec<f64>>,
    pub avg_ranks: Vec<f64>,
    pub chi2: f64,
    pub f_f: f64,
    pub df: [usize; 2],
    pub cd: f64,
    pub alpha: f64,
    pub n_datasets: usize,
    pub n_techniques: usize,
    /// Index of the control technique in `techniques`.
    pub control: usize,
}

impl EvalReport {
    pub fn new(
        datasets: Vec<String>,
        techniques: Vec<String>,
        ari_table: Vec<Vec<f64>>,
        alpha: f64,
        control: usize,
    ) -> Result<Self> {
        if ari_table.len() != datasets.len() {
            return Err(Error::param("one score row per dataset required"));
        }
        if control >= techniques.len() {
            return Err(Error::param("control technique out of range"));
        }
        let avg_ranks = rank_table(&ari_table)?;
        if avg_ranks.len() != techniques.len() {
            return Err(Error::param("one score column per technique required"));
        }
        let fr = friedman(&avg_ranks, datasets.len())?;
        let cd = bonferroni_dunn_cd(techniques.len(), datasets.len(), alpha)?;
        Ok(Self {
            n_datasets: datasets.len(),
            n_techniques: techniques.len(),
            datasets,
            techniques,
            ari_table,
            avg_ranks,
            chi2: fr.chi2,
            f_f: fr.f_f,
            df: [fr.df1, fr.df2],
            cd,
            alpha,
            control,
        })
    }

    /// Techniques whose average rank differs from the control's by more than CD.
    pub fn significantly_different(&self) -> Vec<usize> {
        let base = self.avg_ranks[self.control];
        (0..self.n_techniques)
            .filter(|&t| t != self.control && (self.avg_ranks[t] - base).abs() > self.cd)
            .collect()
    }

    /// Rank line in the usual post-hoc layout: an axis from 1 to k, one tick
    /// per technique and a bar of length CD anchored at the control.
    pub fn rank_plot_svg(&self) -> String {
        let k = self.n_techniques as f64;
        let (width, left, right) = (640.0, 40.0, 600.0);
        let x = |r: f64| left + (r - 1.0) / (k - 1.0).max(1.0) * (right - left);
        let height = 90.0 + 22.0 * self.n_techniques as f64;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<line x1="{left}" y1="40" x2="{right}" y2="40" stroke="black"/>"#);
        for r in 1..=self.n_techniques {
            let xr = x(r as f64);
            let _ = writeln!(
                s,
                r#"<line x1="{xr:.1}" y1="35" x2="{xr:.1}" y2="45" stroke="black"/><text x="{xr:.1}" y="30" text-anchor="middle">{r}</text>"#
            );
        }
        let base = self.avg_ranks[self.control];
        let (lo, hi) = ((base - self.cd).max(1.0), (base + self.cd).min(k));
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="55" x2="{:.1}" y2="55" stroke="black" stroke-width="4"/>"#,
            x(lo),
            x(hi)
        );
        let mut order: Vec<usize> = (0..self.n_techniques).collect();
        order.sort_by(|&a, &b| self.avg_ranks[a].total_cmp(&self.avg_ranks[b]));
        for (row, &t) in order.iter().enumerate() {
            let xr = x(self.avg_ranks[t]);
            let y = 80.0 + 22.0 * row as f64;
            let weight = if t == self.control { "bold" } else { "normal" };
            let _ = writeln!(
                s,
                r#"<line x1="{xr:.1}" y1="40" x2="{xr:.1}" y2="{y:.1}" stroke="gray"/><text x="{:.1}" y="{:.1}" font-weight="{weight}">{} ({:.2})</text>"#,
                xr + 4.0,
                y + 4.0,
                xml_escape(&self.techniques[t]),
                self.avg_ranks[t]
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Critical difference stated in the original comparison, kept for side-by-side
/// reporting; the standard table gives about 2.55 for the same setting.
pub const PUBLISHED_CD: f64 = 3.33;

/// Published F_F for the real-dataset comparison.
pub const PUBLISHED_F_F: f64 = 4.88;

pub const TECHNIQUES: [&str; 7] = [
    "K-means",
    "Fuzzy c-means",
    "HDBSCAN*+DBCV",
    "Chameleon",
    "Expectation Maximization",
    "Modularity",
    "Edge domination",
];

pub const REAL_DATASETS: [&str; 10] = [
    "Breast cancer",
    "Car evaluation",
    "Credit approval",
    "Contraceptive method",
    "Glass",
    "Ionosphere",
    "Iris",
    "Vowel",
    "Wine",
    "Seeds",
];

/// Published ARI of the seven techniques on the ten real datasets
/// (rows: datasets in [`REAL_DATASETS`] order, columns: [`TECHNIQUES`]).
pub const REAL_ARI: [[f64; 7]; 10] = [
    [0.7302, 0.7305, 0.2556, 0.7192, 0.6955, 0.4474, 0.7930],
    [0.0294, 0.0307, 0.1313, 0.1496, 0.0367, 0.1872, 0.1880],
    [0.2389, 0.3725, 0.0794, 0.1653, 0.1987, 0.1734, 0.4890],
    [0.0215, 0.0242, 0.0236, 0.0253, 0.0112, 0.0329, 0.0433],
    [0.1610, 0.1632, 0.2575, 0.2918, 0.1571, 0.2118, 0.2377],
    [0.1776, 0.1727, 0.7030, 0.6767, 0.1547, 0.0708, 0.3057],
    [0.6540, 0.7287, 0.5657, 0.6844, 0.9222, 0.9038, 0.9222],
    [0.1736, 0.0892, 0.0814, 0.1949, 0.1541, 0.2505, 0.2259],
    [0.8582, 0.8498, 0.3385, 0.8249, 0.9472, 0.8858, 0.9488],
    [0.7049, 0.7266, 0.4303, 0.7436, 0.6671, 0.8125, 0.8377],
];

pub const ARTIFICIAL_DATASETS: [&str; 4] = ["Banana", "Highleyman", "Lithuanian", "Spirals"];

/// Published ARI on the four artificial datasets, same layout as [`REAL_ARI`].
pub const ARTIFICIAL_ARI: [[f64; 7]; 4] = [
    [0.2429, 0.2442, 0.4714, 0.9215, 0.3304, 0.3510, 0.9408],
    [0.2617, 0.3201, 0.2085, 0.4348, 0.7977, 0.5033, 0.7164],
    [-0.0016, -0.0017, 0.7024, 0.9343, -0.0015, 0.4259, 0.9538],
    [-0.0020, -0.0019, 0.2507, 0.0119, -0.0020, 1.0000, 1.0000],
];

fn table_rows<const K: usize>(rows: &[[f64; K]]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

/// Report over the published real-dataset table, control = edge domination.
pub fn published_real_report(alpha: f64) -> Result<EvalReport> {
    EvalReport::new(
        REAL_DATASETS.iter().map(|s| s.to_string()).collect(),
        TECHNIQUES.iter().map(|s| s.to_string()).collect(),
        table_rows(&REAL_ARI),
        alpha,
        TECHNIQUES.len() - 1,
    )
}

pub fn published_artificial_table() -> Vec<Vec<f64>> {
    table_rows(&ARTIFICIAL_ARI)
}
