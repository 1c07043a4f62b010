//! Gaussian random-matrix ensembles, normalized trace moments and the
//! replica map on matrices, checked against Fock-state predictions.

mod rng;

pub use rng::NormalStream;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{normal_form, AlgebraError, Polynomial, Presentation};
use crate::complex_value::ComplexValue;
use crate::context::{replica_target, ContextError};
use crate::state::{fock_evaluate, StateError};

pub const MAX_K: usize = 12;
pub const MAX_PATTERN: usize = 8;
const UNIT_CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WignerError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("replica label {label} is out of range for {replicas} replicas")]
    LabelOutOfRange { label: usize, replicas: usize },
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Context(#[from] ContextError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Off-diagonal N(0,1), diagonal N(0,2).
    #[default]
    RealSymmetric,
    /// Off-diagonal complex normal of variance 1, diagonal N(0,1).
    ComplexHermitian,
}

impl Ensemble {
    pub fn as_str(self) -> &'static str {
        match self {
            Ensemble::RealSymmetric => "real_symmetric",
            Ensemble::ComplexHermitian => "complex_hermitian",
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default = "one")]
    pub replicas: usize,
    /// Replica coefficients `c_a`; empty means all ones.
    #[serde(default)]
    pub coefficients: Vec<ComplexValue>,
    pub trials: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(n: usize, ensemble: Ensemble, trials: usize, seed: u64) -> Self {
        EnsembleConfig {
            n,
            ensemble,
            replicas: 1,
            coefficients: Vec::new(),
            trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), WignerError> {
        if self.n == 0 {
            return Err(WignerError::InvalidConfig("N must be positive".into()));
        }
        if self.trials < 2 {
            return Err(WignerError::InvalidConfig("trials must be at least 2".into()));
        }
        if self.replicas == 0 {
            return Err(WignerError::InvalidConfig("replicas must be positive".into()));
        }
        if !self.coefficients.is_empty() && self.coefficients.len() != self.replicas {
            return Err(WignerError::InvalidConfig(format!(
                "{} coefficients given for {} replicas",
                self.coefficients.len(),
                self.replicas
            )));
        }
        Ok(())
    }

    /// Coefficients with the all-ones default filled in.
    pub fn coefficient_values(&self) -> Vec<Complex64> {
        if self.coefficients.is_empty() {
            vec![Complex64::new(1.0, 0.0); self.replicas]
        } else {
            self.coefficients.iter().map(|c| c.0).collect()
        }
    }

    fn check_unit_constraint(&self) -> Result<(), WignerError> {
        let total: f64 = self.coefficient_values().iter().map(|c| c.norm_sqr()).sum();
        if (total - self.replicas as f64).abs() > UNIT_CONSTRAINT_TOL {
            return Err(WignerError::InvalidConfig(format!(
                "Σ|c_a|² = {total} but must equal p = {}",
                self.replicas
            )));
        }
        Ok(())
    }
}

/// Draws `J` for the given replica and trial.
pub fn sample_matrix(config: &EnsembleConfig, replica: u32, trial: u32) -> DMatrix<Complex64> {
    let n = config.n;
    let mut stream = NormalStream::new(config.seed, replica, trial);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z = match config.ensemble {
                Ensemble::RealSymmetric => {
                    let x = stream.next_normal();
                    Complex64::new(if i == j { std::f64::consts::SQRT_2 * x } else { x }, 0.0)
                }
                Ensemble::ComplexHermitian if i == j => Complex64::new(stream.next_normal(), 0.0),
                Ensemble::ComplexHermitian => {
                    let re = stream.next_normal();
                    let im = stream.next_normal();
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                }
            };
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// A complex matrix held as a real matrix: itself when real, otherwise the
/// embedding `[[Re, -Im], [Im, Re]]`, which respects products.
#[derive(Clone, Debug)]
struct RealForm {
    m: DMatrix<f64>,
    n: usize,
    embedded: bool,
}

impl RealForm {
    fn from_complex(x: &DMatrix<Complex64>, embedded: bool) -> Self {
        let n = x.nrows();
        let m = if embedded {
            DMatrix::from_fn(2 * n, 2 * n, |r, c| {
                let z = x[(r % n, c % n)];
                match (r < n, c < n) {
                    (true, true) | (false, false) => z.re,
                    (true, false) => -z.im,
                    (false, true) => z.im,
                }
            })
        } else {
            x.map(|z| z.re)
        };
        RealForm { m, n, embedded }
    }

    fn scale(&self, c: Complex64) -> DMatrix<f64> {
        if !self.embedded {
            return &self.m * c.re;
        }
        let n = self.n;
        // multiply by the embedding of c·I
        DMatrix::from_fn(2 * n, 2 * n, |r, col| {
            let (top, bottom) = (self.m[(r % n, col)], self.m[(r % n + n, col)]);
            if r < n {
                c.re * top - c.im * bottom
            } else {
                c.im * top + c.re * bottom
            }
        })
    }

    fn wrap(&self, m: DMatrix<f64>) -> RealForm {
        RealForm {
            m,
            n: self.n,
            embedded: self.embedded,
        }
    }

    /// `tr(self · other)` as a complex number.
    fn trace_product(&self, other: &RealForm) -> Complex64 {
        let (a, b, n) = (&self.m, &other.m, self.n);
        let dim = a.nrows();
        let mut full = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                full += a[(i, j)] * b[(j, i)];
            }
        }
        if !self.embedded {
            return Complex64::new(full, 0.0);
        }
        let mut im = 0.0;
        for i in 0..n {
            for j in 0..dim {
                im += a[(n + i, j)] * b[(j, i)];
            }
        }
        Complex64::new(0.5 * full, im)
    }

    fn trace(&self) -> Complex64 {
        let n = self.n;
        if !self.embedded {
            return Complex64::new(self.m.trace(), 0.0);
        }
        let re: f64 = (0..n).map(|i| self.m[(i, i)]).sum();
        let im: f64 = (0..n).map(|i| self.m[(n + i, i)]).sum();
        Complex64::new(re, im)
    }
}

/// Mean and standard error of a normalized trace moment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

fn summarize(k: usize, n: usize, values: &[f64]) -> MomentEstimate {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    MomentEstimate {
        k,
        mean,
        stderr: (var / t).sqrt(),
        trials: values.len(),
        n,
    }
}

/// Fock moment of `(A + A†)^k` on one Boltzmann mode.
pub fn fock_prediction(k: usize) -> Result<f64, WignerError> {
    let pres = Presentation::boltzmann(1)?;
    let q = pres.gen("A")?.add(&pres.gen("A†")?)?;
    let mut x = pres.one();
    for _ in 0..k {
        x = normal_form(&x.multiply(&q)?, &pres)?;
    }
    Ok(fock_evaluate(&x, &pres)?.re)
}

/// `(1/N) tr((J/√N)^k)` for `k = 1..=k_max`, averaged over trials.
pub fn estimate_trace_moments(config: &EnsembleConfig, k_max: usize) -> Result<Vec<MomentEstimate>, WignerError> {
    config.validate()?;
    if k_max == 0 || k_max > MAX_K {
        return Err(WignerError::InvalidConfig(format!("k_max must be in 1..={MAX_K}")));
    }
    let n = config.n;
    let embedded = config.ensemble == Ensemble::ComplexHermitian;
    let per_trial: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let j = sample_matrix(config, 0, trial as u32) / Complex64::new((n as f64).sqrt(), 0.0);
            let m = RealForm::from_complex(&j, embedded);
            let top = k_max.div_ceil(2);
            let mut powers = vec![m.clone()];
            for _ in 1..top {
                let next = &powers.last().unwrap().m * &m.m;
                powers.push(m.wrap(next));
            }
            (1..=k_max)
                .map(|k| {
                    let a = k.div_ceil(2);
                    let b = k - a;
                    let tr = if b == 0 {
                        powers[a - 1].trace()
                    } else {
                        powers[a - 1].trace_product(&powers[b - 1])
                    };
                    tr.re / n as f64
                })
                .collect()
        })
        .collect();
    Ok((1..=k_max)
        .map(|k| {
            let column: Vec<f64> = per_trial.iter().map(|row| row[k - 1]).collect();
            summarize(k, n, &column)
        })
        .collect())
}

/// One factor of a replica pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternItem {
    Replica(usize),
    /// `(1/√p) Σ_a c_a M_a`.
    Delta,
}

/// Parses `"0,0,1,1"` or `"D,D"` (`Δ` and `delta` also name the replica map).
pub fn parse_pattern(text: &str) -> Result<Vec<PatternItem>, WignerError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "D" | "Δ" | "delta" => Ok(PatternItem::Delta),
            _ => t
                .parse()
                .map(PatternItem::Replica)
                .map_err(|_| WignerError::InvalidPattern(format!("unknown pattern symbol `{t}`"))),
        })
        .collect()
}

pub fn pattern_to_string(pattern: &[PatternItem]) -> String {
    pattern
        .iter()
        .map(|p| match p {
            PatternItem::Replica(a) => a.to_string(),
            PatternItem::Delta => "Δ".to_string(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicaReport {
    pub pattern: String,
    pub estimate: MomentEstimate,
    /// Imaginary part of the trace, nonzero only for complex coefficients.
    pub imaginary: MomentEstimate,
    pub prediction: ComplexValue,
    /// `|estimate − prediction|` in units of the standard error.
    pub deviation_in_stderr: f64,
}

/// Algebra prediction: the Fock moment of the matching product of
/// `Q_a = A_a + A_a†`, with `Δ ↦ (1/√p) Σ c_a Q_a`.
pub fn replica_prediction(pattern: &[PatternItem], c: &[Complex64]) -> Result<Complex64, WignerError> {
    let p = c.len();
    let pres = replica_target(p)?;
    let q = |a: usize| -> Result<Polynomial, WignerError> {
        let ann = pres.word_poly(crate::algebra::Word::letter((2 * a) as u16));
        Ok(ann.add(&pres.adjoint(&ann))?)
    };
    let mut delta = pres.zero();
    for (a, ca) in c.iter().enumerate() {
        delta = delta.add(&q(a)?.scale(ca / (p as f64).sqrt()))?;
    }
    let mut x = pres.one();
    for item in pattern {
        let factor = match item {
            PatternItem::Replica(a) => q(*a)?,
            PatternItem::Delta => delta.clone(),
        };
        x = normal_form(&x.multiply(&factor)?, &pres)?;
    }
    Ok(fock_evaluate(&x, &pres)?)
}

/// Estimates `(1/N) tr` of the product of `M_a = J^(a)/√N` along `pattern`.
pub fn replica_moment_experiment(config: &EnsembleConfig, pattern: &[PatternItem]) -> Result<ReplicaReport, WignerError> {
    config.validate()?;
    if pattern.is_empty() || pattern.len() > MAX_PATTERN {
        return Err(WignerError::InvalidPattern(format!("pattern length must be in 1..={MAX_PATTERN}")));
    }
    for item in pattern {
        if let PatternItem::Replica(a) = item {
            if *a >= config.replicas {
                return Err(WignerError::LabelOutOfRange {
                    label: *a,
                    replicas: config.replicas,
                });
            }
        }
    }
    let uses_delta = pattern.contains(&PatternItem::Delta);
    if uses_delta {
        config.check_unit_constraint()?;
    }
    let c = config.coefficient_values();
    let n = config.n;
    let embedded = config.ensemble == Ensemble::ComplexHermitian || (uses_delta && c.iter().any(|z| z.im != 0.0));
    let mut needed: Vec<usize> = pattern
        .iter()
        .filter_map(|p| match p {
            PatternItem::Replica(a) => Some(*a),
            PatternItem::Delta => None,
        })
        .collect();
    if uses_delta {
        needed.extend(0..config.replicas);
    }
    needed.sort_unstable();
    needed.dedup();

    let per_trial: Vec<Complex64> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let scale = Complex64::new((n as f64).sqrt(), 0.0);
            let mats: Vec<(usize, RealForm)> = needed
                .iter()
                .map(|&a| {
                    let j = sample_matrix(config, a as u32, trial as u32) / scale;
                    (a, RealForm::from_complex(&j, embedded))
                })
                .collect();
            let get = |a: usize| &mats.iter().find(|(b, _)| *b == a).expect("sampled").1;
            let delta = uses_delta.then(|| {
                let first = get(0);
                let mut sum = DMatrix::<f64>::zeros(first.m.nrows(), first.m.ncols());
                for (a, ca) in c.iter().enumerate() {
                    sum += get(a).scale(ca / (config.replicas as f64).sqrt());
                }
                first.wrap(sum)
            });
            let factor = |item: &PatternItem| match item {
                PatternItem::Replica(a) => get(*a).clone(),
                PatternItem::Delta => delta.clone().expect("built when used"),
            };
            let last = pattern.len() - 1;
            let mut left = factor(&pattern[0]);
            for item in &pattern[1..last.max(1)] {
                let next = &left.m * &factor(item).m;
                left = left.wrap(next);
            }
            let tr = if pattern.len() == 1 {
                left.trace()
            } else {
                left.trace_product(&factor(&pattern[last]))
            };
            tr / n as f64
        })
        .collect();
    let re: Vec<f64> = per_trial.iter().map(|z| z.re).collect();
    let im: Vec<f64> = per_trial.iter().map(|z| z.im).collect();
    let k = pattern.len();
    let estimate = summarize(k, n, &re);
    let imaginary = summarize(k, n, &im);
    let prediction = replica_prediction(pattern, &c)?;
    let deviation = (estimate.mean - prediction.re).abs();
    Ok(ReplicaReport {
        pattern: pattern_to_string(pattern),
        deviation_in_stderr: if estimate.stderr > 0.0 {
            deviation / estimate.stderr
        } else if deviation == 0.0 {
            0.0
        } else {
            f64::INFINITY
        },
        estimate,
        imaginary,
        prediction: ComplexValue(prediction),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    pub prediction: f64,
    pub abs_error: f64,
}

pub const SWEEP_HEADER: &str = "N,k,mean,stderr,prediction,abs_error";

/// Trace moments for each `N`, with the one-mode Fock prediction.
pub fn convergence_sweep(
    ns: &[usize],
    k_max: usize,
    trials: usize,
    seed: u64,
    ensemble: Ensemble,
) -> Result<Vec<SweepRow>, WignerError> {
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WignerError::InvalidConfig("Ns must be strictly increasing".into()));
    }
    let predictions = (1..=k_max).map(fock_prediction).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &n in ns {
        let config = EnsembleConfig::new(n, ensemble, trials, seed);
        for est in estimate_trace_moments(&config, k_max)? {
            let prediction = predictions[est.k - 1];
            rows.push(SweepRow {
                n,
                k: est.k,
                mean: est.mean,
                stderr: est.stderr,
                prediction,
                abs_error: (est.mean - prediction).abs(),
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.k, r.mean, r.stderr, r.prediction, r.abs_error
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let cfg = EnsembleConfig::new(6, Ensemble::ComplexHermitian, 2, 11);
        assert_eq!(sample_matrix(&cfg, 1, 4), sample_matrix(&cfg, 1, 4));
        assert_ne!(sample_matrix(&cfg, 1, 4), sample_matrix(&cfg, 1, 5));
        let m = sample_matrix(&cfg, 0, 0);
        assert_eq!(m.adjoint(), m);
    }

    #[test]
    fn entry_statistics() {
        let cfg = EnsembleConfig::new(3, Ensemble::RealSymmetric, 2, 5);
        let draws = 10_000;
        let (mut s, mut s2, mut d2) = (0.0, 0.0, 0.0);
        for t in 0..draws {
            let m = sample_matrix(&cfg, 0, t);
            s += m[(0, 1)].re;
            s2 += m[(0, 1)].re.powi(2);
            d2 += m[(2, 2)].re.powi(2);
        }
        let n = draws as f64;
        let mean = s / n;
        let var = s2 / n - mean * mean;
        assert!(mean.abs() < 4.0 / n.sqrt());
        assert!((var - 1.0).abs() < 0.05);
        assert!((d2 / n - 2.0).abs() < 0.1);
    }

    #[test]
    fn embedding_preserves_traces() {
        let cfg = EnsembleConfig::new(5, Ensemble::ComplexHermitian, 2, 3);
        let a = sample_matrix(&cfg, 0, 0);
        let b = sample_matrix(&cfg, 1, 0) * Complex64::new(0.3, -0.7);
        let ra = RealForm::from_complex(&a, true);
        let rb = RealForm::from_complex(&b, true);
        let direct = (&a * &b).trace();
        assert!((ra.trace_product(&rb) - direct).norm() < 1e-12);
        let scaled = ra.wrap(ra.scale(Complex64::new(0.5, 2.0)));
        assert!((scaled.trace() - a.trace() * Complex64::new(0.5, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn catalan_predictions() {
        let values: Vec<f64> = (1..=8).map(|k| fock_prediction(k).unwrap()).collect();
        assert_eq!(values, [0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0]);
    }

    #[test]
    fn low_moments_match_semicircle() {
        let cfg = EnsembleConfig::new(200, Ensemble::RealSymmetric, 20, 7);
        let est = estimate_trace_moments(&cfg, 4).unwrap();
        assert!((est[1].mean - 1.0).abs() < 3.0 * est[1].stderr + 2.0 / 200.0);
        assert!(est[2].mean.abs() < 3.0 * est[2].stderr + 1e-12);
        assert!((est[3].mean - 2.0).abs() < 3.0 * est[3].stderr + 6.0 / 200.0);
    }

    #[test]
    fn replica_patterns() {
        let mut cfg = EnsembleConfig::new(150, Ensemble::ComplexHermitian, 20, 9);
        cfg.replicas = 2;
        let nested = replica_moment_experiment(&cfg, &parse_pattern("0,0,1,1").unwrap()).unwrap();
        assert_eq!(nested.prediction.0, Complex64::new(1.0, 0.0));
        assert!(nested.deviation_in_stderr < 4.0, "{nested:?}");
        let crossing = replica_moment_experiment(&cfg, &parse_pattern("0,1,0,1").unwrap()).unwrap();
        assert_eq!(crossing.prediction.0, Complex64::new(0.0, 0.0));
        assert!(crossing.deviation_in_stderr < 4.0, "{crossing:?}");
        assert!(matches!(
            replica_moment_experiment(&cfg, &parse_pattern("0,2").unwrap()),
            Err(WignerError::LabelOutOfRange { label: 2, .. })
        ));
    }

    #[test]
    fn delta_pattern_with_complex_coefficients() {
        let mut cfg = EnsembleConfig::new(120, Ensemble::RealSymmetric, 20, 4);
        cfg.replicas = 2;
        let s = 0.5f64.sqrt();
        cfg.coefficients = vec![ComplexValue(Complex64::new(s, s)), ComplexValue(Complex64::new(1.0, 0.0))];
        let report = replica_moment_experiment(&cfg, &[PatternItem::Delta, PatternItem::Delta]).unwrap();
        // (1/p) Σ c_a² = ½ (i + 1)
        assert!((report.prediction.0 - Complex64::new(0.5, 0.5)).norm() < 1e-12);
        assert!((report.imaginary.mean - 0.5).abs() < 4.0 * report.imaginary.stderr + 0.02);
        cfg.coefficients[1] = ComplexValue(Complex64::new(0.5, 0.0));
        assert!(matches!(
            replica_moment_experiment(&cfg, &[PatternItem::Delta]),
            Err(WignerError::InvalidConfig(_))
        ));
    }

    #[test]
    fn sweep_shape() {
        let rows = convergence_sweep(&[], 4, 5, 1, Ensemble::RealSymmetric).unwrap();
        assert_eq!(sweep_csv(&rows), format!("{SWEEP_HEADER}\n"));
        let rows = convergence_sweep(&[10, 20], 2, 5, 1, Ensemble::RealSymmetric).unwrap();
        assert_eq!(rows.len(), 4);
        let again = convergence_sweep(&[10, 20], 2, 5, 1, Ensemble::RealSymmetric).unwrap();
        assert_eq!(sweep_csv(&rows), sweep_csv(&again));
        assert!(convergence_sweep(&[20, 10], 2, 5, 1, Ensemble::RealSymmetric).is_err());
    }
}
