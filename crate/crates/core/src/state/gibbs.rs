//! Truncated Gibbs state of the quantum harmonic oscillator.
//!
//! Each mode is represented on `span{|0>, ..., |D-1>}` with the truncated
//! ladder matrices `q = sqrt(h/2)(a + a†)`, `p = i sqrt(h/2)(a† - a)`, which
//! satisfy `qp - pq = ih` away from the truncation edge. The Hamiltonian is
//! taken from its exact spectrum `h(n + 1/2)`, so the density matrix is
//! diagonal and the state factorizes over modes.

use num_complex::Complex64;

use crate::algebra::{ClassTag, GenId, Polynomial, Presentation};

use super::StateError;

/// Tail weight above which a truncation is flagged.
pub const TAIL_WARNING: f64 = 1e-10;
/// Truncation used when none is requested, doubled as needed.
pub const DEFAULT_TRUNCATION: usize = 64;
/// Largest truncation the automatic doubling may reach.
pub const MAX_TRUNCATION: usize = 8192;
/// Agreement required between truncations `D` and `2D`.
pub const STABILITY_TOL: f64 = 1e-9;
/// Largest joint Hilbert-space dimension `D^d` accepted.
pub const MAX_JOINT_DIMENSION: f64 = 1e15;

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsEvaluation {
    pub value: Complex64,
    pub truncation: usize,
    /// `e^{-βhD} / (1 - e^{-βh})`, the neglected Boltzmann weight relative to
    /// the ground state.
    pub tail_weight: f64,
    pub warning: Option<String>,
}

pub fn tail_weight(beta: f64, h: f64, truncation: usize) -> f64 {
    (-beta * h * truncation as f64).exp() / (1.0 - (-beta * h).exp())
}

/// Closed form `⟨q²⟩ = (h/2) coth(βh/2)` for one mode.
pub fn q_squared_closed_form(beta: f64, h: f64) -> f64 {
    0.5 * h / (0.5 * beta * h).tanh()
}

#[derive(Clone, Copy)]
enum Quadrature {
    Q,
    P,
}

struct ModeLetters {
    /// (mode, quadrature) per generator id
    table: Vec<(usize, Quadrature)>,
    modes: usize,
}

impl ModeLetters {
    fn new(pres: &Presentation) -> Self {
        let n = pres.modes();
        let table = pres
            .generators()
            .iter()
            .enumerate()
            .map(|(id, g)| {
                let quad = if id < n { Quadrature::Q } else { Quadrature::P };
                (g.index as usize, quad)
            })
            .collect();
        ModeLetters { table, modes: n }
    }
}

/// One mode: normalized Boltzmann weights and the ladder scale.
struct ModeState {
    weights: Vec<f64>,
    scale: f64,
}

impl ModeState {
    fn new(beta: f64, h: f64, truncation: usize) -> Self {
        let mut weights: Vec<f64> = (0..truncation)
            .map(|n| (-beta * h * n as f64).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);
        ModeState {
            weights,
            scale: (0.5 * h).sqrt(),
        }
    }

    fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `tr(ρ L_1 L_2 ... L_k)` for a sequence of quadratures of this mode.
    fn expectation(&self, letters: &[Quadrature]) -> Complex64 {
        if letters.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        let d = self.dim();
        let k = letters.len();
        let mut total = Complex64::default();
        let mut buf = vec![Complex64::default(); d];
        let mut next = vec![Complex64::default(); d];
        for n in 0..d {
            if self.weights[n] == 0.0 {
                continue;
            }
            let lo0 = n.saturating_sub(k);
            let hi0 = (n + k + 1).min(d);
            buf[lo0..hi0].iter_mut().for_each(|c| *c = Complex64::default());
            buf[n] = Complex64::new(1.0, 0.0);
            let (mut lo, mut hi) = (n, n + 1);
            for quad in letters.iter().rev() {
                let nlo = lo.saturating_sub(1);
                let nhi = (hi + 1).min(d);
                next[nlo..nhi].iter_mut().for_each(|c| *c = Complex64::default());
                for m in lo..hi {
                    let amp = buf[m];
                    if amp == Complex64::default() {
                        continue;
                    }
                    // a|m> = sqrt(m)|m-1>, a†|m> = sqrt(m+1)|m+1>
                    let down = if m > 0 { (m as f64).sqrt() } else { 0.0 };
                    let up = if m + 1 < d { ((m + 1) as f64).sqrt() } else { 0.0 };
                    match quad {
                        Quadrature::Q => {
                            if m > 0 {
                                next[m - 1] += amp * down * self.scale;
                            }
                            if m + 1 < d {
                                next[m + 1] += amp * up * self.scale;
                            }
                        }
                        Quadrature::P => {
                            let i_scale = Complex64::new(0.0, self.scale);
                            if m > 0 {
                                next[m - 1] -= amp * down * i_scale;
                            }
                            if m + 1 < d {
                                next[m + 1] += amp * up * i_scale;
                            }
                        }
                    }
                }
                std::mem::swap(&mut buf, &mut next);
                lo = nlo;
                hi = nhi;
            }
            total += buf[n] * self.weights[n];
        }
        total
    }
}

fn evaluate_at(
    x: &Polynomial,
    letters: &ModeLetters,
    beta: f64,
    h: f64,
    truncation: usize,
) -> Complex64 {
    let mode = ModeState::new(beta, h, truncation);
    let mut total = Complex64::default();
    let mut per_mode: Vec<Vec<Quadrature>> = vec![Vec::new(); letters.modes];
    for (word, coef) in x.terms() {
        per_mode.iter_mut().for_each(Vec::clear);
        for &g in word.letters() {
            let (m, quad) = letters.table[g as usize];
            per_mode[m].push(quad);
        }
        let value: Complex64 = per_mode.iter().map(|ls| mode.expectation(ls)).product();
        total += coef * value;
    }
    total
}

fn validate(pres: &Presentation, beta: f64, h: f64) -> Result<(), StateError> {
    if pres.class() != ClassTag::Ccr {
        return Err(StateError::UnsupportedClass {
            state: "gibbs_oscillator",
            class: pres.class(),
        });
    }
    if !(beta > 0.0) || !(h > 0.0) {
        return Err(StateError::InvalidSpec(
            "gibbs_oscillator needs beta > 0 and h > 0".into(),
        ));
    }
    let ph = pres.param("h").unwrap_or(f64::NAN);
    if (ph - h).abs() > 1e-12 * h.max(1.0) {
        return Err(StateError::ParameterMismatch {
            name: "h",
            presentation: ph,
            state: h,
        });
    }
    Ok(())
}

fn check_joint_size(modes: usize, truncation: usize) -> Result<(), StateError> {
    let joint = (truncation as f64).powi(modes as i32);
    if joint > MAX_JOINT_DIMENSION {
        return Err(StateError::SizeOverflow {
            modes,
            truncation,
            cap: MAX_JOINT_DIMENSION,
        });
    }
    Ok(())
}

/// `tr(e^{-βH} X) / tr(e^{-βH})` with an explicit or automatic truncation.
///
/// With `truncation = None` the truncation starts at 64 and doubles until the
/// tail weight drops below [`TAIL_WARNING`] and the values at `D` and `2D`
/// agree to [`STABILITY_TOL`], up to [`MAX_TRUNCATION`].
pub fn gibbs_oscillator_evaluate(
    x: &Polynomial,
    pres: &Presentation,
    beta: f64,
    h: f64,
    truncation: Option<usize>,
) -> Result<GibbsEvaluation, StateError> {
    validate(pres, beta, h)?;
    if x.space() != pres.space() {
        return Err(crate::algebra::AlgebraError::MismatchedPresentations.into());
    }
    let letters = ModeLetters::new(pres);
    if let Some(d) = truncation {
        if d < 2 {
            return Err(StateError::InvalidSpec("truncation must be at least 2".into()));
        }
        check_joint_size(pres.modes(), d)?;
        let tail = tail_weight(beta, h, d);
        let warning = (tail > TAIL_WARNING).then(|| {
            format!("truncation D={d} leaves tail weight {tail:.3e} above {TAIL_WARNING:e}")
        });
        return Ok(GibbsEvaluation {
            value: evaluate_at(x, &letters, beta, h, d),
            truncation: d,
            tail_weight: tail,
            warning,
        });
    }

    let mut d = DEFAULT_TRUNCATION;
    while tail_weight(beta, h, d) > TAIL_WARNING && d < MAX_TRUNCATION {
        d *= 2;
    }
    check_joint_size(pres.modes(), d)?;
    let mut value = evaluate_at(x, &letters, beta, h, d);
    let mut stable = false;
    while 2 * d <= MAX_TRUNCATION {
        let doubled = evaluate_at(x, &letters, beta, h, 2 * d);
        if (doubled - value).norm() <= STABILITY_TOL {
            stable = true;
            break;
        }
        d *= 2;
        value = doubled;
    }
    let tail = tail_weight(beta, h, d);
    let warning = if tail > TAIL_WARNING {
        Some(format!(
            "truncation capped at D={d}; tail weight {tail:.3e} above {TAIL_WARNING:e}"
        ))
    } else if !stable {
        Some(format!("values at D={d} and 2D did not agree to {STABILITY_TOL:e}"))
    } else {
        None
    };
    Ok(GibbsEvaluation {
        value,
        truncation: d,
        tail_weight: tail,
        warning,
    })
}

/// Letter id helper for tests and callers building words by hand.
pub fn quadrature_id(pres: &Presentation, mode: usize, momentum: bool) -> GenId {
    (if momentum { pres.modes() + mode } else { mode }) as GenId
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_expression, parse_presentation};

    fn ccr(h: f64, modes: usize) -> Presentation {
        parse_presentation(&format!("class ccr; modes {modes}; param h={h}")).unwrap()
    }

    fn eval(text: &str, p: &Presentation, beta: f64, d: Option<usize>) -> GibbsEvaluation {
        let x = parse_expression(text, p).unwrap();
        gibbs_oscillator_evaluate(&x, p, beta, p.param("h").unwrap(), d).unwrap()
    }

    #[test]
    fn normalized() {
        let p = ccr(0.7, 1);
        assert!((eval("1", &p, 1.3, None).value - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn commutator_expectation() {
        // [p, q] = -ih  =>  qp - pq = ih
        let p = ccr(0.5, 1);
        let v = eval("q p - p q", &p, 1.0, None).value;
        assert!((v - Complex64::new(0.0, 0.5)).norm() < 1e-12, "{v}");
    }

    #[test]
    fn q_squared_matches_coth() {
        let p = ccr(0.1, 1);
        let closed = q_squared_closed_form(1.0, 0.1);
        assert!((closed - 1.000833).abs() < 5e-7);
        let a = eval("q^2", &p, 1.0, Some(1024)).value.re;
        let b = eval("q^2", &p, 1.0, Some(2048)).value.re;
        assert!((a - b).abs() < 1e-10);
        assert!((a - closed).abs() < 1e-10);
        let auto = eval("q^2", &p, 1.0, None);
        assert!(auto.warning.is_none());
        assert!((auto.value.re - closed).abs() < 1e-9);
    }

    #[test]
    fn gaussian_factorization_in_q() {
        let p = ccr(0.8, 1);
        let s2 = eval("q^2", &p, 0.9, None).value.re;
        for m in 1..=3u32 {
            let v = eval(&format!("q^{}", 2 * m), &p, 0.9, None).value.re;
            let df: f64 = (1..2 * m).step_by(2).map(f64::from).product();
            assert!((v - df * s2.powi(m as i32)).abs() < 1e-8, "m={m}");
        }
    }

    #[test]
    fn truncation_warning_fires() {
        let p = ccr(0.1, 1);
        let e = eval("q^2", &p, 1.0, Some(16));
        assert!(e.warning.is_some());
    }

    #[test]
    fn h_mismatch_is_an_error() {
        let p = ccr(0.5, 1);
        let x = parse_expression("q", &p).unwrap();
        assert!(matches!(
            gibbs_oscillator_evaluate(&x, &p, 1.0, 0.4, None),
            Err(StateError::ParameterMismatch { .. })
        ));
    }

    #[test]
    fn modes_factorize() {
        let p = ccr(0.6, 2);
        let joint = eval("q1^2 p2^2", &p, 1.0, None).value;
        let a = eval("q1^2", &p, 1.0, None).value;
        let b = eval("p2^2", &p, 1.0, None).value;
        assert!((joint - a * b).norm() < 1e-12);
        assert!(eval("q1 p2", &p, 1.0, None).value.norm() < 1e-14);
    }
}
