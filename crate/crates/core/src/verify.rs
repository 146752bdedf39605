//! Numerical checks of the inequalities behind the constant schemes, and a
//! hill-climbing search for sign tensors with large certified ratios.
//!
//! Rademacher expectations are exact: they average over every sign pattern.
//! Since `|sum a_n s_n|` is invariant under `s -> -s`, only patterns with
//! `s_0 = +1` are visited, in Gray-code order with incremental updates.
//!
//! Trials and restarts draw from independent ChaCha streams keyed by
//! `(seed, index)` and are reduced with order-independent max/min/sum, so
//! the reports do not depend on thread scheduling.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constants::{constant, SchemeId};
use crate::error::{Error, Result};
use crate::exponents::{bh_exponent, s2_of, BleiParams, Order};
use crate::forms::{
    contract_first, for_each_half_sign, multiple_summing_lhs, p_norm, Budget, MultilinearForm,
    NormMode, VectorFamily,
};
use crate::special_fn::{khinchine_A, khinchine_A2r, khinchine_B};

/// Relative slack allowed on every inequality.
pub const INEQUALITY_SLACK: f64 = 1e-10;
/// Tolerance for equality witnesses.
pub const EQUALITY_TOL: f64 = 1e-12;
/// Largest number of Rademacher variables averaged exactly.
pub const MAX_RADEMACHER_BITS: u32 = 20;

/// Exponents exercised by the Khinchine suite.
pub const KHINCHINE_EXPONENTS: [f64; 5] = [1.0, 4.0 / 3.0, 1.5, 1.8, 2.0];

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + INEQUALITY_SLACK)
}

pub(crate) fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `E |sum_n a_n r_n|^p` over independent Rademacher signs, computed exactly.
pub fn rademacher_moment(a: &[f64], p: f64) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Shape("empty coefficient vector".into()));
    }
    if a.len() as u64 > u64::from(MAX_RADEMACHER_BITS) {
        return Err(Error::BudgetExceeded {
            needed: a.len() as u64,
            budget: MAX_RADEMACHER_BITS,
        });
    }
    let count = 1u64 << (a.len() - 1);
    let mut s = vec![1.0; a.len()];
    let mut sum: f64 = a.iter().sum();
    let mut total = sum.abs().powf(p);
    for k in 1..count {
        let j = k.trailing_zeros() as usize + 1;
        s[j] = -s[j];
        sum += 2.0 * s[j] * a[j];
        total += sum.abs().powf(p);
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KhinchineCheck {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `A_p ||a||_2 <= (E|sum a_n r_n|^p)^(1/p) <= B_p ||a||_2`.
pub fn check_khinchine(a: &[f64], p: f64) -> Result<KhinchineCheck> {
    let a_p = khinchine_A(p)?.value;
    let b_p = khinchine_B(p)?;
    let norm = p_norm(a, 2.0);
    let mid = rademacher_moment(a, p)?.powf(1.0 / p);
    let (lhs, rhs) = (a_p * norm, b_p * norm);
    Ok(KhinchineCheck {
        lhs,
        mid,
        rhs,
        holds: holds(lhs, mid) && holds(mid, rhs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: holds(lhs, rhs),
        }
    }
}

/// `(E|S|^p)^(1/p) <= B_p A_r^(-1) (E|S|^r)^(1/r)` for `0 < r <= p <= 2`.
pub fn check_kcc(a: &[f64], p: f64, r: f64) -> Result<InequalityCheck> {
    if !(r > 0.0 && r <= p && p <= 2.0) {
        return Err(Error::Domain {
            what: "check_kcc",
            value: r,
            domain: "0 < r <= p <= 2",
        });
    }
    let lhs = rademacher_moment(a, p)?.powf(1.0 / p);
    let factor = khinchine_B(p)? / khinchine_A(r)?.value;
    let rhs = factor * rademacher_moment(a, r)?.powf(1.0 / r);
    Ok(InequalityCheck::new(lhs, rhs))
}

/// The Blei-type mixed-norm bound for a positive matrix `a[i][j]`, rows
/// `i in A`, columns `j in B`:
///
/// ```text
/// (sum a_ij^w)^(1/w) <= (sum_i ||row_i||_q^s1)^(f(s1,s2)/s1) (sum_j ||col_j||_q^s2)^(f(s2,s1)/s2)
/// ```
pub fn check_blei(matrix: &[Vec<f64>], params: &BleiParams<f64>) -> Result<InequalityCheck> {
    let cols = matrix.first().map_or(0, Vec::len);
    if cols == 0 || matrix.iter().any(|row| row.len() != cols) {
        return Err(Error::Shape(
            "matrix must be non-empty and rectangular".into(),
        ));
    }
    if matrix
        .iter()
        .flatten()
        .any(|&x| !(x > 0.0) || !x.is_finite())
    {
        return Err(Error::Hypothesis("matrix entries must be positive".into()));
    }
    let (q, s1, s2) = (params.q(), params.s1(), params.s2());
    let w = params.w();
    let lhs = p_norm(&matrix.iter().flatten().copied().collect::<Vec<_>>(), w);

    let row_sum: f64 = matrix.iter().map(|row| p_norm(row, q).powf(s1)).sum();
    let col_sum: f64 = (0..cols)
        .map(|j| {
            let col: Vec<f64> = matrix.iter().map(|row| row[j]).collect();
            p_norm(&col, q).powf(s2)
        })
        .sum();
    let rhs = row_sum.powf(params.f(Order::S1S2) / s1) * col_sum.powf(params.f(Order::S2S1) / s2);
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `||Y||_2 <= A_{2,r}^m (E|sum Y_i r_{i_1}(t_1)...r_{i_m}(t_m)|^r)^(1/r)`.
pub fn check_rademacher_tensor(y: &MultilinearForm, r: f64) -> Result<InequalityCheck> {
    let bits = (y.m() * y.n()) as u64;
    if bits > u64::from(MAX_RADEMACHER_BITS) {
        return Err(Error::BudgetExceeded {
            needed: bits,
            budget: MAX_RADEMACHER_BITS,
        });
    }
    let a2r = khinchine_A2r(r)?;
    let lhs = p_norm(y.coeffs(), 2.0);
    let mut sum = 0.0;
    let mut count = 0u64;
    chaos_moment(y.coeffs(), y.m(), y.n(), r, &mut sum, &mut count)?;
    let rhs = a2r.powi(y.m() as i32) * (sum / count as f64).powf(1.0 / r);
    Ok(InequalityCheck::new(lhs, rhs))
}

fn chaos_moment(
    data: &[f64],
    order: usize,
    n: usize,
    r: f64,
    sum: &mut f64,
    count: &mut u64,
) -> Result<()> {
    if order == 1 {
        *sum += rademacher_moment(data, r)?;
        *count += 1;
        return Ok(());
    }
    let mut result = Ok(());
    for_each_half_sign(n, |s| {
        if result.is_ok() {
            result = chaos_moment(&contract_first(data, n, s), order - 1, n, r, sum, count);
        }
    });
    result
}

/// Summary of one verification suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: u64,
    pub failures: u64,
    pub worst_margin: f64,
    pub max_ratio: f64,
    pub seed: u64,
    pub uncertified: bool,
    /// Offending instances; the tensor ones use the interchange format.
    #[serde(skip)]
    pub failing_instances: Vec<Value>,
}

struct Outcome {
    margin: f64,
    ratio: f64,
    failed: bool,
    instance: Value,
}

impl Outcome {
    fn from_check(check: &InequalityCheck, instance: impl FnOnce() -> Value) -> Self {
        Self {
            margin: check.rhs - check.lhs,
            ratio: check.lhs / check.rhs,
            failed: !check.holds,
            instance: if check.holds { Value::Null } else { instance() },
        }
    }
}

fn reduce(suite: &str, seed: u64, uncertified: bool, outcomes: Vec<Outcome>) -> VerificationReport {
    let mut report = VerificationReport {
        suite: suite.to_string(),
        trials: outcomes.len() as u64,
        failures: 0,
        worst_margin: f64::INFINITY,
        max_ratio: 0.0,
        seed,
        uncertified,
        failing_instances: Vec::new(),
    };
    for o in outcomes {
        report.worst_margin = report.worst_margin.min(o.margin);
        report.max_ratio = report.max_ratio.max(o.ratio);
        if o.failed {
            report.failures += 1;
            report.failing_instances.push(o.instance);
        }
    }
    if report.trials == 0 {
        report.worst_margin = 0.0;
    }
    report
}

fn run_trials<F>(count: u64, seed: u64, trial: F) -> Result<Vec<Outcome>>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<Vec<Outcome>> + Sync,
{
    let per_trial = (0..count)
        .into_par_iter()
        .map(|i| trial(i, &mut trial_rng(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Random Gaussian vectors (length 1..=12) checked at every exponent in
/// [`KHINCHINE_EXPONENTS`].
pub fn khinchine_suite(count: u64, seed: u64) -> Result<VerificationReport> {
    let outcomes = run_trials(count, seed, |_, rng| {
        let n = rng.random_range(1..=12);
        let a = gaussian_vec(rng, n);
        KHINCHINE_EXPONENTS
            .iter()
            .map(|&p| {
                let c = check_khinchine(&a, p)?;
                Ok(Outcome {
                    margin: (c.mid - c.lhs).min(c.rhs - c.mid),
                    ratio: (c.lhs / c.mid).max(c.mid / c.rhs),
                    failed: !c.holds,
                    instance: if c.holds {
                        Value::Null
                    } else {
                        json!({"a": a, "p": p})
                    },
                })
            })
            .collect()
    })?;
    Ok(reduce("khinchine", seed, false, outcomes))
}

pub fn kcc_suite(count: u64, seed: u64) -> Result<VerificationReport> {
    const EXPONENTS: [f64; 6] = [0.5, 1.0, 4.0 / 3.0, 1.5, 1.8, 2.0];
    let outcomes = run_trials(count, seed, |i, rng| {
        let n = rng.random_range(1..=12);
        let a = gaussian_vec(rng, n);
        // every fourth instance uses the pair (2, 4/3)
        let (p, r) = if i % 4 == 0 {
            (2.0, 4.0 / 3.0)
        } else {
            let x = *EXPONENTS.choose(rng).unwrap();
            let y = *EXPONENTS.choose(rng).unwrap();
            (x.max(y), x.min(y))
        };
        let c = check_kcc(&a, p, r)?;
        Ok(vec![Outcome::from_check(
            &c,
            || json!({"a": a, "p": p, "r": r}),
        )])
    })?;
    Ok(reduce("kcc", seed, false, outcomes))
}

pub fn blei_suite(count: u64, seed: u64) -> Result<VerificationReport> {
    let outcomes = run_trials(count, seed, |i, rng| {
        let (rows, cols) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let matrix: Vec<Vec<f64>> = (0..rows)
            .map(|_| gaussian_vec(rng, cols).into_iter().map(f64::exp).collect())
            .collect();
        let params = if i % 4 == 0 {
            // the substitution q = 2, s1 = 4/3, s2 = (2m-4)/(m-1)
            let m = rng.random_range(3..=30);
            BleiParams::new(2.0, 4.0 / 3.0, s2_of(m)?)?
        } else {
            let q = rng.random_range(1.05..6.0);
            let s1 = 1.0 + rng.random::<f64>() * (q - 1.0) * 0.999;
            let s2 = 1.0 + rng.random::<f64>() * (q - 1.0) * 0.999;
            BleiParams::new(q, s1, s2)?
        };
        let c = check_blei(&matrix, &params)?;
        Ok(vec![Outcome::from_check(
            &c,
            || json!({"matrix": matrix, "q": params.q(), "s1": params.s1(), "s2": params.s2()}),
        )])
    })?;
    Ok(reduce("blei", seed, false, outcomes))
}

fn random_form(i: u64, m: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<MultilinearForm> {
    if i.is_multiple_of(2) {
        MultilinearForm::random_signs(m, n, rng)
    } else {
        MultilinearForm::random_gaussian(m, n, rng)
    }
}

pub fn tensor_suite(count: u64, seed: u64) -> Result<VerificationReport> {
    const EXPONENTS: [f64; 4] = [1.0, 4.0 / 3.0, 1.5, 2.0];
    let outcomes = run_trials(count, seed, |i, rng| {
        let m = rng.random_range(2..=3);
        let n = rng.random_range(2..=3);
        let r = *EXPONENTS.choose(rng).unwrap();
        let y = random_form(i, m, n, rng)?;
        let c = check_rademacher_tensor(&y, r)?;
        Ok(vec![Outcome::from_check(
            &c,
            || json!({"tensor": y.to_file(Some(seed)), "r": r}),
        )])
    })?;
    Ok(reduce("tensor", seed, false, outcomes))
}

fn real_bound(scheme: SchemeId, m: usize) -> Result<f64> {
    match scheme {
        SchemeId::DSPComplex | SchemeId::Cor52Complex => Err(Error::OutOfScope(format!(
            "scheme {scheme} is a complex-field constant; only real schemes are verified"
        ))),
        _ => Ok(constant(scheme, m as u32)?.value),
    }
}

/// Norm used by the trial suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    Exact(Budget),
    /// Sign ascent with the given number of restarts; reports are flagged
    /// uncertified.
    Heuristic(usize),
}

impl Certification {
    fn mode(self, seed: u64, index: u64) -> NormMode {
        match self {
            Certification::Exact(b) => NormMode::Exact(b),
            Certification::Heuristic(restarts) => NormMode::Heuristic {
                restarts,
                seed: seed ^ index.rotate_left(32),
            },
        }
    }

    fn uncertified(self) -> bool {
        matches!(self, Certification::Heuristic(_))
    }
}

/// Draws `count` forms (even trials uniform signs, odd trials standard
/// normal entries) and checks `bh_ratio <= C_m` for the given scheme.
pub fn run_bh_trials(
    m: usize,
    n: usize,
    count: u64,
    seed: u64,
    scheme: SchemeId,
    cert: Certification,
) -> Result<VerificationReport> {
    let bound = real_bound(scheme, m)?;
    if let Certification::Exact(budget) = cert {
        budget.check(((m.saturating_sub(1)) * n) as u64)?;
    }
    let outcomes = run_trials(count, seed, |i, rng| {
        let t = random_form(i, m, n, rng)?;
        let ratio = t.bh_ratio(cert.mode(seed, i))?;
        let failed = !holds(ratio, bound);
        Ok(vec![Outcome {
            margin: bound - ratio,
            ratio,
            failed,
            instance: if failed {
                serde_json::to_value(t.to_file(Some(seed)))?
            } else {
                Value::Null
            },
        }])
    })?;
    Ok(reduce(
        &format!("bh/{scheme}/m{m}/n{n}"),
        seed,
        cert.uncertified(),
        outcomes,
    ))
}

/// Random forms and random families of `J` vectors per slot, each family
/// normalized to weak-l1 norm 1; checks
/// `multiple_summing_lhs <= C_m ||T||` at `p = 2m/(m+1)`.
pub fn check_multiple_summing(
    m: usize,
    n: usize,
    j: usize,
    count: u64,
    seed: u64,
    scheme: SchemeId,
    budget: Budget,
) -> Result<VerificationReport> {
    let bound = real_bound(scheme, m)?;
    budget.check(((m.saturating_sub(1)) * n) as u64)?;
    let p = bh_exponent(m as u32)?;
    let outcomes = run_trials(count, seed, |i, rng| {
        let t = random_form(i, m, n, rng)?;
        let families = (0..m)
            .map(|k| {
                let fam = VectorFamily::new(k, (0..j).map(|_| gaussian_vec(rng, n)).collect())?;
                Ok(fam.scaled(1.0 / fam.weak_l1_norm()))
            })
            .collect::<Result<Vec<_>>>()?;
        summing_outcome(&t, &families, p, bound, budget, seed)
    })?;
    Ok(reduce(
        &format!("summing/{scheme}/m{m}/n{n}/j{j}"),
        seed,
        false,
        outcomes,
    ))
}

fn summing_outcome(
    t: &MultilinearForm,
    families: &[VectorFamily],
    p: f64,
    bound: f64,
    budget: Budget,
    seed: u64,
) -> Result<Vec<Outcome>> {
    let lhs = multiple_summing_lhs(t, families, p)?;
    let norm = t.sup_norm_exact(budget)?;
    let check = InequalityCheck::new(lhs, bound * norm);
    let mut outcome = Outcome::from_check(&check, || {
        let fams: Vec<_> = families.iter().map(|f| f.vectors().to_vec()).collect();
        json!({"tensor": t.to_file(Some(seed)), "families": fams})
    });
    outcome.ratio = if norm > 0.0 { lhs / norm } else { 0.0 };
    Ok(vec![outcome])
}

/// Best sign tensor found by the extremal search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub tensor: MultilinearForm,
    pub ratio: f64,
    pub bound: f64,
    pub iterations: u64,
    pub restarts: u64,
}

/// One restart: start from random signs and flip single entries, keeping a
/// flip only when the certified ratio strictly increases. Returns the final
/// tensor, its ratio and the sequence of accepted ratios.
pub(crate) fn climb(
    m: usize,
    n: usize,
    iterations: u64,
    rng: &mut ChaCha8Rng,
    budget: Budget,
) -> Result<(MultilinearForm, f64, Vec<f64>)> {
    let mode = NormMode::Exact(budget);
    let mut tensor = MultilinearForm::random_signs(m, n, rng)?;
    let mut ratio = tensor.bh_ratio(mode)?;
    let mut trace = vec![ratio];
    let len = tensor.coeffs().len();
    for _ in 0..iterations {
        let k = rng.random_range(0..len);
        tensor.flip(k);
        let candidate = tensor.bh_ratio(mode)?;
        if candidate > ratio {
            ratio = candidate;
            trace.push(ratio);
        } else {
            tensor.flip(k);
        }
    }
    Ok((tensor, ratio, trace))
}

/// Multi-start hill climbing over `{-1, +1}` tensors for a large certified
/// Bohnenblust-Hille ratio.
pub fn search_extremal(
    m: usize,
    n: usize,
    restarts: u64,
    iterations: u64,
    seed: u64,
    budget: Budget,
) -> Result<SearchState> {
    let bound = constant(SchemeId::NewReal, m.max(2) as u32)?.value;
    budget.check(((m.saturating_sub(1)) * n) as u64)?;
    let runs = (0..restarts.max(1))
        .into_par_iter()
        .map(|k| climb(m, n, iterations, &mut trial_rng(seed, k), budget))
        .collect::<Result<Vec<_>>>()?;
    // first restart wins ties
    let (tensor, ratio, _) = runs
        .into_iter()
        .reduce(|best, run| if run.1 > best.1 { run } else { best })
        .expect("at least one restart");
    Ok(SearchState {
        tensor,
        ratio,
        bound,
        iterations: restarts.max(1) * iterations,
        restarts: restarts.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::haagerup_crossover;

    #[test]
    fn moment_small_cases() {
        assert_eq!(rademacher_moment(&[1.0], 1.5).unwrap(), 1.0);
        let h = 0.5f64.sqrt();
        let p = 4.0 / 3.0;
        let expect = 0.5 * (2.0 * h).powf(p);
        assert!((rademacher_moment(&[h, h], p).unwrap() - expect).abs() < 1e-15);
        // second moment is the squared l2 norm
        let a = [0.3, -1.2, 2.0, 0.7];
        let l2sq: f64 = a.iter().map(|x| x * x).sum();
        assert!((rademacher_moment(&a, 2.0).unwrap() - l2sq).abs() < 1e-13);
        assert!(rademacher_moment(&[1.0; 21], 1.0).is_err());
        assert!(rademacher_moment(&[], 1.0).is_err());
    }

    #[test]
    fn khinchine_examples() {
        let h = 0.5f64.sqrt();
        let c = check_khinchine(&[h, h], 4.0 / 3.0).unwrap();
        assert!((c.mid - 2f64.powf(0.5 - 0.75)).abs() < 1e-14);
        assert!((c.mid / c.lhs - 1.0).abs() < EQUALITY_TOL);
        assert!(c.holds);

        let c = check_khinchine(&[1.0], 1.7).unwrap();
        assert_eq!((c.mid, c.rhs), (1.0, 1.0));
        assert!(c.holds);
    }

    #[test]
    fn khinchine_equality_witness_on_grid() {
        let h = 0.5f64.sqrt();
        let mut p = 0.05;
        while p <= haagerup_crossover() {
            let c = check_khinchine(&[h, h], p).unwrap();
            assert!((c.mid / c.lhs - 1.0).abs() < EQUALITY_TOL, "p={p}");
            p += 0.05;
        }
    }

    #[test]
    fn kcc_examples() {
        let h = 0.5f64.sqrt();
        let c = check_kcc(&[h, h], 2.0, 4.0 / 3.0).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-15 && (c.rhs - 1.0).abs() < 1e-14 && c.holds);
        let a = [0.4, 1.1, -0.3];
        let c = check_kcc(&a, 1.5, 1.5).unwrap();
        assert!(c.holds && c.rhs >= c.lhs);
        let a15 = khinchine_A(1.5).unwrap().value;
        assert!((c.rhs * a15 - c.lhs).abs() < 1e-14);
        assert!(check_kcc(&a, 1.0, 1.5).is_err());
    }

    #[test]
    fn blei_examples() {
        let p = BleiParams::new(2.0, 4.0 / 3.0, 4.0 / 3.0).unwrap();
        let c = check_blei(&[vec![3.5]], &p).unwrap();
        assert!((c.lhs - 3.5).abs() < 1e-14 && (c.rhs - 3.5).abs() < 1e-14);

        let u = [0.5, 2.0, 1.5];
        let v = [1.0, 0.25, 3.0, 0.7];
        let m: Vec<Vec<f64>> = u
            .iter()
            .map(|a| v.iter().map(|b| a * b).collect())
            .collect();
        assert!(check_blei(&m, &p).unwrap().holds);

        assert!(matches!(
            check_blei(&[vec![1.0, 0.0]], &p),
            Err(Error::Hypothesis(_))
        ));
        assert!(check_blei(&[vec![1.0], vec![1.0, 2.0]], &p).is_err());
    }

    #[test]
    fn blei_is_homogeneous() {
        let p = BleiParams::new(2.5, 1.2, 1.9).unwrap();
        let m = vec![vec![1.0, 2.0, 0.3], vec![0.7, 0.1, 4.0]];
        let c = check_blei(&m, &p).unwrap();
        let scaled: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|x| 3.0 * x).collect())
            .collect();
        let s = check_blei(&scaled, &p).unwrap();
        assert!((s.lhs - 3.0 * c.lhs).abs() < 1e-12 * s.lhs);
        assert!((s.rhs - 3.0 * c.rhs).abs() < 1e-12 * s.rhs);
    }

    #[test]
    fn tensor_examples() {
        for r in [1.0, 4.0 / 3.0, 2.0] {
            let e = MultilinearForm::basis(2, 3, &[1, 1]).unwrap();
            let c = check_rademacher_tensor(&e, r).unwrap();
            assert_eq!(c.lhs, 1.0);
            assert!((c.rhs - khinchine_A2r(r).unwrap().powi(2)).abs() < 1e-14 && c.holds);
        }
        let l = MultilinearForm::new(2, 2, vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        let c = check_rademacher_tensor(&l, 4.0 / 3.0).unwrap();
        assert!(c.holds);
        // chaos s1 t1 + s1 t2 + s2 t1 - s2 t2 takes |value| = 2 always
        assert!((c.rhs - 2f64.sqrt() * 2.0).abs() < 1e-14);
        assert!(check_rademacher_tensor(&MultilinearForm::zeros(3, 7).unwrap(), 1.0).is_err());
    }

    #[test]
    fn tensor_moment_matches_full_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let y = MultilinearForm::random_gaussian(3, 2, &mut rng).unwrap();
        let r = 1.5;
        // enumerate all 2^6 sign patterns without the half-space shortcut
        let mut total = 0.0;
        for code in 0..64u32 {
            let s = |k: u32| if (code >> k) & 1 == 1 { -1.0 } else { 1.0 };
            let args = [[s(0), s(1)], [s(2), s(3)], [s(4), s(5)]];
            total += y
                .evaluate(&[&args[0], &args[1], &args[2]])
                .unwrap()
                .abs()
                .powf(r);
        }
        let oracle = khinchine_A2r(r).unwrap().powi(3) * (total / 64.0).powf(1.0 / r);
        let c = check_rademacher_tensor(&y, r).unwrap();
        assert!((c.rhs - oracle).abs() < 1e-13 * oracle);
    }

    #[test]
    fn bh_trials_small_cases() {
        let r = run_bh_trials(
            2,
            1,
            50,
            3,
            SchemeId::NewReal,
            Certification::Exact(Budget::default()),
        )
        .unwrap();
        assert_eq!(r.failures, 0);
        assert_eq!(r.max_ratio, 1.0);
        assert!(run_bh_trials(
            2,
            2,
            5,
            0,
            SchemeId::DSPComplex,
            Certification::Exact(Budget::default())
        )
        .is_err());
        assert!(matches!(
            run_bh_trials(
                5,
                8,
                1,
                0,
                SchemeId::NewReal,
                Certification::Exact(Budget::default())
            ),
            Err(Error::BudgetExceeded { .. })
        ));
        let h = run_bh_trials(3, 2, 20, 1, SchemeId::NewReal, Certification::Heuristic(5)).unwrap();
        assert!(h.uncertified);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_bh_trials(
            3,
            2,
            64,
            9,
            SchemeId::NewReal,
            Certification::Exact(Budget::default()),
        )
        .unwrap();
        let b = run_bh_trials(
            3,
            2,
            64,
            9,
            SchemeId::NewReal,
            Certification::Exact(Budget::default()),
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = blei_suite(50, 4).unwrap();
        let d = blei_suite(50, 4).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn report_json_field_order() {
        let r = kcc_suite(4, 2).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let keys = [
            "suite",
            "trials",
            "failures",
            "worst_margin",
            "max_ratio",
            "seed",
            "uncertified",
        ];
        let mut last = 0;
        for k in keys {
            let pos = s.find(&format!("\"{k}\"")).unwrap();
            assert!(pos >= last);
            last = pos;
        }
        assert!(!s.contains("failing_instances"));
    }

    #[test]
    fn summing_families_canonical_and_scaled() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let t = MultilinearForm::random_gaussian(2, 3, &mut rng).unwrap();
        let canon: Vec<_> = (0..2).map(|k| VectorFamily::canonical(k, 3)).collect();
        let p = bh_exponent(2).unwrap();
        assert!((multiple_summing_lhs(&t, &canon, p).unwrap() - t.bh_lhs()).abs() < 1e-13);
        let half: Vec<_> = canon.iter().map(|f| f.scaled(0.5)).collect();
        let lhs = multiple_summing_lhs(&t, &half, p).unwrap();
        assert!((lhs - 0.25 * t.bh_lhs()).abs() < 1e-13);
        let bound = constant(SchemeId::NewReal, 2).unwrap().value;
        let out = summing_outcome(&t, &half, p, bound, Budget::default(), 0).unwrap();
        assert!(!out[0].failed && out[0].margin > 0.0);
    }

    #[test]
    fn climb_is_strictly_increasing_and_bounded() {
        let bound = constant(SchemeId::NewReal, 3).unwrap().value;
        for seed in 0..5 {
            let (t, ratio, trace) =
                climb(3, 2, 200, &mut trial_rng(seed, 0), Budget::default()).unwrap();
            assert!(trace.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(*trace.last().unwrap(), ratio);
            assert!(ratio <= bound + 1e-12);
            assert!(t.coeffs().iter().all(|c| c.abs() == 1.0));
            let check = t.bh_ratio(NormMode::Exact(Budget::default())).unwrap();
            assert_eq!(check, ratio);
        }
    }

    #[test]
    fn search_trivial_cases() {
        let s = search_extremal(2, 1, 3, 10, 0, Budget::default()).unwrap();
        assert_eq!(s.ratio, 1.0);
        let s = search_extremal(2, 2, 4, 50, 1, Budget::default()).unwrap();
        assert!((s.ratio - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            s,
            search_extremal(2, 2, 4, 50, 1, Budget::default()).unwrap()
        );
        assert!(search_extremal(5, 8, 1, 1, 0, Budget::default()).is_err());
    }
}
