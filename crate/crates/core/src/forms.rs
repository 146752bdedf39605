//! Real m-linear forms on `(l_inf^N)^m` stored as dense coefficient tensors.
//!
//! Layout is row-major with the first index slowest, so contracting the
//! first slot walks contiguous blocks.
//!
//! The operator norm is a maximum over sign vectors (extreme points of the
//! `l_inf` ball). Because the form is linear in its last slot, the last
//! slot's maximum is the `l1` norm of the contracted coefficient vector, so
//! exact enumeration only visits `2^((m-1)(N-1))` patterns: flipping every
//! sign of one slot negates the form and is skipped.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::bh_exponent;

/// Largest number of tensor entries accepted.
pub const MAX_ENTRIES: usize = 1 << 20;

/// Relative window inside which a Gray-code running value is re-evaluated
/// along the canonical contraction path.
const CANDIDATE_WINDOW: f64 = 1e-9;

/// Number of sign bits an exact enumeration may spend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u32);

impl Default for Budget {
    fn default() -> Self {
        Budget(24)
    }
}

impl Budget {
    pub const ENV_VAR: &'static str = "BH_BUDGET_BITS";

    /// Default budget, overridden by `BH_BUDGET_BITS` when it parses.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Budget)
            .unwrap_or_default()
    }

    pub fn check(self, needed: u64) -> Result<()> {
        if needed > u64::from(self.0) {
            Err(Error::BudgetExceeded {
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// How the operator norm in a Bohnenblust-Hille ratio is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMode {
    /// Exhaustive sign enumeration; the ratio is a certified lower bound on
    /// the optimal constant.
    Exact(Budget),
    /// Alternating sign ascent; the norm may be underestimated, so the ratio
    /// is uncertified.
    Heuristic { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearForm {
    m: usize,
    n: usize,
    coeffs: Vec<f64>,
}

/// On-disk interchange format for tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl MultilinearForm {
    pub fn new(m: usize, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let len = entry_count(m, n)?;
        if coeffs.len() != len {
            return Err(Error::Shape(format!(
                "m = {m}, N = {n} needs {len} coefficients, got {}",
                coeffs.len()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Shape(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { m, n, coeffs })
    }

    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, vec![0.0; entry_count(m, n)?])
    }

    /// Builds the tensor entry by entry from its multi-index.
    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = entry_count(m, n)?;
        let mut idx = vec![0usize; m];
        let mut coeffs = Vec::with_capacity(len);
        for _ in 0..len {
            coeffs.push(f(&idx));
            for d in (0..m).rev() {
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self::new(m, n, coeffs)
    }

    /// The tensor `e_{i_1} x ... x e_{i_m}`.
    pub fn basis(m: usize, n: usize, index: &[usize]) -> Result<Self> {
        if index.len() != m || index.iter().any(|&i| i >= n) {
            return Err(Error::Shape(format!(
                "index {index:?} invalid for m = {m}, N = {n}"
            )));
        }
        Self::from_fn(m, n, |idx| if idx == index { 1.0 } else { 0.0 })
    }

    pub fn random_signs<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        Self::from_fn(m, n, |_| if rng.random::<bool>() { 1.0 } else { -1.0 })
    }

    pub fn random_gaussian<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        Self::from_fn(m, n, |_| rng.sample(StandardNormal))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.coeffs[self.flat_index(index)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Flips the sign of one coefficient (used by the extremal search).
    pub fn flip(&mut self, flat: usize) {
        self.coeffs[flat] = -self.coeffs[flat];
    }

    /// Relabels the indices of one slot: entry `i` of `slot` moves to `perm[i]`.
    pub fn permute_slot(&self, slot: usize, perm: &[usize]) -> Result<Self> {
        if slot >= self.m || perm.len() != self.n {
            return Err(Error::Shape(format!("bad permutation for slot {slot}")));
        }
        Self::from_fn(self.m, self.n, |idx| {
            let mut src = idx.to_vec();
            src[slot] = perm
                .iter()
                .position(|&p| p == idx[slot])
                .expect("permutation");
            self.get(&src)
        })
    }

    /// Full contraction `sum T[i_1..i_m] x^(1)_{i_1} ... x^(m)_{i_m}`.
    pub fn evaluate(&self, args: &[&[f64]]) -> Result<f64> {
        if args.len() != self.m {
            return Err(Error::Shape(format!(
                "form has arity {}, got {} arguments",
                self.m,
                args.len()
            )));
        }
        if let Some(bad) = args.iter().find(|a| a.len() != self.n) {
            return Err(Error::Shape(format!(
                "argument of length {} for dimension {}",
                bad.len(),
                self.n
            )));
        }
        let mut cur = self.coeffs.clone();
        for x in args {
            cur = contract_first(&cur, self.n, x);
        }
        Ok(cur[0])
    }

    /// `sum_j |v_j|` where `v` contracts the first `m - 1` slots with `signs`;
    /// the value of the form maximized over its last slot.
    pub fn signs_value(&self, signs: &[Vec<f64>]) -> f64 {
        debug_assert_eq!(signs.len() + 1, self.m.max(1));
        let mut cur = self.coeffs.clone();
        for s in signs {
            cur = contract_first(&cur, self.n, s);
        }
        l1(&cur)
    }

    /// Exact operator norm on `(l_inf^N)^m` by sign enumeration.
    pub fn sup_norm_exact(&self, budget: Budget) -> Result<f64> {
        budget.check(((self.m.saturating_sub(1)) * self.n) as u64)?;
        let mut best = 0.0;
        enumerate_max(&self.coeffs, self.m, self.n, &mut best);
        Ok(best)
    }

    /// Lower estimate of the operator norm by alternating sign ascent with
    /// `restarts` random starts. Never exceeds [`Self::sup_norm_exact`].
    pub fn sup_norm_lower(&self, restarts: usize, seed: u64) -> f64 {
        if self.m <= 1 {
            return l1(&self.coeffs);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        for _ in 0..restarts.max(1) {
            let mut signs: Vec<Vec<f64>> = (0..self.m)
                .map(|_| {
                    (0..self.n)
                        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                        .collect()
                })
                .collect();
            self.sign_ascent(&mut signs);
            best = best.max(self.signs_value(&signs[..self.m - 1]));
        }
        best
    }

    /// Cyclic coordinate ascent over slots until no sign changes. A zero
    /// coefficient keeps its current sign.
    fn sign_ascent(&self, signs: &mut [Vec<f64>]) {
        loop {
            let mut changed = false;
            for k in 0..self.m {
                let c = self.slot_coefficients(signs, k);
                for (s, ci) in signs[k].iter_mut().zip(&c) {
                    let target = if *ci > 0.0 {
                        1.0
                    } else if *ci < 0.0 {
                        -1.0
                    } else {
                        *s
                    };
                    if target != *s {
                        *s = target;
                        changed = true;
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    /// Coefficient vector of the linear functional left in slot `k` after
    /// contracting every other slot with `args`.
    fn slot_coefficients(&self, args: &[Vec<f64>], k: usize) -> Vec<f64> {
        let mut cur = self.coeffs.clone();
        for x in &args[..k] {
            cur = contract_first(&cur, self.n, x);
        }
        for x in args[k + 1..].iter().rev() {
            cur = contract_last(&cur, self.n, x);
        }
        cur
    }

    /// `(sum |T_i|^(2m/(m+1)))^((m+1)/(2m))`.
    pub fn bh_lhs(&self) -> f64 {
        let p = bh_exponent(self.m.max(1) as u32).expect("m >= 1");
        p_norm(&self.coeffs, p)
    }

    /// `bh_lhs / ||T||` with the norm obtained according to `mode`.
    pub fn bh_ratio(&self, mode: NormMode) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::ZeroForm);
        }
        let norm = match mode {
            NormMode::Exact(budget) => self.sup_norm_exact(budget)?,
            NormMode::Heuristic { restarts, seed } => self.sup_norm_lower(restarts, seed),
        };
        Ok(self.bh_lhs() / norm)
    }

    pub fn to_file(&self, seed: Option<u64>) -> TensorFile {
        TensorFile {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.clone(),
            seed,
        }
    }

    pub fn to_json(&self, seed: Option<u64>) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file(seed))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TensorFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path, seed: Option<u64>) -> Result<()> {
        std::fs::write(path, self.to_json(seed)? + "\n")?;
        Ok(())
    }
}

impl TryFrom<TensorFile> for MultilinearForm {
    type Error = Error;

    fn try_from(file: TensorFile) -> Result<Self> {
        MultilinearForm::new(file.m, file.n, file.coeffs)
    }
}

fn entry_count(m: usize, n: usize) -> Result<usize> {
    if m == 0 || n == 0 {
        return Err(Error::Shape(format!(
            "need m >= 1 and N >= 1, got m = {m}, N = {n}"
        )));
    }
    match n.checked_pow(m as u32) {
        Some(len) if len <= MAX_ENTRIES => Ok(len),
        _ => Err(Error::Shape(format!(
            "N^m = {n}^{m} exceeds the dense cap of {MAX_ENTRIES} entries"
        ))),
    }
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// `(sum |v_i|^p)^(1/p)`, scaled by the largest entry.
pub(crate) fn p_norm(v: &[f64], p: f64) -> f64 {
    let max = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if max == 0.0 {
        return 0.0;
    }
    max * v
        .iter()
        .map(|x| (x.abs() / max).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Contracts the slowest axis of a tensor with `x`.
pub(crate) fn contract_first(data: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    let block = data.len() / n;
    let mut out = vec![0.0; block];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (o, &d) in out.iter_mut().zip(&data[i * block..(i + 1) * block]) {
            *o += xi * d;
        }
    }
    out
}

/// Contracts the fastest axis of a tensor with `x`.
pub(crate) fn contract_last(data: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    data.chunks_exact(n)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Calls `f` on every vector in `{+1} x {-1,+1}^(n-1)`, in counting order.
pub(crate) fn for_each_half_sign(n: usize, mut f: impl FnMut(&[f64])) {
    let mut s = vec![1.0; n];
    let count = 1u64 << (n - 1);
    for k in 0..count {
        for (j, sj) in s.iter_mut().enumerate().skip(1) {
            *sj = if (k >> (j - 1)) & 1 == 1 { -1.0 } else { 1.0 };
        }
        f(&s);
    }
}

fn enumerate_max(data: &[f64], order: usize, n: usize, best: &mut f64) {
    match order {
        0 => unreachable!(),
        1 => *best = best.max(l1(data)),
        2 => gray_matrix_max(data, n, best),
        _ => for_each_half_sign(n, |s| {
            let sub = contract_first(data, n, s);
            enumerate_max(&sub, order - 1, n, best);
        }),
    }
}

/// Maximizes `||M^T s||_1` over `s` with `s_0 = +1` by Gray-code updates;
/// near-maximal candidates are re-evaluated with [`contract_first`] so the
/// result is bitwise identical to the canonical evaluation path.
fn gray_matrix_max(matrix: &[f64], n: usize, best: &mut f64) {
    let mut s = vec![1.0; n];
    let mut v = contract_first(matrix, n, &s);
    let consider = |s: &[f64], running: f64, best: &mut f64| {
        if running >= *best * (1.0 - CANDIDATE_WINDOW) {
            let canonical = l1(&contract_first(matrix, n, s));
            if canonical > *best {
                *best = canonical;
            }
        }
    };
    consider(&s, l1(&v), best);
    for k in 1..(1u64 << (n - 1)) {
        let j = k.trailing_zeros() as usize + 1;
        s[j] = -s[j];
        let row = &matrix[j * n..(j + 1) * n];
        let step = 2.0 * s[j];
        for (vi, r) in v.iter_mut().zip(row) {
            *vi += step * r;
        }
        consider(&s, l1(&v), best);
    }
}

/// A family of vectors `x_1, ..., x_J` in `R^N` feeding slot `slot`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    pub slot: usize,
    vectors: Vec<Vec<f64>>,
}

impl VectorFamily {
    pub fn new(slot: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Shape("empty vector family".into()));
        };
        let n = first.len();
        if n == 0 || vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Shape(
                "family vectors must share a positive length".into(),
            ));
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite entry in vector family".into()));
        }
        Ok(Self { slot, vectors })
    }

    /// The canonical basis `e_1, ..., e_N`.
    pub fn canonical(slot: usize, n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { slot, vectors }
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            slot: self.slot,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|x| x * factor).collect())
                .collect(),
        }
    }

    /// Weak `l1` norm in `l_inf^N`: the supremum over the dual (`l1`) unit
    /// ball is attained at some `+-e_i`, giving the largest coordinate mass.
    pub fn weak_l1_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.vectors.iter().map(|v| v[i].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `(sum_{j_1..j_m} |T(x^(1)_{j_1}, ..., x^(m)_{j_m})|^p)^(1/p)`.
pub fn multiple_summing_lhs(
    form: &MultilinearForm,
    families: &[VectorFamily],
    p: f64,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain {
            what: "multiple_summing_lhs",
            value: p,
            domain: "p >= 1",
        });
    }
    if families.len() != form.m() {
        return Err(Error::Shape(format!(
            "{} families for a form of arity {}",
            families.len(),
            form.m()
        )));
    }
    if let Some(f) = families.iter().find(|f| f.dim() != form.n()) {
        return Err(Error::Shape(format!(
            "family for slot {} has dimension {}, form has {}",
            f.slot,
            f.dim(),
            form.n()
        )));
    }
    // Replace axis k of length N by axis of length J_k, one slot at a time.
    let mut dims = vec![form.n(); form.m()];
    let mut cur = form.coeffs().to_vec();
    for (k, family) in families.iter().enumerate() {
        let outer: usize = dims[..k].iter().product();
        let inner: usize = dims[k + 1..].iter().product();
        let (n, j) = (dims[k], family.len());
        let mut next = vec![0.0; outer * j * inner];
        for o in 0..outer {
            for (jj, x) in family.vectors().iter().enumerate() {
                let dst = &mut next[(o * j + jj) * inner..(o * j + jj + 1) * inner];
                for (i, &xi) in x.iter().enumerate() {
                    let src = &cur[(o * n + i) * inner..(o * n + i + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += xi * s;
                    }
                }
            }
        }
        dims[k] = j;
        cur = next;
    }
    Ok(p_norm(&cur, p))
}
