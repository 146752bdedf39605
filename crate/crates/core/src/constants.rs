//! Bohnenblust-Hille constant schemes.
//!
//! All recurrences run in the `log2` domain. While every Khinchine constant
//! on a recurrence path sits on the power-of-two branch, the exponent is kept
//! as an exact rational; afterwards only the float `log2` is carried.
//!
//! | scheme        | base                              | step                                                  |
//! |---------------|-----------------------------------|-------------------------------------------------------|
//! | `Classic`     | `2^((m-1)/2)`                     | closed form                                           |
//! | `DSPComplex`  | `(2/sqrt(pi))^(m-1)`              | closed form                                           |
//! | `Cor52Real`   | `C_2 = sqrt(2)`                   | `C_m = 2^((m-1)/(2m)) (C_{m-1} / A_{(2m-2)/m})^(1-1/m)` |
//! | `Cor52Complex`| `C_2 = K_G`                       | same step as `Cor52Real`                              |
//! | `NewReal`     | `C_2 = 2^(1/2)`, `C_3 = 2^(5/6)`  | `C_m = 2^(1/2) (C_{m-2} / A_{(2m-4)/(m-1)}^2)^((m-2)/m)`  |
//!
//! For the `Cor52` schemes, once `A_{(2m-2)/m}` leaves the power-of-two branch
//! (m >= 14) the step divides by `A^2` instead of `A`, which is how the
//! published comparison table evaluates its m = 14 entry (13.457). Since
//! `A <= 1` this only loosens the bound.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::RwLock;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponents::to_f64;
use crate::special_fn::{khinchine_A, KhinchineBranch};
use crate::Rational;

/// Upper estimate of the complex Grothendieck constant used as the complex
/// `Cor52` base case.
pub const GROTHENDIECK_KG: f64 = 1.40491;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Classic,
    DSPComplex,
    Cor52Real,
    Cor52Complex,
    NewReal,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::NewReal,
        SchemeId::Cor52Real,
        SchemeId::Classic,
        SchemeId::Cor52Complex,
        SchemeId::DSPComplex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Classic => "classic",
            SchemeId::DSPComplex => "dsp",
            SchemeId::Cor52Real => "cor52",
            SchemeId::Cor52Complex => "cor52c",
            SchemeId::NewReal => "new",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidRange(format!("unknown scheme '{s}'")))
    }
}

impl Serialize for SchemeId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

/// A constant `C_m`, stored as `log2` and, when available, as an exact
/// power of two times an optional prefactor (`K_G^(2/m)` for the complex
/// `Cor52` scheme).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Log2Constant {
    pub scheme: SchemeId,
    pub m: u32,
    #[serde(serialize_with = "serialize_rational")]
    pub exact_exponent: Option<Rational>,
    pub prefactor: Option<f64>,
    pub log2_value: f64,
    pub value: f64,
}

fn serialize_rational<S: Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(*r)),
        None => s.serialize_none(),
    }
}

pub fn format_rational(r: Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Log2Constant {
    fn exact(scheme: SchemeId, m: u32, exponent: Rational, kg_power: Option<Rational>) -> Self {
        let prefactor = kg_power.map(|k| GROTHENDIECK_KG.powf(to_f64(k)));
        let log2_value = to_f64(exponent) + prefactor.map_or(0.0, f64::log2);
        Self {
            scheme,
            m,
            exact_exponent: Some(exponent),
            prefactor,
            log2_value,
            value: 2f64.powf(to_f64(exponent)) * prefactor.unwrap_or(1.0),
        }
    }

    fn float(scheme: SchemeId, m: u32, log2_value: f64) -> Self {
        Self {
            scheme,
            m,
            exact_exponent: None,
            prefactor: None,
            log2_value,
            value: log2_value.exp2(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    exact: Option<Rational>,
    kg_power: Option<Rational>,
    log2: f64,
}

impl Step {
    fn exact(exponent: Rational, kg_power: Option<Rational>) -> Self {
        let log2 = to_f64(exponent) + kg_power.map_or(0.0, |k| to_f64(k) * GROTHENDIECK_KG.log2());
        Self {
            exact: Some(exponent),
            kg_power,
            log2,
        }
    }
}

/// `log2 A_p` for rational `p`; exact on the power-of-two branch.
fn log2_khinchine(p: Rational) -> Result<(f64, Option<Rational>)> {
    let a = khinchine_A(to_f64(p))?;
    let exact = match a.branch {
        KhinchineBranch::PowerOfTwo => Some(Rational::new(1, 2) - p.recip()),
        KhinchineBranch::GammaFormula => None,
    };
    Ok((a.log2(), exact))
}

// Memoized recurrence values indexed by m (entries 0 and 1 unused).
static COR52_REAL: RwLock<Vec<Step>> = RwLock::new(Vec::new());
static COR52_COMPLEX: RwLock<Vec<Step>> = RwLock::new(Vec::new());
static NEW_REAL: RwLock<Vec<Step>> = RwLock::new(Vec::new());

fn cache_for(scheme: SchemeId) -> &'static RwLock<Vec<Step>> {
    match scheme {
        SchemeId::Cor52Real => &COR52_REAL,
        SchemeId::Cor52Complex => &COR52_COMPLEX,
        SchemeId::NewReal => &NEW_REAL,
        SchemeId::Classic | SchemeId::DSPComplex => unreachable!("closed-form scheme"),
    }
}

fn recurrence_step(scheme: SchemeId, m: u32) -> Result<Step> {
    let cache = cache_for(scheme);
    if let Some(step) = cache.read().unwrap().get(m as usize) {
        return Ok(*step);
    }
    let mut steps = cache.write().unwrap();
    if steps.is_empty() {
        let placeholder = Step::exact(Rational::from_integer(0), None);
        steps.extend([placeholder, placeholder]);
        match scheme {
            SchemeId::Cor52Real => steps.push(Step::exact(Rational::new(1, 2), None)),
            SchemeId::Cor52Complex => steps.push(Step::exact(
                Rational::from_integer(0),
                Some(Rational::from_integer(1)),
            )),
            SchemeId::NewReal => {
                steps.push(Step::exact(Rational::new(1, 2), None));
                steps.push(Step::exact(Rational::new(5, 6), None));
            }
            _ => unreachable!(),
        }
    }
    while steps.len() <= m as usize {
        let next = steps.len() as i64;
        let step = match scheme {
            SchemeId::NewReal => new_real_step(next, &steps[next as usize - 2])?,
            _ => cor52_step(next, &steps[next as usize - 1])?,
        };
        steps.push(step);
    }
    Ok(steps[m as usize])
}

fn cor52_step(m: i64, prev: &Step) -> Result<Step> {
    let lead = Rational::new(m - 1, 2 * m);
    let weight = Rational::new(m - 1, m);
    let (log2_a, exact_a) = log2_khinchine(Rational::new(2 * m - 2, m))?;
    Ok(match (prev.exact, exact_a) {
        (Some(e), Some(a)) => {
            Step::exact(lead + weight * (e - a), prev.kg_power.map(|k| weight * k))
        }
        _ => Step {
            exact: None,
            kg_power: None,
            log2: to_f64(lead) + to_f64(weight) * (prev.log2 - 2.0 * log2_a),
        },
    })
}

fn new_real_step(m: i64, prev2: &Step) -> Result<Step> {
    let half = Rational::new(1, 2);
    let weight = Rational::new(m - 2, m);
    let (log2_a, exact_a) = log2_khinchine(Rational::new(2 * m - 4, m - 1))?;
    Ok(match (prev2.exact, exact_a) {
        (Some(e), Some(a)) => {
            Step::exact(half + weight * (e - Rational::from_integer(2) * a), None)
        }
        _ => Step {
            exact: None,
            kg_power: None,
            log2: 0.5 + to_f64(weight) * (prev2.log2 - 2.0 * log2_a),
        },
    })
}

/// The constant `C_m` of the given scheme, `m >= 2`.
pub fn constant(scheme: SchemeId, m: u32) -> Result<Log2Constant> {
    if m < 2 {
        return Err(Error::Domain {
            what: "constant",
            value: m as f64,
            domain: "m >= 2",
        });
    }
    Ok(match scheme {
        SchemeId::Classic => Log2Constant::exact(scheme, m, Rational::new(m as i64 - 1, 2), None),
        SchemeId::DSPComplex => {
            let base = (2.0 / std::f64::consts::PI.sqrt()).log2();
            Log2Constant::float(scheme, m, (m - 1) as f64 * base)
        }
        _ => {
            let step = recurrence_step(scheme, m)?;
            match step.exact {
                Some(e) => Log2Constant::exact(scheme, m, e, step.kg_power),
                None => Log2Constant::float(scheme, m, step.log2),
            }
        }
    })
}

/// Parity closed form of the two-step recurrence, valid for `2 <= m <= 14`.
pub fn closed_form_new(m: u32) -> Result<Log2Constant> {
    if !(2..=14).contains(&m) {
        return Err(Error::InvalidRange(format!(
            "closed form for the new real constants holds for 2 <= m <= 14, got m = {m}"
        )));
    }
    let m = m as i64;
    let num = if m % 2 == 0 {
        m * m + 6 * m - 8
    } else {
        m * m + 6 * m - 7
    };
    Ok(Log2Constant::exact(
        SchemeId::NewReal,
        m as u32,
        Rational::new(num, 8 * m),
        None,
    ))
}

/// Closed form of the one-step recurrence, valid for `2 <= m <= 13`.
pub fn closed_form_cor52(m: u32, field: Field) -> Result<Log2Constant> {
    if !(2..=13).contains(&m) {
        return Err(Error::InvalidRange(format!(
            "closed form for the one-step recurrence holds for 2 <= m <= 13, got m = {m}"
        )));
    }
    let mi = m as i64;
    Ok(match field {
        Field::Real => Log2Constant::exact(
            SchemeId::Cor52Real,
            m,
            Rational::new(mi * mi + mi - 2, 4 * mi),
            None,
        ),
        Field::Complex => Log2Constant::exact(
            SchemeId::Cor52Complex,
            m,
            Rational::new(mi * mi + mi - 6, 4 * mi),
            Some(Rational::new(2, mi)),
        ),
    })
}

/// `C_m / C_{m-2}^((m-2)/m)`, evaluated in the `log2` domain.
pub fn asymptotic_ratio(scheme: SchemeId, m: u32) -> Result<f64> {
    if m < 4 {
        return Err(Error::Domain {
            what: "asymptotic_ratio",
            value: m as f64,
            domain: "m >= 4",
        });
    }
    let log2 = match scheme {
        // closed form 2^((2m-3)/m)
        SchemeId::Classic => (2.0 * m as f64 - 3.0) / m as f64,
        _ => {
            let hi = constant(scheme, m)?.log2_value;
            let lo = constant(scheme, m - 2)?.log2_value;
            hi - (m - 2) as f64 / m as f64 * lo
        }
    };
    Ok(log2.exp2())
}

/// One column of a [`ConstantsTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableColumn {
    Scheme(SchemeId),
    ClosedNew,
    ClosedCor52(Field),
}

impl TableColumn {
    pub fn name(self) -> &'static str {
        match self {
            TableColumn::Scheme(id) => id.name(),
            TableColumn::ClosedNew => "new-closed",
            TableColumn::ClosedCor52(Field::Real) => "cor52-closed",
            TableColumn::ClosedCor52(Field::Complex) => "cor52c-closed",
        }
    }

    pub fn evaluate(self, m: u32) -> Result<Log2Constant> {
        match self {
            TableColumn::Scheme(id) => constant(id, m),
            TableColumn::ClosedNew => closed_form_new(m),
            TableColumn::ClosedCor52(field) => closed_form_cor52(m, field),
        }
    }
}

impl From<SchemeId> for TableColumn {
    fn from(id: SchemeId) -> Self {
        TableColumn::Scheme(id)
    }
}

impl FromStr for TableColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "new-closed" => TableColumn::ClosedNew,
            "cor52-closed" => TableColumn::ClosedCor52(Field::Real),
            "cor52c-closed" => TableColumn::ClosedCor52(Field::Complex),
            other => TableColumn::Scheme(other.parse()?),
        })
    }
}

impl Serialize for TableColumn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub m: u32,
    pub entries: Vec<Log2Constant>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsTable {
    pub columns: Vec<TableColumn>,
    pub rows: Vec<TableRow>,
    pub precision: usize,
}

pub fn table(
    m_range: RangeInclusive<u32>,
    columns: &[TableColumn],
    precision: usize,
) -> Result<ConstantsTable> {
    if m_range.is_empty() || *m_range.start() < 2 {
        return Err(Error::InvalidRange(format!(
            "table needs 2 <= m_min <= m_max, got {}..={}",
            m_range.start(),
            m_range.end()
        )));
    }
    if columns.is_empty() {
        return Err(Error::InvalidRange("no schemes selected".into()));
    }
    let rows = m_range
        .map(|m| {
            let entries = columns
                .iter()
                .map(|c| c.evaluate(m))
                .collect::<Result<Vec<_>>>()?;
            Ok(TableRow { m, entries })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConstantsTable {
        columns: columns.to_vec(),
        rows,
        precision,
    })
}
