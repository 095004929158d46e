//! Point counts of Smolyak grids: recursions, closed forms, and the golden
//! tables they reproduce.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::special::binomial;

/// The cardinalities n_i = |X^i| of a nested knot family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountSequence {
    /// n_i = 2i - 1.
    Standard,
    /// n_i = 2i - 1 except n_3 = 3.
    Variant,
    /// Kronrod-Patterson cardinalities clipped to 2i - 1.
    Delayed,
    /// An explicit list n_1, n_2, ...; levels beyond the list are an error.
    Explicit(Vec<u64>),
}

impl CountSequence {
    /// n_i for i >= 1; n_0 = 0.
    pub fn n(&self, i: usize) -> Result<u64> {
        if i == 0 {
            return Ok(0);
        }
        let i64_ = i as u64;
        Ok(match self {
            CountSequence::Standard => 2 * i64_ - 1,
            CountSequence::Variant => {
                if i == 3 {
                    3
                } else {
                    2 * i64_ - 1
                }
            }
            CountSequence::Delayed => kronrod_patterson(i).min(2 * i64_ - 1),
            CountSequence::Explicit(v) => *v.get(i - 1).ok_or_else(|| {
                Error::InvalidArgument(format!("count sequence has {} levels, level {i} requested", v.len()))
            })?,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CountSequence::Standard => "std",
            CountSequence::Variant => "variant",
            CountSequence::Delayed => "delayed",
            CountSequence::Explicit(_) => "explicit",
        }
    }
}

/// Size 2^m - 1 of the smallest nested Kronrod-Patterson rule whose degree
/// reaches 2i - 1. The m-th rule (1, 3, 7, 15, ... points) has degree 1 for
/// m = 1 and 3·2^{m-1} - 1 otherwise.
fn kronrod_patterson(i: usize) -> u64 {
    let need = 2 * i as u64 - 1;
    let mut m = 1u32;
    loop {
        let degree = if m == 1 { 1 } else { 3 * (1u64 << (m - 1)) - 1 };
        if degree >= need {
            return (1u64 << m) - 1;
        }
        m += 1;
    }
}

fn overflow() -> Error {
    Error::InvalidArgument("count exceeds 128-bit range".into())
}

/// n(q, d) = |H(q, d)| through the recursion
/// n(q+1, d+1) = Σ_{s=1}^{q-d+1} n(q+1-s, d) (n_s - n_{s-1}), n(q, 1) = n_q.
pub fn count_recursive(seq: &CountSequence, q: usize, d: usize) -> Result<u128> {
    if d == 0 || q < d {
        return Err(Error::InvalidArgument(format!("need q >= d >= 1, got q = {q}, d = {d}")));
    }
    let levels = q - d + 1;
    let mut inc = Vec::with_capacity(levels);
    for s in 1..=levels {
        let (a, b) = (seq.n(s)?, seq.n(s - 1)?);
        if a < b {
            return Err(Error::InvalidArgument(format!("count sequence decreases at level {s}")));
        }
        inc.push(u128::from(a - b));
    }
    // row[t] = n(e + t, e) for the current dimension e, t = 0..levels-1.
    let mut row: Vec<u128> = (1..=levels).map(|i| u128::from(seq.n(i).unwrap())).collect();
    for _ in 1..d {
        let mut next = vec![0u128; levels];
        for t in 0..levels {
            // n(e+1+t, e+1) = Σ_{s=1}^{t+1} n(e+1+t-s, e) inc_s
            let mut acc = 0u128;
            for s in 1..=t + 1 {
                let term = row[t + 1 - s].checked_mul(inc[s - 1]).ok_or_else(overflow)?;
                acc = acc.checked_add(term).ok_or_else(overflow)?;
            }
            next[t] = acc;
        }
        row = next;
    }
    Ok(row[levels - 1])
}

/// Σ_{s=0}^{min(k,d)} C(k, s) C(k+d-s, k): the grid size for n_i = 2i - 1 at
/// q = d + k.
pub fn count_closed_form(k: usize, d: usize) -> Result<u128> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let mut acc = 0u128;
    for s in 0..=k.min(d) {
        let term = binomial(k as u64, s as u64)
            .checked_mul(binomial((k + d - s) as u64, k as u64))
            .ok_or_else(overflow)?;
        acc = acc.checked_add(term).ok_or_else(overflow)?;
    }
    Ok(acc)
}

/// Grid size for n_i = 2i-1 (n_3 = 3) through the six-term recursion
/// n(q+2, d+1) = n(q+1, d+1) + n(q+1, d) + n(q, d) - 2n(q-1, d) + 4n(q-2, d) - 2n(q-3, d).
pub fn count_variant_recursion(q: usize, d: usize) -> Result<u128> {
    if d == 0 || q < d {
        return Err(Error::InvalidArgument(format!("need q >= d >= 1, got q = {q}, d = {d}")));
    }
    let mut memo = HashMap::new();
    let v = variant_rec(q as i64, d as i64, &mut memo);
    u128::try_from(v).map_err(|_| Error::Integrity(format!("negative variant count at ({q}, {d})")))
}

fn variant_rec(q: i64, d: i64, memo: &mut HashMap<(i64, i64), i128>) -> i128 {
    if q < d {
        return 0;
    }
    if q == d {
        return 1;
    }
    if d == 1 {
        return CountSequence::Variant.n(q as usize).unwrap() as i128;
    }
    if let Some(v) = memo.get(&(q, d)) {
        return *v;
    }
    let (p, e) = (q - 2, d - 1);
    let v = variant_rec(p + 1, e + 1, memo) + variant_rec(p + 1, e, memo) + variant_rec(p, e, memo)
        - 2 * variant_rec(p - 1, e, memo)
        + 4 * variant_rec(p - 2, e, memo)
        - 2 * variant_rec(p - 3, e, memo);
    memo.insert((q, d), v);
    v
}

/// Number of distinct points after radially projecting the variant grid
/// for the Gaussian weight at q = d + k: 2d² for k = 2 and
/// (4d³ - 6d² + 8d)/3 for k = 3.
pub fn count_projected(k: usize, d: usize) -> Result<u128> {
    if d < k {
        return Err(Error::InvalidArgument(format!("need d >= k, got d = {d}, k = {k}")));
    }
    let d = d as u128;
    match k {
        2 => Ok(2 * d * d),
        3 => Ok((4 * d * d * d + 8 * d - 6 * d * d) / 3),
        _ => Err(Error::Unsupported(format!("projected counts are only known for k in {{2, 3}}, got {k}"))),
    }
}

/// C(k+d, d) · min(2^k, 2^d), an upper bound for the n_i = 2i-1 count.
pub fn count_upper_bound(k: usize, d: usize) -> Result<u128> {
    let pow = 1u128.checked_shl(k.min(d) as u32).ok_or_else(overflow)?;
    binomial((k + d) as u64, d as u64).checked_mul(pow).ok_or_else(overflow)
}

/// Which of the five golden count tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    /// Smolyak grids with n_i = 2i - 1.
    Standard,
    /// Smolyak grids with n_3 = 3.
    Variant,
    /// Best previously known counts for the Lebesgue measure.
    Known,
    /// Counts of the few-point constructions for fully symmetric weights.
    New,
    /// Möller's lower bound.
    Moller,
}

impl TableId {
    pub const ALL: [TableId; 5] = [TableId::Standard, TableId::Variant, TableId::Known, TableId::New, TableId::Moller];

    /// 1-based table number.
    pub fn from_number(n: usize) -> Option<TableId> {
        TableId::ALL.get(n.wrapping_sub(1)).copied()
    }

    pub fn number(self) -> usize {
        TableId::ALL.iter().position(|t| *t == self).unwrap() + 1
    }

    pub fn title(self) -> &'static str {
        match self {
            TableId::Standard => "Number of knots for Smolyak's method with n_i = 2i-1",
            TableId::Variant => "Number of knots for Smolyak's method with n_i = 2i-1, n_3 = 3",
            TableId::Known => "Known values for the Lebesgue measure",
            TableId::New => "New values for fully symmetric weight functions",
            TableId::Moller => "Moller's lower bound",
        }
    }
}

/// A table of knot counts indexed by (degree ℓ, dimension d).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub id: TableId,
    pub degrees: Vec<usize>,
    pub dims: Vec<usize>,
    /// values[row][col]; `None` where the construction does not apply.
    pub values: Vec<Vec<Option<u128>>>,
}

impl CountTable {
    pub fn get(&self, degree: usize, dim: usize) -> Option<u128> {
        let r = self.degrees.iter().position(|x| *x == degree)?;
        let c = self.dims.iter().position(|x| *x == dim)?;
        self.values[r][c]
    }

    /// Number of non-empty entries.
    pub fn entries(&self) -> usize {
        self.values.iter().flatten().filter(|v| v.is_some()).count()
    }

    /// Entries where `self` and `other` disagree: (ℓ, d, self, other).
    pub fn diff(&self, other: &CountTable) -> Vec<(usize, usize, Option<u128>, Option<u128>)> {
        let mut out = Vec::new();
        for (r, l) in self.degrees.iter().enumerate() {
            for (c, d) in self.dims.iter().enumerate() {
                let mine = self.values[r][c];
                let theirs = other.get(*l, *d);
                if mine != theirs {
                    out.push((*l, *d, mine, theirs));
                }
            }
        }
        out
    }

    /// Plain-text rendering with one row per degree.
    pub fn render(&self) -> String {
        let mut rows = vec![std::iter::once("l".to_string())
            .chain(self.dims.iter().map(|d| format!("d={d}")))
            .collect::<Vec<_>>()];
        for (r, l) in self.degrees.iter().enumerate() {
            let mut row = vec![l.to_string()];
            row.extend(
                self.values[r]
                    .iter()
                    .map(|v| v.map_or_else(|| "-".to_string(), |x| x.to_string())),
            );
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap())
            .collect();
        let mut s = format!("Table {}: {}\n", self.id.number(), self.id.title());
        for row in rows {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(x, w)| format!("{x:>w$}")).collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
        }
        s
    }
}

const SMALL_DIMS: [usize; 5] = [5, 10, 15, 20, 25];
const WIDE_DIMS: [usize; 7] = [5, 10, 15, 20, 25, 50, 100];
const ALL_DEGREES: [usize; 8] = [3, 5, 7, 9, 11, 13, 15, 17];

const GOLDEN_STANDARD: [[u128; 5]; 8] = [
    [11, 21, 31, 41, 51],
    [61, 221, 481, 841, 1301],
    [231, 1561, 4991, 11521, 22151],
    [681, 8361, 39041, 118721, 283401],
    [1683, 36365, 246047, 982729, 2908411],
    [3653, 134245, 1303777, 6814249, 24957661],
    [7183, 433905, 5984767, 40754369, 184327311],
    [13073, 1256465, 24331777, 214828609, 1196924561],
];

const GOLDEN_VARIANT: [[u128; 5]; 8] = [
    [11, 21, 31, 41, 51],
    [51, 201, 451, 801, 1251],
    [151, 1201, 4151, 10001, 19751],
    [401, 5301, 27701, 90601, 227001],
    [1003, 19505, 146507, 643009, 2040011],
    [2133, 63805, 655017, 3775769, 15056061],
    [4223, 188745, 2584167, 19111089, 94680111],
    [8113, 511625, 9224937, 85920449, 522028561],
];

const GOLDEN_KNOWN: [[u128; 5]; 8] = [
    [10, 20, 30, 40, 50],
    [51, 201, 451, 801, 1251],
    [141, 1181, 4121, 9961, 19701],
    [391, 5281, 27671, 90561, 226951],
    [903, 19105, 145607, 641409, 2037511],
    [1733, 60205, 642417, 3745369, 14996061],
    [3263, 168825, 2473287, 18743249, 93755311],
    [5983, 431265, 8522247, 82703329, 511676911],
];

const GOLDEN_NEW: [[Option<u128>; 7]; 2] = [
    [Some(61), Some(171), Some(331), Some(541), Some(801), Some(2851), Some(10701)],
    [None, Some(1101), Some(2801), Some(5601), Some(9751), Some(59501), Some(404001)],
];

const GOLDEN_MOLLER: [[u128; 7]; 2] = [
    [31, 111, 241, 421, 651, 2551, 10101],
    [80, 460, 1390, 3120, 5900, 44300, 343600],
];

/// The table as printed in the literature, embedded verbatim.
pub fn golden_table(id: TableId) -> CountTable {
    let some = |rows: &[[u128; 5]]| -> Vec<Vec<Option<u128>>> {
        rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect()
    };
    match id {
        TableId::Standard => CountTable {
            id,
            degrees: ALL_DEGREES.to_vec(),
            dims: SMALL_DIMS.to_vec(),
            values: some(&GOLDEN_STANDARD),
        },
        TableId::Variant => CountTable {
            id,
            degrees: ALL_DEGREES.to_vec(),
            dims: SMALL_DIMS.to_vec(),
            values: some(&GOLDEN_VARIANT),
        },
        TableId::Known => CountTable {
            id,
            degrees: ALL_DEGREES.to_vec(),
            dims: SMALL_DIMS.to_vec(),
            values: some(&GOLDEN_KNOWN),
        },
        TableId::New => CountTable {
            id,
            degrees: vec![5, 7],
            dims: WIDE_DIMS.to_vec(),
            values: GOLDEN_NEW.iter().map(|r| r.to_vec()).collect(),
        },
        TableId::Moller => CountTable {
            id,
            degrees: vec![5, 7],
            dims: WIDE_DIMS.to_vec(),
            values: GOLDEN_MOLLER
                .iter()
                .map(|r| r.iter().map(|v| Some(*v)).collect())
                .collect(),
        },
    }
}

/// Knot count of the best known Lebesgue rule of degree ℓ = 2k+1.
pub fn known_count(degree: usize, d: usize) -> Result<u128> {
    check_odd(degree)?;
    let k = (degree - 1) / 2;
    let d128 = d as u128;
    match degree {
        1 => Ok(1),
        3 => Ok(2 * d128),
        5 => Ok(2 * d128 * d128 + 1),
        7 => Ok(count_recursive(&CountSequence::Variant, d + 3, d)? - 2 * d128),
        _ => count_recursive(&CountSequence::Delayed, d + k, d),
    }
}

/// Knot count of the few-point fully symmetric constructions:
/// d² + 7d + 1 for degree 5 (d >= 4) and (d³ + 21d² + 20d + 3)/3 for
/// degree 7 (d >= 6).
pub fn new_count(degree: usize, d: usize) -> Result<u128> {
    let x = d as u128;
    match degree {
        5 if d >= 4 => Ok(x * x + 7 * x + 1),
        7 if d >= 6 => Ok((x * x * x + 21 * x * x + 20 * x + 3) / 3),
        5 | 7 => Err(Error::DimensionTooSmall {
            dim: d,
            degree,
            min: if degree == 5 { 4 } else { 6 },
        }),
        _ => Err(Error::Unsupported(format!("no few-point construction of degree {degree}"))),
    }
}

/// Count of the Smolyak grid with the given sequence at degree ℓ = 2k+1.
pub fn smolyak_count(seq: &CountSequence, degree: usize, d: usize) -> Result<u128> {
    check_odd(degree)?;
    count_recursive(seq, d + (degree - 1) / 2, d)
}

fn check_odd(degree: usize) -> Result<()> {
    if degree % 2 == 0 {
        return Err(Error::InvalidArgument(format!("degree must be odd, got {degree}")));
    }
    Ok(())
}

/// Recomputes a table from the count formulas on the golden table's grid.
pub fn table(id: TableId) -> Result<CountTable> {
    let golden = golden_table(id);
    let mut values = Vec::with_capacity(golden.degrees.len());
    for l in &golden.degrees {
        let mut row = Vec::with_capacity(golden.dims.len());
        for d in &golden.dims {
            let v = match id {
                TableId::Standard => Some(smolyak_count(&CountSequence::Standard, *l, *d)?),
                TableId::Variant => Some(smolyak_count(&CountSequence::Variant, *l, *d)?),
                TableId::Known => Some(known_count(*l, *d)?),
                TableId::New => new_count(*l, *d).ok(),
                TableId::Moller => Some(crate::verify::moller_bound(*l, *d)?),
            };
            row.push(v);
        }
        values.push(row);
    }
    Ok(CountTable {
        id,
        degrees: golden.degrees,
        dims: golden.dims,
        values,
    })
}
