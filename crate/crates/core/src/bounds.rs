//! Closed-form resource bounds for collective operations on `n` qubits.
//!
//! All arithmetic is exact. Entanglement is in ebits, communication in bits;
//! supplementary measurement information is never counted.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::graphs::{
    total_from_edge_weight, CommunicationGraph, EntanglementGraph, GraphKind, Partition, TargetOp,
};
use crate::rational::{self, ceil_int, factorial, int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("bound needs n >= {min}, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("bound is defined for odd n only, got {0}")]
    EvenN(usize),
    #[error("exhaustive search is limited to n <= {max}, got {n}")]
    SearchTooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// An (ebits, bits) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resources {
    pub ebits: Rational,
    pub bits: Rational,
}

impl Resources {
    fn new(ebits: Rational, bits: Rational) -> Self {
        Self { ebits, bits }
    }
}

fn need(n: usize, min: usize) -> Result<i64, BoundsError> {
    if n < min {
        return Err(BoundsError::TooSmall { n, min });
    }
    Ok(n as i64)
}

fn need_odd(n: usize) -> Result<i64, BoundsError> {
    let m = need(n, 3)?;
    if n % 2 == 0 {
        return Err(BoundsError::EvenN(n));
    }
    Ok(m)
}

/// Hub-based teleportation: `2(n−1)` ebits, `4(n−1)` bits.
pub fn teleport_resources(n: usize) -> Result<Resources, BoundsError> {
    let n = need(n, 2)?;
    Ok(Resources::new(int(2 * (n - 1)), int(4 * (n - 1))))
}

/// Most entanglement / communication any single `n`-qubit operation can
/// establish: `n` ebits and `2n` bits, reached by derangements.
pub fn distillation_caps(n: usize) -> Result<Resources, BoundsError> {
    let n = need(n, 2)?;
    Ok(Resources::new(int(n), int(2 * n)))
}

/// Lower bounds on the resources that suffice for every operation.
///
/// Even `n` gives the teleportation values; odd `n` gives them scaled by `n/(n+1)`.
pub fn lower_bounds(n: usize) -> Result<Resources, BoundsError> {
    let m = need(n, 2)?;
    if n % 2 == 0 {
        return teleport_resources(n);
    }
    Ok(Resources::new(
        ratio(2 * m * (m - 1), m + 1),
        ratio(4 * m * (m - 1), m + 1),
    ))
}

/// Integer one-shot resources implied by [`lower_bounds`] for odd `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerOneShot {
    pub ebits: BigInt,
    pub bits: BigInt,
    /// Teleportation ebits minus `ebits`.
    pub ebit_shortfall: BigInt,
    /// Teleportation bits minus `bits`: 2 for n = 3, 5 and 3 beyond.
    pub bit_shortfall: BigInt,
}

pub fn integer_one_shot_bounds(n: usize) -> Result<IntegerOneShot, BoundsError> {
    need_odd(n)?;
    let lower = lower_bounds(n)?;
    let tele = teleport_resources(n)?;
    let ebits = ceil_int(&lower.ebits);
    let bits = ceil_int(&lower.bits);
    Ok(IntegerOneShot {
        ebit_shortfall: tele.ebits.to_integer() - &ebits,
        bit_shortfall: tele.bits.to_integer() - &bits,
        ebits,
        bits,
    })
}

/// Bounds that follow if at most half of the expendable resources can be
/// moved to the gaining edges. Conditional on that hypothesis.
pub fn half_transfer_bounds(n: usize) -> Result<Resources, BoundsError> {
    let m = need_odd(n)?;
    let factor = int(1) + ratio(3, m * m);
    Ok(Resources::new(
        int(2 * (m - 1)) / &factor,
        int(4 * (m - 1)) / &factor,
    ))
}

/// Ceiling of the half-transfer communication bound, `⌈4(n−1)/(1+3/n²)⌉`.
/// The formula is evaluated for any `n ≥ 3`.
pub fn integer_half_transfer_bits(n: usize) -> Result<BigInt, BoundsError> {
    let m = need(n, 3)?;
    let factor = int(1) + ratio(3, m * m);
    Ok(ceil_int(&(int(4 * (m - 1)) / factor)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub n: usize,
    /// `2n(n−1)/(n+1) ≥ n`.
    pub odd_bound_exceeds_cap: bool,
    pub odd_bound_equals_cap: bool,
    /// `2(n−1)/(1+3/n²) ≥ 2(n−1) − 1`.
    pub half_transfer_exceeds_integer: bool,
    pub half_transfer_equals_integer: bool,
    /// Whether the rounded-up half-transfer bits equal the teleportation bits.
    pub integer_bits_reach_teleport: bool,
    /// Whether they fall at most one bit short of the teleportation bits.
    pub integer_bits_within_one: bool,
}

/// Evaluates the comparisons between bounds at `n ≥ 3`.
pub fn comparison_predicates(n: usize) -> Result<Comparison, BoundsError> {
    let m = need(n, 3)?;
    let odd_bound = ratio(2 * m * (m - 1), m + 1);
    let cap = int(m);
    let ht = int(2 * (m - 1)) / (int(1) + ratio(3, m * m));
    let integer = int(2 * (m - 1) - 1);
    let ht_bits = integer_half_transfer_bits(n)?;
    let tele_bits = BigInt::from(4 * (m - 1));
    Ok(Comparison {
        n,
        odd_bound_exceeds_cap: odd_bound >= cap,
        odd_bound_equals_cap: odd_bound == cap,
        half_transfer_exceeds_integer: ht >= integer,
        half_transfer_equals_integer: ht == integer,
        integer_bits_reach_teleport: ht_bits == tele_bits,
        integer_bits_within_one: &tele_bits - &ht_bits <= BigInt::from(1),
    })
}

/// Every bound at one `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub n: usize,
    pub parity: Parity,
    pub teleport: Resources,
    pub lower: Resources,
    pub cap: Resources,
    /// Odd `n` only; conditional on the half-transfer hypothesis.
    pub half_transfer: Option<Resources>,
    /// Rounded-up lower bounds.
    pub integer_one_shot_e: BigInt,
    pub integer_one_shot_c: BigInt,
    /// Set for n = 3, where optimality is unresolved.
    pub open: bool,
}

pub fn bound_report(n: usize) -> Result<BoundReport, BoundsError> {
    let lower = lower_bounds(n)?;
    let half_transfer = if n % 2 == 1 && n >= 3 {
        Some(half_transfer_bounds(n)?)
    } else {
        None
    };
    Ok(BoundReport {
        n,
        parity: Parity::of(n),
        teleport: teleport_resources(n)?,
        cap: distillation_caps(n)?,
        integer_one_shot_e: ceil_int(&lower.ebits),
        integer_one_shot_c: ceil_int(&lower.bits),
        lower,
        half_transfer,
        open: n == 3,
    })
}

/// Rows `n = 2..=n_max` of the bound table.
pub fn bound_table(n_max: usize) -> Result<Vec<BoundReport>, BoundsError> {
    need(n_max, 2)?;
    (2..=n_max).map(bound_report).collect()
}

/// Column names of [`table_csv`].
pub const CSV_HEADER: &str = "n,kind,teleport,lower,half_transfer,cap,integer_one_shot";

/// Two rows per `n` (entanglement, communication); rationals as `p/q`,
/// odd-only columns left empty for even `n`.
pub fn table_csv(rows: &[BoundReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let ht = r.half_transfer.as_ref();
        let lines = [
            (
                "entanglement",
                &r.teleport.ebits,
                &r.lower.ebits,
                ht.map(|h| &h.ebits),
                &r.cap.ebits,
                &r.integer_one_shot_e,
            ),
            (
                "communication",
                &r.teleport.bits,
                &r.lower.bits,
                ht.map(|h| &h.bits),
                &r.cap.bits,
                &r.integer_one_shot_c,
            ),
        ];
        for (kind, tele, lower, half, cap, one_shot) in lines {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                kind,
                rational::format(tele),
                rational::format(lower),
                half.map(rational::format).unwrap_or_default(),
                rational::format(cap),
                one_shot
            ));
        }
    }
    out
}

/// JSON form of the table, including the `open` and `conditional` flags.
pub fn table_json(rows: &[BoundReport]) -> serde_json::Value {
    let f = rational::format;
    serde_json::Value::Array(
        rows.iter()
            .map(|r| {
                let ht = r.half_transfer.as_ref();
                serde_json::json!({
                    "n": r.n,
                    "parity": r.parity,
                    "open": r.open,
                    "entanglement": {
                        "teleport": f(&r.teleport.ebits),
                        "lower": f(&r.lower.ebits),
                        "half_transfer": ht.map(|h| f(&h.ebits)),
                        "half_transfer_conditional": ht.is_some(),
                        "cap": f(&r.cap.ebits),
                        "integer_one_shot": r.integer_one_shot_e.to_string(),
                    },
                    "communication": {
                        "teleport": f(&r.teleport.bits),
                        "lower": f(&r.lower.bits),
                        "half_transfer": ht.map(|h| f(&h.bits)),
                        "half_transfer_conditional": ht.is_some(),
                        "cap": f(&r.cap.bits),
                        "integer_one_shot": r.integer_one_shot_c.to_string(),
                    },
                })
            })
            .collect(),
    )
}

/// Lower bounds recomputed from the counting argument on a symmetrised
/// resource graph rather than from the closed forms.
///
/// Over all `n!` relabelled runs of the pairwise-swap operation (with a
/// 3-cycle for odd `n`), the ebits established across the odd/even cut and
/// the bits sent from the even side to the odd side must fit within what a
/// regular complete graph carries across that cut.
pub fn rederived_lower_bounds(n: usize) -> Result<Resources, BoundsError> {
    need(n, 2)?;
    let op = TargetOp::for_parity(n);
    let p = op.permutation(n).expect("defined for every n >= 2 of matching parity");
    let cut = Partition::parity(n).expect("n >= 2 gives two nonempty sides");
    let runs = factorial(n);

    let crossing = (1..=n).filter(|&i| cut.separates(i, p.apply(i))).count() as i64;
    let unit_e = EntanglementGraph::regular_complete(n, int(1));
    let per_edge_e = unit_e.cross_partition(&cut).expect("same n");
    let e = &runs * int(crossing) / per_edge_e;

    // two bits for every qubit carried from side B into side A
    let inv = p.inverse();
    let into_a = (1..=n)
        .filter(|&i| cut.contains_a(i) && !cut.contains_a(inv.apply(i)))
        .count() as i64;
    let unit_c = CommunicationGraph::regular_complete(n, int(1));
    let per_edge_c = unit_c.cross_partition(&cut).expect("same n").b_to_a;
    let c = &runs * int(2 * into_a) / per_edge_c;

    Ok(Resources::new(
        total_from_edge_weight(GraphKind::Entanglement, &e, n),
        total_from_edge_weight(GraphKind::Communication, &c, n),
    ))
}

/// Fewest single-qubit teleportations after which every laboratory holds
/// information about every other: `2(n−1)`.
pub fn min_teleportation_count(n: usize) -> Result<usize, BoundsError> {
    need(n, 2)?;
    Ok(2 * (n - 1))
}

/// Largest `n` accepted by [`min_teleportation_search`].
pub const MAX_SEARCH_N: usize = 5;

/// Breadth-first search over teleportation schedules.
///
/// Each laboratory starts knowing only itself; a teleport from `x` to `y`
/// merges everything `x` knows into `y`. Returns the shortest schedule length
/// after which every laboratory knows all `n`.
pub fn min_teleportation_search(n: usize) -> Result<usize, BoundsError> {
    need(n, 2)?;
    if n > MAX_SEARCH_N {
        return Err(BoundsError::SearchTooLarge { n, max: MAX_SEARCH_N });
    }
    let full: u8 = ((1u16 << n) - 1) as u8;
    let start: Vec<u8> = (0..n).map(|i| 1 << i).collect();
    let mut seen: HashSet<Vec<u8>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, depth)) = queue.pop_front() {
        if state.iter().all(|&k| k == full) {
            return Ok(depth);
        }
        for x in 0..n {
            for y in 0..n {
                if x == y || state[y] | state[x] == state[y] {
                    continue;
                }
                let mut next = state.clone();
                next[y] |= state[x];
                if seen.insert(next.clone()) {
                    queue.push_back((next, depth + 1));
                }
            }
        }
    }
    unreachable!("the all-knowing state is always reachable")
}

/// Smallest odd `n ≥ 3` in `3..=n_max` from which the rounded half-transfer
/// communication bound equals the teleportation bound for every larger odd `n`
/// in range.
pub fn half_transfer_bits_threshold(n_max: usize) -> Option<usize> {
    let odd: Vec<usize> = (3..=n_max).filter(|n| n % 2 == 1).collect();
    let reaches = |n: usize| {
        integer_half_transfer_bits(n)
            .map(|b| b.to_i64() == Some(4 * (n as i64 - 1)))
            .unwrap_or(false)
    };
    let mut threshold = None;
    for &n in odd.iter().rev() {
        if reaches(n) {
            threshold = Some(n);
        } else {
            break;
        }
    }
    threshold
}
