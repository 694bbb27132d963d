use num_traits::{Signed, Zero};

use super::GraphError;
use crate::rational::{self, Rational};

/// Change in pairwise entanglement, target minus resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaMatrix {
    rows: Vec<Vec<Rational>>,
}

impl DeltaMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, GraphError> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::Shape { n, row: i, len: row.len() });
            }
            for (j, d) in row.iter().enumerate() {
                if i == j && !d.is_zero() {
                    return Err(GraphError::Diagonal { what: "delta", i, j });
                }
                if *d != rows[j][i] {
                    return Err(GraphError::Asymmetric { what: "delta", i, j });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self, GraphError> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| rational::int(x)).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i - 1][j - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaVerdict {
    /// No laboratory's total entanglement with the others increased.
    pub rows_nonpositive: bool,
    /// At most one pair gained entanglement.
    pub single_gain: bool,
    /// The gaining pair received at most half of the entanglement lost by the others.
    pub half_loss: bool,
    /// `|Δ_ik + Δ_jk|/2 − Δ_ij` for the gaining pair `(i, j)`, if there is one.
    pub half_loss_slack: Option<Rational>,
}

impl DeltaVerdict {
    pub fn all_hold(&self) -> bool {
        self.rows_nonpositive && self.single_gain && self.half_loss
    }
}

/// Checks a three-laboratory Δ against entanglement monotonicity.
pub fn delta_three_lab_bound(delta: &DeltaMatrix) -> Result<DeltaVerdict, GraphError> {
    if delta.n() != 3 {
        return Err(GraphError::Dimension { expected: 3, got: delta.n() });
    }
    let rows_nonpositive = (1..=3).all(|i| {
        let s: Rational = (1..=3).map(|j| delta.entry(i, j).clone()).sum();
        !s.is_positive()
    });
    let gains: Vec<(usize, usize)> = [(1, 2), (1, 3), (2, 3)]
        .into_iter()
        .filter(|&(i, j)| delta.entry(i, j).is_positive())
        .collect();
    let single_gain = gains.len() <= 1;
    let (half_loss, half_loss_slack) = match gains.as_slice() {
        [] => (true, None),
        &[(i, j)] => {
            let k = 6 - i - j;
            let loss = (delta.entry(i, k) + delta.entry(j, k)).abs();
            let slack = loss / rational::int(2) - delta.entry(i, j);
            (!slack.is_negative(), Some(slack))
        }
        _ => (false, None),
    };
    Ok(DeltaVerdict {
        rows_nonpositive,
        single_gain,
        half_loss,
        half_loss_slack,
    })
}
