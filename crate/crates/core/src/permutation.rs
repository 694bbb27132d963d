//! Bijections on party indices `1..=n`.
//!
//! A [`Permutation`] records where each slot's content goes: the qubit held at
//! slot `i` ends up at slot `P(i)`. With this reading the cycle `1→2→3→1`
//! takes `|abc⟩` to `|cab⟩`, and a local Bell pair `B(i,i)` whose second half
//! is permuted becomes the shared pair `B(i,P(i))`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermutationError {
    #[error("permutation images must be a bijection on 1..={n}, got {images:?}")]
    NotBijective { n: usize, images: Vec<usize> },
    #[error("permutation must act on at least one index")]
    Empty,
    #[error("cycle entries must be distinct indices in 1..={n}, got {cycle:?}")]
    BadCycle { n: usize, cycle: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// `images[i-1] = P(i)`, 1-based.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermutationError> {
        let n = images.len();
        if n == 0 {
            return Err(PermutationError::Empty);
        }
        let mut seen = vec![false; n];
        for &p in &images {
            if p == 0 || p > n || seen[p - 1] {
                return Err(PermutationError::NotBijective { n, images });
            }
            seen[p - 1] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (1..=n).collect(),
        }
    }

    /// The successor cycle `i → i+1`, `n → 1`.
    pub fn cycle(n: usize) -> Self {
        Self {
            images: (1..=n).map(|i| i % n + 1).collect(),
        }
    }

    /// Builds a permutation of `1..=n` from disjoint cycles; unlisted indices are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, PermutationError> {
        let mut images: Vec<usize> = (1..=n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &i) in cycle.iter().enumerate() {
                if i == 0 || i > n || touched[i - 1] {
                    return Err(PermutationError::BadCycle {
                        n,
                        cycle: cycle.clone(),
                    });
                }
                touched[i - 1] = true;
                images[i - 1] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::from_images(images)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `P(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p - 1] = i + 1;
        }
        Self { images: inv }
    }

    pub fn is_derangement(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| p != i + 1)
    }

    pub fn compose(&self, then: &Permutation) -> Permutation {
        Permutation {
            images: (1..=self.len()).map(|i| then.apply(self.apply(i))).collect(),
        }
    }

    /// All permutations of `1..=n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        use itertools::Itertools;
        (1..=n)
            .permutations(n)
            .map(|images| Permutation { images })
    }

    pub fn derangements(n: usize) -> impl Iterator<Item = Permutation> {
        Self::all(n).filter(Permutation::is_derangement)
    }

    /// Swaps the consecutive pairs `(1,2), (3,4), …`; `n` must be even.
    pub fn pairwise_swap(n: usize) -> Option<Permutation> {
        if n == 0 || n % 2 != 0 {
            return None;
        }
        let images = (1..=n).map(|i| if i % 2 == 1 { i + 1 } else { i - 1 }).collect();
        Some(Permutation { images })
    }

    /// Pairwise swaps on the first `n-3` indices and the cycle
    /// `n-2 → n-1 → n → n-2` on the rest; `n` must be odd and at least 3.
    pub fn pairwise_swap_cycle(n: usize) -> Option<Permutation> {
        if n < 3 || n % 2 == 0 {
            return None;
        }
        let mut images: Vec<usize> = (1..=n - 3)
            .map(|i| if i % 2 == 1 { i + 1 } else { i - 1 })
            .collect();
        images.extend([n - 1, n, n - 2]);
        Some(Permutation { images })
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = PermutationError;

    fn try_from(images: Vec<usize>) -> Result<Self, Self::Error> {
        Self::from_images(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}→{}", i + 1, p)?;
        }
        write!(f, "]")
    }
}
