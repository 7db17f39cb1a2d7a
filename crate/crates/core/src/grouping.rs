//! Partitions of `k` successive urns into consecutive groups.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Group sizes `m_1..m_r` with partial sums `s_0 = 0, s_j = m_1 + ... + m_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupingScheme {
    sizes: Vec<u32>,
    partial: Vec<u32>,
}

impl GroupingScheme {
    pub fn new(sizes: Vec<u32>, k: u32) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("groups", "at least one group is required"));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("groups", "group sizes must be positive"));
        }
        let total: u32 = sizes.iter().sum();
        if total != k {
            return Err(Error::invalid(
                "groups",
                format!("group sizes sum to {total}, expected k = {k}"),
            ));
        }
        let mut partial = vec![0];
        for m in &sizes {
            partial.push(partial.last().unwrap() + m);
        }
        Ok(GroupingScheme { sizes, partial })
    }

    pub fn singletons(k: u32) -> Self {
        Self::new(vec![1; k as usize], k).expect("k >= 1")
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Number of groups `r`.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn k(&self) -> u32 {
        *self.partial.last().unwrap()
    }

    /// Size of group `j` (1-based).
    pub fn m(&self, j: usize) -> u32 {
        self.sizes[j - 1]
    }

    /// `s_j` for `0 <= j <= r`.
    pub fn s(&self, j: usize) -> u32 {
        self.partial[j]
    }

    /// Group totals `Y_j = Σ_{i in group j} x_i`.
    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        (0..self.len())
            .map(|j| x[self.partial[j] as usize..self.partial[j + 1] as usize].iter().sum())
            .collect()
    }

    /// Dash-joined sizes, e.g. `1-2`.
    pub fn label(&self) -> String {
        self.sizes.iter().map(u32::to_string).collect::<Vec<_>>().join("-")
    }
}

impl FromStr for GroupingScheme {
    type Err = Error;

    /// Parses `2,1` or `2-1`; `k` is taken as the sum.
    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split([',', '-'])
            .map(|t| {
                t.trim().parse::<u32>().map_err(|_| Error::Parse {
                    field: "groups",
                    input: s.to_string(),
                    reason: format!("{t:?} is not a group size"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let k = sizes.iter().sum();
        Self::new(sizes, k)
    }
}

/// Every composition of `k` into positive parts, in lexicographic order.
pub fn compositions(k: u32) -> Vec<GroupingScheme> {
    fn rec(rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for m in 1..=rest {
            cur.push(m);
            rec(rest - m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(k, &mut Vec::new(), &mut out);
    }
    out.into_iter().map(|s| GroupingScheme::new(s, k).unwrap()).collect()
}
