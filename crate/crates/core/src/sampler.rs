//! Inverse-CDF sampling over the lexicographic support order.
//!
//! The generator is SplitMix64 (increment `0x9E3779B97F4A7C15`, output mix
//! constants `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`) seeded with the
//! little-endian bytes of the user seed. Each variate is
//! `u = (next_u64 >> 11) / 2^53`, converted to the table's field without
//! rounding, and mapped to the smallest index `i` with `u < CDF_i`. The
//! comparison is carried out on the 53-bit integer against
//! `ceil(CDF_i · 2^53)`, which decides `u < CDF_i` exactly.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::fermi_dirac::{joint_pmf, FirstKindParams};
use crate::lattice::SupportPoint;
use crate::pmf::{PmfTable, TableMeta};
use crate::scalar::{Exact, Field};

/// A reproducible batch of draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<N> {
    pub meta: TableMeta,
    pub seed: u64,
    pub count: u64,
    pub draws: Vec<SupportPoint>,
    /// Support in lexicographic order, aligned with `expected` and `counts`.
    pub support: Vec<SupportPoint>,
    pub expected: Vec<N>,
    pub counts: Vec<u64>,
}

impl<N: Field> SampleBatch<N> {
    fn new(meta: TableMeta, seed: u64, draws: Vec<SupportPoint>, support: Vec<SupportPoint>, expected: Vec<N>) -> Self {
        let index: BTreeMap<&SupportPoint, usize> = support.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut counts = vec![0u64; support.len()];
        for d in &draws {
            counts[index[d]] += 1;
        }
        SampleBatch {
            meta,
            seed,
            count: draws.len() as u64,
            draws,
            support,
            expected,
            counts,
        }
    }

    /// `count_i / count` as exact rationals.
    pub fn empirical_frequencies(&self) -> Vec<Exact> {
        self.counts
            .iter()
            .map(|&c| BigRational::new(c.into(), self.count.into()))
            .collect()
    }

    /// `sigmas · sqrt(p(1-p)/count)` per support point.
    pub fn standard_error_bounds(&self, sigmas: f64) -> Vec<f64> {
        self.expected
            .iter()
            .map(|p| {
                let p = p.to_f64();
                sigmas * (p * (1.0 - p) / self.count as f64).sqrt()
            })
            .collect()
    }

    /// True when every empirical frequency lies within `sigmas` binomial
    /// standard errors of its expected probability.
    pub fn within_standard_errors(&self, sigmas: f64) -> bool {
        self.empirical_frequencies()
            .iter()
            .zip(&self.expected)
            .zip(self.standard_error_bounds(sigmas))
            .all(|((f, p), b)| (Field::to_f64(f) - p.to_f64()).abs() <= b)
    }
}

/// The generator stream used by every sampler.
pub struct Uniforms(SplitMix64);

impl Uniforms {
    pub fn new(seed: u64) -> Self {
        Uniforms(SplitMix64::from_seed(seed.to_le_bytes()))
    }

    /// The 53-bit integer `b` of the next variate `u = b / 2^53`.
    pub fn next_bits(&mut self) -> u64 {
        self.0.next_u64() >> 11
    }

    pub fn next<N: Field>(&mut self) -> N {
        N::from_unit_bits(self.next_bits())
    }
}

/// Running sums of `probs`.
pub fn cumulative<N: Field>(probs: &[N]) -> Vec<N> {
    let mut acc = N::zero();
    probs
        .iter()
        .map(|p| {
            acc = acc.clone() + p.clone();
            acc.clone()
        })
        .collect()
}

/// Smallest `i` with `u < cdf[i]`. In approximate mode a variate beyond the
/// last threshold maps to the last point of positive mass.
pub fn inverse_cdf_index<N: Field>(cdf: &[N], u: &N) -> usize {
    let i = cdf.partition_point(|c| c <= u);
    if i < cdf.len() {
        return i;
    }
    let last = cdf.last().expect("nonempty table");
    cdf.iter().position(|c| c == last).unwrap_or(cdf.len() - 1)
}

/// `ceil(CDF_i · 2^53)` for each support point.
pub fn thresholds<N: Field>(cdf: &[N]) -> Vec<u64> {
    cdf.iter().map(Field::unit_threshold).collect()
}

/// [`inverse_cdf_index`] on the integer form of the variate.
pub fn threshold_index(thresholds: &[u64], bits: u64) -> usize {
    let i = thresholds.partition_point(|&t| t <= bits);
    if i < thresholds.len() {
        return i;
    }
    let last = thresholds.last().expect("nonempty table");
    thresholds.iter().position(|t| t == last).unwrap_or(thresholds.len() - 1)
}

fn checked_thresholds<N: Field>(table: &PmfTable<N>) -> Result<Vec<u64>> {
    table.ensure_normalized()?;
    Ok(thresholds(&cumulative(&table.probabilities)))
}

fn check_count(count: u64) -> Result<()> {
    if count == 0 {
        return Err(Error::invalid("count", "count must be at least 1"));
    }
    Ok(())
}

/// `count` draws from `table`.
pub fn sample<N: Field>(table: &PmfTable<N>, seed: u64, count: u64) -> Result<SampleBatch<N>> {
    check_count(count)?;
    let cuts = checked_thresholds(table)?;
    let mut rng = Uniforms::new(seed);
    let draws = (0..count)
        .map(|_| table.support[threshold_index(&cuts, rng.next_bits())].clone())
        .collect();
    Ok(SampleBatch::new(
        table.meta.clone(),
        seed,
        draws,
        table.support.clone(),
        table.probabilities.clone(),
    ))
}

/// Per-prefix conditional laws of the next coordinate, built on demand.
struct Chain<'a, N> {
    joint: &'a PmfTable<N>,
    steps: BTreeMap<Vec<u32>, (PmfTable<N>, Vec<u64>)>,
}

impl<'a, N: Field> Chain<'a, N> {
    fn new(joint: &'a PmfTable<N>) -> Self {
        Chain {
            joint,
            steps: BTreeMap::new(),
        }
    }

    fn step(&mut self, prefix: &[u32]) -> Result<&(PmfTable<N>, Vec<u64>)> {
        if !self.steps.contains_key(prefix) {
            let j = prefix.len() + 1;
            let t = if prefix.is_empty() {
                self.joint.marginal_prefix(1, "x1")
            } else {
                self.joint.conditional_on_prefix(prefix, j, format!("x{j} | prefix"))?
            };
            let cuts = checked_thresholds(&t)?;
            self.steps.insert(prefix.to_vec(), (t, cuts));
        }
        Ok(&self.steps[prefix])
    }
}

/// Draws `X_1`, then `X_2 | X_1`, and so on, one variate per coordinate.
pub fn sequential_sample_fd<N: Field>(params: &FirstKindParams<N>, seed: u64, count: u64) -> Result<SampleBatch<N>> {
    check_count(count)?;
    let joint = joint_pmf(params)?;
    joint.ensure_normalized()?;
    let mut chain = Chain::new(&joint);
    let mut rng = Uniforms::new(seed);
    let mut draws = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut x = Vec::with_capacity(params.k as usize);
        for _ in 0..params.k {
            let (t, cuts) = chain.step(&x)?;
            let i = threshold_index(cuts, rng.next_bits());
            x.push(t.support[i].0[0]);
        }
        draws.push(SupportPoint(x));
    }
    let (support, expected) = (joint.support.clone(), joint.probabilities.clone());
    Ok(SampleBatch::new(joint.meta.clone(), seed, draws, support, expected))
}

/// Probability of each path under the sequential sampler, as the product of
/// its conditional steps, in joint support order.
pub fn sequential_path_probabilities<N: Field>(params: &FirstKindParams<N>) -> Result<Vec<(SupportPoint, N)>> {
    let joint = joint_pmf(params)?;
    let mut chain = Chain::new(&joint);
    let mut out = Vec::with_capacity(joint.len());
    for point in &joint.support {
        let mut p = N::one();
        for j in 0..point.0.len() {
            let (t, _) = chain.step(&point.0[..j])?;
            p = p * t.probability(&point.0[j..=j]);
        }
        out.push((point.clone(), p));
    }
    Ok(out)
}
