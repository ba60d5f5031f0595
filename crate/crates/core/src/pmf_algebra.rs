//! Subset lattice algebra for joint and marginal pmfs of `k` cooperative
//! indicators.
//!
//! Joint pmfs are vectors of length `2^k` indexed by observation pattern;
//! marginal sets list, for every node subset of size at most `m`, the
//! probability that all nodes in the subset report the hypothesis value. Both
//! use one canonical ordering: patterns grouped by number of ones, and inside
//! a group in the order produced by the block recursion
//!
//! ```text
//! A^n_{m,k} = [ A^n_{m,k-1}   A^n_{m-1,k-1}   ]
//!             [ 0             A^{n-1}_{m-1,k-1} ]
//! ```
//!
//! i.e. patterns without the last node first, then patterns with it. Under
//! this ordering the pattern at position `2^k - 1 - j` is the complement of
//! the pattern at `j`, which is what makes the hypothesis-0 matrices plain
//! column reversals of the hypothesis-1 ones.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest node count an indexer accepts.
pub const MAX_NODES: usize = 16;
/// Largest node count for which dense `G` matrices are materialized.
pub const MAX_DENSE_NODES: usize = 12;

/// Entries this close outside `[0, 1]` are treated as roundoff and clamped.
pub const PMF_CLAMP_TOL: f64 = 1e-12;
const PMF_SUM_TOL: f64 = 1e-9;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `S_m = sum_{i <= m} C(k, i)`, the number of subsets of size at most `m`.
pub fn subsets_up_to(k: usize, m: usize) -> usize {
    (0..=m.min(k)).map(|i| binomial(k, i)).sum()
}

/// Which receiver state a pmf is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// `1^Rx = 0`
    Unavailable,
    /// `1^Rx = 1`
    Available,
}

impl Hypothesis {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Self::Unavailable),
            1 => Ok(Self::Available),
            other => Err(Error::InvalidParameter {
                name: "hypothesis",
                reason: format!("{other} is not 0 or 1"),
            }),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Self::Unavailable => 0,
            Self::Available => 1,
        }
    }
}

/// Memoized block recursion for the incidence matrices `A^n_{m,k}`.
#[derive(Default)]
pub struct IncidenceBuilder {
    memo: HashMap<(usize, usize, usize), DMatrix<i64>>,
}

impl IncidenceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// `A^n_{m,k}`, a `C(k,n) x C(k,m)` 0/1 matrix.
    pub fn get(&mut self, n: usize, m: usize, k: usize) -> DMatrix<i64> {
        assert!(n <= k && m <= k, "A^{n}_{{{m},{k}}} out of range");
        if let Some(hit) = self.memo.get(&(n, m, k)) {
            return hit.clone();
        }
        let rows = binomial(k, n);
        let cols = binomial(k, m);
        let out = if n == 0 {
            DMatrix::from_element(1, cols, 1)
        } else if n == k {
            DMatrix::from_element(1, cols, i64::from(m == k))
        } else if m == 0 {
            DMatrix::zeros(rows, 1)
        } else if m == k {
            DMatrix::from_element(rows, 1, 1)
        } else {
            let top_left = self.get(n, m, k - 1);
            let top_right = self.get(n, m - 1, k - 1);
            let bottom_right = self.get(n - 1, m - 1, k - 1);
            let split_row = top_left.nrows();
            let split_col = top_left.ncols();
            let mut out = DMatrix::zeros(rows, cols);
            out.view_mut((0, 0), top_left.shape()).copy_from(&top_left);
            out.view_mut((0, split_col), top_right.shape())
                .copy_from(&top_right);
            out.view_mut((split_row, split_col), bottom_right.shape())
                .copy_from(&bottom_right);
            out
        };
        self.memo.insert((n, m, k), out.clone());
        out
    }

    /// `A^n_k = [A^n_{0,k} ... A^n_{k,k}]`, a `C(k,n) x 2^k` matrix.
    pub fn row_block(&mut self, n: usize, k: usize) -> DMatrix<i64> {
        let blocks: Vec<DMatrix<i64>> = (0..=k).map(|m| self.get(n, m, k)).collect();
        let rows = binomial(k, n);
        let mut out = DMatrix::zeros(rows, 1usize << k);
        let mut col = 0;
        for b in blocks {
            out.view_mut((0, col), b.shape()).copy_from(&b);
            col += b.ncols();
        }
        out
    }
}

/// Canonical bijection between vector positions and node subsets.
///
/// Subsets are bitmasks with bit `i` standing for node `i` (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetIndexer {
    k: usize,
    masks: Vec<u32>,
    positions: Vec<u32>,
    block_starts: Vec<usize>,
}

/// Builds the indexer by reading the columns of `A^1_{m,k}` for every `m`.
pub fn build_indexer(k: usize) -> Result<SubsetIndexer> {
    if k == 0 || k > MAX_NODES {
        return Err(Error::SizeLimit {
            k,
            limit: MAX_NODES,
        });
    }
    let mut builder = IncidenceBuilder::new();
    Ok(SubsetIndexer::from_incidence(k, &mut builder))
}

impl SubsetIndexer {
    fn from_incidence(k: usize, builder: &mut IncidenceBuilder) -> Self {
        let mut masks = Vec::with_capacity(1 << k);
        let mut block_starts = Vec::with_capacity(k + 2);
        for m in 0..=k {
            block_starts.push(masks.len());
            let a1 = builder.get(1, m, k);
            for col in a1.column_iter() {
                let mask = col
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == 1)
                    .fold(0u32, |acc, (i, _)| acc | (1 << i));
                masks.push(mask);
            }
        }
        block_starts.push(masks.len());
        let mut positions = vec![u32::MAX; 1 << k];
        for (pos, &mask) in masks.iter().enumerate() {
            positions[mask as usize] = pos as u32;
        }
        Self {
            k,
            masks,
            positions,
            block_starts,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Subset at canonical position `index`.
    pub fn mask(&self, index: usize) -> u32 {
        self.masks[index]
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    /// Canonical position of the subset `mask`.
    pub fn position(&self, mask: u32) -> usize {
        self.positions[mask as usize] as usize
    }

    /// Positions covered by subsets of size exactly `m`.
    pub fn block(&self, m: usize) -> std::ops::Range<usize> {
        self.block_starts[m]..self.block_starts[m + 1]
    }

    /// Node bits of the pattern at `index`, node 0 first.
    pub fn pattern(&self, index: usize) -> Vec<bool> {
        let mask = self.masks[index];
        (0..self.k).map(|i| mask & (1 << i) != 0).collect()
    }

    /// Canonical position of an explicit pattern.
    pub fn position_of_pattern(&self, bits: &[bool]) -> usize {
        let mask = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u32, |acc, (i, _)| acc | (1 << i));
        self.position(mask)
    }

    /// The `k x C(k,m)` matrix `A^1_{m,k}` reconstructed from the ordering.
    pub fn a1_block(&self, m: usize) -> DMatrix<i64> {
        let range = self.block(m);
        DMatrix::from_fn(self.k, range.len(), |i, j| {
            i64::from(self.masks[range.start + j] & (1 << i) != 0)
        })
    }
}

/// `G^(s)_{m,k}`: the `S_m x 2^k` matrix mapping a joint pmf to its marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    s: Hypothesis,
    m: usize,
    k: usize,
    matrix: DMatrix<i64>,
}

fn check_dense(k: usize) -> Result<()> {
    if k == 0 || k > MAX_DENSE_NODES {
        return Err(Error::SizeLimit {
            k,
            limit: MAX_DENSE_NODES,
        });
    }
    Ok(())
}

pub fn build_g(s: Hypothesis, m: usize, k: usize) -> Result<GMatrix> {
    check_dense(k)?;
    if m > k {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("marginal order {m} exceeds node count {k}"),
        });
    }
    let mut builder = IncidenceBuilder::new();
    let s_m = subsets_up_to(k, m);
    let mut matrix = DMatrix::zeros(s_m, 1usize << k);
    let mut row = 0;
    for n in 0..=m {
        let block = builder.row_block(n, k);
        matrix.view_mut((row, 0), block.shape()).copy_from(&block);
        row += block.nrows();
    }
    if s == Hypothesis::Unavailable {
        reverse_columns(&mut matrix);
    }
    Ok(GMatrix { s, m, k, matrix })
}

fn reverse_columns(matrix: &mut DMatrix<i64>) {
    let n = matrix.ncols();
    for j in 0..n / 2 {
        matrix.swap_columns(j, n - 1 - j);
    }
}

fn reverse_rows(matrix: &mut DMatrix<i64>) {
    let n = matrix.nrows();
    for i in 0..n / 2 {
        matrix.swap_rows(i, n - 1 - i);
    }
}

impl GMatrix {
    pub fn hypothesis(&self) -> Hypothesis {
        self.s
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &DMatrix<i64> {
        &self.matrix
    }

    pub fn s_m(&self) -> usize {
        self.matrix.nrows()
    }

    /// Column range of the square nonsingular block: the first `S_m`
    /// columns for hypothesis 1, the last `S_m` for hypothesis 0.
    pub fn square_columns(&self) -> std::ops::Range<usize> {
        let n = self.matrix.ncols();
        match self.s {
            Hypothesis::Available => 0..self.s_m(),
            Hypothesis::Unavailable => n - self.s_m()..n,
        }
    }

    /// Columns outside the square block.
    pub fn free_columns(&self) -> std::ops::Range<usize> {
        let n = self.matrix.ncols();
        match self.s {
            Hypothesis::Available => self.s_m()..n,
            Hypothesis::Unavailable => 0..n - self.s_m(),
        }
    }

    /// `Gbar^(1)_{m,k}` or `Gunder^(0)_{m,k}`, whichever is square.
    pub fn square_block(&self) -> DMatrix<i64> {
        let cols = self.square_columns();
        self.matrix.columns(cols.start, cols.len()).into_owned()
    }

    /// The complementary rectangular block.
    pub fn free_block(&self) -> DMatrix<i64> {
        let cols = self.free_columns();
        self.matrix.columns(cols.start, cols.len()).into_owned()
    }

    /// Closed-form inverse of [`Self::square_block`]: block `(n, m')` is
    /// `(-1)^(n+m') A^n_{m',k}` for `n <= m'`, rows reversed for hypothesis 0.
    pub fn square_block_inverse(&self) -> DMatrix<i64> {
        let mut builder = IncidenceBuilder::new();
        let s_m = self.s_m();
        let mut inv = DMatrix::zeros(s_m, s_m);
        let offsets: Vec<usize> = (0..=self.m)
            .scan(0, |acc, n| {
                let start = *acc;
                *acc += binomial(self.k, n);
                Some(start)
            })
            .collect();
        for n in 0..=self.m {
            for mm in n..=self.m {
                let mut block = builder.get(n, mm, self.k);
                if (n + mm) % 2 == 1 {
                    block.neg_mut();
                }
                inv.view_mut((offsets[n], offsets[mm]), block.shape())
                    .copy_from(&block);
            }
        }
        if self.s == Hypothesis::Unavailable {
            reverse_rows(&mut inv);
        }
        inv
    }

    pub fn as_f64(&self) -> DMatrix<f64> {
        self.matrix.map(|v| v as f64)
    }
}

/// Square-block inverse of the `G` matrix it was built from.
pub fn invert_g_bar(g: &GMatrix) -> DMatrix<i64> {
    g.square_block_inverse()
}

/// Joint pmf of `k` cooperative indicators conditioned on one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    s: Hypothesis,
    k: usize,
    values: Vec<f64>,
}

impl JointPmf {
    /// Validates length `2^k`, entries in `[0, 1]` and unit total. Entries
    /// within [`PMF_CLAMP_TOL`] of the box are clamped.
    pub fn new(s: Hypothesis, k: usize, values: Vec<f64>) -> Result<Self> {
        if k > MAX_NODES {
            return Err(Error::SizeLimit {
                k,
                limit: MAX_NODES,
            });
        }
        if values.len() != 1usize << k {
            return Err(Error::DimensionMismatch(format!(
                "joint pmf over {k} nodes needs {} entries, got {}",
                1usize << k,
                values.len()
            )));
        }
        let values = clamp_probabilities(values)?;
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(Self { s, k, values })
    }

    /// The pmf of zero cooperative nodes: a single certain outcome.
    pub fn trivial(s: Hypothesis) -> Self {
        Self {
            s,
            k: 0,
            values: vec![1.0],
        }
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Probability of the pattern whose ones are `mask`.
    pub fn prob_of_mask(&self, indexer: &SubsetIndexer, mask: u32) -> f64 {
        self.values[indexer.position(mask)]
    }

    /// Probability that every node in the k-th order subset reports `s`.
    pub fn tail_mass(&self) -> f64 {
        match self.s {
            Hypothesis::Available => *self.values.last().expect("nonempty pmf"),
            Hypothesis::Unavailable => self.values[0],
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let indexer = build_indexer(self.k.max(1))?;
        let masks: Vec<u32> = if self.k == 0 {
            vec![0]
        } else {
            indexer.masks().to_vec()
        };
        Ok(write_csv(&masks, &self.values))
    }

    pub fn from_csv(s: Hypothesis, k: usize, text: &str) -> Result<Self> {
        let indexer = build_indexer(k)?;
        let values = read_csv(&indexer, text, 1usize << k)?;
        Self::new(s, k, values)
    }
}

fn clamp_probabilities(values: Vec<f64>) -> Result<Vec<f64>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if !(-PMF_CLAMP_TOL..=1.0 + PMF_CLAMP_TOL).contains(&v) {
                Err(Error::InvalidPmf(format!("entry {i} = {v} outside [0, 1]")))
            } else {
                Ok(v.clamp(0.0, 1.0))
            }
        })
        .collect()
}

/// Known marginals `[1, q_1, ..., q_m]` of one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSet {
    s: Hypothesis,
    m: usize,
    k: usize,
    values: Vec<f64>,
}

impl MarginalSet {
    pub fn new(s: Hypothesis, m: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || k > MAX_NODES {
            return Err(Error::SizeLimit {
                k,
                limit: MAX_NODES,
            });
        }
        if m > k {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("marginal order {m} exceeds node count {k}"),
            });
        }
        let expected = subsets_up_to(k, m);
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "order-{m} marginals over {k} nodes need {expected} entries, got {}",
                values.len()
            )));
        }
        if values[0] != 1.0 {
            return Err(Error::InvalidPmf(format!(
                "leading entry must be exactly 1, got {}",
                values[0]
            )));
        }
        let values = clamp_probabilities(values)?;
        let indexer = build_indexer(k)?;
        // Dropping one node from a subset can only make the joint event likelier.
        for pos in 1..expected {
            let mask = indexer.mask(pos);
            for node in 0..k {
                if mask & (1 << node) != 0 {
                    let parent = indexer.position(mask & !(1 << node));
                    if values[pos] > values[parent] + PMF_CLAMP_TOL {
                        return Err(Error::InvalidPmf(format!(
                            "marginal of subset {mask:#b} exceeds that of {:#b}",
                            mask & !(1 << node)
                        )));
                    }
                }
            }
        }
        Ok(Self { s, m, k, values })
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.s
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// First-order marginals, one per node.
    pub fn first_order(&self) -> Option<&[f64]> {
        (self.m >= 1).then(|| &self.values[1..=self.k])
    }

    /// The same information truncated to a lower order.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m > self.m {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("cannot raise order {} to {m}", self.m),
            });
        }
        let len = subsets_up_to(self.k, m);
        Ok(Self {
            s: self.s,
            m,
            k: self.k,
            values: self.values[..len].to_vec(),
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let indexer = build_indexer(self.k)?;
        Ok(write_csv(&indexer.masks()[..self.values.len()], &self.values))
    }

    pub fn from_csv(s: Hypothesis, m: usize, k: usize, text: &str) -> Result<Self> {
        let indexer = build_indexer(k)?;
        let values = read_csv(&indexer, text, subsets_up_to(k, m))?;
        Self::new(s, m, k, values)
    }
}

fn write_csv(masks: &[u32], values: &[f64]) -> String {
    let mut out = String::from("index,mask,value\n");
    for (i, (mask, value)) in masks.iter().zip(values).enumerate() {
        let _ = writeln!(out, "{i},{mask},{value}");
    }
    out
}

fn read_csv(indexer: &SubsetIndexer, text: &str, expected: usize) -> Result<Vec<f64>> {
    let mut values = vec![f64::NAN; expected];
    let mut seen = 0;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
            continue;
        }
        let bad = |what: &str| Error::InvalidParameter {
            name: "csv",
            reason: format!("line {}: {what}", line_no + 1),
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(bad("expected index,mask,value"));
        }
        let index: usize = fields[0].parse().map_err(|_| bad("bad index"))?;
        let mask: u32 = fields[1].parse().map_err(|_| bad("bad mask"))?;
        let value: f64 = fields[2].parse().map_err(|_| bad("bad value"))?;
        if index >= expected {
            return Err(bad("index out of range"));
        }
        if indexer.mask(index) != mask {
            return Err(bad("mask does not match the canonical ordering"));
        }
        if !values[index].is_nan() {
            return Err(bad("duplicate index"));
        }
        values[index] = value;
        seen += 1;
    }
    if seen != expected {
        return Err(Error::DimensionMismatch(format!(
            "expected {expected} rows, found {seen}"
        )));
    }
    Ok(values)
}

/// `Q = G^(s)_{m,k} P`.
pub fn joint_to_marginals(p: &JointPmf, m: usize) -> Result<MarginalSet> {
    let g = build_g(p.s, m, p.k)?;
    let q = g.as_f64() * DVector::from_column_slice(&p.values);
    let mut values: Vec<f64> = q.iter().copied().collect();
    // The normalization row is exactly the pmf total; pin it.
    values[0] = 1.0;
    MarginalSet::new(p.s, m, p.k, values)
}

/// Rebuilds the joint pmf from all marginals of order `k - 1` and the single
/// `k`-th order probability `tail_mass`: `P = c + tail_mass * b`.
pub fn complete_joint(q: &MarginalSet, tail_mass: f64) -> Result<JointPmf> {
    let k = q.k;
    if q.m + 1 != k {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("need marginals of order {}, got {}", k - 1, q.m),
        });
    }
    let g = build_g(q.s, k - 1, k)?;
    let inv = g.square_block_inverse().map(|v| v as f64);
    let partial = inv * DVector::from_column_slice(&q.values);
    let n = 1usize << k;
    let mut c = vec![0.0; n];
    for (dst, v) in g.square_columns().zip(partial.iter()) {
        c[dst] = *v;
    }
    let indexer = build_indexer(k)?;
    let sign_flip = q.s == Hypothesis::Unavailable && k % 2 == 1;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let ones = indexer.mask(i).count_ones() as usize;
            let mut b = if (k - ones).is_multiple_of(2) { 1.0 } else { -1.0 };
            if sign_flip {
                b = -b;
            }
            c[i] + tail_mass * b
        })
        .collect();
    JointPmf::new(q.s, k, values)
}

/// Joint pmf of a subset of the nodes; `nodes[i]` becomes node `i` of the result.
pub fn marginalize_nodes(p: &JointPmf, nodes: &[usize]) -> Result<JointPmf> {
    if let Some(&bad) = nodes.iter().find(|&&n| n >= p.k) {
        return Err(Error::InvalidParameter {
            name: "nodes",
            reason: format!("node {bad} out of range for {} nodes", p.k),
        });
    }
    if nodes.is_empty() {
        return Ok(JointPmf::trivial(p.s));
    }
    let src = build_indexer(p.k)?;
    let dst = build_indexer(nodes.len())?;
    let mut values = vec![0.0; dst.len()];
    for (pos, &v) in p.values.iter().enumerate() {
        let mask = src.mask(pos);
        let sub = nodes
            .iter()
            .enumerate()
            .filter(|(_, &n)| mask & (1 << n) != 0)
            .fold(0u32, |acc, (i, _)| acc | (1 << i));
        values[dst.position(sub)] += v;
    }
    JointPmf::new(p.s, nodes.len(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexer_small_cases() {
        let i1 = build_indexer(1).unwrap();
        assert_eq!(i1.masks(), &[0, 1]);
        let i2 = build_indexer(2).unwrap();
        // (0,0), (1,0), (0,1), (1,1) with node 0 first
        assert_eq!(i2.masks(), &[0b00, 0b01, 0b10, 0b11]);
        let i3 = build_indexer(3).unwrap();
        assert_eq!(&i3.masks()[i3.block(1)], &[0b001, 0b010, 0b100]);
        assert_eq!(&i3.masks()[i3.block(2)], &[0b011, 0b101, 0b110]);
    }

    #[test]
    fn indexer_size_guard() {
        assert!(matches!(build_indexer(17), Err(Error::SizeLimit { .. })));
        assert!(matches!(build_indexer(0), Err(Error::SizeLimit { .. })));
        assert_eq!(build_indexer(16).unwrap().len(), 1 << 16);
    }

    #[test]
    fn reversal_is_complement() {
        for k in 1..=10 {
            let idx = build_indexer(k).unwrap();
            let full = (1u32 << k) - 1;
            for j in 0..idx.len() {
                assert_eq!(idx.mask(idx.len() - 1 - j), full ^ idx.mask(j));
            }
        }
    }

    #[test]
    fn g_small_cases() {
        let g1 = build_g(Hypothesis::Available, 1, 1).unwrap();
        assert_eq!(g1.square_block(), DMatrix::from_row_slice(2, 2, &[1, 1, 0, 1]));
        let g0 = build_g(Hypothesis::Unavailable, 1, 1).unwrap();
        assert_eq!(g0.square_block(), DMatrix::from_row_slice(2, 2, &[1, 1, 1, 0]));
        assert_eq!(
            invert_g_bar(&g1),
            DMatrix::from_row_slice(2, 2, &[1, -1, 0, 1])
        );
        for k in 1..=5 {
            let g = build_g(Hypothesis::Available, 0, k).unwrap();
            assert_eq!(g.matrix(), &DMatrix::from_element(1, 1 << k, 1));
        }
    }

    #[test]
    fn closed_form_inverse_k3() {
        for s in [Hypothesis::Available, Hypothesis::Unavailable] {
            let g = build_g(s, 2, 3).unwrap();
            assert_eq!(g.s_m(), 7);
            let prod = invert_g_bar(&g) * g.square_block();
            assert_eq!(prod, DMatrix::identity(7, 7));
        }
    }

    #[test]
    fn first_order_marginal() {
        let p = JointPmf::new(Hypothesis::Available, 1, vec![0.3, 0.7]).unwrap();
        let q = joint_to_marginals(&p, 1).unwrap();
        assert_eq!(q.values(), &[1.0, 0.7]);
        let q0 = joint_to_marginals(&p, 0).unwrap();
        assert_eq!(q0.values(), &[1.0]);
    }

    #[test]
    fn lemma7_base_case() {
        let q = MarginalSet::new(Hypothesis::Available, 0, 1, vec![1.0]).unwrap();
        let p = complete_joint(&q, 0.8).unwrap();
        assert!((p.values()[0] - 0.2).abs() < 1e-15);
        assert_eq!(p.values()[1], 0.8);
    }

    #[test]
    fn two_node_correlated_reconstruction() {
        let (g1, g2, delta) = (0.75, 0.7, 0.1);
        let q = MarginalSet::new(Hypothesis::Unavailable, 1, 2, vec![1.0, g1, g2]).unwrap();
        let p = complete_joint(&q, g1 * g2 + delta).unwrap();
        let want = [
            g1 * g2 + delta,
            (1.0 - g1) * g2 - delta,
            g1 * (1.0 - g2) - delta,
            (1.0 - g1) * (1.0 - g2) + delta,
        ];
        for (got, want) in p.values().iter().zip(want) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn infeasible_tail_rejected() {
        let q = MarginalSet::new(Hypothesis::Unavailable, 1, 2, vec![1.0, 0.75, 0.7]).unwrap();
        assert!(matches!(complete_joint(&q, 0.9), Err(Error::InvalidPmf(_))));
    }

    #[test]
    fn marginal_validation() {
        assert!(MarginalSet::new(Hypothesis::Available, 1, 2, vec![0.9, 0.5, 0.5]).is_err());
        assert!(MarginalSet::new(Hypothesis::Available, 1, 2, vec![1.0, 0.5]).is_err());
        // pair marginal larger than a singleton
        assert!(
            MarginalSet::new(Hypothesis::Available, 2, 2, vec![1.0, 0.5, 0.4, 0.45]).is_err()
        );
        assert!(
            MarginalSet::new(Hypothesis::Available, 2, 2, vec![1.0, 0.5, 0.4, 0.3]).is_ok()
        );
    }

    #[test]
    fn joint_validation() {
        assert!(JointPmf::new(Hypothesis::Available, 1, vec![0.5, 0.6]).is_err());
        assert!(JointPmf::new(Hypothesis::Available, 1, vec![-0.1, 1.1]).is_err());
        assert!(JointPmf::new(Hypothesis::Available, 2, vec![0.5, 0.5]).is_err());
        let p = JointPmf::new(Hypothesis::Available, 1, vec![-1e-14, 1.0]).unwrap();
        assert_eq!(p.values()[0], 0.0);
    }

    #[test]
    fn csv_roundtrip() {
        let p = JointPmf::new(Hypothesis::Unavailable, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let text = p.to_csv().unwrap();
        assert!(text.starts_with("index,mask,value\n0,0,0.1\n1,1,0.2\n2,2,0.3\n3,3,0.4"));
        let back = JointPmf::from_csv(Hypothesis::Unavailable, 2, &text).unwrap();
        assert_eq!(back, p);
        let bad = text.replace("1,1,0.2", "1,2,0.2");
        assert!(JointPmf::from_csv(Hypothesis::Unavailable, 2, &bad).is_err());
    }
}
