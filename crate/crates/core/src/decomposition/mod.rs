//! Operator decompositions `F = F_1 + ... + F_r`.
//!
//! A cell-based split masks the tendency vector (`F_k = I_k F`); a
//! flux-based split masks interface fluxes (`F_k = H^{-1} D J_k Phi`) so that
//! every part conserves mass on its own.

mod predicate;
mod spec;

pub use predicate::{Predicate, PredicateError};
pub use spec::{PartitionRule, PartitionSpec};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rhs::{scatter_fluxes, ConservativeRhs, Face, Rhs};
use crate::scalar::Real;

pub use crate::rhs::mass;

/// Assignment of every cell to exactly one of `r` regions.
///
/// Region indices are zero based: region 0 is `I_1` (coarse step), region 1
/// is `I_2` (refined step).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPartition {
    labels: Vec<usize>,
    parts: usize,
}

impl CellPartition {
    pub fn from_labels(labels: Vec<usize>, parts: usize) -> Result<Self> {
        if parts == 0 {
            return Err(Error::InvalidTableau("partition needs at least one region".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= parts) {
            return Err(Error::WrongPartCount { expected: parts, got: bad + 1 });
        }
        Ok(Self { labels, parts })
    }

    /// Builds a partition from indicator masks, which must be pairwise
    /// disjoint and cover every index.
    pub fn from_masks(masks: &[Vec<bool>]) -> Result<Self> {
        let m = masks.first().map_or(0, Vec::len);
        let mut labels = vec![usize::MAX; m];
        for (k, mask) in masks.iter().enumerate() {
            if mask.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: mask.len() });
            }
            for (i, &on) in mask.iter().enumerate() {
                if on {
                    if labels[i] != usize::MAX {
                        return Err(Error::PartitionSpec {
                            spec: format!("masks {} and {}", labels[i] + 1, k + 1),
                            msg: format!("index {i} is in more than one region"),
                        });
                    }
                    labels[i] = k;
                }
            }
        }
        if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::PartitionSpec {
                spec: "masks".into(),
                msg: format!("index {i} is in no region"),
            });
        }
        Self::from_labels(labels, masks.len())
    }

    /// Every index in `region`.
    pub fn uniform(m: usize, parts: usize, region: usize) -> Self {
        assert!(region < parts);
        Self { labels: vec![region; m], parts }
    }

    /// Two regions: indices where `in_second` holds go to region 1.
    pub fn two_region(m: usize, in_second: impl Fn(usize) -> bool) -> Self {
        Self {
            labels: (0..m).map(|i| usize::from(in_second(i))).collect(),
            parts: 2,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn region(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn mask(&self, k: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == k).collect()
    }

    pub fn count(&self, k: usize) -> usize {
        self.labels.iter().filter(|&&l| l == k).count()
    }

    /// Diagonal indicator matrix `I_k`.
    pub fn indicator<T: Real>(&self, k: usize) -> DMatrix<T> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.len(),
            self.labels.iter().map(|&l| if l == k { T::one() } else { T::zero() }),
        ))
    }
}

/// Assignment of every interface to one region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluxPartition {
    labels: Vec<usize>,
    parts: usize,
}

impl FluxPartition {
    pub fn from_labels(labels: Vec<usize>, parts: usize) -> Result<Self> {
        CellPartition::from_labels(labels, parts).map(|p| Self { labels: p.labels, parts })
    }

    /// Each face takes the region of the cell on its `plus` side (the cell
    /// `i+1` for interface `i+1/2`), or of its `minus` cell on the outflow
    /// boundary.
    ///
    /// For a two-region split with the interface in cell `i` this gives
    /// `F_1,i = f_{i-1/2}/dx_i` and `F_2,i = -f_{i+1/2}/dx_i`.
    pub fn from_cells(cells: &CellPartition, faces: &[Face]) -> Self {
        let labels = faces
            .iter()
            .map(|f| {
                let owner = f.plus.or(f.minus).expect("face touches at least one cell");
                cells.region(owner)
            })
            .collect();
        Self { labels, parts: cells.parts }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn region(&self, f: usize) -> usize {
        self.labels[f]
    }

    pub fn mask(&self, k: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == k).collect()
    }
}

/// Region 0 (`I_1`, coarse step) holds the cells with `u_i < threshold`;
/// everything else is region 1.
pub fn burgers_dynamic_partition<T: Real>(u: &[T], threshold: T) -> CellPartition {
    CellPartition::two_region(u.len(), |i| !(u[i] < threshold))
}

/// A right-hand side decomposed into `r` parts.
pub trait SplitRhs<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn parts(&self) -> usize;

    /// Overwrites `out[k]` with `F_k(t, v)` for every `k` with `wanted[k]`.
    /// Other entries of `out` are left untouched.
    fn eval_parts(&self, t: T, v: &[T], wanted: &[bool], out: &mut [Vec<T>]);

    /// Called with `(t_n, u_n)` before every full step.
    fn begin_step(&mut self, _t: T, _u: &[T]) {}

    /// Cell measures for mass bookkeeping, when the split knows them.
    fn weights(&self) -> Option<&[T]> {
        None
    }

    /// `F_k` as a standalone right-hand side.
    fn part(&self, k: usize) -> PartView<'_, Self>
    where
        Self: Sized,
    {
        PartView { split: self, k }
    }
}

/// One part of a [`SplitRhs`], evaluated on its own.
pub struct PartView<'a, S> {
    split: &'a S,
    k: usize,
}

impl<T: Real, S: SplitRhs<T>> Rhs<T> for PartView<'_, S> {
    fn dim(&self) -> usize {
        self.split.dim()
    }

    fn eval(&self, t: T, v: &[T], out: &mut [T]) {
        let r = self.split.parts();
        let mut wanted = vec![false; r];
        wanted[self.k] = true;
        let mut bufs = vec![Vec::new(); r];
        bufs[self.k] = vec![T::zero(); v.len()];
        self.split.eval_parts(t, v, &wanted, &mut bufs);
        out.copy_from_slice(&bufs[self.k]);
    }
}

/// The trivial decomposition `r = 1`.
pub struct Unsplit<R> {
    rhs: R,
}

impl<R> Unsplit<R> {
    pub fn new(rhs: R) -> Self {
        Self { rhs }
    }
}

impl<T: Real, R: Rhs<T>> SplitRhs<T> for Unsplit<R> {
    fn dim(&self) -> usize {
        self.rhs.dim()
    }

    fn parts(&self) -> usize {
        1
    }

    fn eval_parts(&self, t: T, v: &[T], wanted: &[bool], out: &mut [Vec<T>]) {
        if wanted[0] {
            self.rhs.eval(t, v, &mut out[0]);
        }
    }
}

/// Cell-based split `F_k = I_k F`.
pub struct CellSplit<R> {
    rhs: R,
    partition: CellPartition,
}

impl<R> CellSplit<R> {
    pub fn new<T: Real>(rhs: R, partition: CellPartition) -> Result<Self>
    where
        R: Rhs<T>,
    {
        if partition.len() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: rhs.dim(), got: partition.len() });
        }
        Ok(Self { rhs, partition })
    }

    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn set_partition(&mut self, partition: CellPartition) {
        assert_eq!(partition.len(), self.partition.len());
        self.partition = partition;
    }

    pub fn inner(&self) -> &R {
        &self.rhs
    }
}

fn eval_masked<T: Real, R: Rhs<T>>(
    rhs: &R,
    labels: &[usize],
    t: T,
    v: &[T],
    wanted: &[bool],
    out: &mut [Vec<T>],
) {
    let Some(first) = wanted.iter().position(|&w| w) else {
        return;
    };
    let (head, tail) = out.split_at_mut(first + 1);
    let full = &mut head[first];
    rhs.eval(t, v, full);
    for (offset, buf) in tail.iter_mut().enumerate() {
        let k = first + 1 + offset;
        if !wanted[k] {
            continue;
        }
        for ((o, &f), &l) in buf.iter_mut().zip(full.iter()).zip(labels) {
            *o = if l == k { f } else { T::zero() };
        }
    }
    for (f, &l) in full.iter_mut().zip(labels) {
        if l != first {
            *f = T::zero();
        }
    }
}

impl<T: Real, R: Rhs<T>> SplitRhs<T> for CellSplit<R> {
    fn dim(&self) -> usize {
        self.rhs.dim()
    }

    fn parts(&self) -> usize {
        self.partition.parts()
    }

    fn eval_parts(&self, t: T, v: &[T], wanted: &[bool], out: &mut [Vec<T>]) {
        eval_masked(&self.rhs, &self.partition.labels, t, v, wanted, out);
    }
}

/// Cell-based split whose partition is recomputed from `u_n` before every
/// step.
pub struct DynamicCellSplit<R, P> {
    split: CellSplit<R>,
    rule: P,
}

impl<R, P> DynamicCellSplit<R, P> {
    pub fn new<T: Real>(rhs: R, u0: &[T], rule: P) -> Result<Self>
    where
        R: Rhs<T>,
        P: Fn(&[T]) -> CellPartition,
    {
        let partition = rule(u0);
        Ok(Self { split: CellSplit::new(rhs, partition)?, rule })
    }

    pub fn partition(&self) -> &CellPartition {
        self.split.partition()
    }
}

impl<T: Real, R: Rhs<T>, P> SplitRhs<T> for DynamicCellSplit<R, P>
where
    P: Fn(&[T]) -> CellPartition + Sync,
{
    fn dim(&self) -> usize {
        self.split.dim()
    }

    fn parts(&self) -> usize {
        self.split.parts()
    }

    fn eval_parts(&self, t: T, v: &[T], wanted: &[bool], out: &mut [Vec<T>]) {
        self.split.eval_parts(t, v, wanted, out)
    }

    fn begin_step(&mut self, _t: T, u: &[T]) {
        let partition = (self.rule)(u);
        self.split.set_partition(partition);
    }
}

/// Flux-based split `F_k = H^{-1} D J_k Phi`.
pub struct FluxSplit<R> {
    rhs: R,
    partition: FluxPartition,
}

impl<R> FluxSplit<R> {
    pub fn new<T: Real>(rhs: R, partition: FluxPartition) -> Result<Self>
    where
        R: ConservativeRhs<T>,
    {
        let nf = rhs.faces().len();
        if partition.len() != nf {
            return Err(Error::DimensionMismatch { expected: nf, got: partition.len() });
        }
        if rhs.widths().len() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: rhs.dim(), got: rhs.widths().len() });
        }
        Ok(Self { rhs, partition })
    }

    /// Flux partition derived from a cell partition with
    /// [`FluxPartition::from_cells`].
    pub fn from_cells<T: Real>(rhs: R, cells: &CellPartition) -> Result<Self>
    where
        R: ConservativeRhs<T>,
    {
        if cells.len() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: rhs.dim(), got: cells.len() });
        }
        let partition = FluxPartition::from_cells(cells, rhs.faces());
        Self::new(rhs, partition)
    }

    pub fn partition(&self) -> &FluxPartition {
        &self.partition
    }

    pub fn inner(&self) -> &R {
        &self.rhs
    }
}

impl<T: Real, R: ConservativeRhs<T>> SplitRhs<T> for FluxSplit<R> {
    fn dim(&self) -> usize {
        self.rhs.dim()
    }

    fn parts(&self) -> usize {
        self.partition.parts()
    }

    fn eval_parts(&self, t: T, v: &[T], wanted: &[bool], out: &mut [Vec<T>]) {
        if !wanted.iter().any(|&w| w) {
            return;
        }
        let faces = self.rhs.faces();
        let mut fluxes = vec![T::zero(); faces.len()];
        self.rhs.fluxes(t, v, &mut fluxes);
        for (k, buf) in out.iter_mut().enumerate() {
            if !wanted[k] {
                continue;
            }
            buf.iter_mut().for_each(|x| *x = T::zero());
            scatter_fluxes(faces, self.rhs.widths(), &fluxes, |f| self.partition.region(f) == k, buf);
        }
    }

    fn weights(&self) -> Option<&[T]> {
        Some(self.rhs.widths())
    }
}

/// Linear split `F_k(t, v) = L_k v`.
pub struct LinearSplit<T: Real> {
    ops: Vec<DMatrix<T>>,
}

impl<T: Real> LinearSplit<T> {
    pub fn new(ops: Vec<DMatrix<T>>) -> Result<Self> {
        let m = ops.first().map_or(0, |l| l.nrows());
        for l in &ops {
            if l.nrows() != m || l.ncols() != m {
                return Err(Error::DimensionMismatch { expected: m, got: l.ncols() });
            }
        }
        Ok(Self { ops })
    }

    /// Cell-based split of `L`: `L_k = I_k L`.
    pub fn cell_based(l: &DMatrix<T>, partition: &CellPartition) -> Result<Self> {
        if partition.len() != l.nrows() {
            return Err(Error::DimensionMismatch { expected: l.nrows(), got: partition.len() });
        }
        Self::new((0..partition.parts()).map(|k| partition.indicator::<T>(k) * l).collect())
    }

    pub fn operators(&self) -> &[DMatrix<T>] {
        &self.ops
    }
}

impl<T: Real> SplitRhs<T> for LinearSplit<T> {
    fn dim(&self) -> usize {
        self.ops.first().map_or(0, |l| l.nrows())
    }

    fn parts(&self) -> usize {
        self.ops.len()
    }

    fn eval_parts(&self, _t: T, v: &[T], wanted: &[bool], out: &mut [Vec<T>]) {
        let x = DVector::from_column_slice(v);
        for (k, l) in self.ops.iter().enumerate() {
            if wanted[k] {
                let y = l * &x;
                out[k].copy_from_slice(y.as_slice());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhs::FnRhs;

    #[test]
    fn masks_must_be_disjoint_and_covering() {
        let ok = CellPartition::from_masks(&[vec![true, false, true], vec![false, true, false]]).unwrap();
        assert_eq!(ok.labels(), &[0, 1, 0]);
        assert_eq!(ok.mask(1), vec![false, true, false]);
        assert!(CellPartition::from_masks(&[vec![true, true], vec![false, true]]).is_err());
        assert!(CellPartition::from_masks(&[vec![true, false], vec![false, false]]).is_err());
        assert!(CellPartition::from_masks(&[vec![true, false], vec![false]]).is_err());
    }

    #[test]
    fn dynamic_partition_threshold_is_strict() {
        let u = [0.0, 0.125, 0.1249, 1.0];
        let p = burgers_dynamic_partition(&u, 0.125);
        assert_eq!(p.labels(), &[0, 1, 0, 1]);
        let zeros = [0.0f64; 5];
        assert_eq!(burgers_dynamic_partition(&zeros, 0.125).count(0), 5);
    }

    #[test]
    fn block_profile_partition() {
        let m = 20;
        let u: Vec<f64> = (0..m).map(|j| if j < m / 2 { 1.0 } else { 0.0 }).collect();
        let p = burgers_dynamic_partition(&u, 0.125);
        for j in 0..m {
            assert_eq!(p.region(j) == 0, u[j] == 0.0);
        }
    }

    #[test]
    fn trivial_cell_split_is_identity() {
        let f = FnRhs::new(3, |t: f64, v: &[f64], out: &mut [f64]| {
            for (o, x) in out.iter_mut().zip(v) {
                *o = t * x + 1.0;
            }
        });
        let split = CellSplit::new(&f, CellPartition::uniform(3, 1, 0)).unwrap();
        let mut out = vec![vec![0.0; 3]];
        split.eval_parts(2.0, &[1.0, 2.0, 3.0], &[true], &mut out);
        assert_eq!(out[0], vec![3.0, 5.0, 7.0]);
    }

    #[test]
    fn part_views_sum_to_full_rhs() {
        let f = FnRhs::new(4, |_t: f64, v: &[f64], out: &mut [f64]| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = v[i] * v[(i + 1) % 4] - 0.3;
            }
        });
        let p = CellPartition::from_labels(vec![1, 0, 1, 1], 2).unwrap();
        let split = CellSplit::new(&f, p).unwrap();
        let v = [0.3, -1.2, 2.5, 0.7];
        let mut full = [0.0; 4];
        f.eval(0.0, &v, &mut full);
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        split.part(0).eval(0.0, &v, &mut a);
        split.part(1).eval(0.0, &v, &mut b);
        for i in 0..4 {
            assert_eq!(a[i] + b[i], full[i]);
            assert!(a[i] == 0.0 || b[i] == 0.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = FnRhs::new(3, |_t: f64, _v: &[f64], _o: &mut [f64]| {});
        let err = CellSplit::new(&f, CellPartition::uniform(4, 2, 0)).err().unwrap();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, got: 4 });
    }

    #[test]
    fn flux_partition_from_cells_uses_plus_side() {
        let faces = [
            Face { minus: None, plus: Some(0) },
            Face { minus: Some(0), plus: Some(1) },
            Face { minus: Some(1), plus: Some(2) },
            Face { minus: Some(2), plus: None },
        ];
        let cells = CellPartition::from_labels(vec![0, 0, 1], 2).unwrap();
        let fp = FluxPartition::from_cells(&cells, &faces);
        assert_eq!(fp.mask(1), vec![false, false, true, true]);
    }
}
