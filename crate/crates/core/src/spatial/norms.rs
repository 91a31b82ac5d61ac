use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms<T> {
    pub linf: T,
    /// `sum_j dx_j |v_j|`
    pub l1: T,
}

/// Maximum norm and discrete L1 norm weighted by the cell measures.
pub fn norms<T: Real>(v: &[T], dx: &[T]) -> ErrorNorms<T> {
    assert_eq!(v.len(), dx.len());
    let linf = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    let l1 = v.iter().zip(dx).map(|(x, &w)| w * x.abs()).sum();
    ErrorNorms { linf, l1 }
}
