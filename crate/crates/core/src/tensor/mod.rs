//! Minimal dense-tensor substrate with reverse-mode gradients.
//!
//! Tensors are immutable shaped arrays of `f32` or `f64`. Operations are
//! pure: each produces a fresh tensor. When an input is gradient-tracked
//! (a parameter leaf or anything derived from one), the output records its
//! parents and a backward closure, so a scalar result can later propagate
//! gradients back to every leaf via [`Tensor::backward`].
//!
//! Untracked inputs build no tape at all, which keeps the decode and
//! benchmark paths allocation-lean.

mod autograd;
mod init;
mod ops;
mod param;

pub use autograd::check_gradient;
pub use init::RngSeed;
pub use param::Parameter;

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Element type for tensors: `f32` for training/benchmarks, `f64` for the
/// verification suites.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::iter::Sum
    + fmt::Debug
    + fmt::Display
    + Default
    + 'static
{
    const NAME: &'static str;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Context handed to a backward closure.
pub(crate) struct BackCtx<'a, T: Real> {
    pub parents: &'a [Tensor<T>],
    pub out_data: &'a [T],
    #[allow(dead_code)]
    pub out_shape: &'a [usize],
    pub grad: &'a [T],
}

type BackwardFn<T> = Box<dyn Fn(&BackCtx<'_, T>) -> Vec<Option<Vec<T>>>>;

pub(crate) struct TapeOp<T: Real> {
    parents: Vec<Tensor<T>>,
    backward: BackwardFn<T>,
}

pub(crate) struct Inner<T: Real> {
    id: u64,
    shape: Vec<usize>,
    data: Vec<T>,
    grad: RefCell<Option<Vec<T>>>,
    op: Option<TapeOp<T>>,
    is_leaf_grad: bool,
}

/// Dense real array with shape. Cheap to clone (shared storage).
pub struct Tensor<T: Real> {
    inner: Rc<Inner<T>>,
}

impl<T: Real> Clone for Tensor<T> {
    fn clone(&self) -> Self {
        Tensor {
            inner: Rc::clone(&self.inner),
        }
    }
}

impl<T: Real> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor{:?}", self.shape())?;
        if self.len() <= 8 {
            write!(f, " {:?}", self.data())
        } else {
            write!(f, " [{} values]", self.len())
        }
    }
}

impl<T: Real> Tensor<T> {
    // ---- construction ----

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "shape {:?} does not match data length {}",
            shape,
            data.len()
        );
        Tensor {
            inner: Rc::new(Inner {
                id: fresh_id(),
                shape: shape.to_vec(),
                data,
                grad: RefCell::new(None),
                op: None,
                is_leaf_grad: false,
            }),
        }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::from_vec(shape, vec![T::zero(); shape.iter().product()])
    }

    pub fn ones(shape: &[usize]) -> Self {
        Self::from_vec(shape, vec![T::one(); shape.iter().product()])
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        Self::from_vec(shape, vec![value; shape.iter().product()])
    }

    pub fn scalar(value: T) -> Self {
        Self::from_vec(&[1], vec![value])
    }

    pub fn eye(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self::from_vec(&[n, n], data)
    }

    /// Mark this tensor as a gradient leaf (a trainable parameter value).
    pub fn tracked(self) -> Self {
        Tensor {
            inner: Rc::new(Inner {
                id: fresh_id(),
                shape: self.inner.shape.clone(),
                data: self.inner.data.clone(),
                grad: RefCell::new(None),
                op: None,
                is_leaf_grad: true,
            }),
        }
    }

    /// A copy sharing no tape history (gradient flow stops here).
    pub fn detach(&self) -> Self {
        Self::from_vec(&self.inner.shape, self.inner.data.clone())
    }

    pub(crate) fn from_op(
        shape: Vec<usize>,
        data: Vec<T>,
        parents: Vec<Tensor<T>>,
        backward: BackwardFn<T>,
    ) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        let any_tracked = parents.iter().any(|p| p.requires_grad());
        let op = if any_tracked {
            Some(TapeOp { parents, backward })
        } else {
            None
        };
        Tensor {
            inner: Rc::new(Inner {
                id: fresh_id(),
                shape,
                data,
                grad: RefCell::new(None),
                op,
                is_leaf_grad: false,
            }),
        }
    }

    // ---- accessors ----

    pub fn shape(&self) -> &[usize] {
        &self.inner.shape
    }

    pub fn len(&self) -> usize {
        self.inner.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.inner.data
    }

    pub fn rows(&self) -> usize {
        match self.inner.shape.len() {
            1 => 1,
            2 => self.inner.shape[0],
            d => panic!("rows() on {d}-d tensor"),
        }
    }

    pub fn cols(&self) -> usize {
        match self.inner.shape.len() {
            1 => self.inner.shape[0],
            2 => self.inner.shape[1],
            d => panic!("cols() on {d}-d tensor"),
        }
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> T {
        assert_eq!(self.len(), 1, "item() on tensor with {} values", self.len());
        self.inner.data[0]
    }

    pub fn at(&self, row: usize, col: usize) -> T {
        let c = self.cols();
        self.inner.data[row * c + col]
    }

    pub(crate) fn id(&self) -> u64 {
        self.inner.id
    }

    pub fn requires_grad(&self) -> bool {
        self.inner.is_leaf_grad || self.inner.op.is_some()
    }

    pub(crate) fn inner(&self) -> &Inner<T> {
        &self.inner
    }

    /// Accumulated gradient of a leaf, if any backward pass deposited one.
    pub fn grad(&self) -> Option<Vec<T>> {
        self.inner.grad.borrow().clone()
    }

    /// Remove and return the accumulated gradient.
    pub fn take_grad(&self) -> Option<Vec<T>> {
        self.inner.grad.borrow_mut().take()
    }

    pub(crate) fn accumulate_grad(&self, contribution: &[T]) {
        let mut slot = self.inner.grad.borrow_mut();
        match slot.as_mut() {
            Some(buf) => {
                for (b, c) in buf.iter_mut().zip(contribution) {
                    *b += *c;
                }
            }
            None => *slot = Some(contribution.to_vec()),
        }
    }

    // ---- checks & comparisons ----

    pub fn all_finite(&self) -> bool {
        self.inner.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, op: &'static str) -> Result<()> {
        if self.all_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite { op })
        }
    }

    /// Largest absolute elementwise difference. Shapes must match.
    pub fn max_abs_diff(&self, other: &Tensor<T>) -> T {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.inner
            .data
            .iter()
            .zip(other.inner.data.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn bit_identical(&self, other: &Tensor<T>) -> bool {
        self.shape() == other.shape()
            && self
                .inner
                .data
                .iter()
                .zip(other.inner.data.iter())
                .all(|(a, b)| a.to_f64().to_bits() == b.to_f64().to_bits())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.inner.data.iter().map(|v| v.to_f64()).collect()
    }

    pub fn shape_err(&self, op: &'static str, expected: impl Into<String>) -> Error {
        Error::Shape {
            op,
            expected: expected.into(),
            got: format!("{:?}", self.shape()),
        }
    }
}

/// Convenience: build an untracked tensor from f64 literals (tests, configs).
pub fn tensor_from_f64<T: Real>(shape: &[usize], values: &[f64]) -> Tensor<T> {
    Tensor::from_vec(shape, values.iter().map(|v| T::from_f64(*v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_accessors() {
        let t: Tensor<f64> = Tensor::from_vec(&[2, 3], vec![1., 2., 3., 4., 5., 6.]);
        assert_eq!(t.shape(), &[2, 3]);
        assert_eq!(t.rows(), 2);
        assert_eq!(t.cols(), 3);
        assert_eq!(t.at(1, 2), 6.0);
        assert!(t.all_finite());
    }

    #[test]
    #[should_panic]
    fn shape_data_mismatch_panics() {
        let _: Tensor<f64> = Tensor::from_vec(&[2, 2], vec![1.0]);
    }

    #[test]
    fn tracked_flag_propagation() {
        let a: Tensor<f64> = Tensor::ones(&[2]).tracked();
        let b: Tensor<f64> = Tensor::ones(&[2]);
        assert!(a.requires_grad());
        assert!(!b.requires_grad());
        let c = a.add(&b).unwrap();
        assert!(c.requires_grad());
        let d = b.add(&b).unwrap();
        assert!(!d.requires_grad());
        assert!(!c.detach().requires_grad());
    }

    #[test]
    fn non_finite_detection() {
        let t: Tensor<f64> = Tensor::from_vec(&[2], vec![1.0, f64::NAN]);
        assert!(t.ensure_finite("test").is_err());
    }
}
