//! Tensor-product Chebyshev interpolation in `n` dimensions.
//!
//! Arrays use one fixed linear order throughout: dimension 1 varies fastest,
//! and in a [`TensorStack`] the member index is a trailing axis after all
//! polynomial dimensions. Contractions always act on the leading dimension
//! and drop it, so the next dimension becomes leading. This is the cyclic
//! axis rotation of the batched evaluation scheme realised by stride
//! bookkeeping instead of data movement.

use crate::cheb1d::{chebyshev_row, clamp_unit, clenshaw, ChebBasis1D, Interval};
use crate::error::{Error, Result};

fn checked_product(shape: &[usize]) -> Result<usize> {
    shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).ok_or_else(|| Error::IndexOverflow(shape.to_vec()))
}

/// Coefficients of one `n`-dimensional interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefTensor {
    /// `(N_1 + 1, ..., N_n + 1)`.
    pub shape: Vec<usize>,
    pub coeffs: Vec<f64>,
    pub domains: Vec<Interval>,
}

/// `count` interpolants sharing one layout, stored member after member.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorStack {
    pub shape: Vec<usize>,
    pub count: usize,
    pub coeffs: Vec<f64>,
    pub domains: Vec<Interval>,
}

/// Flat selection that keeps, for every stack member `j`, the rows of an
/// [`eval_axis`] result that belong to the `j`-th evaluation point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatherIndex {
    leading: usize,
    rest: Vec<usize>,
    count: usize,
    index: Vec<usize>,
}

impl GatherIndex {
    pub fn as_slice(&self) -> &[usize] {
        &self.index
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

impl CoefTensor {
    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// View as a stack with a single member.
    pub fn to_stack(&self) -> TensorStack {
        TensorStack { shape: self.shape.clone(), count: 1, coeffs: self.coeffs.clone(), domains: self.domains.clone() }
    }

    /// Coefficient `p_l` for multi-index `l`.
    pub fn get(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        let mut stride = 1;
        for (&i, &n) in index.iter().zip(&self.shape) {
            flat += i * stride;
            stride *= n;
        }
        self.coeffs[flat]
    }

    /// Evaluates at a point given in the original (unmapped) coordinates.
    pub fn eval_physical(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.ndim() {
            return Err(Error::ShapeMismatch(format!(
                "point has {} coordinates, tensor has {} dimensions",
                point.len(),
                self.ndim()
            )));
        }
        let unit: Vec<f64> = point.iter().zip(&self.domains).map(|(&x, d)| d.to_unit(x)).collect();
        eval_full(self, &unit)
    }
}

impl TensorStack {
    pub fn member_len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn member(&self, j: usize) -> CoefTensor {
        let len = self.member_len();
        CoefTensor {
            shape: self.shape.clone(),
            coeffs: self.coeffs[j * len..(j + 1) * len].to_vec(),
            domains: self.domains.clone(),
        }
    }

    /// Stacks tensors of identical layout.
    pub fn from_members(members: &[CoefTensor]) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("stack members"))?;
        let mut coeffs = Vec::with_capacity(first.coeffs.len() * members.len());
        for m in members {
            if m.shape != first.shape || m.domains != first.domains {
                return Err(Error::ShapeMismatch("stack members differ in layout".into()));
            }
            coeffs.extend_from_slice(&m.coeffs);
        }
        Ok(Self { shape: first.shape.clone(), count: members.len(), coeffs, domains: first.domains.clone() })
    }

    /// Contiguous sub-stack of members `start..start + len`.
    pub fn slice_members(&self, start: usize, len: usize) -> TensorStack {
        let m = self.member_len();
        TensorStack {
            shape: self.shape.clone(),
            count: len,
            coeffs: self.coeffs[start * m..(start + len) * m].to_vec(),
            domains: self.domains.clone(),
        }
    }
}

/// Interpolates samples taken at every tensor-product node tuple.
///
/// `samples` follows the dimension-1-fastest order of node indexes. The 1-D
/// transform runs over all fibers of the leading dimension, after which the
/// axes are rotated by one; after `n` rounds the layout is back in place.
pub fn tensor_coeffs(samples: &[f64], bases: &[ChebBasis1D]) -> Result<CoefTensor> {
    if bases.is_empty() {
        return Err(Error::Empty("bases"));
    }
    let mut dims: Vec<usize> = bases.iter().map(ChebBasis1D::len).collect();
    let total = checked_product(&dims)?;
    if samples.len() != total {
        return Err(Error::LengthMismatch { expected: total, got: samples.len() });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("samples"));
    }
    let shape = dims.clone();
    let mut cur = samples.to_vec();
    let mut next = vec![0.0; total];
    let mut fiber = Vec::new();
    let mut buf = Vec::new();
    for basis in bases {
        let n0 = dims[0];
        let fibers = total / n0;
        fiber.resize(n0, 0.0);
        for f in 0..fibers {
            basis.transform_into(&cur[f * n0..(f + 1) * n0], &mut fiber, &mut buf);
            for (l, &v) in fiber.iter().enumerate() {
                next[f + fibers * l] = v;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        dims.rotate_left(1);
    }
    Ok(CoefTensor { shape, coeffs: cur, domains: bases.iter().map(ChebBasis1D::interval).collect() })
}

fn basis_matrix(points: &[f64], width: usize) -> Result<Vec<f64>> {
    let mut b = vec![0.0; points.len() * width];
    for (row, &x) in b.chunks_exact_mut(width).zip(points) {
        chebyshev_row(clamp_unit(x)?, row);
    }
    Ok(b)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Evaluates the leading variable of every member at each of `points`
/// (in `[-1, 1]`).
///
/// The result has the leading dimension removed and `count * k` members:
/// output member `m + count * j` is input member `m` with its leading
/// variable bound to `points[j]`.
pub fn eval_axis(stack: &TensorStack, points: &[f64]) -> Result<TensorStack> {
    if points.is_empty() {
        return Err(Error::Empty("points"));
    }
    let (&n0, rest) =
        stack.shape.split_first().ok_or_else(|| Error::ShapeMismatch("no axis left to contract".into()))?;
    let r_len: usize = rest.iter().product();
    let b = basis_matrix(points, n0)?;
    let count = stack.count;
    let out_count = count.checked_mul(points.len()).ok_or_else(|| Error::IndexOverflow(stack.shape.clone()))?;
    let mut out = vec![0.0; r_len * out_count];
    // fibers of the leading axis are contiguous: fiber (r, m) starts at n0 * (r + R m)
    for (kk, brow) in b.chunks_exact(n0).enumerate() {
        let dst = &mut out[r_len * count * kk..r_len * count * (kk + 1)];
        for (d, fiber) in dst.iter_mut().zip(stack.coeffs.chunks_exact(n0)) {
            *d = dot(brow, fiber);
        }
    }
    Ok(TensorStack { shape: rest.to_vec(), count: out_count, coeffs: out, domains: stack.domains[1..].to_vec() })
}

/// Location index for a stack whose members have shape `layout` and which
/// holds `count` members, used to bind the leading variable member by member.
///
/// Entry `r + R * m` of the index is `r + R * (m + count * m)`: row `m` of
/// member `m` in the `eval_axis` result with one point per member.
pub fn make_gather_index(layout: &[usize], count: usize) -> Result<GatherIndex> {
    let (&leading, rest) = layout.split_first().ok_or_else(|| Error::ShapeMismatch("empty layout".into()))?;
    if leading == 0 || rest.contains(&0) || count == 0 {
        return Err(Error::ShapeMismatch(format!("non-positive layout {layout:?} x {count}")));
    }
    let r_len = checked_product(rest)?;
    let overflow = || Error::IndexOverflow(layout.to_vec());
    // largest flat index addressed is r_len * count * count - 1
    r_len.checked_mul(count).and_then(|v| v.checked_mul(count)).ok_or_else(overflow)?;
    let mut index = Vec::with_capacity(r_len * count);
    for m in 0..count {
        let base = r_len * (m + count * m);
        index.extend(base..base + r_len);
    }
    Ok(GatherIndex { leading, rest: rest.to_vec(), count, index })
}

/// Binds the leading variable of member `j` to `points[j]` for every member.
///
/// Only the entries of the virtual `eval_axis` result selected by `gather`
/// are computed, each with the same reduction order `eval_axis` uses, so the
/// result is bitwise equal to gathering from a full `eval_axis` call.
pub fn eval_diagonal_batch(stack: &TensorStack, points: &[f64], gather: &GatherIndex) -> Result<TensorStack> {
    if points.len() != stack.count {
        return Err(Error::LengthMismatch { expected: stack.count, got: points.len() });
    }
    let (&n0, rest) =
        stack.shape.split_first().ok_or_else(|| Error::ShapeMismatch("no axis left to contract".into()))?;
    if gather.leading != n0 || gather.rest != rest || gather.count != stack.count {
        return Err(Error::StaleGather);
    }
    let count = stack.count;
    let r_len: usize = rest.iter().product();
    let b = basis_matrix(points, n0)?;
    let out: Vec<f64> = gather
        .index
        .iter()
        .map(|&f| {
            let r = f % r_len;
            let q = f / r_len;
            let (m, kk) = (q % count, q / count);
            let start = n0 * (r + r_len * m);
            dot(&b[kk * n0..(kk + 1) * n0], &stack.coeffs[start..start + n0])
        })
        .collect();
    Ok(TensorStack { shape: rest.to_vec(), count, coeffs: out, domains: stack.domains[1..].to_vec() })
}

/// Scalar evaluation by nested Clenshaw contraction over all axes.
pub fn eval_full(tensor: &CoefTensor, point: &[f64]) -> Result<f64> {
    if point.len() != tensor.ndim() {
        return Err(Error::ShapeMismatch(format!(
            "point has {} coordinates, tensor has {} dimensions",
            point.len(),
            tensor.ndim()
        )));
    }
    let mut cur = tensor.coeffs.clone();
    for (&n0, &x) in tensor.shape.iter().zip(point) {
        let x = clamp_unit(x)?;
        cur = cur.chunks_exact(n0).map(|fiber| clenshaw(fiber, x)).collect();
    }
    Ok(cur[0])
}
