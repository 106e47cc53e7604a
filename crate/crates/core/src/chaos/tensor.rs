//! Dense finite-dimensional tensors with contractions and symmetrization.

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;
/// Largest supported tensor order.
pub const MAX_ORDER: usize = 6;

/// Dense tensor of order `p` over `R^n`, row-major in its index slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl Tensor {
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM || order > MAX_ORDER {
            return Err(Error::Contract(format!(
                "tensor shape (order {order}, dim {dim}) outside order <= {MAX_ORDER}, 1 <= dim <= {MAX_DIM}"
            )));
        }
        Ok(Tensor { order, dim, entries: vec![0.0; dim.pow(order as u32)] })
    }

    pub fn from_entries(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        let mut t = Tensor::zeros(order, dim)?;
        if entries.len() != t.entries.len() {
            return Err(Error::Contract(format!(
                "expected {} entries, got {}",
                t.entries.len(),
                entries.len()
            )));
        }
        t.entries = entries;
        Ok(t)
    }

    pub fn scalar(value: f64) -> Self {
        Tensor { order: 0, dim: 1, entries: vec![value] }
    }

    /// Basis vector `e_i` (zero-based) in `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        let mut t = Tensor::zeros(1, dim)?;
        if i >= dim {
            return Err(Error::Contract(format!("basis index {i} out of range for dim {dim}")));
        }
        t.entries[i] = 1.0;
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    fn unflat(&self, mut flat: usize, order: usize) -> Vec<usize> {
        let mut idx = vec![0; order];
        for slot in (0..order).rev() {
            idx[slot] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.flat(idx)]
    }

    /// Value of an order-0 tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.order == 0).then(|| self.entries[0])
    }

    pub fn scale(&self, c: f64) -> Tensor {
        Tensor { entries: self.entries.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.order != other.order || self.dim != other.dim {
            return Err(Error::Contract("tensor shapes differ".into()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Tensor { entries, ..self.clone() })
    }

    /// Hilbert–Schmidt norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Tensor product `self (x) other`.
    pub fn outer(&self, other: &Tensor) -> Result<Tensor> {
        self.contract(other, 0)
    }

    /// `r`-th contraction: the last `r` slots of `self` are paired with the
    /// last `r` slots of `other`, leaving an order `p + q - 2r` tensor.
    pub fn contract(&self, other: &Tensor, r: usize) -> Result<Tensor> {
        let dim = if self.order == 0 {
            other.dim
        } else if other.order == 0 {
            self.dim
        } else {
            if self.dim != other.dim {
                return Err(Error::Contract(format!(
                    "ambient dimensions differ ({} vs {})",
                    self.dim, other.dim
                )));
            }
            self.dim
        };
        if r > self.order.min(other.order) {
            return Err(Error::Contract(format!(
                "cannot contract {r} slots of tensors of orders {} and {}",
                self.order, other.order
            )));
        }
        let p = self.order - r;
        let q = other.order - r;
        let mut out = Tensor::zeros(p + q, dim)?;
        let shared = dim.pow(r as u32);
        let p_size = dim.pow(p as u32);
        let q_size = dim.pow(q as u32);
        for i in 0..p_size {
            for j in 0..q_size {
                let mut s = 0.0;
                for k in 0..shared {
                    s += self.entries[i * shared + k] * other.entries[j * shared + k];
                }
                out.entries[i * q_size + j] = s;
            }
        }
        Ok(out)
    }

    /// Maximal deviation from permutation symmetry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for flat in 0..self.entries.len() {
            let mut idx = self.unflat(flat, self.order);
            idx.sort_unstable();
            worst = worst.max((self.entries[flat] - self.get(&idx)).abs());
        }
        worst
    }
}

/// Tensor invariant under permutations of its slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor(Tensor);

/// Tolerance for accepting a tensor as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

impl SymmetricTensor {
    /// Wraps `t`, rejecting it if it is not symmetric within tolerance.
    pub fn new(t: Tensor) -> Result<Self> {
        let a = t.asymmetry();
        if a > SYMMETRY_TOLERANCE * t.norm().max(1.0) {
            return Err(Error::Contract(format!("tensor is not symmetric (deviation {a:e})")));
        }
        Ok(SymmetricTensor(t))
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }

    pub fn contract(&self, other: &SymmetricTensor, r: usize) -> Result<Tensor> {
        self.0.contract(&other.0, r)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in permutations(n - 1) {
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Average of `t` over all permutations of its slots.
pub fn symmetrize(t: &Tensor) -> SymmetricTensor {
    let perms = permutations(t.order);
    let mut out = Tensor { entries: vec![0.0; t.entries.len()], ..t.clone() };
    let mut permuted = vec![0usize; t.order];
    for flat in 0..t.entries.len() {
        let idx = t.unflat(flat, t.order);
        let mut s = 0.0;
        for perm in &perms {
            for (slot, &src) in perm.iter().enumerate() {
                permuted[slot] = idx[src];
            }
            s += t.get(&permuted);
        }
        out.entries[flat] = s / perms.len() as f64;
    }
    SymmetricTensor(out)
}

/// Symmetrized contraction `f (x)~_r g`.
pub fn contract_symmetrized(f: &SymmetricTensor, g: &SymmetricTensor, r: usize) -> Result<SymmetricTensor> {
    Ok(symmetrize(&f.contract(g, r)?))
}
