//! Dense component tensors with an up/down valence per slot.
//!
//! Components are stored row-major with slot 0 most significant. Every
//! operation returns a fresh tensor.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::scalars::{rat, Coeff, Rat};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Up,
    Down,
}

impl Slot {
    pub fn flip(self) -> Slot {
        match self {
            Slot::Up => Slot::Down,
            Slot::Down => Slot::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TensorError {
    #[error("contraction requires up/down pair")]
    SameVariance,
    #[error("symmetrisation slots must share a variance")]
    MixedVariance,
    #[error("slot {0} out of range")]
    BadSlot(usize),
    #[error("singular metric")]
    SingularMetric,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Young symmetry types used by the curvature-valued bundles.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum YoungShape {
    /// `μ_bcde = μ_[bc][de]`, `μ_[bcd]e = 0`
    RiemannBox,
    /// `μ_abcde = μ_[abc][de]`, `μ_[abcd]e = 0`
    HookBox,
    /// `τ_abc = τ_a[bc]`, `τ_[abc] = 0`
    Hook3,
}

impl YoungShape {
    pub fn rank(self) -> usize {
        match self {
            YoungShape::RiemannBox => 4,
            YoungShape::HookBox => 5,
            YoungShape::Hook3 => 3,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tensor<T> {
    dim: usize,
    valence: Vec<Slot>,
    data: Vec<T>,
}

/// All permutations of `0..k` with their signs.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out.into_iter()
        .map(|p| {
            let inv = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let s = if inv % 2 == 0 { 1 } else { -1 };
            (p, s)
        })
        .collect()
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Iterate all multi-indices of the given rank over `0..dim`, slot 0 most significant.
pub fn multi_indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut f| {
        let mut idx = vec![0; rank];
        for k in (0..rank).rev() {
            idx[k] = f % dim;
            f /= dim;
        }
        idx
    })
}

impl<T: Coeff> Tensor<T> {
    pub fn zeros(dim: usize, valence: Vec<Slot>) -> Self {
        let n = dim.pow(valence.len() as u32);
        Tensor { dim, valence, data: vec![T::zero(); n] }
    }

    pub fn scalar(v: T) -> Self {
        Tensor { dim: 0, valence: Vec::new(), data: vec![v] }
    }

    pub fn from_fn(dim: usize, valence: Vec<Slot>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let data = multi_indices(dim, valence.len()).map(|i| f(&i)).collect();
        Tensor { dim, valence, data }
    }

    pub fn from_data(dim: usize, valence: Vec<Slot>, data: Vec<T>) -> Result<Self, TensorError> {
        if data.len() != dim.pow(valence.len() as u32) {
            return Err(TensorError::Shape(format!("{} components for dim {dim}, rank {}", data.len(), valence.len())));
        }
        Ok(Tensor { dim, valence, data })
    }

    pub fn down(dim: usize, rank: usize) -> Self {
        Tensor::zeros(dim, vec![Slot::Down; rank])
    }

    /// Kronecker delta `δ^a_b`.
    pub fn identity(dim: usize) -> Self {
        Tensor::from_fn(dim, vec![Slot::Up, Slot::Down], |i| if i[0] == i[1] { T::one() } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn valence(&self) -> &[Slot] {
        &self.valence
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_zero)
    }

    /// First nonzero component, for failure reports.
    pub fn first_nonzero(&self) -> Option<(Vec<usize>, &T)> {
        multi_indices(self.dim, self.rank()).zip(&self.data).find(|(_, v)| !v.is_zero())
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Tensor<U> {
        Tensor { dim: self.dim, valence: self.valence.clone(), data: self.data.iter().map(f).collect() }
    }

    fn zip_with(&self, o: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self, TensorError> {
        if self.dim != o.dim || self.valence != o.valence {
            return Err(TensorError::Shape("operands differ in dimension or valence".into()));
        }
        Ok(Tensor {
            dim: self.dim,
            valence: self.valence.clone(),
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self, TensorError> {
        self.zip_with(o, T::plus)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, TensorError> {
        self.zip_with(o, T::minus)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        self.map(|v| v.scale(r))
    }

    pub fn times(&self, s: &T) -> Self {
        self.map(|v| v.times(s))
    }

    pub fn neg(&self) -> Self {
        self.map(T::negate)
    }

    pub fn outer(&self, o: &Self) -> Self {
        let dim = if self.rank() == 0 { o.dim } else { self.dim };
        let mut valence = self.valence.clone();
        valence.extend_from_slice(&o.valence);
        let mut data = Vec::with_capacity(self.data.len() * o.data.len());
        for a in &self.data {
            for b in &o.data {
                data.push(a.times(b));
            }
        }
        Tensor { dim, valence, data }
    }

    fn check_slot(&self, s: usize) -> Result<(), TensorError> {
        if s < self.rank() {
            Ok(())
        } else {
            Err(TensorError::BadSlot(s))
        }
    }

    /// Trace over an up/down pair of slots.
    pub fn contract(&self, i: usize, j: usize) -> Result<Self, TensorError> {
        self.check_slot(i)?;
        self.check_slot(j)?;
        if i == j || self.valence[i] == self.valence[j] {
            return Err(TensorError::SameVariance);
        }
        Ok(self.trace_unchecked(i, j))
    }

    /// Trace over two slots ignoring variance (frame-orthonormal style sums).
    fn trace_unchecked(&self, i: usize, j: usize) -> Self {
        let (lo, hi) = (i.min(j), i.max(j));
        let valence: Vec<Slot> = self.valence.iter().enumerate().filter(|&(k, _)| k != lo && k != hi).map(|(_, s)| *s).collect();
        let dim = self.dim;
        let mut full = vec![0; self.rank()];
        Tensor::from_fn(dim, valence, |idx| {
            let mut rest = idx.iter();
            for (s, f) in full.iter_mut().enumerate() {
                if s != lo && s != hi {
                    *f = *rest.next().unwrap();
                }
            }
            let mut acc = T::zero();
            for k in 0..dim {
                full[lo] = k;
                full[hi] = k;
                let v = self.get(&full);
                if !v.is_zero() {
                    acc = acc.plus(v);
                }
            }
            acc
        })
    }

    /// Result slot `k` is source slot `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self, TensorError> {
        let mut seen = vec![false; self.rank()];
        if perm.len() != self.rank() || perm.iter().any(|&p| p >= self.rank() || std::mem::replace(&mut seen[p], true)) {
            return Err(TensorError::Shape(format!("{perm:?} is not a permutation of {} slots", self.rank())));
        }
        let valence = perm.iter().map(|&p| self.valence[p]).collect();
        let mut src = vec![0; self.rank()];
        Ok(Tensor::from_fn(self.dim, valence, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src).clone()
        }))
    }

    fn average(&self, slots: &[usize], signed: bool) -> Result<Self, TensorError> {
        for &s in slots {
            self.check_slot(s)?;
        }
        if let Some(&s0) = slots.first() {
            if slots.iter().any(|&s| self.valence[s] != self.valence[s0]) {
                return Err(TensorError::MixedVariance);
            }
        }
        if slots.len() <= 1 {
            return Ok(self.clone());
        }
        let perms = permutations(slots.len());
        let w = rat(1, factorial(slots.len()));
        let mut src = vec![0; self.rank()];
        Ok(Tensor::from_fn(self.dim, self.valence.clone(), |idx| {
            let mut acc = T::zero();
            for (p, sign) in &perms {
                src.copy_from_slice(idx);
                for (m, &s) in slots.iter().enumerate() {
                    src[s] = idx[slots[p[m]]];
                }
                let v = self.get(&src);
                if v.is_zero() {
                    continue;
                }
                acc = if signed && *sign < 0 { acc.minus(v) } else { acc.plus(v) };
            }
            acc.scale(&w)
        }))
    }

    pub fn symmetrize(&self, slots: &[usize]) -> Result<Self, TensorError> {
        self.average(slots, false)
    }

    /// Skew projection with the `1/p!` weight.
    pub fn antisymmetrize(&self, slots: &[usize]) -> Result<Self, TensorError> {
        self.average(slots, true)
    }

    /// Flip the variance of `slot`: raise with `g_inv` if it is down, lower with `g` if up.
    pub fn raise_lower(&self, slot: usize, g: &Tensor<T>, g_inv: &Tensor<T>) -> Result<Self, TensorError> {
        self.check_slot(slot)?;
        let m = match self.valence[slot] {
            Slot::Down => g_inv,
            Slot::Up => g,
        };
        if m.rank() != 2 || m.dim != self.dim {
            return Err(TensorError::Shape("metric must be a rank-2 tensor of matching dimension".into()));
        }
        let mut valence = self.valence.clone();
        valence[slot] = valence[slot].flip();
        let mut src = vec![0; self.rank()];
        Ok(Tensor::from_fn(self.dim, valence, |idx| {
            let mut acc = T::zero();
            src.copy_from_slice(idx);
            for k in 0..self.dim {
                let c = m.get(&[idx[slot], k]);
                if c.is_zero() {
                    continue;
                }
                src[slot] = k;
                acc = acc.plus(&c.times(self.get(&src)));
            }
            acc
        }))
    }

    /// Natural derivation action of an endomorphism `A^a_b` (gl-action):
    /// each down slot picks up `-A^e_a T_..e..`, each up slot `+A^a_e T^..e..`.
    pub fn derivation(&self, a: &Tensor<T>) -> Self {
        let mut src = vec![0; self.rank()];
        Tensor::from_fn(self.dim, self.valence.clone(), |idx| {
            let mut acc = T::zero();
            src.copy_from_slice(idx);
            for s in 0..self.rank() {
                for e in 0..self.dim {
                    let coef = match self.valence[s] {
                        Slot::Down => a.get(&[e, idx[s]]).negate(),
                        Slot::Up => a.get(&[idx[s], e]).clone(),
                    };
                    if coef.is_zero() {
                        continue;
                    }
                    src[s] = e;
                    acc = acc.plus(&coef.times(self.get(&src)));
                    src[s] = idx[s];
                }
            }
            acc
        })
    }

    /// Exact membership test; the residual is the first violated projection
    /// (zero iff the tensor has the symmetry).
    pub fn young_check(&self, shape: YoungShape) -> Result<(bool, Self), TensorError> {
        if self.rank() != shape.rank() {
            return Err(TensorError::Shape(format!("{shape:?} needs rank {}", shape.rank())));
        }
        let (block, cyclic): (Self, Vec<usize>) = match shape {
            YoungShape::RiemannBox => (self.antisymmetrize(&[0, 1])?.antisymmetrize(&[2, 3])?, vec![0, 1, 2]),
            YoungShape::HookBox => (self.antisymmetrize(&[0, 1, 2])?.antisymmetrize(&[3, 4])?, vec![0, 1, 2, 3]),
            YoungShape::Hook3 => (self.antisymmetrize(&[1, 2])?, vec![0, 1, 2]),
        };
        let r1 = self.sub(&block)?;
        if !r1.is_zero() {
            return Ok((false, r1));
        }
        let r2 = self.antisymmetrize(&cyclic)?;
        Ok((r2.is_zero(), r2))
    }

    /// `{"valence": [...], "components": nested arrays of strings}`.
    pub fn to_json(&self, names: &[String]) -> Value {
        fn nest<T: Coeff>(data: &[T], dim: usize, rank: usize, names: &[String]) -> Value {
            if rank == 0 {
                return Value::String(data[0].render(names));
            }
            let step = data.len() / dim.max(1);
            Value::Array((0..dim).map(|i| nest(&data[i * step..(i + 1) * step], dim, rank - 1, names)).collect())
        }
        json!({
            "valence": self.valence,
            "components": nest(&self.data, self.dim, self.rank(), names),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::int;

    fn euclid(n: usize) -> Tensor<Rat> {
        Tensor::from_fn(n, vec![Slot::Down; 2], |i| if i[0] == i[1] { int(1) } else { int(0) })
    }

    #[test]
    fn trace_of_identity() {
        let d = Tensor::<Rat>::identity(4);
        assert_eq!(d.contract(0, 1).unwrap().data()[0], int(4));
        assert_eq!(euclid(2).contract(0, 1), Err(TensorError::SameVariance));
    }

    #[test]
    fn inverse_metric_contracts_to_delta() {
        let g = Tensor::from_data(2, vec![Slot::Down; 2], vec![int(-1), int(0), int(0), int(1)]).unwrap();
        let gi = Tensor::from_data(2, vec![Slot::Up; 2], vec![int(-1), int(0), int(0), int(1)]).unwrap();
        let prod = gi.outer(&g).contract(1, 2).unwrap();
        assert_eq!(prod, Tensor::identity(2));
    }

    #[test]
    fn antisymmetrize_carries_one_over_p_factorial() {
        let e1 = Tensor::from_data(2, vec![Slot::Up], vec![int(1), int(0)]).unwrap();
        let e2 = Tensor::from_data(2, vec![Slot::Up], vec![int(0), int(1)]).unwrap();
        let a = e1.outer(&e2).antisymmetrize(&[0, 1]).unwrap();
        assert_eq!(a.data(), &[int(0), rat(1, 2), rat(-1, 2), int(0)]);
        assert!(euclid(3).antisymmetrize(&[0, 1]).unwrap().is_zero());
    }

    #[test]
    fn constant_curvature_contracts_to_twice_metric() {
        let g = euclid(3);
        let r = Tensor::from_fn(3, vec![Slot::Down; 4], |i| {
            g.get(&[i[0], i[2]]).times(g.get(&[i[1], i[3]])).minus(&g.get(&[i[0], i[3]]).times(g.get(&[i[1], i[2]])))
        });
        let gi = Tensor::from_fn(3, vec![Slot::Up; 2], |i| g.get(i).clone());
        let ric = gi.outer(&r).contract(0, 3).unwrap().contract(0, 3).unwrap();
        assert_eq!(ric, g.scale(&int(2)));
        assert!(r.young_check(YoungShape::RiemannBox).unwrap().0);
    }

    #[test]
    fn young_check_rejects_product_of_metrics() {
        let g = euclid(2);
        let (ok, res) = g.outer(&g).young_check(YoungShape::RiemannBox).unwrap();
        assert!(!ok);
        assert!(!res.is_zero());
    }

    #[test]
    fn lowering_with_minkowski() {
        let g = Tensor::from_data(2, vec![Slot::Down; 2], vec![int(-1), int(0), int(0), int(1)]).unwrap();
        let gi = Tensor::from_data(2, vec![Slot::Up; 2], vec![int(-1), int(0), int(0), int(1)]).unwrap();
        let x = Tensor::from_data(2, vec![Slot::Up], vec![int(1), int(0)]).unwrap();
        let xl = x.raise_lower(0, &g, &gi).unwrap();
        assert_eq!(xl.data(), &[int(-1), int(0)]);
        assert_eq!(xl.raise_lower(0, &g, &gi).unwrap(), x);
    }

    #[test]
    fn permute_swaps_slots() {
        let t = Tensor::from_data(2, vec![Slot::Down, Slot::Up], vec![int(1), int(2), int(3), int(4)]).unwrap();
        let p = t.permute(&[1, 0]).unwrap();
        assert_eq!(p.valence(), &[Slot::Up, Slot::Down]);
        assert_eq!(p.data(), &[int(1), int(3), int(2), int(4)]);
    }

    #[test]
    fn json_layout() {
        let t = Tensor::from_data(2, vec![Slot::Down], vec![int(1), rat(1, 2)]).unwrap();
        assert_eq!(t.to_json(&[]), json!({"valence": ["down"], "components": ["1", "1/2"]}));
    }
}
