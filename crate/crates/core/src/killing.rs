//! The Killing connection on `E = Λ¹ ⊕ Λ²` and the operators around it.
//!
//! Curvature convention: `κ_ab = D_[a D_b]`, so on a section
//! `κ_ab(σ, μ) = [0; R_ab^e_[c μ_d]e + R_cd^e_[a μ_b]e − ½(∇^e R_abcd) σ_e]`
//! and the homomorphism `𝓡` is twice the lower block of `κ`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::linalg::{Matrix, Subspace};
use crate::scalars::{rat, Coeff, Monomial, Poly, Rat, RatFunc};
use crate::spaces::{covariant_derivative, covariant_derivative_per_slot, so_dim, so_pairs, riemann, Chart, PointFrame};
use crate::tensor::{Slot, Tensor, TensorError};

pub fn e_dim(m: usize) -> usize {
    m + so_dim(m)
}

/// Strictly increasing index tuples of length `p` (the coordinates of `Λ^p`).
pub fn form_tuples(m: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, p, &mut Vec::new(), &mut out);
    out
}

/// A section of `E`: a one-form `σ_a` and a two-form `μ_ab`.
#[derive(Clone, Debug, PartialEq)]
pub struct KSection<T> {
    pub sigma: Tensor<T>,
    pub mu: Tensor<T>,
}

impl<T: Coeff> KSection<T> {
    pub fn new(sigma: Tensor<T>, mu: Tensor<T>) -> Result<Self, TensorError> {
        if sigma.rank() != 1 || mu.rank() != 2 || sigma.dim() != mu.dim() {
            return Err(TensorError::Shape("a section is a 1-form and a 2-form".into()));
        }
        if !mu.add(&mu.permute(&[1, 0])?)?.is_zero() {
            return Err(TensorError::Shape("mu must be skew".into()));
        }
        Ok(KSection { sigma, mu })
    }

    pub fn zero(m: usize) -> Self {
        KSection { sigma: Tensor::down(m, 1), mu: Tensor::down(m, 2) }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// `[σ_0 .. σ_{m-1}, μ_(i<j)]`.
    pub fn to_flat(&self) -> Vec<T> {
        let m = self.dim();
        let mut v: Vec<T> = self.sigma.data().to_vec();
        v.extend(so_pairs(m).into_iter().map(|(i, j)| self.mu.get(&[i, j]).clone()));
        v
    }

    pub fn from_flat(m: usize, v: &[T]) -> Self {
        let sigma = Tensor::from_fn(m, vec![Slot::Down], |i| v[i[0]].clone());
        let mut mu = Tensor::down(m, 2);
        for (k, (i, j)) in so_pairs(m).into_iter().enumerate() {
            mu.set(&[i, j], v[m + k].clone());
            mu.set(&[j, i], v[m + k].negate());
        }
        KSection { sigma, mu }
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.is_zero() && self.mu.is_zero()
    }
}

/// An `E`-valued `p`-form: `α_{B;c}` (rank `p+1`) and `ψ_{B;cd}` (rank `p+2`),
/// the first `p` slots being the form slots.
#[derive(Clone, Debug, PartialEq)]
pub struct EValuedForm<T> {
    pub degree: usize,
    pub sigma: Tensor<T>,
    pub mu: Tensor<T>,
}

impl<T: Coeff> EValuedForm<T> {
    pub fn zero(m: usize, p: usize) -> Self {
        EValuedForm { degree: p, sigma: Tensor::down(m, p + 1), mu: Tensor::down(m, p + 2) }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.is_zero() && self.mu.is_zero()
    }

    pub fn sub(&self, o: &Self) -> Result<Self, TensorError> {
        Ok(EValuedForm { degree: self.degree, sigma: self.sigma.sub(&o.sigma)?, mu: self.mu.sub(&o.mu)? })
    }

    pub fn add(&self, o: &Self) -> Result<Self, TensorError> {
        Ok(EValuedForm { degree: self.degree, sigma: self.sigma.add(&o.sigma)?, mu: self.mu.add(&o.mu)? })
    }

    /// The `E`-vector sitting at form index `b` (any tuple, not only increasing).
    pub fn at(&self, b: &[usize]) -> KSection<T> {
        let m = self.dim();
        let sigma = Tensor::from_fn(m, vec![Slot::Down], |i| {
            let mut ix = b.to_vec();
            ix.push(i[0]);
            self.sigma.get(&ix).clone()
        });
        let mu = Tensor::from_fn(m, vec![Slot::Down; 2], |i| {
            let mut ix = b.to_vec();
            ix.extend_from_slice(i);
            self.mu.get(&ix).clone()
        });
        KSection { sigma, mu }
    }

    /// Build from an `E`-vector valued function of the form index.
    pub fn from_sections(m: usize, p: usize, mut f: impl FnMut(&[usize]) -> KSection<T>) -> Self {
        let mut out = EValuedForm::zero(m, p);
        for b in crate::tensor::multi_indices(m, p) {
            let s = f(&b);
            for c in 0..m {
                let mut ix = b.clone();
                ix.push(c);
                out.sigma.set(&ix, s.sigma.get(&[c]).clone());
                for d in 0..m {
                    let mut ix = b.clone();
                    ix.extend_from_slice(&[c, d]);
                    out.mu.set(&ix, s.mu.get(&[c, d]).clone());
                }
            }
        }
        out
    }

    /// Components over increasing form tuples, each followed by the flat `E`-vector.
    pub fn to_flat(&self) -> Vec<T> {
        form_tuples(self.dim(), self.degree).iter().flat_map(|b| self.at(b).to_flat()).collect()
    }

    pub fn antisymmetrize_form_slots(&self) -> Self {
        let slots: Vec<usize> = (0..self.degree).collect();
        EValuedForm {
            degree: self.degree,
            sigma: self.sigma.antisymmetrize(&slots).expect("form slots"),
            mu: self.mu.antisymmetrize(&slots).expect("form slots"),
        }
    }
}

/// `K(μ)_abcd = R_ab^e_[c μ_d]e + R_cd^e_[a μ_b]e` from `R_ab^c_d`.
pub fn k_of_mu<T: Coeff>(rm: &Tensor<T>, mu: &Tensor<T>) -> Tensor<T> {
    let m = rm.dim();
    let half = rat(1, 2);
    // P_abcd = R_ab^e_c μ_de
    let p = Tensor::from_fn(m, vec![Slot::Down; 4], |i| {
        (0..m).fold(T::zero(), |acc, e| {
            let r = rm.get(&[i[0], i[1], e, i[2]]);
            let u = mu.get(&[i[3], e]);
            if r.is_zero() || u.is_zero() {
                acc
            } else {
                acc.plus(&r.times(u))
            }
        })
    });
    Tensor::from_fn(m, vec![Slot::Down; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        p.get(&[a, b, c, d])
            .minus(p.get(&[a, b, d, c]))
            .plus(p.get(&[c, d, a, b]))
            .minus(p.get(&[c, d, b, a]))
            .scale(&half)
    })
}

/// `Λ²⊗Λ²` coordinates `t_{(a<b),(c<d)}`.
pub fn box_coords<T: Coeff>(t: &Tensor<T>) -> Vec<T> {
    let pairs = so_pairs(t.dim());
    pairs
        .iter()
        .flat_map(|&(a, b)| pairs.iter().map(move |&(c, d)| t.get(&[a, b, c, d]).clone()))
        .collect()
}

/// The Killing-connection calculus on a chart.
pub struct KillingChart<'a> {
    chart: &'a Chart,
    rm: Tensor<RatFunc>,
    rd: Tensor<RatFunc>,
    nabla_r: OnceLock<Tensor<RatFunc>>,
    range: OnceLock<Subspace<RatFunc>>,
}

pub struct SphereRange {
    pub phi_c: Tensor<RatFunc>,
    pub nec_residual: Tensor<RatFunc>,
    pub nec_holds: bool,
    pub suff_residual: Tensor<RatFunc>,
    pub suff_holds: bool,
}

/// A pair living in one of the top-row bundles `Λ^p⊗Λ¹ ⊕ Λ^{p+1}⊗Λ¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct TopPair {
    pub sigma: Tensor<RatFunc>,
    pub lambda: Tensor<RatFunc>,
}

impl TopPair {
    pub fn is_zero(&self) -> bool {
        self.sigma.is_zero() && self.lambda.is_zero()
    }

    pub fn sub(&self, o: &TopPair) -> Result<TopPair, TensorError> {
        Ok(TopPair { sigma: self.sigma.sub(&o.sigma)?, lambda: self.lambda.sub(&o.lambda)? })
    }
}

impl<'a> KillingChart<'a> {
    pub fn new(chart: &'a Chart) -> Self {
        let rm = riemann(chart);
        let rd = rm.raise_lower(2, chart.metric(), chart.metric_inv()).expect("rank 4");
        KillingChart { chart, rm, rd, nabla_r: OnceLock::new(), range: OnceLock::new() }
    }

    pub fn chart(&self) -> &Chart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `R_ab^c_d`.
    pub fn riemann_mixed(&self) -> &Tensor<RatFunc> {
        &self.rm
    }

    /// `R_abcd`.
    pub fn riemann_down(&self) -> &Tensor<RatFunc> {
        &self.rd
    }

    /// `∇_e R_abcd` (derivative slot first).
    pub fn nabla_riemann(&self) -> &Tensor<RatFunc> {
        self.nabla_r.get_or_init(|| covariant_derivative(self.chart, &self.rd))
    }

    fn nabla(&self, t: &Tensor<RatFunc>) -> Tensor<RatFunc> {
        covariant_derivative(self.chart, t)
    }

    /// `𝒦(X) = ∇_(a X_b)`.
    pub fn killing_op(&self, x: &Tensor<RatFunc>) -> Tensor<RatFunc> {
        self.nabla(x).symmetrize(&[0, 1]).expect("two down slots")
    }

    /// The Calabi operator
    /// `∇_(a∇_c)h_bd − ∇_(b∇_c)h_ad − ∇_(a∇_d)h_bc + ∇_(b∇_d)h_ac − R_ab^e_[c h_d]e − R_cd^e_[a h_b]e`.
    pub fn calabi(&self, h: &Tensor<RatFunc>) -> Tensor<RatFunc> {
        let m = self.dim();
        let hh = self.nabla(&self.nabla(h));
        let s = |x: usize, y: usize, p: usize, q: usize| hh.get(&[x, y, p, q]).plus(hh.get(&[y, x, p, q]));
        let rh = |a: usize, b: usize, c: usize, d: usize| {
            (0..m).fold(RatFunc::zero(), |acc, e| {
                let r = self.rm.get(&[a, b, e, c]);
                let v = h.get(&[d, e]);
                if r.is_zero() || v.is_zero() {
                    acc
                } else {
                    acc.plus(&r.times(v))
                }
            })
        };
        let half = rat(1, 2);
        Tensor::from_fn(m, vec![Slot::Down; 4], |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let second = s(a, c, b, d).minus(&s(b, c, a, d)).minus(&s(a, d, b, c)).plus(&s(b, d, a, c));
            let curv = rh(a, b, c, d).minus(&rh(a, b, d, c)).plus(&rh(c, d, a, b)).minus(&rh(c, d, b, a));
            second.minus(&curv).scale(&half)
        })
    }

    /// `D_b(σ, μ) = [∇_b σ_c − μ_bc; ∇_b μ_cd − R_cd^e_b σ_e]`.
    pub fn connection(&self, s: &KSection<RatFunc>) -> EValuedForm<RatFunc> {
        self.d_unskewed(&EValuedForm { degree: 0, sigma: s.sigma.clone(), mu: s.mu.clone() }, None)
    }

    /// `D_a φ_B` before skewing, with the form slots of `φ` differentiated by `aux`
    /// (Levi-Civita when `None`).
    fn d_unskewed(&self, phi: &EValuedForm<RatFunc>, aux: Option<&Tensor<RatFunc>>) -> EValuedForm<RatFunc> {
        let m = self.dim();
        let p = phi.degree;
        let lc = self.chart.christoffel();
        let form = aux.unwrap_or(lc);
        let g_sigma: Vec<&Tensor<RatFunc>> = (0..p).map(|_| form).chain(std::iter::once(lc)).collect();
        let g_mu: Vec<&Tensor<RatFunc>> = (0..p).map(|_| form).chain([lc, lc]).collect();
        let na = covariant_derivative_per_slot(&g_sigma, &phi.sigma);
        let np = covariant_derivative_per_slot(&g_mu, &phi.mu);
        let sigma = Tensor::from_fn(m, vec![Slot::Down; p + 2], |i| {
            // i = [a, B.., c]
            let a = i[0];
            let c = i[p + 1];
            let mut psi_ix: Vec<usize> = i[1..=p].to_vec();
            psi_ix.extend_from_slice(&[a, c]);
            na.get(i).minus(phi.mu.get(&psi_ix))
        });
        let mut alpha_ix = vec![0; p + 1];
        let mu = Tensor::from_fn(m, vec![Slot::Down; p + 3], |i| {
            // i = [a, B.., c, d]
            let a = i[0];
            let (c, d) = (i[p + 1], i[p + 2]);
            alpha_ix[..p].copy_from_slice(&i[1..=p]);
            let mut acc = np.get(i).clone();
            for e in 0..m {
                let r = self.rm.get(&[c, d, e, a]);
                if r.is_zero() {
                    continue;
                }
                alpha_ix[p] = e;
                let v = phi.sigma.get(&alpha_ix);
                if !v.is_zero() {
                    acc = acc.minus(&r.times(v));
                }
            }
            acc
        });
        EValuedForm { degree: p + 1, sigma, mu }
    }

    /// Coupled exterior derivative `D^∧φ = D_[a φ_B]` (weight `1/(p+1)!`).
    pub fn dwedge(&self, phi: &EValuedForm<RatFunc>) -> EValuedForm<RatFunc> {
        self.d_unskewed(phi, None).antisymmetrize_form_slots()
    }

    /// `D^∧` computed with an arbitrary torsion-free connection on the form slots.
    pub fn dwedge_with(&self, phi: &EValuedForm<RatFunc>, aux: &Tensor<RatFunc>) -> EValuedForm<RatFunc> {
        self.d_unskewed(phi, Some(aux)).antisymmetrize_form_slots()
    }

    /// Pointwise curvature `κ(s)` as an `E`-valued 2-form.
    pub fn kappa(&self, s: &KSection<RatFunc>) -> EValuedForm<RatFunc> {
        let m = self.dim();
        let k = k_of_mu(&self.rm, &s.mu);
        let nr = self.nabla_riemann();
        let sig_up = s.sigma.raise_lower(0, self.chart.metric(), self.chart.metric_inv()).expect("rank 1");
        let half = rat(1, 2);
        let mu = Tensor::from_fn(m, vec![Slot::Down; 4], |i| {
            let t = (0..m).fold(RatFunc::zero(), |acc, f| {
                let r = nr.get(&[f, i[0], i[1], i[2], i[3]]);
                if r.is_zero() || sig_up.get(&[f]).is_zero() {
                    acc
                } else {
                    acc.plus(&r.times(sig_up.get(&[f])))
                }
            });
            k.get(i).minus(&t.scale(&half))
        });
        EValuedForm { degree: 2, sigma: Tensor::down(m, 3), mu }
    }

    /// `κ^(1)(φ)_abc = κ_[ab φ_c]`.
    pub fn kappa1(&self, phi: &EValuedForm<RatFunc>) -> EValuedForm<RatFunc> {
        let m = self.dim();
        let per_c: Vec<EValuedForm<RatFunc>> = (0..m).map(|c| self.kappa(&phi.at(&[c]))).collect();
        EValuedForm::from_sections(m, 3, |b| per_c[b[2]].at(&b[..2])).antisymmetrize_form_slots()
    }

    /// `𝓡(σ, μ) = 2R_ab^e_[c μ_d]e + 2R_cd^e_[a μ_b]e − (∇^e R_abcd) σ_e`.
    pub fn curvature_hom(&self, s: &KSection<RatFunc>) -> Tensor<RatFunc> {
        self.kappa(s).mu.scale(&rat(2, 1))
    }

    /// The pointwise range of `𝓡` as a subspace over the rational-function field.
    pub fn range_subspace(&self) -> &Subspace<RatFunc> {
        self.range.get_or_init(|| {
            let m = self.dim();
            let n = e_dim(m);
            let gens = (0..n)
                .map(|k| {
                    let mut v = vec![RatFunc::zero(); n];
                    v[k] = RatFunc::one();
                    box_coords(&self.curvature_hom(&KSection::from_flat(m, &v)))
                })
                .collect();
            Subspace::span(so_dim(m) * so_dim(m), gens)
        })
    }

    /// `ℒ(h)`: the normal form of `𝒞(h)` modulo the range of `𝓡` (zero iff in range).
    pub fn calabi_mod_range(&self, h: &Tensor<RatFunc>) -> Vec<RatFunc> {
        self.range_subspace().reduce(&box_coords(&self.calabi(h)))
    }

    /// `σ ↦ [σ; ∇_[d σ_e]]`.
    pub fn split_sigma(&self, sigma: &Tensor<RatFunc>) -> KSection<RatFunc> {
        let mu = self.nabla(sigma).antisymmetrize(&[0, 1]).expect("rank 2");
        KSection { sigma: sigma.clone(), mu }
    }

    /// `h ↦ [h_cd; 2∇_[d h_e]c]` as an `E`-valued 1-form (form slot `c`).
    pub fn split_h(&self, h: &Tensor<RatFunc>) -> EValuedForm<RatFunc> {
        let m = self.dim();
        let nh = self.nabla(h);
        let mu = Tensor::from_fn(m, vec![Slot::Down; 3], |i| {
            let (c, d, e) = (i[0], i[1], i[2]);
            nh.get(&[d, e, c]).minus(nh.get(&[e, d, c]))
        });
        EValuedForm { degree: 1, sigma: h.clone(), mu }
    }

    /// Top row, first map: `λ_de ↦ [−λ_cd; ∇_[c λ_d]e]`.
    pub fn top_row_1(&self, lambda: &Tensor<RatFunc>) -> TopPair {
        TopPair { sigma: lambda.neg(), lambda: self.nabla(lambda).antisymmetrize(&[0, 1]).expect("rank 3") }
    }

    /// Top row, second map:
    /// `[σ_cd; λ_cde] ↦ [∇_[b σ_c]d + λ_bcd; ∇_[b λ_cd]e + R_e[b^f_c σ_d]f]`.
    pub fn top_row_2(&self, x: &TopPair) -> TopPair {
        let m = self.dim();
        let sigma = self.nabla(&x.sigma).antisymmetrize(&[0, 1]).expect("rank 3").add(&x.lambda).expect("shape");
        let rs = Tensor::from_fn(m, vec![Slot::Down; 4], |i| {
            // i = [b, c, d, e] -> R_eb^f_c σ_df
            (0..m).fold(RatFunc::zero(), |acc, f| {
                let r = self.rm.get(&[i[3], i[0], f, i[1]]);
                let v = x.sigma.get(&[i[2], f]);
                if r.is_zero() || v.is_zero() {
                    acc
                } else {
                    acc.plus(&r.times(v))
                }
            })
        });
        let lambda = self
            .nabla(&x.lambda)
            .antisymmetrize(&[0, 1, 2])
            .expect("rank 4")
            .add(&rs.antisymmetrize(&[0, 1, 2]).expect("rank 4"))
            .expect("shape");
        TopPair { sigma, lambda }
    }

    /// First column quotient `E → Λ²`: `(σ, μ) ↦ μ_de − ∇_[d σ_e]`.
    pub fn vert_quotient_0(&self, s: &KSection<RatFunc>) -> Tensor<RatFunc> {
        s.mu.sub(&self.nabla(&s.sigma).antisymmetrize(&[0, 1]).expect("rank 2")).expect("shape")
    }

    /// Second column quotient: `[σ_cd; μ_cde] ↦ [σ_[cd]; μ_[cd]e + ∇_[c h_d]e]`, `h = σ_(de)`.
    pub fn vert_quotient_1(&self, phi: &EValuedForm<RatFunc>) -> TopPair {
        let h = phi.sigma.symmetrize(&[0, 1]).expect("rank 2");
        let sigma = phi.sigma.antisymmetrize(&[0, 1]).expect("rank 2");
        let lambda = phi
            .mu
            .antisymmetrize(&[0, 1])
            .expect("rank 3")
            .add(&self.nabla(&h).antisymmetrize(&[0, 1]).expect("rank 3"))
            .expect("shape");
        TopPair { sigma, lambda }
    }

    /// Third column quotient: `[σ_bcd; μ_bcde] ↦ [σ_bcd; μ_[bcd]e]`.
    pub fn vert_quotient_2(&self, phi: &EValuedForm<RatFunc>) -> TopPair {
        TopPair { sigma: phi.sigma.clone(), lambda: phi.mu.antisymmetrize(&[0, 1, 2]).expect("rank 4") }
    }

    /// `ℬ: μ_bcde ↦ ∇_[a μ_bc]de`.
    pub fn operator_b(&self, mu: &Tensor<RatFunc>) -> Tensor<RatFunc> {
        self.nabla(mu).antisymmetrize(&[0, 1, 2]).expect("rank 5")
    }

    /// `(D_a κ_bc)(s) = D_a(κ(s))_bc − κ_bc(D_a s)`, all slots Levi-Civita, unskewed.
    /// Returned with `sigma` of rank 4 (`a,b,c;f`) and `mu` of rank 5.
    pub fn nabla_kappa(&self, s: &KSection<RatFunc>) -> EValuedForm<RatFunc> {
        let m = self.dim();
        let ks = self.kappa(s);
        let dks = self.d_unskewed(&ks, None);
        let ds = self.connection(s);
        let per_a: Vec<EValuedForm<RatFunc>> = (0..m).map(|a| self.kappa(&ds.at(&[a]))).collect();
        let second = EValuedForm::from_sections(m, 3, |i| per_a[i[0]].at(&i[1..]));
        dks.sub(&second).expect("shape")
    }

    /// Closed form of `∇κ` on a locally symmetric chart:
    /// `[−(R_bc^e_[a μ_f]e + R_af^e_[b μ_c]e); 0]`.
    pub fn nabla_kappa_closed(&self, s: &KSection<RatFunc>) -> EValuedForm<RatFunc> {
        let m = self.dim();
        let k = k_of_mu(&self.rm, &s.mu);
        let sigma = Tensor::from_fn(m, vec![Slot::Down; 4], |i| k.get(&[i[1], i[2], i[0], i[3]]).negate());
        EValuedForm { degree: 3, sigma, mu: Tensor::down(m, 5) }
    }

    /// Range conditions on the unit round sphere for `φ_c^d` (slots `[Down, Up]`).
    pub fn sphere_range_conditions(&self, phi: &Tensor<RatFunc>) -> SphereRange {
        let m = self.dim();
        let half = rat(1, 2);
        let g = self.chart.metric();
        let delta = Tensor::<RatFunc>::identity(m);
        let a = self.nabla(phi).antisymmetrize(&[0, 1]).expect("rank 3");
        let factor = rat(2, m as i64 - 1);
        let phi_c = Tensor::from_fn(m, vec![Slot::Down], |i| {
            (0..m).fold(RatFunc::zero(), |acc, b| acc.plus(a.get(&[b, i[0], b]))).scale(&factor)
        });
        let nec_residual = Tensor::from_fn(m, vec![Slot::Down, Slot::Down, Slot::Up], |i| {
            let (b, c, d) = (i[0], i[1], i[2]);
            let rhs = delta.get(&[d, b]).times(phi_c.get(&[c])).minus(&delta.get(&[d, c]).times(phi_c.get(&[b])));
            a.get(i).minus(&rhs.scale(&half))
        });
        let phi_low = Tensor::from_fn(m, vec![Slot::Down; 2], |i| {
            (0..m).fold(RatFunc::zero(), |acc, e| acc.plus(&phi.get(&[i[0], e]).times(g.get(&[e, i[1]]))))
        });
        let na = self.nabla(&a);
        let suff_residual = Tensor::from_fn(m, vec![Slot::Down, Slot::Down, Slot::Down, Slot::Up], |i| {
            let (x, b, c, d) = (i[0], i[1], i[2], i[3]);
            let t = phi_low.get(&[x, b]).times(delta.get(&[d, c])).minus(&phi_low.get(&[x, c]).times(delta.get(&[d, b])));
            na.get(i).plus(&t.scale(&half))
        });
        SphereRange {
            nec_holds: nec_residual.is_zero(),
            suff_holds: suff_residual.is_zero(),
            phi_c,
            nec_residual,
            suff_residual,
        }
    }

    /// Dimension and basis of the `D`-parallel sections within the ansatz
    /// `σ_a = p_a / den_sigma`, `μ_ab = q_ab / den_mu`, polynomials of total degree ≤ `degree`.
    pub fn parallel_sections(&self, den_sigma: &Poly, den_mu: &Poly, degree: u32) -> Vec<KSection<RatFunc>> {
        let m = self.dim();
        let n = e_dim(m);
        let monos = monomials(m, degree);
        let mut basis: Vec<KSection<RatFunc>> = Vec::new();
        for k in 0..n {
            let den = if k < m { den_sigma } else { den_mu };
            for mono in &monos {
                let mut v = vec![RatFunc::zero(); n];
                v[k] = RatFunc::normalize(Poly::monomial(Rat::from_integer(1.into()), mono.clone()), den.clone())
                    .expect("nonzero denominator");
                basis.push(KSection::from_flat(m, &v));
            }
        }
        let images: Vec<Vec<RatFunc>> = basis.iter().map(|b| self.connection(b).to_flat_all()).collect();
        let ncomp = images[0].len();
        let mut rows: BTreeMap<(usize, Monomial), Vec<Rat>> = BTreeMap::new();
        for comp in 0..ncomp {
            let l = images.iter().fold(Poly::one(), |l, im| l.lcm(im[comp].den()));
            for (j, im) in images.iter().enumerate() {
                let f = &im[comp];
                if f.is_zero() {
                    continue;
                }
                let scaled = f.num() * &l.div_exact(f.den()).expect("lcm is a multiple");
                for (mono, c) in scaled.terms() {
                    let row = rows.entry((comp, mono.clone())).or_insert_with(|| vec![Rat::from_integer(0.into()); basis.len()]);
                    row[j] = c.clone();
                }
            }
        }
        let mat = Matrix::from_rows(rows.into_values().collect(), basis.len()).expect("rectangular");
        mat.kernel()
            .basis()
            .iter()
            .map(|coef| {
                let v: Vec<RatFunc> = (0..n)
                    .map(|k| {
                        basis
                            .iter()
                            .zip(coef)
                            .filter(|(_, c)| !c.is_zero())
                            .fold(RatFunc::zero(), |acc, (b, c)| acc.plus(&b.to_flat()[k].scale(c)))
                    })
                    .collect();
                KSection::from_flat(m, &v)
            })
            .collect()
    }
}

impl EValuedForm<RatFunc> {
    /// Every component (all form index tuples, not only increasing ones).
    fn to_flat_all(&self) -> Vec<RatFunc> {
        let mut v = self.sigma.data().to_vec();
        v.extend_from_slice(self.mu.data());
        v
    }
}

/// Monomials in `m` variables of total degree ≤ `d`.
pub fn monomials(m: usize, d: u32) -> Vec<Monomial> {
    fn rec(i: usize, m: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == m {
            out.push(Monomial::new(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(i + 1, m, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, d, &mut Vec::new(), &mut out);
    out
}

/// `κ` at a point frame as a matrix `E → Λ²⊗E`; rows are `(a<b, E-index)`.
pub fn kappa_matrix(pf: &PointFrame) -> Matrix<Rat> {
    let m = pf.dim();
    let n = e_dim(m);
    let rm = pf.curvature_mixed();
    let cols: Vec<Vec<Rat>> = (0..n)
        .map(|k| {
            let mut v = vec![Rat::from_integer(0.into()); n];
            v[k] = Rat::from_integer(1.into());
            kappa_frame(&rm, &KSection::from_flat(m, &v)).to_flat()
        })
        .collect();
    Matrix::from_columns(&cols, so_dim(m) * n).expect("consistent")
}

/// `κ(s)` on a locally symmetric point frame.
pub fn kappa_frame(rm: &Tensor<Rat>, s: &KSection<Rat>) -> EValuedForm<Rat> {
    let m = rm.dim();
    EValuedForm { degree: 2, sigma: Tensor::down(m, 3), mu: k_of_mu(rm, &s.mu) }
}

/// `𝓡` at a point frame, rows `(a<b, c<d)`.
pub fn curvature_hom_matrix(pf: &PointFrame) -> Matrix<Rat> {
    let m = pf.dim();
    let n = e_dim(m);
    let rm = pf.curvature_mixed();
    let two = rat(2, 1);
    let cols: Vec<Vec<Rat>> = (0..n)
        .map(|k| {
            let mut v = vec![Rat::from_integer(0.into()); n];
            v[k] = Rat::from_integer(1.into());
            box_coords(&k_of_mu(&rm, &KSection::<Rat>::from_flat(m, &v).mu).scale(&two))
        })
        .collect();
    Matrix::from_columns(&cols, so_dim(m) * so_dim(m)).expect("consistent")
}

/// The `∇κ` block at a point: for each `E` basis vector, `τ_{abc;f}` (rank 4).
pub fn tau_tensors(pf: &PointFrame) -> Vec<Tensor<Rat>> {
    let m = pf.dim();
    let n = e_dim(m);
    let rm = pf.curvature_mixed();
    (0..n)
        .map(|k| {
            let mut v = vec![Rat::from_integer(0.into()); n];
            v[k] = Rat::from_integer(1.into());
            let kk = k_of_mu(&rm, &KSection::<Rat>::from_flat(m, &v).mu);
            Tensor::from_fn(m, vec![Slot::Down; 4], |i| -kk.get(&[i[1], i[2], i[0], i[3]]).clone())
        })
        .collect()
}

/// Augmented curvature `E → Δ²⊗E`: the `κ` rows followed by the `∇κ` rows
/// `(a, b<c, E-index)` whose `μ`-components vanish.
pub fn augmented_matrix(pf: &PointFrame) -> Matrix<Rat> {
    let m = pf.dim();
    let n = e_dim(m);
    let kappa = kappa_matrix(pf);
    let taus = tau_tensors(pf);
    let pairs = so_pairs(m);
    let zero = Rat::from_integer(0.into());
    let cols: Vec<Vec<Rat>> = taus
        .iter()
        .map(|t| {
            let mut v = Vec::with_capacity(m * pairs.len() * n);
            for a in 0..m {
                for &(b, c) in &pairs {
                    for f in 0..m {
                        v.push(t.get(&[a, b, c, f]).clone());
                    }
                    v.extend(std::iter::repeat_n(zero.clone(), n - m));
                }
            }
            v
        })
        .collect();
    let tau = Matrix::from_columns(&cols, m * pairs.len() * n).expect("consistent");
    kappa.vstack(&tau).expect("same columns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::int;
    use crate::spaces::SpaceSpec;

    fn x(i: usize) -> RatFunc {
        RatFunc::var(i)
    }

    #[test]
    fn rotation_is_killing_on_the_plane() {
        let c = Chart::build(&SpaceSpec::Flat { p: 0, q: 2 }).unwrap();
        let k = KillingChart::new(&c);
        let rot = Tensor::from_data(2, vec![Slot::Down], vec![x(1).neg(), x(0)]).unwrap();
        assert!(k.killing_op(&rot).is_zero());
        let radial = Tensor::from_data(2, vec![Slot::Down], vec![x(0), x(1)]).unwrap();
        assert_eq!(k.killing_op(&radial), Tensor::from_fn(2, vec![Slot::Down; 2], |i| if i[0] == i[1] { RatFunc::one() } else { RatFunc::zero() }));
    }

    #[test]
    fn flat_parallel_section_is_flat() {
        let c = Chart::build(&SpaceSpec::Flat { p: 1, q: 1 }).unwrap();
        let k = KillingChart::new(&c);
        let s = KSection::from_flat(2, &[RatFunc::one(), RatFunc::from_rat(int(3)), RatFunc::zero()]);
        assert!(k.connection(&s).is_zero());
    }

    #[test]
    fn cw_kappa_rank() {
        let pf = PointFrame::build(&SpaceSpec::CahenWallach { q: vec![vec![int(1), int(0)], vec![int(0), int(2)]] }).unwrap();
        assert_eq!(kappa_matrix(&pf).rank(), 4);
        assert_eq!(curvature_hom_matrix(&pf).rank(), 4);
        assert_eq!(kappa_matrix(&pf).kernel().dim(), 6);
    }

    #[test]
    fn constant_curvature_kappa_vanishes() {
        let pf = PointFrame::build(&SpaceSpec::Sphere { n: 3, hermitian: false }).unwrap();
        assert!(kappa_matrix(&pf).is_zero());
        assert!(augmented_matrix(&pf).is_zero());
    }

    #[test]
    fn form_tuple_counts() {
        assert_eq!(form_tuples(4, 2).len(), 6);
        assert_eq!(form_tuples(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(monomials(2, 2).len(), 6);
    }
}
