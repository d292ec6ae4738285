//! Deciding exactness: factor classification, the Lorentzian product rule,
//! the Cahen–Wallach structure check and the explicit non-exactness witness.

use serde::Serialize;
use serde_json::{json, Value};

use crate::filtration::{aut_r, e_filtration, h_filtration, PointCurvature};
use crate::killing::{e_dim, k_of_mu, KillingChart};
use crate::linalg::{Matrix, Subspace};
use crate::scalars::{int, rat, Coeff, Monomial, Poly, Rat, RatFunc};
use crate::spaces::{covariant_derivative, so_coords, so_dim, so_pairs, Chart, PointFrame, SpaceSpec, SpecError};
use crate::tensor::{Slot, Tensor};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactnessError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("eigenvalue test needs an Einstein factor with nonzero scalar curvature")]
    NotEinstein,
    #[error("witness precondition failed: {0}")]
    Precondition(String),
    #[error("potential search failed: raise degree bound")]
    PotentialSearch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FactorTag {
    Flat,
    ConstCurvNonzero,
    CahenWallach,
    RiemIrredHermitian,
    RiemIrredNonHermitian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorClass {
    pub tag: FactorTag,
    pub has_parallel_vector: bool,
    /// How hermitian-ness was decided: `"flag"`, `"eigenvalue"` or `null`.
    pub hermitian_source: Option<&'static str>,
    pub spec: Value,
}

/// Solutions of `R_ac^ef ω_ef = ±2 ω_ac` after rescaling to `Ric = ±g`, in pair coordinates.
pub fn eigenvalue_test(pf: &PointFrame) -> Result<Subspace<Rat>, ExactnessError> {
    let m = pf.dim();
    let g = pf.metric();
    let gi = pf.metric_inv();
    let r = pf.curvature();
    let ric = |a: usize, c: usize| -> Rat {
        let mut acc = int(0);
        for b in 0..m {
            for d in 0..m {
                acc += gi.get(&[b, d]) * r.get(&[a, b, c, d]);
            }
        }
        acc
    };
    let lambda = ric(0, 0) / g.get(&[0, 0]);
    let einstein = (0..m).all(|a| (0..m).all(|c| ric(a, c) == &lambda * g.get(&[a, c])));
    if !einstein || lambda == int(0) {
        return Err(ExactnessError::NotEinstein);
    }
    let scale = int(1) / (if lambda > int(0) { lambda.clone() } else { -lambda.clone() });
    let sign = if lambda > int(0) { int(1) } else { int(-1) };
    let pairs = so_pairs(m);
    let cols: Vec<Vec<Rat>> = (0..pairs.len())
        .map(|k| {
            let mut w = Tensor::<Rat>::down(m, 2);
            w.set(&[pairs[k].0, pairs[k].1], int(1));
            w.set(&[pairs[k].1, pairs[k].0], int(-1));
            let wu = w.raise_lower(0, g, gi).unwrap().raise_lower(1, g, gi).unwrap();
            pairs
                .iter()
                .map(|&(a, c)| {
                    let mut acc = int(0);
                    for e in 0..m {
                        for f in 0..m {
                            acc += r.get(&[a, c, e, f]) * wu.get(&[e, f]);
                        }
                    }
                    acc * &scale - int(2) * &sign * w.get(&[a, c])
                })
                .collect()
        })
        .collect();
    Ok(Matrix::from_columns(&cols, pairs.len()).expect("consistent").kernel())
}

fn is_definite(spec: &SpaceSpec) -> bool {
    let (p, q) = spec.signature();
    p == 0 || q == 0
}

pub fn classify(spec: &SpaceSpec) -> Result<Vec<FactorClass>, ExactnessError> {
    spec.validate()?;
    spec.flat_factors()
        .into_iter()
        .map(|f| {
            let pf = PointFrame::build(&f)?;
            let has_parallel_vector = pf.parallel_vectors().dim() > 0;
            let (tag, src) = match &f {
                SpaceSpec::Flat { .. } => (FactorTag::Flat, None),
                SpaceSpec::CahenWallach { .. } => (FactorTag::CahenWallach, None),
                SpaceSpec::ConstCurv { .. } if !is_definite(&f) => (FactorTag::ConstCurvNonzero, None),
                SpaceSpec::Sphere { hermitian: true, .. } => (FactorTag::RiemIrredHermitian, Some("flag")),
                _ => {
                    if eigenvalue_test(&pf)?.dim() > 0 {
                        (FactorTag::RiemIrredHermitian, Some("eigenvalue"))
                    } else {
                        (FactorTag::RiemIrredNonHermitian, None)
                    }
                }
            };
            Ok(FactorClass { tag, has_parallel_vector, hermitian_source: src, spec: f.to_json() })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Exact,
    NotExact,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub rule: String,
    pub pair: Option<(usize, usize)>,
    pub citations: Vec<String>,
    pub factors: Vec<FactorClass>,
    pub note: String,
}

impl Verdict {
    pub fn exact(&self) -> Option<bool> {
        match self.outcome {
            Outcome::Exact => Some(true),
            Outcome::NotExact => Some(false),
            Outcome::Unclassified => None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "exact": self.exact(),
            "outcome": self.outcome,
            "rule": self.rule,
            "pair": self.pair.map(|(a, b)| vec![a, b]),
            "citations": self.citations,
            "factors": self.factors,
            "note": self.note,
        })
    }
}

pub const OBSTRUCTION_RULE: &str = "hermitian×(flat|CW)";
pub const CLEAR_RULE: &str = "no obstruction pair";

/// The Lorentzian classification: exact unless some hermitian factor meets a
/// factor carrying a parallel vector (flat or Cahen–Wallach).
pub fn verdict(spec: &SpaceSpec) -> Result<Verdict, ExactnessError> {
    let factors = classify(spec)?;
    let reading = "a flat factor includes the Euclidean part of a decomposable Lorentzian factor; \
                   flat and Cahen-Wallach factors are detected by their parallel vectors";
    if !spec.is_lorentzian() {
        return Ok(Verdict {
            outcome: Outcome::Unclassified,
            rule: "out of classified scope".into(),
            pair: None,
            citations: vec!["classification covers Lorentzian signature only".into()],
            factors,
            note: format!("signature {:?} is not Lorentzian", spec.signature()),
        });
    }
    let herm = factors.iter().position(|f| f.tag == FactorTag::RiemIrredHermitian);
    let degenerate = factors.iter().position(|f| matches!(f.tag, FactorTag::Flat | FactorTag::CahenWallach));
    Ok(match (herm, degenerate) {
        (Some(h), Some(d)) => Verdict {
            outcome: Outcome::NotExact,
            rule: OBSTRUCTION_RULE.into(),
            pair: Some((h, d)),
            citations: vec!["lorentzian-product-classification".into(), "hermitian-parallel-witness".into()],
            factors,
            note: reading.into(),
        },
        _ => {
            let mut citations = vec!["lorentzian-product-classification".into()];
            if factors.iter().any(|f| f.tag == FactorTag::CahenWallach) {
                citations.push("cw-filtration-exactness".into());
            }
            if factors.len() > 1 {
                citations.push("product-exactness".into());
            }
            Verdict { outcome: Outcome::Exact, rule: CLEAR_RULE.into(), pair: None, citations, factors, note: reading.into() }
        }
    })
}

/// Endomorphism of the CW frame `(e₋, e_i, e₊)` with blocks
/// `[[a, uᵗ, 0], [v, B, −u], [0, −vᵗ, −a]]`.
pub fn cw_block(n: usize, a: &Rat, u: &[Rat], v: &[Rat], b: &[Vec<Rat>]) -> Tensor<Rat> {
    let m = n + 2;
    let p = n + 1;
    let mut t = Tensor::<Rat>::zeros(m, vec![Slot::Up, Slot::Down]);
    t.set(&[0, 0], a.clone());
    t.set(&[p, p], -a.clone());
    for i in 0..n {
        t.set(&[0, i + 1], u[i].clone());
        t.set(&[i + 1, p], -u[i].clone());
        t.set(&[i + 1, 0], v[i].clone());
        t.set(&[p, i + 1], -v[i].clone());
        for j in 0..n {
            t.set(&[i + 1, j + 1], b[i][j].clone());
        }
    }
    t
}

fn so_n_basis(n: usize) -> Vec<Vec<Vec<Rat>>> {
    so_pairs(n)
        .into_iter()
        .map(|(i, j)| {
            let mut b = vec![vec![int(0); n]; n];
            b[i][j] = int(1);
            b[j][i] = int(-1);
            b
        })
        .collect()
}

fn mat_comm(x: &[Vec<Rat>], y: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(int(0), |acc, k| acc + &x[i][k] * &y[k][j] - &y[i][k] * &x[k][j]))
                .collect()
        })
        .collect()
}

/// `Z_so(n)(Q)` as a list of skew matrices.
pub fn centralizer(q: &[Vec<Rat>]) -> Vec<Vec<Vec<Rat>>> {
    let n = q.len();
    let basis = so_n_basis(n);
    if basis.is_empty() {
        return Vec::new();
    }
    let cols: Vec<Vec<Rat>> = basis.iter().map(|b| mat_comm(b, q).into_iter().flatten().collect()).collect();
    let ker = Matrix::from_columns(&cols, n * n).expect("consistent").kernel();
    ker.basis()
        .iter()
        .map(|c| {
            (0..n)
                .map(|i| (0..n).map(|j| c.iter().zip(&basis).fold(int(0), |acc, (x, b)| acc + x * &b[i][j])).collect())
                .collect()
        })
        .collect()
}

fn is_nondegenerate(q: &[Vec<Rat>]) -> bool {
    let n = q.len();
    Matrix::from_rows(q.to_vec(), n).expect("square").rank() == n
}

#[derive(Clone, Debug, Serialize)]
pub struct CwStructure {
    pub hol_dim: usize,
    pub h_dims: Vec<usize>,
    pub e_dims: Vec<usize>,
    pub h_stabilized_at: usize,
    pub e_stabilized_at: usize,
    pub parallel: bool,
    /// `None` when `Q` is degenerate (the closed forms describe the indecomposable case).
    pub closed_forms_agree: Option<bool>,
    pub h_closed_dims: Option<Vec<usize>>,
    pub e_is_e2: bool,
    pub exact: bool,
}

impl CwStructure {
    pub fn to_json(&self) -> Value {
        json!({
            "hol_dim": self.hol_dim,
            "h_dims": self.h_dims,
            "E_dims": self.e_dims,
            "h_stabilized_at": self.h_stabilized_at,
            "stabilized_at": self.e_stabilized_at,
            "parallel": self.parallel,
            "closed_forms_agree": self.closed_forms_agree,
            "h_closed_dims": self.h_closed_dims,
            "E_equals_E2": self.e_is_e2,
            "exact": self.exact,
        })
    }
}

/// Closed forms `𝔥₀ = Z_so(n)(Q) ⋉ ℝⁿ`, `𝔥₁ = co(n) ⋉ ℝⁿ`, `𝔥₂ = so(1, n+1)`.
pub fn cw_closed_forms(q: &[Vec<Rat>]) -> Vec<Subspace<Rat>> {
    let n = q.len();
    let pf = PointFrame::build(&SpaceSpec::CahenWallach { q: q.to_vec() }).expect("valid Q");
    let z = vec![int(0); n];
    let zb = vec![vec![int(0); n]; n];
    let unit = |i: usize| -> Vec<Rat> { (0..n).map(|k| int((k == i) as i64)).collect() };
    let coords = |t: Tensor<Rat>| so_coords(&t, pf.metric());
    let translations: Vec<Vec<Rat>> = (0..n).map(|i| coords(cw_block(n, &int(0), &unit(i), &z, &zb))).collect();
    let mut h0 = translations.clone();
    h0.extend(centralizer(q).iter().map(|b| coords(cw_block(n, &int(0), &z, &z, b))));
    let mut h1 = translations;
    h1.extend(so_n_basis(n).iter().map(|b| coords(cw_block(n, &int(0), &z, &z, b))));
    h1.push(coords(cw_block(n, &int(1), &z, &z, &zb)));
    let d = so_dim(n + 2);
    vec![Subspace::span(d, h0), Subspace::span(d, h1), Subspace::full(d)]
}

pub fn cw_structure(q: &[Vec<Rat>]) -> Result<CwStructure, ExactnessError> {
    let spec = SpaceSpec::CahenWallach { q: q.to_vec() };
    let pf = PointFrame::build(&spec)?;
    let h = h_filtration(&pf);
    let pc = PointCurvature::killing(&pf);
    let e = pc.e_filtration();
    let parallel = pc.parallelness(&e).parallel;
    let full = e_dim(pf.dim());
    let e_is_e2 = e.level(2).dim() == full;
    let (agree, closed_dims) = if is_nondegenerate(q) {
        let closed = cw_closed_forms(q);
        let ok = closed.iter().enumerate().all(|(k, s)| &h.level(k as isize) == s) && h.stabilized_at() == 2;
        (Some(ok), Some(closed.iter().map(Subspace::dim).collect()))
    } else {
        (None, None)
    };
    Ok(CwStructure {
        hol_dim: pf.holonomy_algebra().dim(),
        h_dims: h.dims(),
        e_dims: e.dims(),
        h_stabilized_at: h.stabilized_at(),
        e_stabilized_at: e.stabilized_at(),
        parallel,
        closed_forms_agree: agree,
        h_closed_dims: closed_dims,
        e_is_e2,
        exact: e.last().dim() == full && parallel,
    })
}

/// Index range of each flattened factor inside the product chart.
pub fn factor_ranges(spec: &SpaceSpec) -> Vec<(usize, usize)> {
    let mut off = 0;
    spec.flat_factors()
        .iter()
        .map(|f| {
            let r = (off, off + f.dim());
            off += f.dim();
            r
        })
        .collect()
}

/// A local potential `φ` with `∇_[a φ_b] = ω_ab` for the area form of a conformal
/// 2-dimensional chart block at variables `(x, y) = (off, off+1)`. The ansatz is
/// `p(x,y)·(x dy − y dx)/(1 + c r²)^k`, `deg p ≤ degree`, `k ≤ 3`, `c = ±1`.
pub fn find_potential(chart: &Chart, off: usize, degree: u32) -> Result<Tensor<RatFunc>, ExactnessError> {
    let m = chart.dim();
    let omega12 = chart.metric().get(&[off, off]).clone();
    let x = Poly::var(off);
    let y = Poly::var(off + 1);
    let r2 = &(&x * &x) + &(&y * &y);
    let monos: Vec<Monomial> = crate::killing::monomials(2, degree)
        .into_iter()
        .map(|mo| {
            let mut e = vec![0; off + 2];
            e[off] = mo.exp(0);
            e[off + 1] = mo.exp(1);
            Monomial::new(e)
        })
        .collect();
    for c in [1i64, -1] {
        let base = &Poly::one() + &r2.scale(&int(c));
        for k in 0..=3u32 {
            let den = base.pow(k);
            let make = |p: &Poly| -> Tensor<RatFunc> {
                let mut t = Tensor::down(m, 1);
                t.set(&[off], RatFunc::normalize((p * &y).scale(&int(-1)), den.clone()).expect("nonzero"));
                t.set(&[off + 1], RatFunc::normalize(p * &x, den.clone()).expect("nonzero"));
                t
            };
            let curl = |phi: &Tensor<RatFunc>| -> RatFunc {
                phi.get(&[off + 1]).derivative(off).minus(&phi.get(&[off]).derivative(off + 1)).scale(&rat(1, 2))
            };
            // Linear system: Σ c_j curl(make(mono_j)) = ω12, cleared by a common denominator.
            let images: Vec<RatFunc> = monos.iter().map(|mo| curl(&make(&Poly::monomial(int(1), mo.clone())))).collect();
            let l = images.iter().fold(omega12.den().clone(), |l, f| l.lcm(f.den()));
            let cleared = |f: &RatFunc| f.num() * &l.div_exact(f.den()).expect("lcm");
            let mut cols: Vec<Poly> = images.iter().map(cleared).collect();
            cols.push(cleared(&omega12).scale(&int(-1)));
            let mut keys: Vec<Monomial> = cols.iter().flat_map(|p| p.terms().map(|(mo, _)| mo.clone())).collect();
            keys.sort();
            keys.dedup();
            let rows: Vec<Vec<Rat>> = keys
                .iter()
                .map(|key| {
                    cols.iter()
                        .map(|p| p.terms().find(|(mo, _)| *mo == key).map(|(_, c)| c.clone()).unwrap_or_else(|| int(0)))
                        .collect()
                })
                .collect();
            let ncols = cols.len();
            if rows.is_empty() {
                continue;
            }
            let ker = Matrix::from_rows(rows, ncols).expect("consistent").kernel();
            if let Some(v) = ker.basis().iter().find(|v| !v[ncols - 1].is_zero()) {
                let last = v[ncols - 1].clone();
                let p = Poly::from_terms(monos.iter().zip(v).map(|(mo, cf)| (mo.clone(), cf / &last)));
                let phi = make(&p);
                if curl(&phi) == omega12 {
                    return Ok(phi);
                }
            }
        }
    }
    Err(ExactnessError::PotentialSearch)
}

pub struct WitnessReport {
    pub coords: Vec<String>,
    pub potential: Tensor<RatFunc>,
    pub potential_certified: bool,
    pub omega: Tensor<RatFunc>,
    pub omega_parallel: bool,
    pub xi: Tensor<RatFunc>,
    pub xi_parallel: bool,
    pub h: Tensor<RatFunc>,
    pub psi: Tensor<RatFunc>,
    pub mu: Tensor<RatFunc>,
    pub residual: Tensor<RatFunc>,
    pub residual_zero: bool,
    pub obstruction: Tensor<RatFunc>,
    pub obstruction_nonzero: bool,
    pub pair: (usize, usize),
}

impl WitnessReport {
    pub fn certified(&self) -> bool {
        self.potential_certified && self.omega_parallel && self.xi_parallel && self.residual_zero && self.obstruction_nonzero
    }

    pub fn to_json(&self) -> Value {
        let c = &self.coords;
        json!({
            "certified": self.certified(),
            "pair": [self.pair.0, self.pair.1],
            "coords": c,
            "potential": self.potential.to_json(c),
            "potential_certified": self.potential_certified,
            "omega": self.omega.to_json(c),
            "omega_parallel": self.omega_parallel,
            "xi": self.xi.to_json(c),
            "xi_parallel": self.xi_parallel,
            "h": self.h.to_json(c),
            "psi": self.psi.to_json(c),
            "mu": self.mu.to_json(c),
            "dwedge_minus_kappa_residual": self.residual.to_json(c),
            "residual_zero": self.residual_zero,
            "obstruction": self.obstruction.to_json(c),
            "obstruction_nonzero": self.obstruction_nonzero,
        })
    }
}

/// Build `h = φ_(A ξ_B)`, `ψ = 2∇_[C h_D]B`, `μ = φ_[A ξ_B]` on the product chart and
/// check `D^∧[h; ψ] = κ(0, μ)` while `ω⊗ξ ≠ 0`.
pub fn nonexactness_witness(spec: &SpaceSpec, degree: u32) -> Result<WitnessReport, ExactnessError> {
    let classes = classify(spec)?;
    let ranges = factor_ranges(spec);
    let factors = spec.flat_factors();
    let herm = classes
        .iter()
        .position(|f| f.tag == FactorTag::RiemIrredHermitian)
        .ok_or_else(|| ExactnessError::Precondition("no hermitian factor (no Kähler form)".into()))?;
    let par = classes
        .iter()
        .position(|f| f.has_parallel_vector)
        .ok_or_else(|| ExactnessError::Precondition("no factor with a parallel one-form".into()))?;
    let (hoff, hend) = ranges[herm];
    if hend - hoff != 2 {
        return Err(ExactnessError::Precondition("only 2-dimensional hermitian factors have a built-in chart potential".into()));
    }
    let chart = Chart::build(spec)?;
    let m = chart.dim();
    let kc = KillingChart::new(&chart);

    let mut omega = Tensor::<RatFunc>::down(m, 2);
    let area = chart.metric().get(&[hoff, hoff]).clone();
    omega.set(&[hoff, hoff + 1], area.clone());
    omega.set(&[hoff + 1, hoff], area.neg());
    let omega_parallel = covariant_derivative(&chart, &omega).is_zero();

    let phi = find_potential(&chart, hoff, degree)?;
    let potential_certified = covariant_derivative(&chart, &phi).antisymmetrize(&[0, 1]).expect("rank 2") == omega;

    // A parallel one-form on the degenerate factor: dual of a parallel vector.
    let (poff, _) = ranges[par];
    let fpf = PointFrame::build(&factors[par])?;
    let v = fpf.parallel_vectors().basis()[0].clone();
    let fchart = Chart::build(&factors[par])?;
    let mut xi = Tensor::<RatFunc>::down(m, 1);
    for a in 0..factors[par].dim() {
        // constant components: g_ab v^b in the chart, where the chart frame is the coordinate frame at the origin.
        let val = (0..factors[par].dim())
            .fold(RatFunc::zero(), |acc, b| acc.plus(&fchart.metric().get(&[a, b]).scale(&v[b])));
        xi.set(&[poff + a], val);
    }
    let xi_parallel = covariant_derivative(&chart, &xi).is_zero();

    let outer = |a: &Tensor<RatFunc>, b: &Tensor<RatFunc>| a.outer(b);
    let h = outer(&phi, &xi).symmetrize(&[0, 1]).expect("rank 2");
    let mu = outer(&phi, &xi).antisymmetrize(&[0, 1]).expect("rank 2");
    let eta = kc.split_h(&h);
    let lhs = kc.dwedge(&eta);
    let rhs_mu = k_of_mu(kc.riemann_mixed(), &mu);
    let residual = lhs.mu.sub(&rhs_mu).expect("shape");
    let residual_zero = residual.is_zero() && lhs.sigma.is_zero();
    let obstruction = omega.outer(&xi);
    Ok(WitnessReport {
        coords: chart.coords().to_vec(),
        potential: phi,
        potential_certified,
        omega,
        omega_parallel,
        obstruction_nonzero: !obstruction.is_zero(),
        obstruction,
        xi,
        xi_parallel,
        h,
        psi: eta.mu,
        mu,
        residual,
        residual_zero,
        pair: (herm, par),
    })
}

pub struct MixedKernelCheck {
    pub hypothesis: Tensor<RatFunc>,
    pub first: Tensor<RatFunc>,
    pub second: Tensor<RatFunc>,
}

impl MixedKernelCheck {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis.is_zero()
    }

    /// `None` when the hypothesis fails (the conclusions are then not asserted).
    pub fn conclusions_hold(&self) -> Option<bool> {
        self.hypothesis_holds().then(|| self.first.is_zero() && self.second.is_zero())
    }
}

/// For `φ_BCD` with `C` unbarred and `D` barred (indices `< split` are unbarred):
/// `∇_[A φ_B]CD`, `R_ab^e_c φ_(ā e b̄)` and `R_(āb̄)^(ē)_(c̄) φ_(a b ē)`.
pub fn mixed_kernel_check(chart: &Chart, split: usize, phi: &Tensor<RatFunc>) -> MixedKernelCheck {
    let m = chart.dim();
    let hypothesis = covariant_derivative(chart, phi).antisymmetrize(&[0, 1]).expect("rank 4");
    let rm = crate::spaces::riemann(chart);
    let ub = |i: usize| i < split;
    let first = Tensor::from_fn(m, vec![Slot::Down; 5], |i| {
        let (a, b, c, ab, bb) = (i[0], i[1], i[2], i[3], i[4]);
        if !(ub(a) && ub(b) && ub(c) && !ub(ab) && !ub(bb)) {
            return RatFunc::zero();
        }
        (0..split).fold(RatFunc::zero(), |acc, e| acc.plus(&rm.get(&[a, b, e, c]).times(phi.get(&[ab, e, bb]))))
    });
    let second = Tensor::from_fn(m, vec![Slot::Down; 5], |i| {
        let (ab, bb, cb, a, b) = (i[0], i[1], i[2], i[3], i[4]);
        if !(!ub(ab) && !ub(bb) && !ub(cb) && ub(a) && ub(b)) {
            return RatFunc::zero();
        }
        (split..m).fold(RatFunc::zero(), |acc, e| acc.plus(&rm.get(&[ab, bb, e, cb]).times(phi.get(&[a, b, e]))))
    });
    MixedKernelCheck { hypothesis, first, second }
}

/// `E₀ = E₁` and `aut(R)` data used by `describe`.
pub fn describe(spec: &SpaceSpec) -> Result<Value, ExactnessError> {
    let classes = classify(spec)?;
    let pf = PointFrame::build(spec)?;
    Ok(json!({
        "spec": spec.to_json(),
        "dim": spec.dim(),
        "signature": [spec.signature().0, spec.signature().1],
        "lorentzian": spec.is_lorentzian(),
        "factors": classes,
        "hol_dim": pf.holonomy_algebra().dim(),
        "aut_R_dim": aut_r(&pf).dim(),
        "parallel_vectors_dim": pf.parallel_vectors().dim(),
        "E_dims": e_filtration(&pf).dims(),
        "kahler": pf.kahler_form().is_some(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(q: &[i64]) -> Vec<Vec<Rat>> {
        let n = q.len();
        (0..n).map(|i| (0..n).map(|j| if i == j { int(q[i]) } else { int(0) }).collect()).collect()
    }

    #[test]
    fn eigenvalue_test_on_spheres() {
        let s2 = PointFrame::build(&SpaceSpec::Sphere { n: 2, hermitian: false }).unwrap();
        assert_eq!(eigenvalue_test(&s2).unwrap().dim(), 1);
        let s3 = PointFrame::build(&SpaceSpec::Sphere { n: 3, hermitian: false }).unwrap();
        assert_eq!(eigenvalue_test(&s3).unwrap().dim(), 0);
        let f = PointFrame::build(&SpaceSpec::Flat { p: 0, q: 2 }).unwrap();
        assert_eq!(eigenvalue_test(&f), Err(ExactnessError::NotEinstein));
    }

    #[test]
    fn cw_structure_closed_forms() {
        let s = cw_structure(&diag(&[1, 2])).unwrap();
        assert_eq!(s.h_dims, vec![2, 4, 6]);
        assert_eq!(s.e_dims, vec![6, 8, 10]);
        assert_eq!(s.closed_forms_agree, Some(true));
        assert!(s.exact && s.parallel && s.e_is_e2);
        let s = cw_structure(&diag(&[1, 1])).unwrap();
        assert_eq!(s.h_dims[0], 3);
        assert_eq!(s.closed_forms_agree, Some(true));
        let s = cw_structure(&diag(&[1, 0])).unwrap();
        assert_eq!(s.hol_dim, 1);
        assert_eq!(s.closed_forms_agree, None);
    }

    #[test]
    fn potential_on_the_sphere() {
        let chart = Chart::build(&SpaceSpec::Sphere { n: 2, hermitian: true }).unwrap();
        let phi = find_potential(&chart, 0, 2).unwrap();
        let d = covariant_derivative(&chart, &phi).antisymmetrize(&[0, 1]).unwrap();
        assert_eq!(d.get(&[0, 1]), chart.metric().get(&[0, 0]));
        // φ = 4(x dy − y dx)/(1 + r²): the factor 4 against the half in ∇_[a φ_b];
        // with the unnormalised exterior derivative it would be 2.
        let r2 = &(&Poly::var(0) * &Poly::var(0)) + &(&Poly::var(1) * &Poly::var(1));
        let den = &Poly::one() + &r2;
        let expect = RatFunc::normalize(Poly::var(0).scale(&int(4)), den).unwrap();
        assert_eq!(phi.get(&[1]), &expect);
    }

    #[test]
    fn witness_on_sphere_times_minkowski() {
        let spec = SpaceSpec::Product {
            factors: vec![SpaceSpec::Sphere { n: 2, hermitian: true }, SpaceSpec::Flat { p: 1, q: 1 }],
        };
        let v = verdict(&spec).unwrap();
        assert_eq!(v.exact(), Some(false));
        assert_eq!(v.pair, Some((0, 1)));
        let w = nonexactness_witness(&spec, 2).unwrap();
        assert!(w.potential_certified && w.omega_parallel && w.xi_parallel);
        assert!(w.residual_zero);
        assert!(w.obstruction_nonzero);
    }

    #[test]
    fn witness_on_sphere_times_cw() {
        let spec = SpaceSpec::Product {
            factors: vec![SpaceSpec::Sphere { n: 2, hermitian: true }, SpaceSpec::CahenWallach { q: diag(&[1]) }],
        };
        let w = nonexactness_witness(&spec, 2).unwrap();
        assert!(w.certified());
        let s3 = SpaceSpec::Product {
            factors: vec![SpaceSpec::Sphere { n: 3, hermitian: false }, SpaceSpec::Flat { p: 1, q: 0 }],
        };
        assert!(matches!(nonexactness_witness(&s3, 2), Err(ExactnessError::Precondition(_))));
        assert_eq!(verdict(&s3).unwrap().exact(), Some(true));
    }

    #[test]
    fn verdict_table() {
        let cw = SpaceSpec::CahenWallach { q: diag(&[1, 2]) };
        assert_eq!(verdict(&cw).unwrap().exact(), Some(true));
        assert_eq!(verdict(&SpaceSpec::Flat { p: 1, q: 2 }).unwrap().exact(), Some(true));
        let ds = SpaceSpec::ConstCurv { p: 1, q: 2, sign: 1 };
        assert_eq!(classify(&ds).unwrap()[0].tag, FactorTag::ConstCurvNonzero);
        let riem = SpaceSpec::Product { factors: vec![SpaceSpec::Sphere { n: 2, hermitian: false }, SpaceSpec::Sphere { n: 2, hermitian: false }] };
        assert_eq!(verdict(&riem).unwrap().outcome, Outcome::Unclassified);
        // hermitian-ness found by the eigenvalue test even without the flag
        let s = SpaceSpec::Product { factors: vec![SpaceSpec::Flat { p: 1, q: 0 }, SpaceSpec::Sphere { n: 2, hermitian: false }] };
        let v = verdict(&s).unwrap();
        assert_eq!(v.pair, Some((1, 0)));
        assert_eq!(v.factors[1].hermitian_source, Some("eigenvalue"));
    }
}
