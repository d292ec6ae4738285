//! The `A·R` action, `aut(R)`, the filtrations `𝔥_k` and `E_k`, parallelness,
//! genericity and the trace-form split — at a point frame or for an explicit
//! connection on a trivial bundle.

use serde_json::{json, Value};

use crate::killing::{augmented_matrix, e_dim, form_tuples};
use crate::linalg::{Matrix, Subspace};
use crate::scalars::{int, rat, Coeff, Rat, RatFunc};
use crate::spaces::{so_basis, so_coords, so_dim, so_pairs, PointFrame};
use crate::tensor::{Slot, Tensor};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiltrationError {
    #[error("endomorphism is not skew with respect to the metric")]
    NotSkew,
    #[error("constant-rank assumption violated: {0}")]
    RankJump(String),
    #[error("connection data malformed: {0}")]
    Malformed(String),
}

/// An ascending chain of subspaces, ending at the first repeat.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    pub steps: Vec<Subspace<Rat>>,
    pub stabilized: bool,
}

impl Filtration {
    /// Grow `start` by `next` until it stops changing (or `cap` steps).
    fn chain(start: Subspace<Rat>, cap: usize, mut next: impl FnMut(&Subspace<Rat>) -> Subspace<Rat>) -> Filtration {
        let mut steps = vec![start];
        for _ in 0..cap {
            let n = next(steps.last().unwrap());
            if &n == steps.last().unwrap() {
                return Filtration { steps, stabilized: true };
            }
            steps.push(n);
        }
        Filtration { steps, stabilized: false }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.steps.iter().map(Subspace::dim).collect()
    }

    pub fn stabilized_at(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn last(&self) -> &Subspace<Rat> {
        self.steps.last().expect("nonempty")
    }

    /// `E_r` with the convention `E_{-1} = 0` and `E_r = E_R` beyond the end.
    pub fn level(&self, r: isize) -> Subspace<Rat> {
        if r < 0 {
            return Subspace::zero(self.last().ambient());
        }
        self.steps.get(r as usize).unwrap_or_else(|| self.last()).clone()
    }
}

/// `(A·R)_abcd`, the derivation action; `A` must be `g`-skew.
pub fn act_on_r(a: &Tensor<Rat>, r: &Tensor<Rat>, g: &Tensor<Rat>) -> Result<Tensor<Rat>, FiltrationError> {
    let lowered = g.outer(a).contract(1, 2).expect("g_ab A^b_c");
    let skew = lowered.add(&lowered.permute(&[1, 0]).expect("rank 2")).expect("shape");
    if !skew.is_zero() {
        return Err(FiltrationError::NotSkew);
    }
    Ok(r.derivation(a))
}

fn endo_mul(a: &Tensor<Rat>, b: &Tensor<Rat>) -> Tensor<Rat> {
    a.outer(b).contract(1, 2).expect("A^a_b B^b_c")
}

/// `[A, B]` of two endomorphisms.
pub fn bracket(a: &Tensor<Rat>, b: &Tensor<Rat>) -> Tensor<Rat> {
    endo_mul(a, b).sub(&endo_mul(b, a)).expect("shape")
}

/// `aut(R) = 𝔥₀` in `so` coordinates.
pub fn aut_r(pf: &PointFrame) -> Subspace<Rat> {
    let cols: Vec<Vec<Rat>> = so_basis(pf.metric_inv()).iter().map(|a| pf.curvature().derivation(a).into_data()).collect();
    let m = pf.dim();
    Matrix::from_columns(&cols, m.pow(4)).expect("consistent").kernel()
}

/// `A ↦ so_coords([A, H])` as a matrix on `so` coordinates.
fn ad_matrix(pf: &PointFrame, h: &Tensor<Rat>) -> Matrix<Rat> {
    let cols: Vec<Vec<Rat>> = so_basis(pf.metric_inv()).iter().map(|a| so_coords(&bracket(a, h), pf.metric())).collect();
    Matrix::from_columns(&cols, so_dim(pf.dim())).expect("consistent")
}

/// `𝔥_k = {A : [A, H] ∈ 𝔥_{k-1} for all H ∈ hol}`, starting from `aut(R)`.
pub fn h_filtration(pf: &PointFrame) -> Filtration {
    let n = so_dim(pf.dim());
    let ads: Vec<Matrix<Rat>> = pf.holonomy_endomorphisms().iter().map(|h| ad_matrix(pf, h)).collect();
    Filtration::chain(aut_r(pf), n + 1, |prev| {
        let ann = prev.annihilator();
        let rows: Vec<Vec<Rat>> = ads
            .iter()
            .flat_map(|ad| Matrix::from_rows(ann.clone(), n).expect("consistent").mul(ad).expect("square").row_vecs())
            .collect();
        if rows.is_empty() {
            return Subspace::full(n);
        }
        Matrix::from_rows(rows, n).expect("consistent").kernel()
    })
}

/// Lie-closure check on a subspace of `so`.
pub fn is_subalgebra(pf: &PointFrame, s: &Subspace<Rat>) -> bool {
    let es: Vec<Tensor<Rat>> = s.basis().iter().map(|c| crate::spaces::so_endomorphism(c, pf.metric_inv())).collect();
    es.iter().all(|a| es.iter().all(|b| s.contains(&so_coords(&bracket(a, b), pf.metric()))))
}

/// Curvature data of a connection at one point: `κ` with rows `(a<b, α)` and
/// `∇κ` with rows `(a, b<c, α)`, both acting on the fiber.
#[derive(Clone, Debug)]
pub struct PointCurvature {
    pub base_dim: usize,
    pub fiber: usize,
    pub kappa: Matrix<Rat>,
    pub nabla_kappa: Matrix<Rat>,
}

impl PointCurvature {
    pub fn killing(pf: &PointFrame) -> PointCurvature {
        let m = pf.dim();
        let n = e_dim(m);
        let aug = augmented_matrix(pf);
        let k = so_dim(m) * n;
        let rows = aug.row_vecs();
        PointCurvature {
            base_dim: m,
            fiber: n,
            kappa: Matrix::from_rows(rows[..k].to_vec(), n).expect("consistent"),
            nabla_kappa: Matrix::from_rows(rows[k..].to_vec(), n).expect("consistent"),
        }
    }

    /// `{η : M η ∈ Λ^p⊗W}` for `M` with row blocks of size `fiber`: the kernel of
    /// the annihilator of `W` applied to every block.
    fn block_preimage(&self, mat: &Matrix<Rat>, w: &Subspace<Rat>) -> Subspace<Rat> {
        let n = self.fiber;
        let ann = w.annihilator();
        let rows = mat.row_vecs();
        let mut out = Vec::new();
        for block in rows.chunks(n) {
            for a in &ann {
                let row: Vec<Rat> = (0..mat.cols())
                    .map(|j| a.iter().zip(block).fold(int(0), |acc, (x, r)| if x.is_zero() { acc } else { acc + x * &r[j] }))
                    .collect();
                if row.iter().any(|x| !x.is_zero()) {
                    out.push(row);
                }
            }
        }
        if out.is_empty() {
            return Subspace::full(mat.cols());
        }
        Matrix::from_rows(out, mat.cols()).expect("consistent").kernel()
    }

    /// `E_{r+1} = {η : κ(η) ∈ Λ²⊗E_r}`, `E_{-1} = 0`.
    pub fn e_filtration(&self) -> Filtration {
        let e0 = self.kappa.kernel();
        Filtration::chain(e0, self.fiber + 1, |prev| self.block_preimage(&self.kappa, prev))
    }

    /// For every level `r`: `(∇κ)(E_r) ⊆ Λ¹⊗Λ²⊗E_{r-1}`. Returns the first failing level.
    pub fn parallelness(&self, f: &Filtration) -> ParallelReport {
        for r in 0..f.steps.len() {
            let allowed = self.block_preimage(&self.nabla_kappa, &f.level(r as isize - 1));
            if !f.steps[r].is_subspace_of(&allowed) {
                return ParallelReport { parallel: false, failing_level: Some(r) };
            }
        }
        ParallelReport { parallel: true, failing_level: None }
    }

    /// `κ^(1): Λ¹⊗E → Λ³⊗E`, `φ ↦ κ_[ab φ_c]`; columns `(c, α)`, rows `(a<b<c, α)`.
    pub fn kappa1_matrix(&self) -> Matrix<Rat> {
        let m = self.base_dim;
        let n = self.fiber;
        let pairs = so_pairs(m);
        let pair_ix = |a: usize, b: usize| -> (usize, Rat) {
            if a < b {
                (pairs.iter().position(|&p| p == (a, b)).unwrap(), int(1))
            } else {
                (pairs.iter().position(|&p| p == (b, a)).unwrap(), int(-1))
            }
        };
        let triples = form_tuples(m, 3);
        let third = rat(1, 3);
        let mut out = Matrix::zeros(triples.len() * n, m * n);
        for (t, abc) in triples.iter().enumerate() {
            // κ_[ab φ_c] = ⅓(κ_ab φ_c + κ_bc φ_a + κ_ca φ_b)
            for (x, y, z) in [(abc[0], abc[1], abc[2]), (abc[1], abc[2], abc[0]), (abc[2], abc[0], abc[1])] {
                let (p, sgn) = pair_ix(x, y);
                for alpha in 0..n {
                    for beta in 0..n {
                        let k = self.kappa.get(p * n + alpha, beta);
                        if k.is_zero() {
                            continue;
                        }
                        let row = t * n + alpha;
                        let col = z * n + beta;
                        let v = out.get(row, col) + k * &sgn * &third;
                        out.set(row, col, v);
                    }
                }
            }
        }
        out
    }

    /// Generic iff `κ^(1)` is injective; below dimension 3 its target `Λ³⊗E` is zero.
    pub fn is_generic(&self) -> bool {
        self.kappa1_matrix().kernel().dim() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelReport {
    pub parallel: bool,
    pub failing_level: Option<usize>,
}

/// Killing `E_k` at a point.
pub fn e_filtration(pf: &PointFrame) -> Filtration {
    PointCurvature::killing(pf).e_filtration()
}

/// `TM ⊕ 𝔥` inside `E` coordinates.
pub fn tm_plus(pf: &PointFrame, h: &Subspace<Rat>) -> Subspace<Rat> {
    let m = pf.dim();
    let n = e_dim(m);
    let mut gens: Vec<Vec<Rat>> = (0..m)
        .map(|i| {
            let mut v = vec![int(0); n];
            v[i] = int(1);
            v
        })
        .collect();
    gens.extend(h.basis().iter().map(|c| {
        let mut v = vec![int(0); m];
        v.extend(c.iter().cloned());
        v
    }));
    Subspace::span(n, gens)
}

pub fn genericity_test(pf: &PointFrame) -> bool {
    PointCurvature::killing(pf).is_generic()
}

/// The trace form `B(A, A') = tr(A A')` on `so` coordinates.
pub fn trace_form(pf: &PointFrame) -> Matrix<Rat> {
    let basis = so_basis(pf.metric_inv());
    let n = basis.len();
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b.set(i, j, endo_mul(&basis[i], &basis[j]).contract(0, 1).expect("trace").data()[0].clone());
        }
    }
    b
}

#[derive(Clone, Debug)]
pub struct TraceDecomposition {
    pub nondegenerate: bool,
    pub h0_perp: Option<Subspace<Rat>>,
    /// `[𝔥₀, 𝔥₀^⊥] ⊆ 𝔥₀^⊥` when the complement exists.
    pub reductive: Option<bool>,
    pub e0_equals_e1: bool,
}

pub fn trace_form_decomposition(pf: &PointFrame) -> TraceDecomposition {
    let b = trace_form(pf);
    let h0 = aut_r(pf);
    let nondegenerate = h0.is_nondegenerate_on(&b).expect("trace form is symmetric");
    let f = e_filtration(pf);
    let e0_equals_e1 = f.level(0) == f.level(1);
    if !nondegenerate {
        return TraceDecomposition { nondegenerate, h0_perp: None, reductive: None, e0_equals_e1 };
    }
    let perp = h0.perp(&b).expect("symmetric");
    let gi = pf.metric_inv();
    let reductive = h0.basis().iter().all(|a| {
        let a = crate::spaces::so_endomorphism(a, gi);
        perp.basis().iter().all(|p| perp.contains(&so_coords(&bracket(&a, &crate::spaces::so_endomorphism(p, gi)), pf.metric())))
    });
    TraceDecomposition { nondegenerate, h0_perp: Some(perp), reductive: Some(reductive), e0_equals_e1 }
}

/// Report for the `filtration` command.
pub fn filtration_report(pf: &PointFrame) -> Value {
    let pc = PointCurvature::killing(pf);
    let e = pc.e_filtration();
    let h = h_filtration(pf);
    let par = pc.parallelness(&e);
    let cross = (0..e.steps.len().max(h.steps.len()))
        .all(|k| e.level(k as isize) == tm_plus(pf, &h.level(k as isize)));
    json!({
        "dims": e.dims(),
        "stabilized_at": e.stabilized_at(),
        "parallel": par.parallel,
        "h_dims": h.dims(),
        "h_stabilized_at": h.stabilized_at(),
        "hol_dim": pf.holonomy_algebra().dim(),
        "E_equals_TM_plus_h": cross,
        "E_bases": e.steps.iter().map(Subspace::to_json).collect::<Vec<_>>(),
        "h_bases": h.steps.iter().map(Subspace::to_json).collect::<Vec<_>>(),
        "exact_by_filtration": e.last().dim() == e_dim(pf.dim()) && par.parallel,
    })
}

/// A connection `D_i s = ∂_i s + ω_i s` on a trivial bundle of rank `r` over a
/// coordinate patch of dimension `m` (base connection on forms: flat coordinates).
#[derive(Clone, Debug)]
pub struct GenericConnection {
    base_dim: usize,
    rank: usize,
    omega: Vec<Matrix<RatFunc>>,
}

fn mat_add(a: &Matrix<RatFunc>, b: &Matrix<RatFunc>, sign: i64) -> Matrix<RatFunc> {
    let mut out = a.clone();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.set(i, j, a.get(i, j).plus(&b.get(i, j).scale(&int(sign))));
        }
    }
    out
}

fn mat_map(a: &Matrix<RatFunc>, f: impl Fn(&RatFunc) -> RatFunc) -> Matrix<RatFunc> {
    let mut out = a.clone();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.set(i, j, f(a.get(i, j)));
        }
    }
    out
}

/// Deterministic sample points with no zero coordinate.
pub fn sample_points(m: usize) -> Vec<Vec<Rat>> {
    let base = [rat(1, 1), rat(2, 1), rat(-3, 2), rat(1, 3), rat(5, 2), rat(-1, 1), rat(3, 1)];
    (0..5).map(|k| (0..m).map(|i| base[(k + 2 * i) % base.len()].clone()).collect()).collect()
}

impl GenericConnection {
    /// `omega[i]` is the `r × r` matrix with column `β` the coefficients of `D_i e_β`.
    pub fn new(base_dim: usize, omega: Vec<Matrix<RatFunc>>) -> Result<Self, FiltrationError> {
        if omega.len() != base_dim || omega.is_empty() {
            return Err(FiltrationError::Malformed("one coefficient matrix per coordinate".into()));
        }
        let rank = omega[0].rows();
        if omega.iter().any(|w| w.rows() != rank || w.cols() != rank) {
            return Err(FiltrationError::Malformed("coefficient matrices must be square of equal size".into()));
        }
        Ok(GenericConnection { base_dim, rank, omega })
    }

    /// The rank-2 example over the plane: `De₁ = dx¹⊗e₂`, `De₂ = x₂ dx¹⊗e₁`.
    pub fn toy() -> Self {
        let z = RatFunc::zero();
        let w1 = Matrix::from_rows(vec![vec![z.clone(), RatFunc::var(1)], vec![RatFunc::one(), z.clone()]], 2).unwrap();
        let w2 = Matrix::zeros(2, 2);
        GenericConnection::new(2, vec![w1, w2]).unwrap()
    }

    /// The trivial connection.
    pub fn flat(base_dim: usize, rank: usize) -> Self {
        GenericConnection::new(base_dim, vec![Matrix::zeros(rank, rank); base_dim]).unwrap()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `κ_ij = ½(∂_i ω_j − ∂_j ω_i + [ω_i, ω_j])` for `i < j`.
    pub fn curvature(&self) -> Vec<Matrix<RatFunc>> {
        so_pairs(self.base_dim)
            .into_iter()
            .map(|(i, j)| {
                let d = mat_add(&mat_map(&self.omega[j], |f| f.derivative(i)), &mat_map(&self.omega[i], |f| f.derivative(j)), -1);
                let c = mat_add(&self.omega[i].mul(&self.omega[j]).unwrap(), &self.omega[j].mul(&self.omega[i]).unwrap(), -1);
                mat_map(&mat_add(&d, &c, 1), |f| f.scale(&rat(1, 2)))
            })
            .collect()
    }

    /// `(D_a κ_bc) = ∂_a κ_bc + [ω_a, κ_bc]`, indexed `[a][pair]`.
    pub fn nabla_curvature(&self) -> Vec<Vec<Matrix<RatFunc>>> {
        let k = self.curvature();
        (0..self.base_dim)
            .map(|a| {
                k.iter()
                    .map(|kb| {
                        let br = mat_add(&self.omega[a].mul(kb).unwrap(), &kb.mul(&self.omega[a]).unwrap(), -1);
                        mat_add(&mat_map(kb, |f| f.derivative(a)), &br, 1)
                    })
                    .collect()
            })
            .collect()
    }

    fn stack(blocks: &[&Matrix<RatFunc>], r: usize) -> Matrix<RatFunc> {
        let rows = blocks.iter().flat_map(|b| b.row_vecs()).collect();
        Matrix::from_rows(rows, r).expect("consistent")
    }

    /// Generic rank of the stacked curvature over the rational-function field.
    pub fn symbolic_kappa_rank(&self) -> usize {
        let k = self.curvature();
        GenericConnection::stack(&k.iter().collect::<Vec<_>>(), self.rank).rank()
    }

    pub fn at(&self, point: &[Rat]) -> Result<PointCurvature, FiltrationError> {
        let ev = |m: &Matrix<RatFunc>| -> Result<Vec<Vec<Rat>>, FiltrationError> {
            (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| m.get(i, j).eval(point).map_err(|e| FiltrationError::Malformed(e.to_string())))
                        .collect()
                })
                .collect()
        };
        let k = self.curvature();
        let nk = self.nabla_curvature();
        let mut krows = Vec::new();
        for b in &k {
            krows.extend(ev(b)?);
        }
        let mut nrows = Vec::new();
        for per_a in &nk {
            for b in per_a {
                nrows.extend(ev(b)?);
            }
        }
        Ok(PointCurvature {
            base_dim: self.base_dim,
            fiber: self.rank,
            kappa: Matrix::from_rows(krows, self.rank).expect("consistent"),
            nabla_kappa: Matrix::from_rows(nrows, self.rank).expect("consistent"),
        })
    }

    /// Filtrations and parallelness at the sample points, checking that every
    /// level has the same dimension everywhere and that `κ` has its generic rank.
    pub fn sampled(&self) -> Result<Vec<(Vec<Rat>, Filtration, ParallelReport)>, FiltrationError> {
        let generic = self.symbolic_kappa_rank();
        let mut out: Vec<(Vec<Rat>, Filtration, ParallelReport)> = Vec::new();
        for p in sample_points(self.base_dim) {
            let pc = self.at(&p)?;
            if pc.kappa.rank() != generic {
                return Err(FiltrationError::RankJump(format!("rank of curvature is {} at {p:?}, generically {generic}", pc.kappa.rank())));
            }
            let f = pc.e_filtration();
            if let Some((_, f0, _)) = out.first() {
                if f0.dims() != f.dims() {
                    return Err(FiltrationError::RankJump(format!("filtration dims {:?} at {p:?} vs {:?}", f.dims(), f0.dims())));
                }
            }
            let par = pc.parallelness(&f);
            out.push((p, f, par));
        }
        Ok(out)
    }

    pub fn parallelness_check(&self) -> Result<ParallelReport, FiltrationError> {
        let s = self.sampled()?;
        Ok(s.into_iter().map(|(_, _, r)| r).find(|r| !r.parallel).unwrap_or(ParallelReport { parallel: true, failing_level: None }))
    }

    pub fn is_generic(&self) -> Result<bool, FiltrationError> {
        self.sampled()?;
        for p in sample_points(self.base_dim) {
            if !self.at(&p)?.is_generic() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `A` as a `(1,1)` tensor from a square matrix.
pub fn endomorphism(rows: &[Vec<Rat>]) -> Tensor<Rat> {
    let m = rows.len();
    Tensor::from_fn(m, vec![Slot::Up, Slot::Down], |i| rows[i[0]][i[1]].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::SpaceSpec;

    fn cw(q: &[i64]) -> PointFrame {
        let n = q.len();
        let qm = (0..n).map(|i| (0..n).map(|j| if i == j { int(q[i]) } else { int(0) }).collect()).collect();
        PointFrame::build(&SpaceSpec::CahenWallach { q: qm }).unwrap()
    }

    #[test]
    fn cw_dimensions() {
        let pf = cw(&[1, 2]);
        assert_eq!(h_filtration(&pf).dims(), vec![2, 4, 6]);
        let e = e_filtration(&pf);
        assert_eq!(e.dims(), vec![6, 8, 10]);
        assert_eq!(e.stabilized_at(), 2);
        assert!(PointCurvature::killing(&pf).parallelness(&e).parallel);
        assert_eq!(aut_r(&cw(&[1, 1])).dim(), 3);
    }

    #[test]
    fn constant_curvature_is_flat() {
        let pf = PointFrame::build(&SpaceSpec::Sphere { n: 3, hermitian: false }).unwrap();
        assert_eq!(h_filtration(&pf).dims(), vec![3]);
        assert_eq!(e_filtration(&pf).dims(), vec![6]);
    }

    #[test]
    fn toy_connection() {
        let t = GenericConnection::toy();
        let s = t.sampled().unwrap();
        for (_, f, par) in &s {
            assert_eq!(f.steps[0].basis(), &[vec![int(1), int(0)]]);
            assert_eq!(par.failing_level, Some(0));
        }
        assert!(GenericConnection::flat(3, 2).parallelness_check().unwrap().parallel);
    }

    #[test]
    fn act_on_r_rejects_non_skew() {
        let pf = cw(&[1, 2]);
        let a = endomorphism(&(0..4).map(|i| (0..4).map(|j| int((i == j) as i64)).collect()).collect::<Vec<_>>());
        assert_eq!(act_on_r(&a, pf.curvature(), pf.metric()), Err(FiltrationError::NotSkew));
    }
}
