//! One-point (constant) models: metric and curvature in a fixed frame.

use crate::linalg::{Matrix, Subspace};
use crate::scalars::{int, Coeff, Rat};
use crate::tensor::{Slot, Tensor, TensorError, YoungShape};

use super::{SpaceSpec, SpecError};

/// Index pairs `(i, j)`, `i < j`, in lexicographic order: the coordinates of
/// skew forms and of `so(T, g)` (via the lowered endomorphism).
pub fn so_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
}

pub fn so_dim(m: usize) -> usize {
    m * (m.saturating_sub(1)) / 2
}

/// Endomorphism `A^a_b = g^{ac} ε_{cb}` for the 2-form with the given pair coordinates.
pub fn so_endomorphism<T: Coeff>(coords: &[T], g_inv: &Tensor<T>) -> Tensor<T> {
    let m = g_inv.dim();
    let mut eps = Tensor::<T>::down(m, 2);
    for (k, &(i, j)) in so_pairs(m).iter().enumerate() {
        eps.set(&[i, j], coords[k].clone());
        eps.set(&[j, i], coords[k].negate());
    }
    Tensor::from_fn(m, vec![Slot::Up, Slot::Down], |ix| {
        (0..m).fold(T::zero(), |acc, c| {
            let a = g_inv.get(&[ix[0], c]);
            let b = eps.get(&[c, ix[1]]);
            if a.is_zero() || b.is_zero() {
                acc
            } else {
                acc.plus(&a.times(b))
            }
        })
    })
}

/// Pair coordinates of the lowered form `A_cb = g_ca A^a_b`.
pub fn so_coords<T: Coeff>(a: &Tensor<T>, g: &Tensor<T>) -> Vec<T> {
    let m = g.dim();
    so_pairs(m)
        .into_iter()
        .map(|(i, j)| (0..m).fold(T::zero(), |acc, k| acc.plus(&g.get(&[i, k]).times(a.get(&[k, j])))))
        .collect()
}

pub fn so_basis<T: Coeff>(g_inv: &Tensor<T>) -> Vec<Tensor<T>> {
    let n = so_dim(g_inv.dim());
    (0..n)
        .map(|k| {
            let mut c = vec![T::zero(); n];
            c[k] = T::one();
            so_endomorphism(&c, g_inv)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PointFrame {
    spec: SpaceSpec,
    metric: Tensor<Rat>,
    metric_inv: Tensor<Rat>,
    curvature: Tensor<Rat>,
    blocks: Vec<(usize, usize)>,
    kahler: Option<Tensor<Rat>>,
}

fn diag_metric(signs: &[i64]) -> Tensor<Rat> {
    let m = signs.len();
    Tensor::from_fn(m, vec![Slot::Down; 2], |i| if i[0] == i[1] { int(signs[i[0]]) } else { int(0) })
}

fn const_curv(g: &Tensor<Rat>, c: i64) -> Tensor<Rat> {
    let m = g.dim();
    let c = int(c);
    Tensor::from_fn(m, vec![Slot::Down; 4], |i| {
        let v = g.get(&[i[0], i[2]]) * g.get(&[i[1], i[3]]) - g.get(&[i[0], i[3]]) * g.get(&[i[1], i[2]]);
        v * &c
    })
}

fn invert(g: &Tensor<Rat>) -> Result<Tensor<Rat>, TensorError> {
    let m = g.dim();
    let mat = Matrix::from_rows((0..m).map(|i| (0..m).map(|j| g.get(&[i, j]).clone()).collect()).collect(), m)
        .expect("square");
    let inv = mat.inverse().ok_or(TensorError::SingularMetric)?;
    Ok(Tensor::from_fn(m, vec![Slot::Up; 2], |i| inv.get(i[0], i[1]).clone()))
}

impl PointFrame {
    pub fn build(spec: &SpaceSpec) -> Result<PointFrame, SpecError> {
        spec.validate()?;
        let (metric, curvature, kahler) = match spec {
            SpaceSpec::Flat { p, q } => {
                let signs: Vec<i64> = std::iter::repeat_n(-1, *p).chain(std::iter::repeat_n(1, *q)).collect();
                let g = diag_metric(&signs);
                let r = Tensor::down(g.dim(), 4);
                (g, r, None)
            }
            SpaceSpec::ConstCurv { p, q, sign } => {
                let signs: Vec<i64> = std::iter::repeat_n(-1, *p).chain(std::iter::repeat_n(1, *q)).collect();
                let g = diag_metric(&signs);
                let r = const_curv(&g, *sign as i64);
                (g, r, None)
            }
            SpaceSpec::Sphere { n, hermitian } => {
                let g = diag_metric(&vec![1; *n]);
                let r = const_curv(&g, 1);
                let k = hermitian.then(|| {
                    let mut w = Tensor::<Rat>::down(2, 2);
                    w.set(&[0, 1], int(1));
                    w.set(&[1, 0], int(-1));
                    w
                });
                (g, r, k)
            }
            SpaceSpec::Hyperbolic { n } => {
                let g = diag_metric(&vec![1; *n]);
                let r = const_curv(&g, -1);
                (g, r, None)
            }
            SpaceSpec::CahenWallach { q } => {
                let n = q.len();
                let m = n + 2;
                let plus = n + 1;
                let mut g = Tensor::<Rat>::down(m, 2);
                g.set(&[0, plus], int(1));
                g.set(&[plus, 0], int(1));
                for i in 1..=n {
                    g.set(&[i, i], int(1));
                }
                let mut r = Tensor::<Rat>::down(m, 4);
                for i in 1..=n {
                    for j in 1..=n {
                        let v = q[i - 1][j - 1].clone();
                        r.set(&[plus, i, j, plus], v.clone());
                        r.set(&[i, plus, plus, j], v.clone());
                        r.set(&[plus, i, plus, j], -v.clone());
                        r.set(&[i, plus, j, plus], -v);
                    }
                }
                (g, r, None)
            }
            SpaceSpec::Product { factors } => {
                let parts = factors.iter().map(PointFrame::build).collect::<Result<Vec<_>, _>>()?;
                return Ok(PointFrame::product(spec.clone(), &parts));
            }
        };
        let metric_inv = invert(&metric).expect("built-in metrics are invertible");
        let dim = metric.dim();
        Ok(PointFrame { spec: spec.clone(), metric, metric_inv, curvature, blocks: vec![(0, dim)], kahler })
    }

    fn product(spec: SpaceSpec, parts: &[PointFrame]) -> PointFrame {
        let m: usize = parts.iter().map(PointFrame::dim).sum();
        let mut metric = Tensor::<Rat>::down(m, 2);
        let mut curvature = Tensor::<Rat>::down(m, 4);
        let mut kahler: Option<Tensor<Rat>> = None;
        let mut blocks = Vec::new();
        let mut off = 0;
        for pf in parts {
            let d = pf.dim();
            for b in &pf.blocks {
                blocks.push((b.0 + off, b.1 + off));
            }
            for a in 0..d {
                for b in 0..d {
                    metric.set(&[a + off, b + off], pf.metric.get(&[a, b]).clone());
                    for c in 0..d {
                        for e in 0..d {
                            curvature.set(&[a + off, b + off, c + off, e + off], pf.curvature.get(&[a, b, c, e]).clone());
                        }
                    }
                }
            }
            if let Some(w) = &pf.kahler {
                let k = kahler.get_or_insert_with(|| Tensor::down(m, 2));
                for a in 0..d {
                    for b in 0..d {
                        k.set(&[a + off, b + off], w.get(&[a, b]).clone());
                    }
                }
            }
            off += d;
        }
        let metric_inv = invert(&metric).expect("block metrics are invertible");
        PointFrame { spec, metric, metric_inv, curvature, blocks, kahler }
    }

    /// A user-supplied frame; the curvature must have the Riemann symmetries.
    pub fn from_parts(
        spec: SpaceSpec,
        metric: Tensor<Rat>,
        curvature: Tensor<Rat>,
        kahler: Option<Tensor<Rat>>,
    ) -> Result<PointFrame, TensorError> {
        let metric_inv = invert(&metric)?;
        let (ok, _) = curvature.young_check(YoungShape::RiemannBox)?;
        if !ok {
            return Err(TensorError::Shape("curvature lacks the Riemann symmetries".into()));
        }
        let dim = metric.dim();
        Ok(PointFrame { spec, metric, metric_inv, curvature, blocks: vec![(0, dim)], kahler })
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn metric(&self) -> &Tensor<Rat> {
        &self.metric
    }

    pub fn metric_inv(&self) -> &Tensor<Rat> {
        &self.metric_inv
    }

    /// `R_abcd`, all slots down.
    pub fn curvature(&self) -> &Tensor<Rat> {
        &self.curvature
    }

    /// `R_ab^c_d`.
    pub fn curvature_mixed(&self) -> Tensor<Rat> {
        self.curvature.raise_lower(2, &self.metric, &self.metric_inv).expect("rank-4 curvature")
    }

    /// Index ranges of the de Rham blocks (one per flattened factor).
    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn metric_matrix(&self) -> Matrix<Rat> {
        let m = self.dim();
        Matrix::from_rows((0..m).map(|i| (0..m).map(|j| self.metric.get(&[i, j]).clone()).collect()).collect(), m)
            .expect("square")
    }

    /// `hol = span{R(e_a, e_b)}` in `so` pair coordinates.
    pub fn holonomy_algebra(&self) -> Subspace<Rat> {
        let m = self.dim();
        let pairs = so_pairs(m);
        let gens = pairs
            .iter()
            .map(|&(a, b)| pairs.iter().map(|&(i, j)| self.curvature.get(&[a, b, i, j]).clone()).collect())
            .collect();
        Subspace::span(so_dim(m), gens)
    }

    /// Endomorphisms spanning `hol`.
    pub fn holonomy_endomorphisms(&self) -> Vec<Tensor<Rat>> {
        self.holonomy_algebra().basis().iter().map(|c| so_endomorphism(c, &self.metric_inv)).collect()
    }

    /// Vectors annihilated by every holonomy generator.
    pub fn parallel_vectors(&self) -> Subspace<Rat> {
        let m = self.dim();
        let rows: Vec<Vec<Rat>> = self
            .holonomy_endomorphisms()
            .iter()
            .flat_map(|h| (0..m).map(|a| (0..m).map(|b| h.get(&[a, b]).clone()).collect::<Vec<_>>()).collect::<Vec<_>>())
            .collect();
        if rows.is_empty() {
            return Subspace::full(m);
        }
        Matrix::from_rows(rows, m).expect("square blocks").kernel()
    }

    /// The frame volume form of the hermitian 2-sphere factor (`ω_12 = 1`), if flagged.
    pub fn kahler_form(&self) -> Option<&Tensor<Rat>> {
        self.kahler.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw12() -> SpaceSpec {
        SpaceSpec::CahenWallach { q: vec![vec![int(1), int(0)], vec![int(0), int(2)]] }
    }

    #[test]
    fn cw_curvature_components() {
        let pf = PointFrame::build(&cw12()).unwrap();
        let r = pf.curvature();
        assert_eq!(*r.get(&[3, 1, 1, 3]), int(1));
        assert_eq!(*r.get(&[3, 2, 2, 3]), int(2));
        assert_eq!(*r.get(&[3, 1, 2, 3]), int(0));
        assert!(r.young_check(YoungShape::RiemannBox).unwrap().0);
        assert_eq!(pf.holonomy_algebra().dim(), 2);
        assert_eq!(pf.parallel_vectors().dim(), 1);
        assert_eq!(pf.parallel_vectors().basis()[0], vec![int(1), int(0), int(0), int(0)]);
    }

    #[test]
    fn sphere_and_flat() {
        let s2 = PointFrame::build(&SpaceSpec::Sphere { n: 2, hermitian: true }).unwrap();
        assert_eq!(*s2.curvature().get(&[0, 1, 0, 1]), int(1));
        assert_eq!(s2.holonomy_algebra().dim(), 1);
        assert_eq!(s2.parallel_vectors().dim(), 0);
        assert!(s2.kahler_form().is_some());
        let f = PointFrame::build(&SpaceSpec::Flat { p: 1, q: 1 }).unwrap();
        assert!(f.curvature().is_zero());
        assert_eq!(f.holonomy_algebra().dim(), 0);
        assert_eq!(f.parallel_vectors().dim(), 2);
        assert!(f.kahler_form().is_none());
    }

    #[test]
    fn so_coordinates_roundtrip() {
        let pf = PointFrame::build(&cw12()).unwrap();
        let c: Vec<Rat> = (1..=6).map(int).collect();
        let a = so_endomorphism(&c, pf.metric_inv());
        assert_eq!(so_coords(&a, pf.metric()), c);
    }

    #[test]
    fn product_has_no_mixed_curvature() {
        let spec = SpaceSpec::Product { factors: vec![SpaceSpec::Sphere { n: 2, hermitian: true }, cw12()] };
        let pf = PointFrame::build(&spec).unwrap();
        assert_eq!(pf.blocks(), &[(0, 2), (2, 6)]);
        assert_eq!(*pf.curvature().get(&[0, 1, 0, 1]), int(1));
        assert!(pf.curvature().get(&[0, 2, 0, 2]).is_zero());
        assert_eq!(pf.kahler_form().unwrap().get(&[0, 1]), &int(1));
    }
}
