//! Coordinate charts with rational-function metrics and the Levi-Civita calculus.

use std::sync::OnceLock;

use crate::linalg::Matrix;
use crate::scalars::{int, rat, register_irreducible, Coeff, Poly, Rat, RatFunc, ScalarError};
use crate::tensor::{Slot, Tensor};

use super::{SpaceSpec, SpecError};

#[derive(Debug)]
pub struct Chart {
    spec: SpaceSpec,
    coords: Vec<String>,
    metric: Tensor<RatFunc>,
    metric_inv: Tensor<RatFunc>,
    frame_scale: Vec<Rat>,
    domain_note: String,
    gamma: OnceLock<Tensor<RatFunc>>,
}

struct Block {
    names: Vec<String>,
    metric: Vec<Vec<RatFunc>>,
    scale: Vec<Rat>,
    note: String,
}

fn signs(p: usize, q: usize) -> Vec<i64> {
    std::iter::repeat_n(-1, p).chain(std::iter::repeat_n(1, q)).collect()
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        return vec![prefix.to_string()];
    }
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// `4 η / (1 + c ⟨x, x⟩_η)^2` on variables `off..off+n`.
fn conformal_block(eta: &[i64], c: i64, off: usize) -> Vec<Vec<RatFunc>> {
    let n = eta.len();
    let mut base = Poly::one();
    for (i, &e) in eta.iter().enumerate() {
        let x = Poly::var(off + i);
        base = &base + &(&x * &x).scale(&int(c * e));
    }
    // A nondegenerate quadric in two or more variables is irreducible; `1 ± x²` only for `+`.
    if n >= 2 || c * eta[0] > 0 {
        register_irreducible(&base);
    }
    let conf = RatFunc::normalize(Poly::from_int(4), base.pow(2)).expect("nonzero");
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { conf.scale(&int(eta[i])) } else { RatFunc::zero() }).collect())
        .collect()
}

fn block(spec: &SpaceSpec, off: usize) -> Vec<Block> {
    match spec {
        SpaceSpec::Flat { p, q } => {
            let s = signs(*p, *q);
            let n = s.len();
            let mut names = numbered("t", *p);
            names.extend(numbered("x", *q));
            let metric = (0..n)
                .map(|i| (0..n).map(|j| if i == j { RatFunc::from_rat(int(s[i])) } else { RatFunc::zero() }).collect())
                .collect();
            vec![Block { names, metric, scale: vec![int(1); n], note: "all of R^n".into() }]
        }
        SpaceSpec::ConstCurv { p, q, sign } => {
            let eta = signs(*p, *q);
            let n = eta.len();
            vec![Block {
                names: numbered("x", n),
                metric: conformal_block(&eta, *sign as i64, off),
                scale: vec![rat(1, 2); n],
                note: "where 1 + c<x,x> != 0".into(),
            }]
        }
        SpaceSpec::Sphere { n, .. } => vec![Block {
            names: numbered("x", *n),
            metric: conformal_block(&vec![1; *n], 1, off),
            scale: vec![rat(1, 2); *n],
            note: "stereographic: the sphere minus one point".into(),
        }],
        SpaceSpec::Hyperbolic { n } => vec![Block {
            names: numbered("x", *n),
            metric: conformal_block(&vec![1; *n], -1, off),
            scale: vec![rat(1, 2); *n],
            note: "Poincare ball |x| < 1".into(),
        }],
        SpaceSpec::CahenWallach { q } => {
            let n = q.len();
            let m = n + 2;
            let mut names = vec!["xm".to_string()];
            names.extend(numbered("x", n).into_iter().map(|s| if n == 1 { "x1".into() } else { s }));
            names.push("xp".into());
            let mut quad = Poly::zero();
            for i in 0..n {
                for j in 0..n {
                    let t = &Poly::var(off + 1 + i) * &Poly::var(off + 1 + j);
                    quad = &quad + &t.scale(&q[i][j]);
                }
            }
            let mut metric = vec![vec![RatFunc::zero(); m]; m];
            metric[0][m - 1] = RatFunc::one();
            metric[m - 1][0] = RatFunc::one();
            metric[m - 1][m - 1] = RatFunc::from_poly(quad);
            for i in 1..=n {
                metric[i][i] = RatFunc::one();
            }
            vec![Block { names, metric, scale: vec![int(1); m], note: "all of R^(n+2)".into() }]
        }
        SpaceSpec::Product { factors } => {
            let mut out = Vec::new();
            let mut o = off;
            for f in factors {
                let bs = block(f, o);
                o += bs.iter().map(|b| b.names.len()).sum::<usize>();
                out.extend(bs);
            }
            out
        }
    }
}

impl Chart {
    pub fn build(spec: &SpaceSpec) -> Result<Chart, SpecError> {
        spec.validate()?;
        let blocks = block(spec, 0);
        let m: usize = blocks.iter().map(|b| b.names.len()).sum();
        let product = blocks.len() > 1;
        let mut coords = Vec::new();
        let mut metric = Tensor::<RatFunc>::down(m, 2);
        let mut frame_scale = Vec::new();
        let mut notes = Vec::new();
        let mut off = 0;
        for (k, b) in blocks.iter().enumerate() {
            let d = b.names.len();
            coords.extend(b.names.iter().map(|s| if product { format!("{s}_{k}") } else { s.clone() }));
            for i in 0..d {
                for j in 0..d {
                    metric.set(&[off + i, off + j], b.metric[i][j].clone());
                }
            }
            frame_scale.extend(b.scale.iter().cloned());
            notes.push(b.note.clone());
            off += d;
        }
        Chart::from_metric(spec.clone(), coords, metric, frame_scale, notes.join("; "))
            .map_err(|e| SpecError::Invalid(e.to_string()))
    }

    /// A chart from explicit metric components.
    pub fn from_metric(
        spec: SpaceSpec,
        coords: Vec<String>,
        metric: Tensor<RatFunc>,
        frame_scale: Vec<Rat>,
        domain_note: String,
    ) -> Result<Chart, ScalarError> {
        let m = metric.dim();
        let mat = Matrix::from_rows((0..m).map(|i| (0..m).map(|j| metric.get(&[i, j]).clone()).collect()).collect(), m)
            .expect("square");
        let inv = mat.inverse().ok_or(ScalarError::DivisionByZero)?;
        let metric_inv = Tensor::from_fn(m, vec![Slot::Up; 2], |i| inv.get(i[0], i[1]).clone());
        Ok(Chart { spec, coords, metric, metric_inv, frame_scale, domain_note, gamma: OnceLock::new() })
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn metric(&self) -> &Tensor<RatFunc> {
        &self.metric
    }

    pub fn metric_inv(&self) -> &Tensor<RatFunc> {
        &self.metric_inv
    }

    pub fn domain_note(&self) -> &str {
        &self.domain_note
    }

    /// Diagonal alignment `e_a = s_a ∂_a` of the chart with the point frame at the origin.
    pub fn frame_scale(&self) -> &[Rat] {
        &self.frame_scale
    }

    pub fn christoffel(&self) -> &Tensor<RatFunc> {
        self.gamma.get_or_init(|| christoffel(self))
    }

    /// `R_abcd = g_ce R_ab^e_d`.
    pub fn riemann_down(&self) -> Tensor<RatFunc> {
        riemann(self).raise_lower(2, &self.metric, &self.metric_inv).expect("rank 4")
    }

    /// Evaluate a field at the origin and express it in the aligned point frame.
    pub fn at_origin_in_frame(&self, t: &Tensor<RatFunc>) -> Result<Tensor<Rat>, ScalarError> {
        let zero = vec![int(0); self.dim()];
        let mut err = None;
        let out = Tensor::from_fn(t.dim(), t.valence().to_vec(), |idx| {
            let v = t.get(idx).eval(&zero).unwrap_or_else(|e| {
                err = Some(e);
                int(0)
            });
            idx.iter().zip(t.valence()).fold(v, |acc, (&i, s)| match s {
                Slot::Down => acc * &self.frame_scale[i],
                Slot::Up => acc / &self.frame_scale[i],
            })
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

/// `Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc)`.
pub fn christoffel(chart: &Chart) -> Tensor<RatFunc> {
    let m = chart.dim();
    let g = chart.metric();
    let dg: Vec<Tensor<RatFunc>> = (0..m).map(|c| g.map(|v| v.derivative(c))).collect();
    let half = rat(1, 2);
    let lower = Tensor::from_fn(m, vec![Slot::Down; 3], |i| {
        let (d, b, c) = (i[0], i[1], i[2]);
        dg[b].get(&[d, c]).plus(dg[c].get(&[d, b])).minus(dg[d].get(&[b, c])).scale(&half)
    });
    lower.raise_lower(0, g, chart.metric_inv()).expect("rank 3")
}

/// `R_ab^c_d = ∂_a Γ^c_bd − ∂_b Γ^c_ad + Γ^c_ae Γ^e_bd − Γ^c_be Γ^e_ad`, so that
/// `(∇_a∇_b − ∇_b∇_a) X^c = R_ab^c_d X^d`.
pub fn riemann(chart: &Chart) -> Tensor<RatFunc> {
    let m = chart.dim();
    let gam = chart.christoffel();
    let dgam: Vec<Tensor<RatFunc>> = (0..m).map(|a| gam.map(|v| v.derivative(a))).collect();
    Tensor::from_fn(m, vec![Slot::Down, Slot::Down, Slot::Up, Slot::Down], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let mut acc = dgam[a].get(&[c, b, d]).minus(dgam[b].get(&[c, a, d]));
        for e in 0..m {
            let t1 = gam.get(&[c, a, e]);
            let t2 = gam.get(&[e, b, d]);
            if !t1.is_zero() && !t2.is_zero() {
                acc = acc.plus(&t1.times(t2));
            }
            let t3 = gam.get(&[c, b, e]);
            let t4 = gam.get(&[e, a, d]);
            if !t3.is_zero() && !t4.is_zero() {
                acc = acc.minus(&t3.times(t4));
            }
        }
        acc
    })
}

/// `∇_a T` for the Levi-Civita connection; the new slot is prepended.
pub fn covariant_derivative(chart: &Chart, t: &Tensor<RatFunc>) -> Tensor<RatFunc> {
    covariant_derivative_with(chart.christoffel(), t)
}

/// `∇_a T` for the connection with coefficients `Γ^c_ab` (`∇_a ∂_b = Γ^c_ab ∂_c`).
pub fn covariant_derivative_with(gamma: &Tensor<RatFunc>, t: &Tensor<RatFunc>) -> Tensor<RatFunc> {
    let gs = vec![gamma; t.rank()];
    covariant_derivative_per_slot(&gs, t)
}

/// `∇_a T` where slot `s` of `T` is differentiated with connection `gammas[s]`.
pub fn covariant_derivative_per_slot(gammas: &[&Tensor<RatFunc>], t: &Tensor<RatFunc>) -> Tensor<RatFunc> {
    let m = t.dim();
    let r = t.rank();
    assert_eq!(gammas.len(), r, "one connection per slot");
    let partials: Vec<Tensor<RatFunc>> = (0..m).map(|a| t.map(|v| v.derivative(a))).collect();
    let mut valence = vec![Slot::Down];
    valence.extend_from_slice(t.valence());
    let mut src = vec![0; r];
    Tensor::from_fn(m, valence, |idx| {
        let a = idx[0];
        let rest = &idx[1..];
        let mut acc = partials[a].get(rest).clone();
        src.copy_from_slice(rest);
        for s in 0..r {
            let gamma = gammas[s];
            for e in 0..m {
                let (coef, neg) = match t.valence()[s] {
                    Slot::Down => (gamma.get(&[e, a, rest[s]]), true),
                    Slot::Up => (gamma.get(&[rest[s], a, e]), false),
                };
                if coef.is_zero() {
                    continue;
                }
                src[s] = e;
                let v = t.get(&src);
                if !v.is_zero() {
                    let p = coef.times(v);
                    acc = if neg { acc.minus(&p) } else { acc.plus(&p) };
                }
            }
            src[s] = rest[s];
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::PointFrame;
    use crate::tensor::YoungShape;

    #[test]
    fn flat_chart_has_no_connection() {
        let c = Chart::build(&SpaceSpec::Flat { p: 1, q: 1 }).unwrap();
        assert!(c.christoffel().is_zero());
        assert!(riemann(&c).is_zero());
        assert_eq!(c.coords(), &["t", "x"]);
    }

    #[test]
    fn cw_chart_metric_and_curvature() {
        let spec = SpaceSpec::CahenWallach { q: vec![vec![int(1)]] };
        let c = Chart::build(&spec).unwrap();
        assert_eq!(c.coords(), &["xm", "x1", "xp"]);
        assert_eq!(*c.metric().get(&[0, 2]), RatFunc::one());
        assert_eq!(*c.metric().get(&[2, 2]), RatFunc::from_poly(&Poly::var(1) * &Poly::var(1)));
        let r = c.riemann_down();
        assert!(r.young_check(YoungShape::RiemannBox).unwrap().0);
        let pf = PointFrame::build(&spec).unwrap();
        assert_eq!(c.at_origin_in_frame(&r).unwrap(), *pf.curvature());
        assert!(covariant_derivative(&c, &r).is_zero());
    }

    #[test]
    fn sphere_chart_is_unit_curvature() {
        let spec = SpaceSpec::Sphere { n: 2, hermitian: false };
        let c = Chart::build(&spec).unwrap();
        let r = c.riemann_down();
        let g = c.metric();
        let expect = Tensor::from_fn(2, vec![Slot::Down; 4], |i| {
            g.get(&[i[0], i[2]]).times(g.get(&[i[1], i[3]])).minus(&g.get(&[i[0], i[3]]).times(g.get(&[i[1], i[2]])))
        });
        assert_eq!(r, expect);
        assert!(covariant_derivative(&c, g).is_zero());
    }
}
