//! Built-in symmetric-space models: the JSON space description, constant
//! point frames and symbolic coordinate charts.

mod chart;
mod frame;

pub use chart::{
    christoffel, covariant_derivative, covariant_derivative_per_slot, covariant_derivative_with, riemann, Chart,
};
pub use frame::{so_basis, so_coords, so_dim, so_endomorphism, so_pairs, PointFrame};

use serde_json::{json, Value};

use crate::scalars::{parse_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("invalid space spec: {0}")]
    Invalid(String),
    #[error("Q must be symmetric")]
    NonSymmetricQ,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SpaceSpec {
    /// `p` negative and `q` positive directions.
    Flat { p: usize, q: usize },
    /// Constant sectional curvature `sign` on signature `(p, q)`.
    ConstCurv { p: usize, q: usize, sign: i8 },
    Sphere { n: usize, hermitian: bool },
    Hyperbolic { n: usize },
    CahenWallach { q: Vec<Vec<Rat>> },
    Product { factors: Vec<SpaceSpec> },
}

fn bad(msg: impl Into<String>) -> SpecError {
    SpecError::Invalid(msg.into())
}

fn get_usize(v: &Value, key: &str) -> Result<usize, SpecError> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| bad(format!("missing non-negative integer field {key:?}")))
}

pub fn parse_rat_value(v: &Value) -> Result<Rat, SpecError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rat::from_integer(i.into()))
            .ok_or_else(|| bad(format!("{n} is not an integer; write fractions as \"a/b\""))),
        Value::String(s) => parse_rat(s).map_err(|e| bad(e.to_string())),
        other => Err(bad(format!("expected a rational, got {other}"))),
    }
}

/// Parse a square rational matrix given as nested JSON arrays.
pub fn parse_matrix(v: &Value) -> Result<Vec<Vec<Rat>>, SpecError> {
    let rows = v.as_array().ok_or_else(|| bad("Q must be an array of rows"))?;
    let m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| bad("Q rows must be arrays"))?
                .iter()
                .map(parse_rat_value)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    if m.is_empty() || m.iter().any(|r| r.len() != m.len()) {
        return Err(bad("Q must be a nonempty square matrix"));
    }
    Ok(m)
}

impl SpaceSpec {
    pub fn from_json(v: &Value) -> Result<SpaceSpec, SpecError> {
        let ty = v.get("type").and_then(Value::as_str).ok_or_else(|| bad("missing \"type\""))?;
        let spec = match ty {
            "flat" => SpaceSpec::Flat { p: get_usize(v, "p")?, q: get_usize(v, "q")? },
            "const_curv" => {
                let sign = v.get("sign").and_then(Value::as_i64).ok_or_else(|| bad("missing \"sign\""))?;
                if sign != 1 && sign != -1 {
                    return Err(bad("sign must be 1 or -1"));
                }
                SpaceSpec::ConstCurv { p: get_usize(v, "p")?, q: get_usize(v, "q")?, sign: sign as i8 }
            }
            "sphere" => SpaceSpec::Sphere {
                n: get_usize(v, "n")?,
                hermitian: v.get("hermitian").and_then(Value::as_bool).unwrap_or(false),
            },
            "hyperbolic" => SpaceSpec::Hyperbolic { n: get_usize(v, "n")? },
            "cahen_wallach" => SpaceSpec::CahenWallach {
                q: parse_matrix(v.get("Q").ok_or_else(|| bad("missing \"Q\""))?)?,
            },
            "product" => SpaceSpec::Product {
                factors: v
                    .get("factors")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("missing \"factors\""))?
                    .iter()
                    .map(SpaceSpec::from_json)
                    .collect::<Result<_, _>>()?,
            },
            other => {
                return Err(bad(format!(
                    "unsupported type {other:?}; expected one of flat, const_curv, sphere, hyperbolic, cahen_wallach, product"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Value {
        match self {
            SpaceSpec::Flat { p, q } => json!({"type": "flat", "p": p, "q": q}),
            SpaceSpec::ConstCurv { p, q, sign } => json!({"type": "const_curv", "p": p, "q": q, "sign": sign}),
            SpaceSpec::Sphere { n, hermitian } => json!({"type": "sphere", "n": n, "hermitian": hermitian}),
            SpaceSpec::Hyperbolic { n } => json!({"type": "hyperbolic", "n": n}),
            SpaceSpec::CahenWallach { q } => json!({
                "type": "cahen_wallach",
                "Q": q.iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
            SpaceSpec::Product { factors } => {
                json!({"type": "product", "factors": factors.iter().map(SpaceSpec::to_json).collect::<Vec<_>>()})
            }
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        match self {
            SpaceSpec::Flat { p, q } if p + q == 0 => Err(bad("flat space needs positive dimension")),
            SpaceSpec::ConstCurv { p, q, .. } if p + q < 2 => Err(bad("constant curvature needs dimension >= 2")),
            SpaceSpec::Sphere { n, .. } | SpaceSpec::Hyperbolic { n } if *n < 2 => Err(bad("need n >= 2")),
            SpaceSpec::Sphere { n, hermitian: true } if *n != 2 => {
                Err(bad("the hermitian flag is only available for the 2-sphere"))
            }
            SpaceSpec::CahenWallach { q } => {
                let n = q.len();
                if n == 0 || q.iter().any(|r| r.len() != n) {
                    return Err(bad("Q must be a nonempty square matrix"));
                }
                if (0..n).any(|i| (0..i).any(|j| q[i][j] != q[j][i])) {
                    return Err(SpecError::NonSymmetricQ);
                }
                Ok(())
            }
            SpaceSpec::Product { factors } => {
                if factors.len() < 2 {
                    return Err(bad("a product needs at least two factors"));
                }
                for f in factors {
                    f.validate()?;
                }
                let lorentzian = self.flat_factors().iter().filter(|f| f.signature().0 == 1).count();
                if lorentzian > 1 {
                    return Err(bad("at most one Lorentzian factor is allowed in a product"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceSpec::Flat { p, q } | SpaceSpec::ConstCurv { p, q, .. } => p + q,
            SpaceSpec::Sphere { n, .. } | SpaceSpec::Hyperbolic { n } => *n,
            SpaceSpec::CahenWallach { q } => q.len() + 2,
            SpaceSpec::Product { factors } => factors.iter().map(SpaceSpec::dim).sum(),
        }
    }

    /// `(negatives, positives)`.
    pub fn signature(&self) -> (usize, usize) {
        match self {
            SpaceSpec::Flat { p, q } | SpaceSpec::ConstCurv { p, q, .. } => (*p, *q),
            SpaceSpec::Sphere { n, .. } | SpaceSpec::Hyperbolic { n } => (0, *n),
            SpaceSpec::CahenWallach { q } => (1, q.len() + 1),
            SpaceSpec::Product { factors } => factors
                .iter()
                .map(SpaceSpec::signature)
                .fold((0, 0), |(a, b), (c, d)| (a + c, b + d)),
        }
    }

    pub fn is_lorentzian(&self) -> bool {
        self.signature().0 == 1
    }

    /// Factors with nested products flattened (a non-product is its own single factor).
    pub fn flat_factors(&self) -> Vec<SpaceSpec> {
        match self {
            SpaceSpec::Product { factors } => factors.iter().flat_map(SpaceSpec::flat_factors).collect(),
            other => vec![other.clone()],
        }
    }

    /// Flatten products and sort factors by their JSON text, so that
    /// semantically equal specs compare (and hash) equal.
    pub fn canonical(&self) -> SpaceSpec {
        let mut fs = self.flat_factors();
        if fs.len() == 1 {
            return fs.pop().unwrap();
        }
        fs.sort_by_key(|f| f.to_json().to_string());
        SpaceSpec::Product { factors: fs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let v = json!({"type":"product","factors":[{"type":"sphere","n":2,"hermitian":true},{"type":"flat","p":1,"q":1}]});
        let s = SpaceSpec::from_json(&v).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.signature(), (1, 3));
        assert_eq!(SpaceSpec::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_specs() {
        let q = json!({"type":"cahen_wallach","Q":[[1,2],[0,1]]});
        assert_eq!(SpaceSpec::from_json(&q), Err(SpecError::NonSymmetricQ));
        let one = json!({"type":"product","factors":[{"type":"flat","p":1,"q":1}]});
        assert!(SpaceSpec::from_json(&one).is_err());
        let two_lor = json!({"type":"product","factors":[{"type":"flat","p":1,"q":1},{"type":"flat","p":1,"q":2}]});
        assert!(SpaceSpec::from_json(&two_lor).is_err());
        assert!(SpaceSpec::from_json(&json!({"type":"torus"})).is_err());
    }

    #[test]
    fn canonical_is_order_independent() {
        let a = SpaceSpec::Product { factors: vec![SpaceSpec::Flat { p: 1, q: 1 }, SpaceSpec::Sphere { n: 2, hermitian: true }] };
        let b = SpaceSpec::Product { factors: vec![SpaceSpec::Sphere { n: 2, hermitian: true }, SpaceSpec::Flat { p: 1, q: 1 }] };
        assert_eq!(a.canonical(), b.canonical());
        let nested = SpaceSpec::Product {
            factors: vec![SpaceSpec::Flat { p: 0, q: 1 }, b.clone()],
        };
        assert_eq!(nested.canonical().flat_factors().len(), 3);
    }

    #[test]
    fn fractions_as_strings() {
        let v = json!({"type":"cahen_wallach","Q":[["1/2",0],[0,"-3"]]});
        let SpaceSpec::CahenWallach { q } = SpaceSpec::from_json(&v).unwrap() else { panic!() };
        assert_eq!(q[0][0], crate::scalars::rat(1, 2));
    }
}
