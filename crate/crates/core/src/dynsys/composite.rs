//! User-defined torus maps given by coordinate formulas and an analytic Jacobian.

use meval::{ContextProvider, Expr, FuncEvalError};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, MAX_DIM};

/// Formula text as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeDef {
    #[serde(default)]
    pub name: Option<String>,
    pub dim: usize,
    pub map: Vec<String>,
    pub jacobian: Vec<Vec<String>>,
    #[serde(default)]
    pub inverse: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct CompositeMap {
    def: CompositeDef,
    map: Vec<Expr>,
    jacobian: Vec<Vec<Expr>>,
    inverse: Option<Vec<Expr>>,
}

struct Vars<'a>(&'a [f64]);

impl ContextProvider for Vars<'_> {
    fn get_var(&self, name: &str) -> Option<f64> {
        let idx = match name {
            "x" | "x0" => 0,
            "y" | "x1" => 1,
            "z" | "x2" => 2,
            "pi" => return Some(std::f64::consts::PI),
            "e" => return Some(std::f64::consts::E),
            _ => return None,
        };
        self.0.get(idx).copied()
    }

    fn eval_func(&self, name: &str, args: &[f64]) -> std::result::Result<f64, FuncEvalError> {
        let unary: fn(f64) -> f64 = match name {
            "sin" => f64::sin,
            "cos" => f64::cos,
            "tan" => f64::tan,
            "exp" => f64::exp,
            "ln" => f64::ln,
            "sqrt" => f64::sqrt,
            "abs" => f64::abs,
            "floor" => f64::floor,
            _ => return Err(FuncEvalError::UnknownFunction),
        };
        match args {
            [a] => Ok(unary(*a)),
            [] => Err(FuncEvalError::TooFewArguments),
            _ => Err(FuncEvalError::TooManyArguments),
        }
    }
}

fn parse(src: &str) -> Result<Expr> {
    src.parse::<Expr>()
        .map_err(|e| Error::Formula(format!("{src:?}: {e}")))
}

fn eval(e: &Expr, x: &[f64]) -> Result<f64> {
    e.eval_with_context(Vars(x))
        .map_err(|err| Error::Formula(err.to_string()))
}

impl CompositeMap {
    pub fn new(def: CompositeDef) -> Result<Self> {
        let d = def.dim;
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        if def.map.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: def.map.len(),
            });
        }
        if def.jacobian.len() != d || def.jacobian.iter().any(|r| r.len() != d) {
            return Err(Error::Formula(format!("jacobian must be {d}x{d}")));
        }
        let map = def.map.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        let jacobian = def
            .jacobian
            .iter()
            .map(|row| row.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let inverse = match &def.inverse {
            None => None,
            Some(v) if v.len() != d => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                })
            }
            Some(v) => Some(v.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?),
        };
        let m = CompositeMap {
            def,
            map,
            jacobian,
            inverse,
        };
        // Unknown names only surface on evaluation.
        let probe = [0.25; MAX_DIM];
        m.apply(&probe)?;
        m.jacobian(&probe)?;
        if m.inverse.is_some() {
            m.apply_inverse(&probe)?;
        }
        Ok(m)
    }

    pub fn def(&self) -> &CompositeDef {
        &self.def
    }

    pub fn dim(&self) -> usize {
        self.def.dim
    }

    pub fn name(&self) -> &str {
        self.def.name.as_deref().unwrap_or("composite")
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// Unreduced image.
    pub fn apply(&self, x: &[f64; MAX_DIM]) -> Result<[f64; MAX_DIM]> {
        let xs = &x[..self.dim()];
        let mut out = [0.0; MAX_DIM];
        for (i, e) in self.map.iter().enumerate() {
            out[i] = eval(e, xs)?;
        }
        Ok(out)
    }

    pub fn apply_inverse(&self, x: &[f64; MAX_DIM]) -> Result<[f64; MAX_DIM]> {
        let inv = self
            .inverse
            .as_ref()
            .ok_or_else(|| Error::InverseUnavailable(self.name().to_string()))?;
        let xs = &x[..self.dim()];
        let mut out = [0.0; MAX_DIM];
        for (i, e) in inv.iter().enumerate() {
            out[i] = eval(e, xs)?;
        }
        Ok(out)
    }

    pub fn jacobian(&self, x: &[f64; MAX_DIM]) -> Result<Mat3> {
        let xs = &x[..self.dim()];
        let mut m = Mat3::zeros();
        for (i, row) in self.jacobian.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                m[(i, j)] = eval(e, xs)?;
            }
        }
        Ok(m)
    }
}

impl PartialEq for CompositeMap {
    fn eq(&self, other: &Self) -> bool {
        self.def == other.def
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear() -> CompositeDef {
        CompositeDef {
            name: Some("shear".into()),
            dim: 2,
            map: vec!["x + y".into(), "y + 0.1*sin(2*pi*x)".into()],
            jacobian: vec![
                vec!["1".into(), "1".into()],
                vec!["0.2*pi*cos(2*pi*x)".into(), "1".into()],
            ],
            inverse: None,
        }
    }

    #[test]
    fn evaluates_formulas() {
        let m = CompositeMap::new(shear()).unwrap();
        let out = m.apply(&[0.25, 0.5, 0.0]).unwrap();
        assert!((out[0] - 0.75).abs() < 1e-15);
        assert!((out[1] - 0.6).abs() < 1e-15);
        assert!(m.apply_inverse(&[0.0; 3]).is_err());
    }

    #[test]
    fn rejects_unknown_names() {
        let mut d = shear();
        d.map[0] = "x + w".into();
        assert!(matches!(CompositeMap::new(d), Err(Error::Formula(_))));
        let mut d = shear();
        d.jacobian[0][0] = "gamma(x)".into();
        assert!(matches!(CompositeMap::new(d), Err(Error::Formula(_))));
    }
}
