use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::{spin_operator, Component};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Matrix, C64};

/// One of the 16 product operators E, I_α^k and 2·I_α¹I_β².
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductOperator {
    first: Option<Component>,
    second: Option<Component>,
}

const COMPONENTS: [Component; 3] = [Component::X, Component::Y, Component::Z];

fn letter(c: Component) -> char {
    match c {
        Component::X => 'x',
        Component::Y => 'y',
        Component::Z => 'z',
    }
}

impl ProductOperator {
    pub const IDENTITY: Self = Self { first: None, second: None };

    /// The basis in canonical order: E, Ix1, Iy1, Iz1, Ix2, Iy2, Iz2,
    /// 2Ix1Ix2, 2Ix1Iy2, ..., 2Iz1Iz2.
    pub fn basis() -> [Self; 16] {
        let mut out = [Self::IDENTITY; 16];
        let mut k = 1;
        for c in COMPONENTS {
            out[k] = Self { first: Some(c), second: None };
            k += 1;
        }
        for c in COMPONENTS {
            out[k] = Self { first: None, second: Some(c) };
            k += 1;
        }
        for a in COMPONENTS {
            for b in COMPONENTS {
                out[k] = Self { first: Some(a), second: Some(b) };
                k += 1;
            }
        }
        out
    }

    pub fn index(self) -> usize {
        let pos = |c: Component| COMPONENTS.iter().position(|&x| x == c).unwrap();
        match (self.first, self.second) {
            (None, None) => 0,
            (Some(a), None) => 1 + pos(a),
            (None, Some(b)) => 4 + pos(b),
            (Some(a), Some(b)) => 7 + 3 * pos(a) + pos(b),
        }
    }

    pub fn matrix(self) -> Matrix {
        match (self.first, self.second) {
            (None, None) => Matrix::identity(4, 4),
            (Some(a), None) => spin_operator(1, a),
            (None, Some(b)) => spin_operator(2, b),
            (Some(a), Some(b)) => spin_operator(1, a) * spin_operator(2, b) * C64::new(2.0, 0.0),
        }
    }

    /// Tr(B†B): 4 for E, 1 for every other element.
    pub fn norm_sqr(self) -> f64 {
        if self == Self::IDENTITY {
            4.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for ProductOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.first, self.second) {
            (None, None) => write!(f, "E"),
            (Some(a), None) => write!(f, "I{}1", letter(a)),
            (None, Some(b)) => write!(f, "I{}2", letter(b)),
            (Some(a), Some(b)) => write!(f, "2I{}1I{}2", letter(a), letter(b)),
        }
    }
}

impl FromStr for ProductOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::basis()
            .into_iter()
            .find(|b| b.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown product operator '{s}'")))
    }
}

impl Serialize for ProductOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Real coefficients of a Hermitian 4×4 matrix in the product-operator
/// basis, indexed in [`ProductOperator::basis`] order.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ProductOperatorExpansion {
    pub coefficients: [f64; 16],
}

impl ProductOperatorExpansion {
    /// c_B = Tr(B†ρ) / Tr(B†B). Keeps the real part; for Hermitian input the
    /// imaginary parts vanish.
    pub fn from_matrix(m: &Matrix) -> Self {
        let mut coefficients = [0.0; 16];
        for b in ProductOperator::basis() {
            let tr: C64 = b.matrix().zip_map(m, |x, y| x.conj() * y).sum();
            coefficients[b.index()] = tr.re / b.norm_sqr();
        }
        Self { coefficients }
    }

    pub fn get(&self, b: ProductOperator) -> f64 {
        self.coefficients[b.index()]
    }

    /// Looks a coefficient up by label, e.g. `"2Iz1Ix2"`. Panics on an
    /// unknown label.
    pub fn coefficient(&self, label: &str) -> f64 {
        self.get(label.parse().expect("known product-operator label"))
    }

    pub fn to_matrix(&self) -> Matrix {
        ProductOperator::basis()
            .into_iter()
            .fold(Matrix::zeros(4, 4), |acc, b| acc + b.matrix() * C64::new(self.get(b), 0.0))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coefficients: self.coefficients.map(|c| c * factor) }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coefficients.iter().zip(other.coefficients.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Nonzero terms (|c| > 1e-12) in basis order.
    pub fn terms(&self) -> Vec<(ProductOperator, f64)> {
        ProductOperator::basis().into_iter().map(|b| (b, self.get(b))).filter(|(_, c)| c.abs() > 1e-12).collect()
    }

    /// Builds an expansion from (label, coefficient) pairs.
    pub fn from_terms(terms: &[(&str, f64)]) -> Result<Self> {
        let mut coefficients = [0.0; 16];
        for (label, c) in terms {
            let b: ProductOperator = label.parse()?;
            coefficients[b.index()] += c;
        }
        Ok(Self { coefficients })
    }
}

fn format_coefficient(c: f64) -> String {
    let s = format!("{c:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Renders as e.g. `Iz1 + 2 Iz2 - 1.4142135624 2Iz1Ix2`; `0` when empty.
impl fmt::Display for ProductOperatorExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (b, c)) in terms.into_iter().enumerate() {
            let sign = if c < 0.0 { "-" } else { "+" };
            match (k, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let mag = format_coefficient(c.abs());
            if mag == "1" {
                write!(f, "{b}")?;
            } else {
                write!(f, "{mag} {b}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for ProductOperatorExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let terms = self.terms();
        let mut map = s.serialize_map(Some(terms.len()))?;
        for (b, c) in terms {
            map.serialize_entry(&b.to_string(), &c)?;
        }
        map.end()
    }
}

pub fn product_operator_expand(rho: &DensityMatrix) -> Result<ProductOperatorExpansion> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4 density matrix".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    Ok(ProductOperatorExpansion::from_matrix(rho.matrix()))
}
