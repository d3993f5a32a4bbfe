use std::ops::Index;

use crate::error::{Error, Result};

/// One real value per grid node, index-aligned with [`crate::grid::Grid::nodes`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite value at node {i}")));
        }
        Ok(ScalarField { values })
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn zeros(len: usize) -> Self {
        ScalarField {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// `max_i |a_i - b_i|`.
pub fn linf_diff(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linf_diff_examples() {
        let a = ScalarField::new(vec![1.0, 2.0]).unwrap();
        let b = ScalarField::new(vec![0.0, 5.0]).unwrap();
        assert_eq!(linf_diff(&a, &a).unwrap(), 0.0);
        assert_eq!(linf_diff(&a, &b).unwrap(), 3.0);
        let c = ScalarField::new(vec![0.0]).unwrap();
        assert!(matches!(linf_diff(&a, &c), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ScalarField::new(vec![0.0, f64::NAN]).is_err());
        assert!(ScalarField::new(vec![f64::INFINITY]).is_err());
    }
}
