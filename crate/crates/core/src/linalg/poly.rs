//! Univariate complex polynomials recovered from samples on a circle.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::float::{c, eigenvalues};
use super::Matrix;
use crate::Error;

/// The `m`-th roots of unity.
pub fn unit_circle_nodes(m: usize) -> Vec<C64> {
    (0..m).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect()
}

/// Coefficients (constant term first) of the degree `< m` polynomial with
/// `p(radius * w_j) = values[j]` at the `m` roots of unity `w_j`.
pub fn interpolate_on_circle(values: &[C64], radius: f64) -> Vec<C64> {
    let m = values.len();
    let nodes = unit_circle_nodes(m);
    (0..m)
        .map(|d| {
            let mut acc = c(0.0);
            for (j, v) in values.iter().enumerate() {
                acc += v * nodes[(j * d) % m].conj();
            }
            acc / (m as f64) / num_traits::Float::powi(radius, d as i32)
        })
        .collect()
}

pub fn eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(c(0.0), |acc, a| acc * x + a)
}

/// Degree after dropping leading coefficients below `tol` times the
/// largest; `None` for the zero polynomial.
pub fn effective_degree(coeffs: &[C64], tol: f64) -> Option<usize> {
    let top = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return None;
    }
    (0..coeffs.len()).rev().find(|&d| coeffs[d].norm() > tol * top)
}

/// All finite roots with multiplicity, from companion-matrix eigenvalues.
pub fn roots(coeffs: &[C64], tol: f64) -> Result<Vec<C64>, Error> {
    let Some(deg) = effective_degree(coeffs, tol) else {
        return Err(Error::Precondition("zero polynomial has no isolated roots".into()));
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let comp = Matrix::from_fn(deg, deg, |r, col| {
        if col == deg - 1 {
            -coeffs[r] / lead
        } else if r == col + 1 {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    eigenvalues(&comp)
}

/// Replaces each cluster of roots closer than `radius` (relative to
/// `max(1, |z|)`) by the cluster mean, keeping multiplicities.
pub fn merge_clusters(roots: Vec<C64>, radius: f64) -> Vec<C64> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= radius * scale {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == a {
                        *l = b;
                    }
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            let members: Vec<C64> = (0..n).filter(|&j| label[j] == label[i]).map(|j| roots[j]).collect();
            members.iter().sum::<C64>() / members.len() as f64
        })
        .collect()
}
