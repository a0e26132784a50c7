//! Empirical information measures over discrete columns, in bits.
//!
//! Conditional mutual information of X and Y given a conditioning set C is
//! computed from joint frequency counts:
//!
//! I(X; Y | C) = sum over (x, y, c) of P(x, y, c) * log2[ P(x, y | c) /
//!               (P(x | c) * P(y | c)) ]
//!
//! which reduces to terms (n_xyc / n) * log2(n_xyc * n_c / (n_xc * n_yc)).
//! Zero-count cells contribute 0 (the x log x limit convention). All counts
//! are accumulated in fixed mixed-radix order, so results are deterministic.

use crate::discretize::DiscreteColumn;
use crate::error::{Error, Result};

fn check_rows(cols: &[&DiscreteColumn]) -> Result<usize> {
    let n = cols[0].values.len();
    for c in cols {
        if c.values.len() != n {
            return Err(Error::data(format!(
                "column `{}` has {} rows, expected {n}",
                c.name,
                c.values.len()
            )));
        }
        if let Some(bad) = c.values.iter().find(|&&v| v >= c.arity) {
            return Err(Error::data(format!(
                "column `{}` holds bin id {bad} outside its arity {}",
                c.name, c.arity
            )));
        }
    }
    Ok(n)
}

/// Empirical Shannon entropy of one column, in bits.
pub fn entropy(x: &DiscreteColumn) -> Result<f64> {
    let n = check_rows(&[x])?;
    if n == 0 {
        return Err(Error::data("entropy of an empty column is undefined"));
    }
    let mut counts = vec![0usize; x.arity];
    for &v in &x.values {
        counts[v] += 1;
    }
    let n = n as f64;
    let mut h = 0.0f64;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    Ok(h.max(0.0))
}

/// Mutual information I(X; Y) in bits.
pub fn mi(x: &DiscreteColumn, y: &DiscreteColumn) -> Result<f64> {
    cmi(x, y, &[])
}

/// Conditional mutual information I(X; Y | C) in bits; `cond` may be empty.
///
/// Values within 1e-12 below zero (floating-point noise on independent data)
/// are clamped to exactly 0.
pub fn cmi(x: &DiscreteColumn, y: &DiscreteColumn, cond: &[&DiscreteColumn]) -> Result<f64> {
    let mut all: Vec<&DiscreteColumn> = Vec::with_capacity(cond.len() + 2);
    all.push(x);
    all.push(y);
    all.extend_from_slice(cond);
    let n = check_rows(&all)?;
    if n == 0 {
        return Err(Error::data("cmi of empty columns is undefined"));
    }

    // Conditioning configurations are flattened mixed-radix, outermost first.
    let cond_states: usize = cond.iter().map(|c| c.arity).product();
    let (ax, ay) = (x.arity, y.arity);

    let mut joint = vec![0u32; cond_states * ax * ay];
    let mut x_c = vec![0u32; cond_states * ax];
    let mut y_c = vec![0u32; cond_states * ay];
    let mut c_only = vec![0u32; cond_states];
    for row in 0..n {
        let mut cfg = 0usize;
        for c in cond {
            cfg = cfg * c.arity + c.values[row];
        }
        let (vx, vy) = (x.values[row], y.values[row]);
        joint[(cfg * ax + vx) * ay + vy] += 1;
        x_c[cfg * ax + vx] += 1;
        y_c[cfg * ay + vy] += 1;
        c_only[cfg] += 1;
    }

    let total = n as f64;
    let mut result = 0.0f64;
    for cfg in 0..cond_states {
        let nc = c_only[cfg];
        if nc == 0 {
            continue;
        }
        for vx in 0..ax {
            let nxc = x_c[cfg * ax + vx];
            if nxc == 0 {
                continue;
            }
            for vy in 0..ay {
                let nxyc = joint[(cfg * ax + vx) * ay + vy];
                if nxyc == 0 {
                    continue;
                }
                let nyc = y_c[cfg * ay + vy];
                let p = nxyc as f64 / total;
                let ratio = (nxyc as f64 * nc as f64) / (nxc as f64 * nyc as f64);
                result += p * ratio.log2();
            }
        }
    }
    if (-1e-12..0.0).contains(&result) {
        result = 0.0;
    }
    Ok(result)
}
