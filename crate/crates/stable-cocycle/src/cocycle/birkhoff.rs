//! Birkhoff sums of the averaged observables φ_k = D^{−1} Σ_{j<D} f_k∘T^j.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::triangular_array::SparseStream;

/// Weight of f(j) in D·S_n(φ): the number of i < n with i ≤ j < i + D.
#[inline]
fn cover(j: u64, n: u64, d: u64) -> u64 {
    let hi = j.min(n - 1);
    let lo = (j + 1).saturating_sub(d);
    if hi >= lo {
        hi - lo + 1
    } else {
        0
    }
}

fn check(stream_len: u64, n: u64, d: u64) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(invalid!("block sums need n >= 1 and D >= 1, got n={n}, D={d}"));
    }
    let need = n as u128 + d as u128 - 1;
    if (stream_len as u128) < need {
        return Err(Error::WindowUnderrun { requested: need, available: stream_len as u128 });
    }
    Ok(())
}

/// S_n(φ) by the three-block closed form.
///
/// For n ≤ D the weights are (j+1)/D on [0, n−1), n/D on [n−1, D) and
/// (n−j)/D at D+j−1; for n ≥ D they are (j+1)/D on [0, D−1), 1 on
/// [D−1, n) and (D−j)/D at n+j−1. Both reduce to `cover(j)/D`.
pub fn birkhoff_block_sum(f: &SparseStream, n: u64, d: u64) -> Result<f64> {
    check(f.len, n, d)?;
    let end = n + d - 1;
    let df = d as f64;
    Ok(f.entries.iter().take_while(|e| e.pos < end).map(|e| e.value.value() * cover(e.pos, n, d) as f64 / df).sum())
}

/// Closed form on a dense window; `f.len() ≥ n + D − 1`.
pub fn birkhoff_block_sum_dense(f: &[f64], n: u64, d: u64) -> Result<f64> {
    check(f.len() as u64, n, d)?;
    let df = d as f64;
    let (nn, dd) = (n as usize, d as usize);
    let mut s = 0.0;
    if n <= d {
        for j in 0..nn - 1 {
            s += (j + 1) as f64 / df * f[j];
        }
        let mid: f64 = f[nn - 1..dd].iter().sum();
        s += n as f64 / df * mid;
        for j in 1..nn {
            s += (n as usize - j) as f64 / df * f[dd + j - 1];
        }
    } else {
        for j in 0..dd - 1 {
            s += (j + 1) as f64 / df * f[j];
        }
        s += f[dd - 1..nn].iter().sum::<f64>();
        for j in 1..dd {
            s += (dd - j) as f64 / df * f[nn + j - 1];
        }
    }
    Ok(s)
}

/// Σ_{i<n} φ(i) straight from the definition.
pub fn birkhoff_brute_force(f: &[f64], n: u64, d: u64) -> Result<f64> {
    check(f.len() as u64, n, d)?;
    let (nn, dd) = (n as usize, d as usize);
    Ok((0..nn).map(|i| f[i..i + dd].iter().sum::<f64>() / d as f64).sum())
}

/// S_n(f − φ) through the transfer function F = Σ_{j ≤ D−2} (D−1−j)/D f∘T^j,
/// using f − φ = F − F∘T, so S_n(f − φ) = F − F∘T^n.
pub fn coboundary_sum_dense(f: &[f64], n: u64, d: u64) -> Result<f64> {
    check(f.len() as u64, n, d)?;
    let (nn, dd) = (n as usize, d as usize);
    let df = d as f64;
    let transfer = |o: usize| -> f64 { (0..dd - 1).map(|j| (dd - 1 - j) as f64 / df * f[o + j]).sum() };
    Ok(transfer(0) - transfer(nn))
}

/// Σ_{i<n} (f(i) − φ(i)) computed directly.
pub fn coboundary_brute_force(f: &[f64], n: u64, d: u64) -> Result<f64> {
    let direct: f64 = f
        .get(..n as usize)
        .ok_or(Error::WindowUnderrun { requested: n as u128, available: f.len() as u128 })?
        .iter()
        .sum();
    Ok(direct - birkhoff_brute_force(f, n, d)?)
}

/// Dense copy of a stream window.
pub fn densify(f: &SparseStream) -> Vec<f64> {
    let mut v = alloc::vec![0.0; f.len as usize];
    for e in &f.entries {
        v[e.pos as usize] = e.value.value();
    }
    v
}
