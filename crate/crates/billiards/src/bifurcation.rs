//! Bifurcation thresholds: root isolation for the two polynomial families
//! whose roots `lambda_n` (family Q) and `gamma_n` (family T) mark the
//! creation of new attracting periodic orbits, and the census step functions
//! m1, m2 (triangle) and m (square) built from them.
//!
//! Family Q: `p_n(x) = x^{2n} - x^n - x^{n-1} + 1 = (x - 1) q_n(x)` with
//! `q_n(x) = x^{2n-1} + .. + x^n - x^{n-2} - .. - 1`, n >= 1.
//! Family T: `p_n(x) = x^{4n+4} - x^{3n+3} + x^{2n+2} - x^{2n+1} - x^{n+1} + 1`
//! with `q_n(x) = x^{4n+3} + .. + x^{3n+3} + x^{2n+1} - x^n - .. - 1`, n >= 0.
//!
//! Each `q_n` has a unique root in [0, 1) with `q_n(0) = -1 < 0 < 1 = q_n(1)`
//! (for Q, n >= 2; `q_1(x) = x` gives `lambda_1 = 0`), so plain bisection on
//! [0, 1] is unconditionally correct.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use thiserror::Error;

/// Bisection resolves roots well below this; census comparisons treat a rate
/// within it of a threshold as sitting on the bifurcation set.
pub const ROOT_TOL: f64 = 1e-12;

const BISECTION_ITERS: u32 = 60;

#[derive(Debug, Error, PartialEq)]
pub enum BifurcationError {
    #[error("rate {lambda} is within {ROOT_TOL} of the bifurcation value {root} (family {family:?}, n = {n})")]
    AtBifurcation { lambda: f64, root: f64, family: Family, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Family {
    Q,
    T,
}

/// Geometric block `x^lo + x^{lo+1} + .. + x^hi` by Horner accumulation.
/// Empty when `hi < lo`. All terms positive: no cancellation.
fn geom_block(x: f64, lo: usize, hi: isize) -> f64 {
    if hi < lo as isize {
        return 0.0;
    }
    let mut acc = 0.0;
    for _ in lo..=(hi as usize) {
        acc = acc * x + 1.0;
    }
    acc * x.powi(lo as i32)
}

/// The factored polynomial `q_n` of the given family.
pub fn q_poly(family: Family, n: usize, x: f64) -> f64 {
    match family {
        Q => {
            assert!(n >= 1);
            geom_block(x, n, 2 * n as isize - 1) - geom_block(x, 0, n as isize - 2)
        }
        T => geom_block(x, 3 * n + 3, 4 * n as isize + 3) + x.powi(2 * n as i32 + 1)
            - geom_block(x, 0, n as isize),
    }
}

/// The unfactored polynomial `p_n = (x - 1) q_n`; used only for crosschecks.
pub fn p_poly(family: Family, n: usize, x: f64) -> f64 {
    match family {
        Q => {
            let n = n as i32;
            x.powi(2 * n) - x.powi(n) - x.powi(n - 1) + 1.0
        }
        T => {
            let n = n as i32;
            x.powi(4 * n + 4) - x.powi(3 * n + 3) + x.powi(2 * n + 2) - x.powi(2 * n + 1)
                - x.powi(n + 1)
                + 1.0
        }
    }
}

use Family::{Q, T};

fn bisect(family: Family, n: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    debug_assert!(q_poly(family, n, lo) < 0.0 && q_poly(family, n, hi) > 0.0);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if q_poly(family, n, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// `(root, bracket_low, bracket_high)` for the family root; the exact zero of
/// `q_1` in family Q gets a degenerate bracket.
pub fn threshold_bracket(family: Family, n: usize) -> (f64, f64, f64) {
    if family == Q {
        assert!(n >= 1, "family Q starts at n = 1");
        if n == 1 {
            return (0.0, 0.0, 0.0);
        }
    }
    let (lo, hi) = bisect(family, n);
    (0.5 * (lo + hi), lo, hi)
}

fn cache() -> &'static Mutex<HashMap<(Family, usize), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(Family, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn threshold(family: Family, n: usize) -> f64 {
    if let Some(&v) = cache().lock().unwrap().get(&(family, n)) {
        return v;
    }
    let (lo, hi) = bisect(family, n);
    let v = 0.5 * (lo + hi);
    cache().lock().unwrap().insert((family, n), v);
    v
}

/// `lambda_n`: the unique root of family-Q `q_n` in [0, 1). `n >= 1`.
pub fn threshold_q(n: usize) -> f64 {
    assert!(n >= 1, "family Q starts at n = 1");
    if n == 1 {
        return 0.0; // q_1(x) = x
    }
    threshold(Q, n)
}

/// `gamma_n`: the unique root of family-T `q_n` in [0, 1). `n >= 0`.
pub fn threshold_t(n: usize) -> f64 {
    threshold(T, n)
}

fn guard(lambda: f64, family: Family, n: usize, root: f64) -> Result<(), BifurcationError> {
    if (lambda - root).abs() < ROOT_TOL {
        return Err(BifurcationError::AtBifurcation { lambda, root, family, n });
    }
    Ok(())
}

/// Triangle census `(m1, m2)`: `m1 = max{n >= 1 : lambda_{2n-1} < lambda}`
/// counts the z_n orbits (periods 3(2n-1)), `m2 = max{n : gamma_{2n-1} < lambda}`
/// (0 if none) counts the w_n/u_n pairs (periods 12n).
pub fn triangle_census(lambda: f64) -> Result<(usize, usize), BifurcationError> {
    assert!(lambda > 0.0 && lambda < 1.0);
    let mut m1 = 0usize;
    for n in 1.. {
        let root = threshold_q(2 * n - 1);
        guard(lambda, Q, 2 * n - 1, root)?;
        if root < lambda {
            m1 = n;
        } else {
            break;
        }
    }
    let mut m2 = 0usize;
    for n in 1.. {
        let root = threshold_t(2 * n - 1);
        guard(lambda, T, 2 * n - 1, root)?;
        if root < lambda {
            m2 = n;
        } else {
            break;
        }
    }
    Ok((m1, m2))
}

/// Square census `m = max{n >= 1 : lambda_n < lambda}`: the z_n orbits of
/// the return map exist for n = 1..m, with plane periods 4n.
pub fn square_census(lambda: f64) -> Result<usize, BifurcationError> {
    assert!(lambda > 0.0 && lambda < 1.0);
    let mut m = 0usize;
    for n in 1.. {
        let root = threshold_q(n);
        guard(lambda, Q, n, root)?;
        if root < lambda {
            m = n;
        } else {
            break;
        }
    }
    Ok(m)
}
