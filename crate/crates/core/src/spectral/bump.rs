//! The smooth cutoff `η₀` and the Littlewood–Paley multipliers built on it.

const PLATEAU_END: f64 = 5.0 / 4.0;
const SUPPORT_END: f64 = 8.0 / 5.0;

fn flat_exp(r: f64) -> f64 {
    if r > 0.0 {
        (-1.0 / r).exp()
    } else {
        0.0
    }
}

/// Even C^∞ bump: 1 on `[-5/4, 5/4]`, 0 outside `[-8/5, 8/5]`, with the
/// transition `g(1-r) / (g(r) + g(1-r))`, `g(r) = e^{-1/r}`.
pub fn bump_eta0(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= PLATEAU_END {
        return 1.0;
    }
    if a >= SUPPORT_END {
        return 0.0;
    }
    let r = (a - PLATEAU_END) / (SUPPORT_END - PLATEAU_END);
    let left = flat_exp(1.0 - r);
    left / (flat_exp(r) + left)
}

/// Multiplier of the dyadic block `P_{2^k}`: `η₀(2ξ)` for `k = 0`,
/// `η₀(ξ/2^{k-1}) - η₀(ξ/2^{k-2})` otherwise.
pub fn dyadic_multiplier(k: u32, xi: f64) -> f64 {
    if k == 0 {
        bump_eta0(2.0 * xi)
    } else {
        let outer = bump_eta0(xi / 2f64.powi(k as i32 - 1));
        let inner = bump_eta0(xi / 2f64.powi(k as i32 - 2));
        outer - inner
    }
}

/// Multiplier of `P_{≤2^k}`: `η₀(ξ/2^{k-1})`.
pub fn low_multiplier(k: u32, xi: f64) -> f64 {
    bump_eta0(xi / 2f64.powi(k as i32 - 1))
}

/// Dyadic indices whose multipliers touch `|ξ| ≤ max_abs_freq`.
pub fn dyadic_range(max_abs_freq: i64) -> std::ops::RangeInclusive<u32> {
    // χ_k vanishes for |ξ| < 5·2^{k-2}/4; stop once that exceeds the band.
    let mut k = 0u32;
    while k < 62 && 1.25 * 2f64.powi(k as i32 - 1) < max_abs_freq as f64 {
        k += 1;
    }
    0..=k
}
