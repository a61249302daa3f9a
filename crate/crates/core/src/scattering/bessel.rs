//! Riccati–Bessel functions ĵ_l(x) = x·j_l(x) and n̂_l(x) = x·y_l(x).
//!
//! Convention: ĵ_0 = sin x, n̂_0 = −cos x, so that asymptotically
//! ĵ_l ~ sin(x − lπ/2) and n̂_l ~ −cos(x − lπ/2).

/// ĵ_l(x) by Miller's downward recursion, normalized against ĵ_0 or ĵ_1.
pub fn riccati_j(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let l = l as usize;
    let top = l.max(x as usize) + 20 + (10.0 * (l.max(x as usize) as f64).sqrt()) as usize;
    // Downward recursion on s_n = j_n (spherical), rescaled as needed.
    let mut next = 0.0_f64; // s_{n+1}
    let mut cur = 1e-300_f64; // s_n
    let mut at_l = 0.0;
    let mut s1 = 0.0;
    let mut n = top;
    loop {
        if n == l {
            at_l = cur;
        }
        if n == 1 {
            s1 = cur;
        }
        if n == 0 {
            break;
        }
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        n -= 1;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            at_l *= 1e-250;
            s1 *= 1e-250;
        }
    }
    let s0 = cur;
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if j0.abs() >= j1.abs() { j0 / s0 } else { j1 / s1 };
    x * at_l * scale
}

/// n̂_l(x) by upward recursion (stable for the irregular solution).
pub fn riccati_n(l: u32, x: f64) -> f64 {
    let mut prev = -x.cos();
    if l == 0 {
        return prev;
    }
    let mut cur = -x.cos() / x - x.sin();
    for n in 1..l {
        let next = (2 * n + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}
