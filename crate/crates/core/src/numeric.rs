//! Small numeric helpers shared by the entropy and enumeration code.

/// Compensated (Neumaier) summation.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// `ln Σ exp(x_i)`, ignoring `-inf` entries. Returns `-inf` for an empty or
/// all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + sum(xs.iter().map(|&x| (x - max).exp())).ln()
}

/// Table of `ln k!` for `k ≤ n`.
#[derive(Clone, Debug)]
pub struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(n: usize) -> Self {
        let mut t = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..=n {
            acc += (k as f64).ln();
            t.push(acc);
        }
        LnFactorial(t)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// `ln (n choose c_1, …, c_J)` with `n = Σ c_j`.
    pub fn ln_multinomial(&self, counts: &[u16]) -> f64 {
        let n: usize = counts.iter().map(|&c| c as usize).sum();
        self.get(n) - counts.iter().map(|&c| self.get(c as usize)).sum::<f64>()
    }
}

/// Number of compositions of `n` into `parts` nonnegative parts, as f64.
pub fn compositions(n: usize, parts: usize) -> f64 {
    if parts == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    // C(n + parts - 1, parts - 1)
    let k = (parts - 1).min(n);
    let top = n + parts - 1;
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (top - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Visit every composition of `n` into `parts` parts in lexicographic order.
pub fn for_each_composition<F: FnMut(&[u16])>(n: usize, parts: usize, mut visit: F) {
    if parts == 0 {
        if n == 0 {
            visit(&[]);
        }
        return;
    }
    let mut c = vec![0u16; parts];
    fn rec<F: FnMut(&[u16])>(c: &mut [u16], idx: usize, remaining: usize, visit: &mut F) {
        if idx + 1 == c.len() {
            c[idx] = remaining as u16;
            visit(c);
            return;
        }
        for v in 0..=remaining {
            c[idx] = v as u16;
            rec(c, idx + 1, remaining - v, visit);
        }
    }
    rec(&mut c, 0, n, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16];
        assert_eq!(sum(xs), 1.0);
    }

    #[test]
    fn log_sum_exp_edge_cases() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn composition_count_matches_enumeration() {
        for (n, parts) in [(0, 3), (4, 1), (5, 3), (6, 4), (3, 0)] {
            let mut seen = 0usize;
            for_each_composition(n, parts, |c| {
                assert_eq!(c.iter().map(|&x| x as usize).sum::<usize>(), n);
                seen += 1;
            });
            assert_eq!(seen as f64, compositions(n, parts), "n={n} parts={parts}");
        }
    }

    #[test]
    fn multinomial_matches_small_cases() {
        let t = LnFactorial::new(10);
        assert!((t.ln_multinomial(&[2, 1, 1]).exp() - 12.0).abs() < 1e-9);
        assert!((t.ln_multinomial(&[5, 5]).exp() - 252.0).abs() < 1e-9);
    }
}
