//! Approximants Ξ_n(t, β) = Σ_{k≤n} b_k(β) P_k^+(t/β).

use crate::coeffs::CoefficientTable;
use crate::error::{Error, Result};
use crate::pochhammer;
use crate::scalar::Real;
use crate::sum::Neumaier;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest degree handled by the explicit-coefficient path.
pub const EXTRACT_MAX_N: usize = 60;
/// Realness tolerance on Im u, relative to 1 + |Re u|.
pub const REAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproximantEval<F = f64> {
    pub n: usize,
    pub t: F,
    pub beta: F,
    pub value: F,
    pub d_t: F,
    pub d_tt: F,
    /// ∂Ξ_n/∂β, present when the table carries derivatives.
    pub d_beta: Option<F>,
    /// ∂²Ξ_n/∂t∂β, present when the table carries derivatives.
    pub d_t_beta: Option<F>,
    /// Σ|b_k P_k^+|, the natural magnitude of `value`.
    pub scale_f: F,
    /// Σ|b_k dP_k^+/du| / β, the natural magnitude of `d_t`.
    pub scale_df: F,
}

/// One recursion sweep over k = 0…n with compensated accumulation.
pub fn eval_approximant<F: Real>(table: &CoefficientTable<F>, n: usize, t: F) -> Result<ApproximantEval<F>> {
    if n > table.n {
        return Err(Error::Usage(format!("degree {n} exceeds table degree {}", table.n)));
    }
    let beta = table.beta;
    let u = t / beta;
    let mut s_p = Neumaier::new();
    let mut s_dp = Neumaier::new();
    let mut s_ddp = Neumaier::new();
    let mut s_dbp = Neumaier::new();
    let mut s_dbdp = Neumaier::new();
    let mut abs_p = Neumaier::new();
    let mut abs_dp = Neumaier::new();
    let db = table.db_dbeta.as_deref();
    let mut sw = pochhammer::sweep(u);
    for k in 0..=n {
        let e = sw.current();
        let b = table.b[k];
        let (bp, bdp) = (b * e.p_plus, b * e.dp_plus);
        s_p.add(bp);
        s_dp.add(bdp);
        s_ddp.add(b * e.ddp_plus);
        abs_p.add(bp.abs());
        abs_dp.add(bdp.abs());
        if let Some(db) = db {
            s_dbp.add(db[k] * e.p_plus);
            s_dbdp.add(db[k] * e.dp_plus);
        }
        sw.step();
    }
    let (sp, sdp, sddp) = (s_p.value(), s_dp.value(), s_ddp.value());
    let b2 = beta * beta;
    let d_beta = db.map(|_| s_dbp.value() - t / b2 * sdp);
    let d_t_beta = db.map(|_| s_dbdp.value() / beta - sdp / b2 - t / (b2 * beta) * sddp);
    Ok(ApproximantEval {
        n,
        t,
        beta,
        value: sp,
        d_t: sdp / beta,
        d_tt: sddp / b2,
        d_beta,
        d_t_beta,
        scale_f: abs_p.value(),
        scale_df: abs_dp.value() / beta,
    })
}

/// Ξ_n as an explicit polynomial in u = t².
#[derive(Clone, Debug, PartialEq)]
pub struct PolyInUSquared<F = f64> {
    pub n: usize,
    pub beta: F,
    /// Ascending powers of u.
    pub coeffs: Vec<F>,
}

impl<F: Real> PolyInUSquared<F> {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, u: F) -> F {
        self.coeffs.iter().rev().fold(F::zero(), |acc, c| acc * u + *c)
    }
}

/// Coefficients of Ξ_n in u = t².
///
/// Expansion of P_k(iv): P_k^+(v) = Σ_l (−1)^l e_{2l}(k) v^{2l}, where e_m(k) is
/// the m-th elementary symmetric function of 1, 1/2, …, 1/k. All e_m are
/// positive, so no cancellation occurs before the final sign.
pub fn extract_poly<F: Real>(table: &CoefficientTable<F>, n: usize) -> Result<PolyInUSquared<F>> {
    if n > EXTRACT_MAX_N {
        return Err(Error::Usage(format!(
            "extract_poly supports n <= {EXTRACT_MAX_N}, got {n}; use the scan-based methods above that"
        )));
    }
    if n > table.n {
        return Err(Error::Usage(format!("degree {n} exceeds table degree {}", table.n)));
    }
    let deg = n / 2;
    let mut e = vec![F::zero(); n + 1];
    e[0] = F::one();
    let mut acc: Vec<Neumaier<F>> = vec![Neumaier::new(); deg + 1];
    for k in 0..=n {
        if k > 0 {
            let inv = F::idx(k).recip();
            for m in (1..=k).rev() {
                e[m] = e[m] + e[m - 1] * inv;
            }
        }
        for (l, a) in acc.iter_mut().enumerate().take(k / 2 + 1) {
            a.add(table.b[k] * e[2 * l]);
        }
    }
    let inv_b2 = (table.beta * table.beta).recip();
    let mut scale = F::one();
    let coeffs = acc
        .iter()
        .enumerate()
        .map(|(l, a)| {
            let c = if l % 2 == 0 { a.value() } else { -a.value() } * scale;
            scale = scale * inv_b2;
            c
        })
        .collect();
    Ok(PolyInUSquared {
        n,
        beta: table.beta,
        coeffs,
    })
}

fn balance(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    const RADIX: f64 = 2.0;
    loop {
        let mut done = true;
        for i in 0..d {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..d {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..d {
                    m[(i, j)] *= inv;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// All complex u-roots, from the balanced companion matrix.
pub fn all_roots(poly: &PolyInUSquared<f64>) -> Result<Vec<Complex64>> {
    let d = poly.degree();
    if d == 0 {
        return Err(Error::Usage("all_roots needs degree >= 1".into()));
    }
    let lead = poly.coeffs[d];
    if !(lead.abs() >= 1e-300) {
        return Err(Error::DegenerateDegree(lead));
    }
    if d == 1 {
        return Ok(vec![Complex64::new(-poly.coeffs[0] / lead, 0.0)]);
    }
    let mut m = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        m[(0, j)] = -poly.coeffs[d - 1 - j] / lead;
    }
    for i in 1..d {
        m[(i, i - 1)] = 1.0;
    }
    balance(&mut m);
    Ok(m.complex_eigenvalues().iter().copied().collect())
}

/// Whether a u-root counts as real and nonnegative.
pub fn is_real_nonneg(u: Complex64) -> bool {
    u.im.abs() <= REAL_TOL * (1.0 + u.re.abs()) && u.re >= -REAL_TOL
}

/// t-roots ±√u of each u-root.
pub fn t_roots(u_roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(2 * u_roots.len());
    for u in u_roots {
        let r = if is_real_nonneg(*u) {
            Complex64::new(u.re.max(0.0).sqrt(), 0.0)
        } else {
            u.sqrt()
        };
        out.push(r);
        out.push(-r);
    }
    out
}

/// True iff every u-root of Ξ_n is real and nonnegative.
pub fn real_roots_only(table: &CoefficientTable<f64>, n: usize) -> Result<bool> {
    let poly = extract_poly(table, n)?;
    if poly.degree() == 0 {
        return Ok(true);
    }
    Ok(all_roots(&poly)?.into_iter().all(is_real_nonneg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afamily::AFunctionSpec;
    use crate::coeffs::coeff_table;

    fn cc(n: usize, beta: f64) -> CoefficientTable<f64> {
        coeff_table(&AFunctionSpec::compact_const(1.0), n, beta, true).unwrap()
    }

    #[test]
    fn degree_zero_is_b0() {
        let t = cc(5, 1.3);
        let e = eval_approximant(&t, 0, 2.7).unwrap();
        assert_eq!(e.value, t.b[0]);
        assert_eq!(e.d_t, 0.0);
    }

    #[test]
    fn rejects_degree_above_table() {
        assert!(eval_approximant(&cc(3, 1.0), 4, 1.0).is_err());
        assert!(extract_poly(&cc(61, 1.0), 61).is_err());
    }

    #[test]
    fn low_degree_polynomials() {
        let t = cc(3, 0.7);
        let p2 = extract_poly(&t, 2).unwrap();
        let b = &t.b;
        assert!((p2.coeffs[0] - (b[0] + b[1] + b[2])).abs() < 1e-15);
        assert!((p2.coeffs[1] + b[2] / (2.0 * 0.49)).abs() < 1e-13);
        let p3 = extract_poly(&t, 3).unwrap();
        assert_eq!(p3.degree(), 1);
        assert!((p3.coeffs[1] + (b[2] / 2.0 + b[3]) / 0.49).abs() < 1e-13);
    }

    #[test]
    fn linear_root() {
        let p = PolyInUSquared {
            n: 2,
            beta: 1.0,
            coeffs: vec![3.0, -1.5],
        };
        let r = all_roots(&p).unwrap();
        assert_eq!(r, vec![Complex64::new(2.0, 0.0)]);
    }

    #[test]
    fn degenerate_leading_coefficient() {
        let p = PolyInUSquared {
            n: 2,
            beta: 1.0,
            coeffs: vec![3.0, 0.0],
        };
        assert!(matches!(all_roots(&p), Err(Error::DegenerateDegree(_))));
    }

    #[test]
    fn known_roots_through_balancing() {
        // (u − 1)(u − 100)(u − 1e4)(u² + 1)
        let roots = [1.0, 100.0, 1e4];
        let mut c = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i] -= r * ci;
                next[i + 1] += ci;
            }
            c = next;
        }
        let mut next = vec![0.0; c.len() + 2];
        for (i, ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 2] += ci;
        }
        let p = PolyInUSquared {
            n: 10,
            beta: 1.0,
            coeffs: next,
        };
        let mut got = all_roots(&p).unwrap();
        got.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_eq!(got.iter().filter(|z| is_real_nonneg(**z)).count(), 3);
        for r in roots {
            assert!(got.iter().any(|z| (z - r).norm() <= 1e-9 * r));
        }
        assert!(got.iter().any(|z| (z - Complex64::new(0.0, 1.0)).norm() < 1e-9));
    }

    #[test]
    fn root_dichotomy_at_degree_four() {
        assert!(real_roots_only(&cc(4, 0.08), 4).unwrap());
        assert!(!real_roots_only(&cc(4, 0.07), 4).unwrap());
        assert!(real_roots_only(&cc(1, 0.5), 1).unwrap());
    }
}
