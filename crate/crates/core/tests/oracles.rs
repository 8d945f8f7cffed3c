//! Independent routes to quantities the library computes in closed form.

use tpqrm::aa::{aa_gaps, aa_matrix_element};
use tpqrm::ed::{ed_spectrum, EdOptions};
use tpqrm::quench::{kz_predict, propagate, QuenchProtocol};
use tpqrm::specfun::{legendre_pk, squeeze_element, LegendreTable, SqueezeSign};
use tpqrm::{ModelParams, Parity, SectorSpec};

type Mat = Vec<Vec<f64>>;

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// Scaling and squaring with a Taylor core.
fn expm(a: &Mat) -> Mat {
    let n = a.len();
    let norm = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let s = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let scale = 0.5f64.powi(s);
    let a: Mat = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut out: Mat = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = out.clone();
    for k in 1..=24 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        out = matmul(&out, &out);
    }
    out
}

/// `(ξ/2)(a†² - a²)` on `|2n⟩`, `n < size`.
fn squeeze_generator(xi: f64, size: usize) -> Mat {
    let mut g = vec![vec![0.0; size]; size];
    for n in 0..size - 1 {
        let c = xi / 2.0 * (((2 * n + 1) * (2 * n + 2)) as f64).sqrt();
        g[n + 1][n] = c;
        g[n][n + 1] = -c;
    }
    g
}

#[test]
fn squeeze_elements_match_exponentiated_generator() {
    for theta in [0.05, 0.3, 0.7, 1.0] {
        // S(2θ) has ξ = 2θ; at θ = 1 the n = 20 column still feels a 200-manifold edge at 1e-9
        let plus = expm(&squeeze_generator(2.0 * theta, 320));
        let minus = expm(&squeeze_generator(-2.0 * theta, 320));
        for m in 0..=20 {
            for n in 0..=20 {
                let p = squeeze_element(m, n, theta, SqueezeSign::Plus).unwrap();
                let q = squeeze_element(m, n, theta, SqueezeSign::Minus).unwrap();
                assert!((p - plus[m][n]).abs() < 1e-9, "θ={theta} ({m},{n}): {p} vs {}", plus[m][n]);
                assert!((q - minus[m][n]).abs() < 1e-9, "θ={theta} ({m},{n}) minus");
            }
        }
        let beta = 1.0 / (2.0 * theta).cosh();
        assert!((plus[0][0] - beta.sqrt()).abs() < 1e-12);
    }
}

/// `P_l(x)` coefficients, lowest power first.
fn legendre_poly(l: usize) -> Vec<f64> {
    let mut c = vec![0.0; l + 1];
    let binom = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    for j in 0..=l / 2 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        c[l - 2 * j] = sign * binom(l, j) * binom(2 * l - 2 * j, l) / 2f64.powi(l as i32);
    }
    c
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `P_l^k(x) = (1 - x²)^{k/2} d^k P_l/dx^k`, no Condon-Shortley phase, from explicit polynomials.
fn legendre_poly_pk(l: i64, k: i64, x: f64) -> f64 {
    let l = if l < 0 { -l - 1 } else { l };
    if k.abs() > l {
        return 0.0;
    }
    if k < 0 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        return sign * factorial(l + k) / factorial(l - k) * legendre_poly_pk(l, -k, x);
    }
    let mut c = legendre_poly(l as usize);
    for _ in 0..k {
        c = c.iter().enumerate().skip(1).map(|(p, v)| v * p as f64).collect();
    }
    let d: f64 = c.iter().rev().fold(0.0, |acc, v| acc * x + v);
    (1.0 - x * x).powf(k as f64 / 2.0) * d
}

#[test]
fn legendre_matches_polynomial_construction() {
    for (i, x) in (0..20).map(|i| (i as f64 + 0.37) / 20.3).enumerate() {
        let want = (1.0 - x * x) / 8.0;
        assert!((legendre_pk(2, -2, x).unwrap() - want).abs() < 1e-14, "sample {i}");
        // normalized table through Pbar = sqrt((l-k)!/(l+k)!) P
        let t = LegendreTable::new(4, x).unwrap();
        assert!((t.get(2, -2) / 24.0f64.sqrt() - want).abs() < 1e-14);
    }
    for l in -3..=12i64 {
        for k in -8..=8i64 {
            for x in [0.02, 0.1, 0.45, 0.9] {
                let a = legendre_pk(l, k, x).unwrap();
                let b = legendre_poly_pk(l, k, x);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "P_{l}^{k}({x}): {a} vs {b}");
            }
        }
    }
}

/// The unnormalized Legendre form of the manifold couplings, evaluated with polynomial `P_l^k`.
fn m_unnormalized(m: i64, n: i64, p: &ModelParams) -> f64 {
    let beta = p.beta();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let ratio = (factorial(2 * n) / factorial(2 * m)).sqrt();
    let gp = p.g * (1.0 - p.r) / 2.0;
    let inner = p.delta / 2.0 * legendre_poly_pk(m + n, m - n, beta)
        - gp * (legendre_poly_pk(m + n - 1, m - n + 1, beta)
            - ((2 * n + 1) * (2 * n + 2)) as f64 * legendre_poly_pk(m + n + 1, m - n - 1, beta));
    sign * beta.sqrt() * ratio * inner
}

#[test]
fn manifold_couplings_match_unnormalized_form() {
    for (u, r, delta) in [(0.5, 0.25, 0.6), (0.9, 0.6, 0.25), (0.99, 0.25, 1.0), (0.3, 0.0, 0.4)] {
        let p = ModelParams::with_ratio(delta, u, r).unwrap();
        for m in 0..6 {
            for n in 0..6 {
                let got = aa_matrix_element(m, n, &p).unwrap().value;
                let want = m_unnormalized(m as i64, n as i64, &p);
                assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "u={u} r={r} ({m},{n}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn same_parity_gap_at_beta_tenth() {
    // r = 0.6, Δ = Δ_c = 0.25, β = 0.1: ε_sp ≈ 2β
    let r = 0.6;
    let u = (1.0f64 - 0.01).sqrt();
    let p = ModelParams::with_ratio(0.25, u, r).unwrap();
    let s = ed_spectrum(&p, SectorSpec::even(Parity::Minus), &EdOptions::default().levels(2)).unwrap();
    assert!(s.all_converged());
    let ed = s.levels[1].energy - s.levels[0].energy;
    let aa = aa_gaps(0, &p).unwrap().eps_sp;
    let beta = 0.1f64;
    assert!((aa / (2.0 * beta) - 1.0).abs() < 0.1, "AA gap {aa}");
    let dev = (ed - aa).abs() / aa;
    assert!(dev < 2.0 * beta.powf(1.5), "ED {ed} vs AA {aa}: relative {dev}");
}

#[test]
fn freeze_out_coupling_arithmetic() {
    let p = ModelParams::with_ratio(0.6, 0.99, 0.25).unwrap();
    let k = kz_predict(100.0, &p).unwrap();
    let independent = 1.0 - (400.0 * 2f64.sqrt()).powf(-2.0 / 3.0);
    assert!((k.g_k_over_gc - independent).abs() < 1e-14);
    assert!((k.g_k_over_gc - 0.985380).abs() < 5e-7, "{}", k.g_k_over_gc);
    assert!((k.g_k - independent * 0.8).abs() < 1e-14);
}

#[test]
fn residual_energy_grows_toward_critical_coupling() {
    let mut last = 0.0;
    for u in [0.9, 0.99, 0.999] {
        let p = ModelParams::with_ratio(0.6, u, 0.25).unwrap();
        let res = propagate(&QuenchProtocol::new(p, 10.0).unwrap()).unwrap();
        assert!(res.residual_energy > last, "g_f/g_c = {u}: {} after {last}", res.residual_energy);
        last = res.residual_energy;
    }
}
