use proptest::prelude::*;

use tpqrm::aa::{aa_energy, aa_matrix_element, k_factor};
use tpqrm::analysis::{fit_powerlaw, fit_quadratic_gap};
use tpqrm::collapse1d::{bound_states, Collapse1DProblem};
use tpqrm::ed::{
    build_parity_block, dense_projection, parity_component_norm, spin_fock_hamiltonian, SpinFockState,
};
use tpqrm::ed::{ed_spectrum, ed_spectrum_both, squeezed_frame_spectrum, EdOptions, SqueezedOptions};
use tpqrm::quench::{propagate_fixed, QuenchProtocol};
use tpqrm::specfun::{legendre_pk, legendre_smallbeta, squeeze_element, SqueezeMatrix, SqueezeSign};
use tpqrm::{critical_params, geometry, Bargmann, ModelParams, Parity, SectorSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn beta_is_sech_of_twice_theta(u in 0.0f64..0.999_999, r in 0.0f64..=1.0) {
        let p = ModelParams::with_ratio(0.3, u, r).unwrap();
        let geo = geometry(&p).unwrap();
        prop_assert!((geo.beta * (2.0 * geo.theta).cosh() - 1.0).abs() < 1e-12);
        prop_assert!((geo.g_c - 1.0 / (1.0 + r)).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn geometry_is_pure(u in 0.0f64..0.999, r in 0.0f64..=1.0, delta in 0.0f64..3.0) {
        let p = ModelParams::with_ratio(delta, u, r).unwrap();
        let a = geometry(&p).unwrap();
        let b = geometry(&p).unwrap();
        prop_assert_eq!(a.beta.to_bits(), b.beta.to_bits());
        prop_assert_eq!(a.theta.to_bits(), b.theta.to_bits());
        let (g1, d1) = critical_params(r).unwrap();
        let (g2, d2) = critical_params(r).unwrap();
        prop_assert_eq!((g1.to_bits(), d1.to_bits()), (g2.to_bits(), d2.to_bits()));
    }

    #[test]
    fn beta_decreases_in_g(a in 0.0f64..0.999, b in 0.0f64..0.999, r in 0.0f64..=1.0) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let g_c = 1.0 / (1.0 + r);
        let p_lo = ModelParams::new(0.5, lo * g_c, r).unwrap();
        let p_hi = ModelParams::new(0.5, hi * g_c, r).unwrap();
        prop_assert!(p_hi.beta() < p_lo.beta());
    }

    #[test]
    fn legendre_degree_recurrence(l in 1i64..40, kf in 0.0f64..1.0, neg in any::<bool>(), x in 0.01f64..0.99) {
        // (l - k + 1) P_{l+1}^k = (2l + 1) x P_l^k - (l + k) P_{l-1}^k
        let k = (kf * (l - 1) as f64).round() as i64 * if neg { -1 } else { 1 };
        let lf = l as f64;
        let kk = k as f64;
        let up = legendre_pk(l + 1, k, x).unwrap();
        let mid = legendre_pk(l, k, x).unwrap();
        let down = legendre_pk(l - 1, k, x).unwrap();
        let lhs = (lf - kk + 1.0) * up;
        let rhs = (2.0 * lf + 1.0) * x * mid - (lf + kk) * down;
        let scale = lhs.abs().max(((2.0 * lf + 1.0) * x * mid).abs()).max(((lf + kk) * down).abs());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300), "l={} k={} x={}: {} vs {}", l, k, x, lhs, rhs);
    }

    #[test]
    fn transfer_factor_symmetric(m in 0usize..30, n in 0usize..30, beta in 0.0f64..1.0) {
        let (a, b) = (k_factor(m, n, beta).unwrap(), k_factor(n, m, beta).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * a.abs());
    }
}

#[test]
fn legendre_small_beta_error_is_fourth_order() {
    let betas: Vec<f64> = (0..9).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect();
    for l in 0..=12i64 {
        for k in (-l..=l).filter(|k| (l - k) % 2 == 0) {
            let pairs: Vec<(f64, f64)> = betas
                .iter()
                .map(|&b| {
                    let exact = legendre_pk(l, k, b).unwrap();
                    (b, (exact - legendre_smallbeta(l, k, b).unwrap()).abs() / exact.abs().max(1e-300))
                })
                .collect();
            // low degrees are reproduced exactly by the expansion
            let resolved: Vec<(f64, f64)> = pairs.iter().copied().filter(|&(_, e)| e > 1e-13).collect();
            if resolved.len() < 5 {
                assert!(pairs.iter().all(|&(_, e)| e < 1e-9), "P_{l}^{k}: {pairs:?}");
                continue;
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = resolved.into_iter().unzip();
            let fit = fit_powerlaw(&xs, &ys, None).unwrap();
            assert!(fit.exponent >= 3.5, "P_{l}^{k}: slope {}", fit.exponent);
        }
    }
}

#[test]
fn odd_degree_order_gap_is_rejected() {
    assert!(legendre_smallbeta(3, 0, 0.1).is_err());
}

#[test]
fn squeeze_matrices_invert_on_interior() {
    // S(2θ)|2j⟩ spreads to ~cosh(4θ) times the photon number, so the checked block
    // is the one whose columns fit inside the truncation
    for (theta, n_max, block) in [(0.1, 120, 60), (0.5, 240, 20), (1.0, 1500, 10), (1.5, 6000, 4)] {
        let rows: Vec<Vec<f64>> = (0..block)
            .map(|i| (0..n_max).map(|k| squeeze_element(i, k, theta, SqueezeSign::Plus).unwrap()).collect())
            .collect();
        let cols: Vec<Vec<f64>> = (0..block)
            .map(|j| (0..n_max).map(|k| squeeze_element(k, j, theta, SqueezeSign::Minus).unwrap()).collect())
            .collect();
        let mut dev = 0.0f64;
        for (i, row) in rows.iter().enumerate() {
            for (j, col) in cols.iter().enumerate() {
                let s: f64 = row.iter().zip(col).map(|(a, b)| a * b).sum();
                dev = dev.max((s - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        assert!(dev < 1e-8, "θ={theta} n_max={n_max}: {dev:e}");
    }
    // the dense matrix agrees with the elementwise route
    let m = SqueezeMatrix::new(0.7, 40, SqueezeSign::Minus).unwrap();
    for (i, j) in [(0, 0), (3, 17), (25, 2), (39, 39)] {
        assert_eq!(m.get(i, j), squeeze_element(i, j, 0.7, SqueezeSign::Minus).unwrap());
    }
}

#[test]
fn couplings_approach_expansion_quadratically() {
    let r = 0.6;
    let (_, dc) = critical_params(r).unwrap();
    for delta in [dc, dc + 0.1] {
        for beta in [0.2, 0.15, 0.1, 0.05, 0.02, 0.01, 0.005] {
            let u = (1.0f64 - beta * beta).sqrt();
            let p = ModelParams::with_ratio(delta, u, r).unwrap();
            let mut worst = 0.0f64;
            for m in 0..=12 {
                for n in 0..=12 {
                    let e = aa_matrix_element(m, n, &p).unwrap();
                    let t = aa_matrix_element(n, m, &p).unwrap();
                    assert!((e.k_factor - t.k_factor).abs() <= 1e-14 * e.k_factor);
                    let rel = (e.value - e.small_beta_value).abs() / e.value.abs().max(e.small_beta_value.abs());
                    worst = worst.max(rel / (beta * beta));
                }
            }
            // relative error ≤ Cβ²; (12, 12) sets C ≈ 100 at the critical line
            assert!(worst < 150.0, "Δ={delta} β={beta}: error/β² = {worst}");
        }
    }
}

#[test]
fn near_collapse_levels_alternate_in_parity() {
    // the (-1)^n prefactor is cancelled by the sign of P_2n^0(β→0), so the splitting keeps
    // one sign and the sorted ladder alternates -, +, -, +, ...
    for (u, r) in [(0.999, 0.25), (0.9999, 0.6)] {
        let p = ModelParams::critical_delta(u, r).unwrap();
        let mut levels: Vec<(f64, Parity)> = (0..6)
            .flat_map(|n| Parity::BOTH.map(|q| (aa_energy(n, q, &p).unwrap().energy, q)))
            .collect();
        levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (i, (_, q)) in levels.iter().enumerate() {
            assert_eq!(*q, if i % 2 == 0 { Parity::Minus } else { Parity::Plus }, "u={u} r={r} level {i}");
        }
        let signs: Vec<f64> = (0..6).map(|n| aa_energy(n, Parity::Plus, &p).unwrap().split_part.signum()).collect();
        assert!(signs.iter().all(|&s| s == signs[0]));
    }
    let p = ModelParams::critical_delta(0.99, 0.6).unwrap();
    let ed = ed_spectrum_both(&p, Bargmann::Quarter, &EdOptions::default().levels(4)).unwrap();
    let mut lv: Vec<(f64, Parity)> = ed.levels.iter().map(|l| (l.energy, l.parity)).collect();
    lv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (i, (_, q)) in lv.iter().enumerate() {
        assert_eq!(*q, if i % 2 == 0 { Parity::Minus } else { Parity::Plus }, "ED level {i}");
    }
}

#[test]
fn free_spectrum_at_zero_coupling() {
    let p = ModelParams::new(0.7, 0.0, 0.3).unwrap();
    let s = ed_spectrum_both(&p, Bargmann::Quarter, &EdOptions::default().levels(8)).unwrap();
    let mut want: Vec<f64> = (0..8).flat_map(|n| [2.0 * n as f64 - 0.35, 2.0 * n as f64 + 0.35]).collect();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in s.energies().iter().zip(&want) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn isotropic_resonant_parity_degeneracy() {
    for g in [0.2, 0.3, 0.4] {
        let p = ModelParams::new(0.0, g, 1.0).unwrap();
        let opts = EdOptions::default().levels(3);
        let minus = ed_spectrum(&p, SectorSpec::even(Parity::Minus), &opts).unwrap();
        let plus = ed_spectrum(&p, SectorSpec::even(Parity::Plus), &opts).unwrap();
        let eps_dp = (plus.levels[0].energy - minus.levels[0].energy).abs();
        let eps_sp = minus.levels[1].energy - minus.levels[0].energy;
        assert!(eps_dp < 1e-10, "g={g}: {eps_dp:e}");
        assert!(eps_sp > 0.1, "g={g}: {eps_sp}");
    }
}

#[test]
fn parity_block_is_tridiagonal_projection() {
    for (delta, g, r) in [(0.3, 0.2, 0.25), (1.0, 0.55, 0.6), (0.0, 0.45, 1.0), (2.0, 0.0, 0.0)] {
        let p = ModelParams::new(delta, g, r).unwrap();
        for q in [Bargmann::Quarter, Bargmann::ThreeQuarters] {
            for parity in Parity::BOTH {
                let sector = SectorSpec { q, parity };
                let dense = dense_projection(&p, sector, 40);
                for i in 0..40usize {
                    for j in 0..40 {
                        if i.abs_diff(j) > 1 {
                            assert!(dense[(i, j)].abs() < 1e-14, "({i},{j}) = {}", dense[(i, j)]);
                        }
                    }
                }
                let tri = build_parity_block(&p, sector, 40).matrix().to_dense();
                assert!(dense.max_abs_diff(&tri) < 1e-12);
            }
        }
    }
}

#[test]
fn eigenvectors_do_not_mix_parities() {
    let p = ModelParams::with_ratio(0.4, 0.9, 0.6).unwrap();
    let n = 80;
    let (h, dg) = spin_fock_hamiltonian(&p, 0, n);
    for parity in Parity::BOTH {
        let sector = SectorSpec::even(parity);
        let block = build_parity_block(&p, sector, n);
        let (_, vecs) = block.matrix().lowest_pairs(6);
        for v in &vecs {
            let s = block.to_spin_fock(v);
            let psi = s.to_vec();
            for op in [&h, &dg] {
                let out = SpinFockState::from_vec(0, &op.matvec(&psi));
                let leak = parity_component_norm(&out, SectorSpec::even(parity.flip()));
                assert!(leak < 1e-12, "{parity:?}: {leak:e}");
            }
        }
    }
}

#[test]
fn bare_and_squeezed_frames_agree() {
    for (r, delta_shift, beta) in [(0.25, 0.0, 0.5), (0.6, 0.0, 0.2), (0.6, -0.1, 0.1), (0.25, 0.2, 0.15)] {
        let (_, dc) = critical_params(r).unwrap();
        let u = (1.0f64 - beta * beta).sqrt();
        let p = ModelParams::with_ratio(dc + delta_shift, u, r).unwrap();
        for parity in Parity::BOTH {
            let ed = ed_spectrum(&p, SectorSpec::even(parity), &EdOptions::default().levels(6)).unwrap();
            let sq = squeezed_frame_spectrum(&p, parity, &SqueezedOptions { levels: 6, ..Default::default() }).unwrap();
            for (a, b) in ed.levels.iter().zip(&sq.levels) {
                let allowed = a.convergence_estimate.max(b.convergence_estimate).max(1e-10);
                assert!(
                    (a.energy - b.energy).abs() <= allowed,
                    "r={r} β={beta} {parity:?} level {}: {} vs {} (allowed {allowed:e})",
                    a.index,
                    a.energy,
                    b.energy
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn short_quench_is_unitary_and_above_ground(u in 0.3f64..0.95, r in 0.1f64..0.9, tau in 2.0f64..20.0) {
        let p = ModelParams::critical_delta(u, r).unwrap();
        let proto = QuenchProtocol::new(p, tau).unwrap();
        let run = propagate_fixed(&proto, 96, 0.02);
        prop_assert!(run.norm_drift < 1e-9);
        let e0 = build_parity_block(&p, SectorSpec::even(Parity::Minus), 96).matrix().eigenvalue(0);
        prop_assert!(run.final_energy - e0 >= -1e-10, "{} below {}", run.final_energy, e0);
    }

    #[test]
    fn powerlaw_fit_exact(exponent in -3.0f64..3.0, amp in 0.01f64..100.0, start in -6.0f64..-1.0) {
        let xs: Vec<f64> = (0..12).map(|i| 10f64.powf(start + 0.2 * i as f64)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| amp * x.powf(exponent)).collect();
        let fit = fit_powerlaw(&xs, &ys, None).unwrap();
        prop_assert!((fit.exponent - exponent).abs() < 1e-10);
        prop_assert!((fit.amplitude / amp - 1.0).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn quadratic_fit_exact(c in 1e-3f64..10.0, b in -1e-3f64..1e-3) {
        let d: Vec<f64> = (0..10).map(|i| -0.06 + 0.005 * i as f64).collect();
        let gaps: Vec<f64> = d.iter().map(|x| c * x * x + b).collect();
        let fit = fit_quadratic_gap(&d, &gaps, None).unwrap();
        prop_assert!((fit.exponent - c).abs() < 1e-9 * c.max(1.0));
        prop_assert!((fit.amplitude - b).abs() < 1e-11);
    }
}

#[test]
fn bound_state_count_grows_with_delta() {
    let mut last = 0;
    for delta in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let pr = Collapse1DProblem { l: 1e6, h: 0.02, ..Collapse1DProblem::new(delta) };
        let ladder = bound_states(&pr, 12).unwrap();
        let count = ladder.binding_energies.iter().filter(|&&k| k > 1e-8).count();
        assert!(count >= last, "Δ={delta}: {count} < {last}");
        last = count;
    }
    assert!(last > 0);
}

#[test]
fn exponents_stable_under_window_shift() {
    use tpqrm::analysis::make_grid;
    use tpqrm::scan::gap_scan;
    let r = 0.6;
    let (_, dc) = critical_params(r).unwrap();
    // grid step 0.1 in x; the window slides by one step
    let grid = make_grid(1.5, 3.1, 17, r).unwrap();
    let rows = gap_scan(dc, r, &grid, &EdOptions::default().levels(2)).unwrap();
    let d = grid.distances();
    let sp: Vec<f64> = rows.iter().map(|row| row.eps_sp).collect();
    let dp: Vec<f64> = rows.iter().map(|row| row.eps_dp).collect();
    for ys in [&sp, &dp] {
        let a = fit_powerlaw(&d[..16], &ys[..16], None).unwrap();
        let b = fit_powerlaw(&d[1..], &ys[1..], None).unwrap();
        assert!((a.exponent - b.exponent).abs() < 0.01, "{} vs {}", a.exponent, b.exponent);
    }
}
