use higgs_workbench::endforms::{EndForm, MetricField};
use higgs_workbench::forms::ScalarForm;
use higgs_workbench::functionals::{kobayashi, residual_2k, sw_functional, KappaScale};
use higgs_workbench::higgs::{chern_degree, hodge_system, hs_curvature, hym_residual, max_trace, random_instance};
use higgs_workbench::hitchin2d::{
    field_strength, hitchin_residual, reduced_sdym_residual, sdym_residual, su2_defect, Formulation, SU2Config,
};
use higgs_workbench::lattice::{LatticeChart, ScalarField, C64};
use higgs_workbench::matrix::expm;
use higgs_workbench::multiindex::{merge, MultiIndex, Sign};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Sign of the permutation sorting `v`, by adjacent transpositions.
fn bubble_sign(mut v: Vec<usize>) -> i32 {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    sign
}

fn index_from_mask(n: usize, mask: u16) -> MultiIndex {
    let labels: Vec<usize> = (1..=n).filter(|a| mask & (1 << (a - 1)) != 0).collect();
    MultiIndex::new(n, &labels).unwrap()
}

/// `exp(iH)` for the hermitian `H` built from `v`.
fn unitary(r: usize, v: &[f64]) -> DMatrix<C64> {
    let mut h = DMatrix::<C64>::zeros(r, r);
    let mut k = 0;
    for i in 0..r {
        for j in i..r {
            let z = C64::new(v[k % v.len()], if i == j { 0.0 } else { v[(k + 1) % v.len()] });
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    expm(&(h * C64::new(0.0, 1.0)))
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(12)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn perm_sign_matches_transpositions(n in 1usize..=6, mask in 0u16..64) {
        let a = index_from_mask(n, mask & ((1 << n) - 1));
        let mut concat = a.entries();
        concat.extend(a.complement().entries());
        prop_assert_eq!(a.perm_sign().to_i32(), bubble_sign(concat));
    }

    #[test]
    fn merge_sign_matches_transpositions(n in 1usize..=6, m1 in 0u16..64, m2 in 0u16..64) {
        let full = (1u16 << n) - 1;
        let (a, b) = (index_from_mask(n, m1 & full), index_from_mask(n, m2 & full));
        match merge(a, b) {
            Some((m, s)) => {
                let mut concat = a.entries();
                concat.extend(b.entries());
                prop_assert_eq!(s.to_i32(), bubble_sign(concat));
                prop_assert_eq!(m.len(), a.len() + b.len());
            }
            None => prop_assert!(m1 & m2 & full != 0),
        }
    }

    #[test]
    fn mixed_partials_commute_and_parts_integrate(seed in 0u64..1000, alpha in 1usize..=2, beta in 1usize..=2) {
        let chart = LatticeChart::uniform(2, 8, 1.3).unwrap();
        let f = ScalarField::random(&chart, seed, 2).unwrap();
        let g = ScalarField::random(&chart, seed + 1, 2).unwrap();
        let ab = f.d_anti(beta).unwrap().d_holo(alpha).unwrap();
        let ba = f.d_holo(alpha).unwrap().d_anti(beta).unwrap();
        prop_assert!(ab.sub(&ba).unwrap().max_abs() <= 1e-12 * (1.0 + ab.max_abs()));
        let lhs = g.mul(&f.d_holo(alpha).unwrap()).unwrap().integrate();
        let rhs = -f.mul(&g.d_holo(alpha).unwrap()).unwrap().integrate();
        let scale = f.l2_norm() * g.l2_norm() * 10.0;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn volume_is_product_of_periods(lx in 0.5f64..3.0, ly in 0.5f64..3.0) {
        let chart = LatticeChart::new(higgs_workbench::lattice::ChartSpec {
            n: 1,
            resolution: vec![6],
            periods: vec![[lx, ly]],
        })
        .unwrap();
        let top = ScalarForm::kahler_power(&chart, 1).unwrap();
        let vol = top.integrate_top().unwrap();
        prop_assert!((vol.re - lx * ly).abs() <= 1e-14 * lx * ly && vol.im.abs() <= 1e-14);
    }

    #[test]
    fn star_squares_to_sign(n in 1usize..=3, p in 0usize..=3, q in 0usize..=3, seed in 0u64..1000) {
        let (p, q) = (p.min(n), q.min(n));
        let chart = LatticeChart::uniform(n, 4, 1.0).unwrap();
        let f = ScalarForm::random(&chart, p, q, seed, 1).unwrap();
        let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(f.hodge_star().hodge_star().sub(&f.scale(c(sign))).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn scalar_inner_product_axioms(n in 1usize..=2, p in 0usize..=2, q in 0usize..=2, seed in 0u64..1000) {
        let (p, q) = (p.min(n), q.min(n));
        let chart = LatticeChart::uniform(n, 8, 1.0).unwrap();
        let f = ScalarForm::random(&chart, p, q, seed, 2).unwrap();
        let g = ScalarForm::random(&chart, p, q, seed + 7, 2).unwrap();
        let fg = f.inner_global(&g).unwrap();
        let gf = g.inner_global(&f).unwrap();
        prop_assert!((fg - gf.conj()).norm() <= 1e-12 * (1.0 + fg.norm()));
        prop_assert!(f.norm_sq().unwrap() > 0.0);
        prop_assert_eq!(ScalarForm::zero(&chart, p, q).unwrap().norm_sq().unwrap(), 0.0);
        let other = ScalarForm::random(&chart, (p + 1) % (n + 1), q, seed, 1).unwrap();
        prop_assert_eq!(f.inner_global(&other).unwrap(), c(0.0));
    }

    #[test]
    fn conjugation_involution_and_frame_covariance(
        r in 1usize..=3,
        seed in 0u64..1000,
        angles in proptest::collection::vec(-2.0f64..2.0, 6),
    ) {
        let chart = LatticeChart::uniform(2, 8, 1.0).unwrap();
        let h = MetricField::random(&chart, r, seed, 1, 0.05).unwrap();
        let x = EndForm::random(&chart, r, 1, 1, seed + 1, 1).unwrap();
        let y = EndForm::random(&chart, r, 1, 1, seed + 2, 1).unwrap();
        let twice = x.hermitian_conjugate(&h).unwrap().hermitian_conjugate(&h).unwrap();
        prop_assert!(twice.sub(&x).unwrap().max_abs() <= 1e-10 * x.max_abs());
        let u = unitary(r, &angles);
        let ud = u.adjoint();
        let conj = |f: &EndForm| f.map_coeffs(|m| Ok(m.map_points(|a| &u * a * &ud))).unwrap();
        let before = x.trace_inner_global(&y, &h).unwrap();
        let after = conj(&x).trace_inner_global(&conj(&y), &h.unitary_transform(&u).unwrap()).unwrap();
        prop_assert!((before - after).norm() <= 1e-12 * (1.0 + before.norm()));
    }

    #[test]
    fn chern_curvature_is_pure_and_graded(n in 1usize..=2, r in 1usize..=2, seed in 0u64..1000) {
        // Type purity holds up to the aliasing of M⁻¹∂M, which decays
        // spectrally: about 1e-10 at 16 points per axis, 1e-13 at 32.
        let chart = LatticeChart::uniform(n, 16, 1.0).unwrap();
        let inst = random_instance(&chart, r, seed, 1, 0.03, 0.5).unwrap();
        let hs = hs_curvature(&inst).unwrap();
        prop_assert_eq!(hs.f20.bidegree(), (2, 0));
        prop_assert_eq!(hs.f11.bidegree(), (1, 1));
        prop_assert_eq!(hs.f02.bidegree(), (0, 2));
        let conn = inst.connection().unwrap();
        let scale = 1.0 + hs.curvature.max_abs();
        prop_assert!(conn.curvature_20().unwrap().max_abs() <= 1e-8 * scale);
        prop_assert!(conn.curvature_02().unwrap().max_abs() <= 1e-8 * scale);
        let phi = inst.higgs();
        let comm = phi.commutator(&phi.hermitian_conjugate(inst.metric()).unwrap()).unwrap();
        prop_assert!(max_trace(&comm) <= 1e-12);
    }

    #[test]
    fn unitary_covariance_of_invariants(
        r in 1usize..=2,
        seed in 0u64..1000,
        angles in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let chart = LatticeChart::uniform(2, 8, 1.0).unwrap();
        let inst = random_instance(&chart, r, seed, 1, 0.05, 0.5).unwrap();
        let moved = inst.unitary_transform(&unitary(r, &angles)).unwrap();
        let pairs = [
            (hym_residual(&inst).unwrap(), hym_residual(&moved).unwrap()),
            (chern_degree(&inst).unwrap().degree, chern_degree(&moved).unwrap().degree),
            (sw_functional(&inst).unwrap().expect("sw"), sw_functional(&moved).unwrap().expect("sw")),
            (sw_functional(&inst).unwrap().expect("ymh"), sw_functional(&moved).unwrap().expect("ymh")),
            (kobayashi(&inst).unwrap().expect("kobayashi"), kobayashi(&moved).unwrap().expect("kobayashi")),
        ];
        for (a, b) in pairs {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn sw_functional_splits_into_residuals(n in 1usize..=2, r in 1usize..=2, seed in 0u64..1000) {
        let chart = LatticeChart::uniform(n, 8, 1.0).unwrap();
        let inst = random_instance(&chart, r, seed, 1, 0.05, 0.5).unwrap();
        let sw = sw_functional(&inst).unwrap().expect("sw");
        let res = residual_2k(&inst, KappaScale::Unit).unwrap();
        prop_assert!(sw >= 0.0);
        let split = res.expect("d_prime").powi(2) + res.expect("curvature").powi(2);
        prop_assert!((sw - split).abs() <= 1e-12 * (1.0 + sw));
        let k = kobayashi(&inst).unwrap();
        prop_assert!(k.expect("gap") >= -1e-8);
    }

    #[test]
    fn kappa_rescaling(n in 1usize..=2, r in 2usize..=3, seed in 0u64..1000) {
        let chart = LatticeChart::uniform(n, 8, 1.0).unwrap();
        let maps: Vec<DMatrix<C64>> = (0..r - 1)
            .map(|k| DMatrix::from_element(1, 1, C64::new(0.3 + (seed % 7) as f64 * 0.1, k as f64 * 0.2)))
            .collect();
        // Nilpotent chains need the product of consecutive maps to vanish.
        let maps: Vec<DMatrix<C64>> = maps
            .into_iter()
            .enumerate()
            .map(|(k, m)| if k % 2 == 1 { m * c(0.0) } else { m })
            .collect();
        let inst = hodge_system(&chart, &vec![1; r], &maps).unwrap();
        let doubled = inst.with_higgs(inst.higgs().scale(c(2.0))).unwrap();
        let quarter = residual_2k(&doubled, KappaScale::Quarter).unwrap().expect("curvature");
        let unit = residual_2k(&inst, KappaScale::Unit).unwrap().expect("curvature");
        prop_assert!((quarter - unit).abs() <= 1e-12 * (1.0 + unit));
    }

    #[test]
    fn hitchin_formulations_and_closure(
        seed in 0u64..1000,
        amplitude in 0.05f64..1.0,
        angles in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let chart = LatticeChart::uniform(1, 16, 1.0).unwrap();
        let cfg = SU2Config::random(&chart, seed, 2, amplitude).unwrap();
        let real = hitchin_residual(&cfg, Formulation::Real).unwrap();
        let cx = hitchin_residual(&cfg, Formulation::Complex).unwrap();
        let fm = hitchin_residual(&cfg, Formulation::Forms).unwrap();
        let kw = hitchin_residual(&cfg, Formulation::Kw).unwrap();
        let tol = 1e-12 * (1.0 + real[0] + real[1]);
        prop_assert!((cx[0] - real[0] / 2.0).abs() <= tol && (cx[1] - real[1]).abs() <= tol);
        prop_assert!((fm[0] - real[0] / 2.0).abs() <= tol && (fm[1] - real[1] / 4.0).abs() <= tol);
        prop_assert!((kw[0] - real[0]).abs() <= tol && (kw[1].hypot(kw[2]) - real[1]).abs() <= tol);
        let s = sdym_residual(&cfg).unwrap();
        let rs = reduced_sdym_residual(&cfg).unwrap();
        for k in 0..3 {
            prop_assert!((s[k] - rs[k]).abs() <= 1e-14 * (1.0 + s[k]));
        }
        let f = field_strength(&cfg, true).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                prop_assert!(su2_defect(f.get(i, j)) <= 1e-12);
            }
        }
        prop_assert!(su2_defect(&cfg.phi1().commutator(cfg.phi2()).unwrap()) <= 1e-12);
        // exp of an anti-hermitian traceless matrix lies in SU(2).
        let u = unitary(2, &angles);
        let u = &u / u.determinant().sqrt();
        let moved = cfg.gauge_transform(&u).unwrap();
        for form in Formulation::ALL {
            let a = hitchin_residual(&cfg, form).unwrap();
            let b = hitchin_residual(&moved, form).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x));
            }
        }
    }
}

#[test]
fn sign_type_is_multiplicative() {
    for a in [Sign::Plus, Sign::Minus] {
        for b in [Sign::Plus, Sign::Minus] {
            assert_eq!((a * b).to_i32(), a.to_i32() * b.to_i32());
        }
    }
}
