//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --release --test acceptance -- --test-threads=1`.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use higgs_workbench::endforms::{EndForm, MetricField};
use higgs_workbench::forms::ScalarForm;
use higgs_workbench::functionals::{
    flow_minimize, identity_residuals, kobayashi, lagrangian_action, residual_2k, sw_functional, sw_value,
    FlowOptions, FlowStatus, KappaScale,
};
use higgs_workbench::higgs::{central_curvature, constant_higgs, max_trace, random_instance, HiggsInstance};
use higgs_workbench::hitchin2d::{
    hitchin_residual, reduced_sdym_residual, sdym_residual, to_higgs_instance, Formulation, SU2Config,
};
use higgs_workbench::lattice::{LatticeChart, ScalarField, C64};
use higgs_workbench::matrix::{expm, MatrixField};
use higgs_workbench::multiindex::{verify_sign_identities, MultiIndex};
use higgs_workbench::Error;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes straight to the process stdout so the line survives output capture.
fn report(id: u32, title: &str, passed: bool, detail: String) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {id:>2}: {title}: {detail}");
    let _ = out.flush();
    assert!(passed, "criterion {id} failed: {detail}");
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn criterion_01_sign_identities() {
    let t = Instant::now();
    let mut cases = 0;
    let mut counterexamples = 0;
    for n in 1..=4 {
        let rep = verify_sign_identities(n).unwrap();
        for id in &rep.identities {
            cases += id.cases;
            counterexamples += id.counterexamples.len();
        }
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        1,
        "sign identities, n <= 4, exhaustive",
        counterexamples == 0 && secs < 1.0,
        format!("{cases} cases, {counterexamples} counterexamples, {secs:.3} s"),
    );
}

#[test]
fn criterion_02_star_involution() {
    let mut basis_failures = 0;
    let mut basis_cases = 0;
    for n in 1..=3 {
        let chart = LatticeChart::uniform(n, 4, 1.0).unwrap();
        let one = ScalarField::constant(&chart, c(1.0));
        for &a in &MultiIndex::all(n) {
            for &b in &MultiIndex::all(n) {
                let f = ScalarForm::monomial(a, b, one.clone()).unwrap();
                let sign = if (a.len() + b.len()) % 2 == 0 { 1.0 } else { -1.0 };
                let twice = f.hodge_star().hodge_star();
                let expected = f.scale(c(sign));
                basis_cases += 1;
                let exact = twice.coeffs().len() == expected.coeffs().len()
                    && twice
                        .coeffs()
                        .iter()
                        .all(|(k, v)| expected.coeffs().get(k).map(|e| e.data() == v.data()).unwrap_or(false));
                if !exact {
                    basis_failures += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for s in 0..100u64 {
        let n = rng.random_range(1..=3);
        let (p, q) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let chart = LatticeChart::uniform(n, 4, 1.0).unwrap();
        let f = ScalarForm::random(&chart, p, q, s, 1).unwrap();
        let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
        let err = f.hodge_star().hodge_star().sub(&f.scale(c(sign))).unwrap().max_abs();
        worst = worst.max(err);
    }
    report(
        2,
        "star squared = (-1)^(p+q)",
        basis_failures == 0 && worst <= 1e-14,
        format!("{basis_cases} basis monomials, {basis_failures} inexact; 100 random forms, max error {worst:.2e}"),
    );
}

#[test]
fn criterion_03_inner_product_routes() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_scalar: f64 = 0.0;
    let mut worst_end: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    let mut positive = true;
    for s in 0..50u64 {
        let n = 1 + (s % 2) as usize;
        let chart = LatticeChart::uniform(n, 16, 1.0).unwrap();
        let (p, q) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let f = ScalarForm::random(&chart, p, q, 10 * s, 2).unwrap();
        let g = ScalarForm::random(&chart, p, q, 10 * s + 1, 2).unwrap();
        let local = f.inner_local(&g).unwrap().integrate();
        let wedge = f.wedge(&g.bar_star()).unwrap().integrate_top().unwrap();
        let ff = f.inner_local(&f).unwrap().integrate().re;
        let gg = g.inner_local(&g).unwrap().integrate().re;
        let scale = (ff * gg).sqrt();
        worst_scalar = worst_scalar.max((wedge - local).norm() / scale);
        let swapped = g.wedge(&f.bar_star()).unwrap().integrate_top().unwrap();
        worst_herm = worst_herm.max((wedge - swapped.conj()).norm() / scale);
        let self_wedge = f.wedge(&f.bar_star()).unwrap().integrate_top().unwrap();
        positive &= self_wedge.re > 0.0 && self_wedge.im.abs() <= 1e-12 * self_wedge.re;

        let r = 1 + (s % 3) as usize;
        let h = MetricField::random(&chart, r, 10 * s + 2, 1, 0.05).unwrap();
        let (p, q) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let x = EndForm::random(&chart, r, p, q, 10 * s + 3, 2).unwrap();
        let y = EndForm::random(&chart, r, p, q, 10 * s + 4, 2).unwrap();
        let local = x.trace_inner_local(&y, &h).unwrap().integrate();
        let wedge = x.trace_inner_wedge(&y, &h).unwrap();
        let physics = x.trace_inner_local_physics(&y, &h).unwrap().integrate();
        let xx = x.trace_inner_local(&x, &h).unwrap().integrate().re;
        let yy = y.trace_inner_local(&y, &h).unwrap().integrate().re;
        let scale = (xx * yy).sqrt();
        worst_end = worst_end.max((wedge - local).norm() / scale).max((physics - local).norm() / scale);
        let swapped = y.trace_inner_wedge(&x, &h).unwrap();
        worst_herm = worst_herm.max((wedge - swapped.conj()).norm() / scale);
        let self_wedge = x.trace_inner_wedge(&x, &h).unwrap();
        positive &= self_wedge.re > 0.0 && self_wedge.im.abs() <= 1e-12 * self_wedge.re;
    }
    let secs = t.elapsed().as_secs_f64();
    let tol = 1e-10;
    report(
        3,
        "wedge-integral and pointwise inner products agree",
        worst_scalar <= tol && worst_end <= tol && worst_herm <= tol && positive && secs < 30.0,
        format!(
            "scalar {worst_scalar:.2e}, End(E) {worst_end:.2e}, hermiticity {worst_herm:.2e}, positive {positive}, {secs:.1} s"
        ),
    );
}

#[test]
fn criterion_04_trace_of_commutator() {
    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let n = 1 + (s % 2) as usize;
        let r = 1 + (s % 3) as usize;
        let chart = LatticeChart::uniform(n, 8, 1.0).unwrap();
        let h = MetricField::random(&chart, r, 7 * s, 1, 0.05).unwrap();
        let phi = EndForm::random(&chart, r, 1, 0, 7 * s + 1, 1).unwrap();
        let comm = phi.commutator(&phi.hermitian_conjugate(&h).unwrap()).unwrap();
        worst = worst.max(max_trace(&comm));
    }
    report(4, "tr[Phi, Phi-bar_h] vanishes pointwise", worst <= 1e-12, format!("50 instances, max |tr| {worst:.2e}"));
}

#[test]
fn criterion_05_kobayashi_vs_full_ymh() {
    let t = Instant::now();
    let mut worst16: f64 = 0.0;
    let mut worst_koba16: f64 = 0.0;
    let mut worst32: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for s in 0..20u64 {
        let r = 1 + (s % 2) as usize;
        let mut full = [0.0; 2];
        for (k, res) in [16, 32].into_iter().enumerate() {
            let chart = LatticeChart::uniform(2, res, 1.0).unwrap();
            let inst = random_instance(&chart, r, 100 + s, 1, 0.15, 0.5).unwrap();
            let rep = identity_residuals(&inst).unwrap();
            full[k] = rep.expect("full");
            if k == 0 {
                worst_koba16 = worst_koba16.max(rep.expect("koba"));
            }
        }
        worst16 = worst16.max(full[0]);
        worst32 = worst32.max(full[1]);
        min_ratio = min_ratio.min(full[0] / full[1]);
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        5,
        "full Yang-Mills-Higgs vs Kobayashi identity, n = 2",
        worst16 <= 1e-6 && min_ratio >= 10.0 && secs < 300.0,
        format!(
            "max residual {worst16:.2e} at 16^4 (Kobayashi part {worst_koba16:.2e}), {worst32:.2e} at 32^4, min decrease {min_ratio:.1e}x, {secs:.0} s"
        ),
    );
}

#[test]
fn criterion_06_kobayashi_bound() {
    let mut min_gap = f64::INFINITY;
    let mut worst_hym: f64 = 0.0;
    let mut tested = 0;
    let mut nonzero_degree = 0;
    for n in 1..=3 {
        let res = if n == 3 { 4 } else { 8 };
        let chart = LatticeChart::uniform(n, res, 1.0).unwrap();
        for r in 1..=3usize {
            let s = (10 * n + r) as u64;
            let random = random_instance(&chart, r, s, 1, 0.05, 0.5).unwrap();
            let rep = kobayashi(&random).unwrap();
            min_gap = min_gap.min(rep.expect("gap"));
            tested += 1;
            for mu in [0.5, -1.3, 2.0 * PI] {
                let central = central_curvature(&chart, r, mu).unwrap();
                let hym = HiggsInstance::flat(&chart, r)
                    .unwrap()
                    .with_synthetic_curvature(central.clone())
                    .unwrap();
                let rep = kobayashi(&hym).unwrap();
                assert!(rep.expect("degree").abs() > 1e-3);
                nonzero_degree += 1;
                min_gap = min_gap.min(rep.expect("gap"));
                worst_hym = worst_hym.max(rep.expect("gap").abs());
                tested += 1;
                let pert = EndForm::random(&chart, r, 1, 1, s + 1000, 1)
                    .unwrap()
                    .map_coeffs(|m| {
                        let tr = m.trace().scale(c(-1.0 / r as f64));
                        m.add(&MatrixField::scalar(&tr, r))
                    })
                    .unwrap()
                    .scale(c(0.1));
                let skewed = HiggsInstance::flat(&chart, r)
                    .unwrap()
                    .with_synthetic_curvature(central.add(&pert).unwrap())
                    .unwrap();
                let rep = kobayashi(&skewed).unwrap();
                min_gap = min_gap.min(rep.expect("gap"));
                nonzero_degree += 1;
                tested += 1;
            }
        }
    }
    report(
        6,
        "Kobayashi functional bound",
        min_gap >= -1e-8 && worst_hym <= 1e-8,
        format!("{tested} instances ({nonzero_degree} with deg != 0), min J - bound {min_gap:.2e}, HYM |J - bound| {worst_hym:.2e}"),
    );
}

#[test]
fn criterion_07_full_curvature_relation() {
    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let n = 1 + (s % 2) as usize;
        let r = 1 + (s % 3) as usize;
        let chart = LatticeChart::uniform(n, if n == 1 { 16 } else { 8 }, 1.0).unwrap();
        let inst = random_instance(&chart, r, 300 + s, 1, 0.1, 0.5).unwrap();
        worst = worst.max(sw_functional(&inst).unwrap().expect("ymh_relation"));
    }
    report(7, "|F|^2 = H + |d''Phi-bar|^2", worst <= 1e-10, format!("50 instances, max relative residual {worst:.2e}"));
}

fn random_phi0(seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let (a, b, d) = (z(), z(), z());
    DMatrix::from_row_slice(2, 2, &[a, b, d, -a])
}

#[test]
fn criterion_08_k1_reduction() {
    let mut worst: f64 = 0.0;
    let mut smallest_curvature = f64::INFINITY;
    for s in 0..20u64 {
        let chart = LatticeChart::uniform(1, 32, 1.0).unwrap();
        let cfg = SU2Config::holomorphic(&chart, 500 + s, 1, 0.1, &random_phi0(s)).unwrap();
        let inst = to_higgs_instance(&cfg).unwrap();
        let rep = residual_2k(&inst, KappaScale::Unit).unwrap();
        let forms = hitchin_residual(&cfg, Formulation::Forms).unwrap();
        worst = worst
            .max((rep.expect("curvature") - forms[0]).abs())
            .max((rep.expect("covariant") - forms[1]).abs());
        smallest_curvature = smallest_curvature.min(forms[0]);
    }
    report(
        8,
        "residual_2k at n = 1 equals the forms formulation",
        worst <= 1e-10,
        format!("20 bridged configs, max difference {worst:.2e} (curvature residuals >= {smallest_curvature:.2e})"),
    );
}

#[test]
fn criterion_09_formulation_equivalences() {
    let t = Instant::now();
    let chart = LatticeChart::uniform(1, 32, 1.0).unwrap();
    let mut worst_eq: f64 = 0.0;
    let mut worst_sdym: f64 = 0.0;
    for s in 0..50u64 {
        let cfg = SU2Config::random(&chart, 900 + s, 3, 0.5).unwrap();
        let real = hitchin_residual(&cfg, Formulation::Real).unwrap();
        let cx = hitchin_residual(&cfg, Formulation::Complex).unwrap();
        let fm = hitchin_residual(&cfg, Formulation::Forms).unwrap();
        let kw = hitchin_residual(&cfg, Formulation::Kw).unwrap();
        for d in [
            cx[0] - real[0] / 2.0,
            cx[1] - real[1],
            fm[0] - real[0] / 2.0,
            fm[1] - real[1] / 4.0,
            kw[0] - real[0],
            kw[1].hypot(kw[2]) - real[1],
        ] {
            worst_eq = worst_eq.max(d.abs());
        }
        let a = sdym_residual(&cfg).unwrap();
        let b = reduced_sdym_residual(&cfg).unwrap();
        for k in 0..3 {
            worst_sdym = worst_sdym.max((a[k] - b[k]).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        9,
        "Hitchin formulations and SDYM reduction agree",
        worst_eq <= 1e-12 && worst_sdym <= 1e-14 && secs < 60.0,
        format!("50 configs at 32^2, formulations {worst_eq:.2e}, SDYM {worst_sdym:.2e}, {secs:.1} s"),
    );
}

#[test]
fn criterion_10_flow() {
    let chart = LatticeChart::uniform(1, 16, 1.0).unwrap();
    let f = ScalarField::from_fn(&chart, |x| c(0.3 * (2.0 * PI * x[0]).cos()));
    let start = HiggsInstance::new(
        MetricField::conformal(&f, 1).unwrap(),
        EndForm::zero(&chart, 1, 1, 0).unwrap(),
    )
    .unwrap();
    let res = flow_minimize(&start, &FlowOptions::default()).unwrap();
    let values: Vec<f64> = res.report.trace.iter().map(|r| r.value).collect();
    let accepted = values.len() - 1;
    let last = *values.last().unwrap();
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let flow_ok = res.status == FlowStatus::Converged && last < 1e-8 && accepted <= 500 && monotone;

    let chart2 = LatticeChart::uniform(2, 8, 1.0).unwrap();
    let u = expm(&DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.4), C64::new(0.3, 0.2), C64::new(-0.3, 0.2), C64::new(0.0, -0.1)]));
    let normal = |a: C64, b: C64| &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b])) * u.adjoint();
    let phi = constant_higgs(
        &chart2,
        &[normal(C64::new(1.0, 0.5), C64::new(-0.3, 0.0)), normal(C64::new(0.2, -0.7), C64::new(0.4, 0.4))],
    )
    .unwrap();
    let solution = HiggsInstance::new(MetricField::identity(&chart2, 2), phi).unwrap();
    let h0 = sw_value(&solution).unwrap();
    let still = flow_minimize(&solution, &FlowOptions::default()).unwrap();
    let moved = still
        .instance
        .metric()
        .components()
        .sub(solution.metric().components())
        .unwrap()
        .max_abs();
    let fixed_ok = h0 <= 1e-12 && still.report.trace.len() == 1 && moved == 0.0;
    report(
        10,
        "flow reaches the minimum and leaves solutions fixed",
        flow_ok && fixed_ok,
        format!(
            "abelian flow {:.2e} -> {last:.2e} in {accepted} steps ({:?}, monotone {monotone}); solution H = {h0:.2e}, metric change {moved:.1e}",
            values[0], res.status
        ),
    );
}

#[test]
fn criterion_11_lagrangian() {
    let mut worst: f64 = 0.0;
    for s in 0..20u64 {
        let n = 1 + (s % 2) as usize;
        let r = 1 + (s % 3) as usize;
        let chart = LatticeChart::uniform(n, 16, 1.0).unwrap();
        let inst = random_instance(&chart, r, 700 + s, 1, 0.1, 0.5).unwrap();
        let gap = match lagrangian_action(&inst) {
            Ok(check) => check.relative_gap,
            Err(Error::RouteMismatch { rel, .. }) => rel,
            Err(e) => panic!("{e}"),
        };
        worst = worst.max(gap);
    }
    report(11, "integrated Lagrangian equals H", worst <= 1e-8, format!("20 instances, max relative gap {worst:.2e}"));
}
