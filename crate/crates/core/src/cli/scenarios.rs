use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::config::{FlowStart, ScenarioConfig};
use super::report::ScenarioReport;
use crate::endforms::{EndForm, MetricField};
use crate::error::Result;
use crate::forms::{closed_form_agreement, ScalarForm};
use crate::functionals::{
    flow_minimize, minimum_check, residual_2k, sw_functional, FlowOptions, KappaScale,
};
use crate::higgs::{
    check_higgs, commuting_components, constant_higgs, contraction, default_lambda, hodge_system,
    max_trace, random_instance, HiggsInstance,
};
use crate::hitchin2d::{
    det_holomorphy, hitchin_residual, reduced_sdym_residual, sdym_residual, to_higgs_instance, Formulation, SU2Config,
};
use crate::lattice::{ScalarField, C64};
use crate::matrix::expm;
use crate::multiindex::{verify_sign_identities, MultiIndex};

fn rel(a: C64, b: C64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Worst value seen per check name.
#[derive(Default)]
struct Worst(BTreeMap<String, f64>);

impl Worst {
    fn see(&mut self, name: &str, v: f64) {
        let e = self.0.entry(name.to_string()).or_insert(0.0);
        if v > *e || v.is_nan() {
            *e = v;
        }
    }
}

pub fn run_verify(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let seed = cfg.require_seed()?;
    let samples = cfg.section(&cfg.verify, "verify")?.samples;
    let tol = &cfg.tolerances;
    let (t_route, t_trace, t_inv, t_rel) = (
        tol.require("route")?,
        tol.require("trace")?,
        tol.require("involution")?,
        tol.require("relation")?,
    );
    let mut report = ScenarioReport::new("verify", &cfg.scenario, Some(seed));
    for n in 1..=cfg.chart.n {
        let chart = cfg.chart.build_dim(n)?;
        let signs = verify_sign_identities(n)?;
        let failures: usize = signs.identities.iter().map(|i| i.counterexamples.len()).sum();
        report.check(format!("n{n}/sign_identities"), failures as f64, 0.0);
        report.data(&format!("n{n}/bar_star_closed_form"), closed_form_agreement(n));

        let mut worst = Worst::default();
        let mut positivity = true;
        for s in 0..samples as u64 {
            let base = seed.wrapping_mul(1000).wrapping_add(100 * n as u64 + s);
            for p in 0..=n {
                for q in 0..=n {
                    let f = ScalarForm::random(&chart, p, q, base.wrapping_add(7), cfg.band)?;
                    let g = ScalarForm::random(&chart, p, q, base.wrapping_add(11), cfg.band)?;
                    let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                    let twice = f.hodge_star().hodge_star().sub(&f.scale(C64::new(sign, 0.0)))?;
                    worst.see("star_involution", twice.max_abs() / (1.0 + f.max_abs()));
                    let local = f.inner_local(&g)?.integrate();
                    let wedge = f.wedge(&g.bar_star())?.integrate_top()?;
                    let scale = (f.inner_local(&f)?.integrate().re * g.inner_local(&g)?.integrate().re).sqrt();
                    worst.see("scalar_route", rel(wedge, local, scale));
                    let back = g.inner_local(&f)?.integrate().conj();
                    worst.see("scalar_hermiticity", rel(local, back, scale));
                    positivity &= f.norm_sq()? > 0.0;
                }
            }
            let h = MetricField::random(&chart, cfg.rank, base.wrapping_add(13), cfg.band, cfg.amplitude)?;
            for (p, q) in [(1, 0), (0, 1), (1, 1), (n, n)] {
                let x = EndForm::random(&chart, cfg.rank, p, q, base.wrapping_add(17), cfg.band)?;
                let y = EndForm::random(&chart, cfg.rank, p, q, base.wrapping_add(19), cfg.band)?;
                let local = x.trace_inner_local(&y, &h)?.integrate();
                let wedge = x.trace_inner_wedge(&y, &h)?;
                let xx = x.trace_inner_local(&x, &h)?.integrate().re;
                let yy = y.trace_inner_local(&y, &h)?.integrate().re;
                worst.see("end_route", rel(wedge, local, (xx * yy).sqrt()));
                let back = y.trace_inner_local(&x, &h)?.integrate().conj();
                worst.see("end_hermiticity", rel(local, back, (xx * yy).sqrt()));
                positivity &= xx > 0.0;
                let twice = x.hermitian_conjugate(&h)?.hermitian_conjugate(&h)?.sub(&x)?;
                worst.see("conjugate_involution", twice.max_abs() / (1.0 + x.max_abs()));
            }
            let inst = random_instance(&chart, cfg.rank, base.wrapping_add(23), cfg.band, cfg.amplitude, cfg.higgs_scale)?;
            let phi = inst.higgs();
            let comm = phi.commutator(&phi.hermitian_conjugate(inst.metric())?)?;
            worst.see("trace_commutator", max_trace(&comm));
            let sw = sw_functional(&inst)?;
            worst.see("ymh_relation", sw.expect("ymh_relation"));
        }
        for (name, t) in [
            ("star_involution", t_inv),
            ("conjugate_involution", t_inv),
            ("scalar_route", t_route),
            ("scalar_hermiticity", t_route),
            ("end_route", t_route),
            ("end_hermiticity", t_route),
            ("trace_commutator", t_trace),
            ("ymh_relation", t_rel),
        ] {
            report.check(format!("n{n}/{name}"), worst.0[name], t);
        }
        report.push(format!("n{n}/positivity"), f64::from(u8::from(positivity)), 1.0, positivity);
    }
    Ok(report)
}

/// `h = e^{−f}·I`, `f = amplitude·cos(2πx¹/L)`.
fn single_mode_metric(cfg: &ScenarioConfig) -> Result<MetricField> {
    let chart = cfg.chart.build()?;
    let (a, l) = (cfg.amplitude, cfg.chart.period);
    let f = ScalarField::from_fn(&chart, |x| C64::new(a * (2.0 * PI * x[0] / l).cos(), 0.0));
    MetricField::conformal(&f, cfg.rank)
}

pub fn run_flow(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let seed = cfg.require_seed()?;
    let flow = cfg.section(&cfg.flow, "flow")?;
    let kappa = cfg
        .kappa
        .ok_or_else(|| crate::error::Error::Config("flow scenarios need `kappa`".into()))?;
    let value_tol = cfg.tolerances.require("value")?;
    let chart = cfg.chart.build()?;
    let metric = match flow.start {
        FlowStart::SingleMode => single_mode_metric(cfg)?,
        FlowStart::Random => MetricField::random(&chart, cfg.rank, seed, cfg.band, cfg.amplitude)?,
    };
    let comps = commuting_components(chart.n(), cfg.rank, seed ^ 0x5EED, cfg.higgs_scale);
    let inst = HiggsInstance::new(metric, constant_higgs(&chart, &comps)?)?;
    let options = FlowOptions {
        target: flow.target,
        steps: flow.steps,
        step_size: flow.step_size,
        band: cfg.band,
        value_tol,
        ..FlowOptions::default()
    };
    let result = flow_minimize(&inst, &options)?;
    let trace = result.report.trace.clone();
    let values: Vec<f64> = trace.iter().map(|r| r.value).collect();
    let initial = values[0];
    let last = *values.last().expect("trace has the initial row");
    let increases = values.windows(2).filter(|w| w[1] > w[0]).count();
    let probe = minimum_check(&result.instance, flow.target, cfg.band, flow.samples, flow.radius, seed)?;
    let residuals = residual_2k(&result.instance, kappa)?;

    let mut report = ScenarioReport::new("flow", &cfg.scenario, Some(seed));
    report.check("monotone_increases", increases as f64, 0.0);
    report.data("status", result.status);
    report.data("initial", initial);
    report.data("final", last);
    report.data("converged", last <= value_tol);
    report.data("accepted_steps", trace.len() - 1);
    report.data("final_not_above_initial", last <= initial);
    report.data("minimum_check", &probe);
    report.data("final_residuals", &residuals.values);
    report.trace = Some(trace);
    Ok(report)
}

fn random_su2(seed: u64) -> DMatrix<C64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
    let (a, b, c) = (g(), g(), g());
    let x = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(0.0, c), C64::new(b, a), C64::new(-b, a), C64::new(0.0, -c)],
    );
    expm(&x)
}

pub fn run_reduce2d(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let zero = cfg.section(&cfg.reduce2d, "reduce2d")?.zero;
    let seed = if zero { cfg.seed } else { Some(cfg.require_seed()?) };
    let tol = &cfg.tolerances;
    let chart = cfg.chart.build_dim(1)?;
    let su2 = match seed {
        Some(s) if !zero => SU2Config::random(&chart, s, cfg.band, cfg.amplitude)?,
        _ => SU2Config::zero(&chart)?,
    };
    let mut report = ScenarioReport::new("reduce2d", &cfg.scenario, seed);

    let mut table = BTreeMap::new();
    for f in Formulation::ALL {
        table.insert(serde_json::to_value(f)?.as_str().unwrap_or_default().to_string(), hitchin_residual(&su2, f)?);
    }
    let (real, cx, fm, kw) = (&table["real"], &table["complex"], &table["forms"], &table["kw"]);
    let scale = 1.0 + real[0] + real[1];
    let t = tol.require("equivalence")?;
    report.check("complex_vs_real", (cx[0] - real[0] / 2.0).abs().max((cx[1] - real[1]).abs()) / scale, t);
    report.check("forms_vs_real", (fm[0] - real[0] / 2.0).abs().max((fm[1] - real[1] / 4.0).abs()) / scale, t);
    report.check("kw_vs_real", (kw[0] - real[0]).abs().max((kw[1].hypot(kw[2]) - real[1]).abs()) / scale, t);
    let s = sdym_residual(&su2)?;
    let r = reduced_sdym_residual(&su2)?;
    let gap = s.iter().zip(&r).map(|(a, b)| (a - b).abs() / (1.0 + a)).fold(0.0, f64::max);
    report.check("sdym_vs_reduced", gap, tol.require("reduction")?);

    let u = random_su2(seed.unwrap_or(0).wrapping_add(1));
    let moved = su2.gauge_transform(&u)?;
    let mut gauge_gap: f64 = 0.0;
    for f in Formulation::ALL {
        for (a, b) in hitchin_residual(&su2, f)?.iter().zip(hitchin_residual(&moved, f)?) {
            gauge_gap = gauge_gap.max((a - b).abs() / (1.0 + a));
        }
    }
    report.check("gauge_covariance", gauge_gap, tol.require("gauge")?);

    let (dphi, ddet) = det_holomorphy(&su2)?;
    report.data("config_det_holomorphy", [dphi, ddet]);
    report.data("formulations", &table);
    report.data("sdym", s);
    report.data("reduced_sdym", r);

    // A holomorphic configuration: constant nilpotent-plus-diagonal φ₀
    // moved by a complex gauge transformation.
    let phi0 = DMatrix::from_row_slice(2, 2, &[C64::new(0.3, 0.0), C64::new(1.0, 0.0), C64::new(0.2, 0.0), C64::new(-0.3, 0.0)]);
    // Band 1 and a small gauge amplitude keep exp(X) resolved on the grid.
    let hol = SU2Config::holomorphic(&chart, seed.unwrap_or(0), 1, 0.1, &phi0)?;
    let (hphi, hdet) = det_holomorphy(&hol)?;
    report.check("holomorphic/d_zbar_phi", hphi, tol.require("holomorphy")?);
    report.check("holomorphic/d_zbar_det_phi", hdet, tol.require("det_holomorphy")?);
    report.data("holomorphic/det_ratio", if hphi > 0.0 { hdet / hphi } else { 0.0 });
    let inst = to_higgs_instance(&hol)?;
    let rep = residual_2k(&inst, KappaScale::Unit)?;
    let forms = hitchin_residual(&hol, Formulation::Forms)?;
    let bridge = (rep.expect("curvature") - forms[0])
        .abs()
        .max((rep.expect("covariant") - forms[1]).abs());
    report.check("holomorphic/bridge_residual_2k", bridge, tol.require("bridge")?);
    report.data("holomorphic/residual_2k", &rep.values);
    report.data("holomorphic/forms", forms);
    Ok(report)
}

pub fn run_example(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let chart = cfg.chart.build()?;
    let n = chart.n();
    let mut report = ScenarioReport::new("example", &cfg.scenario, cfg.seed);
    let one = C64::new(1.0, 0.0);
    let mut instances: Vec<(String, HiggsInstance)> = Vec::new();
    instances.push((
        "hodge_system_2_1".into(),
        hodge_system(&chart, &[2, 1], &[DMatrix::from_row_slice(1, 2, &[one, C64::new(0.5, 0.0)])])?,
    ));
    instances.push((
        "hodge_system_1_1_1".into(),
        hodge_system(&chart, &[1, 1, 1], &[DMatrix::from_element(1, 1, one), DMatrix::from_element(1, 1, C64::new(0.0, 0.0))])?,
    ));
    instances.push(("contraction_theta1".into(), contraction(&chart, &default_lambda(n))?));
    if n >= 3 {
        let lambda = vec![(MultiIndex::new(n, &[1, 2, 3])?, one)];
        instances.push(("contraction_theta123".into(), contraction(&chart, &lambda)?));
    }
    for (name, inst) in &instances {
        let check = check_higgs(inst.higgs())?;
        report.push(format!("{name}/higgs"), check.holomorphy.max(check.commutator), 0.0, check.passed);
        let mut nilpotent = true;
        let e = MultiIndex::empty(n);
        for a in 1..=n {
            let c = inst.higgs().coeff(MultiIndex::single(n, a)?, e).get(0);
            let r = c.nrows();
            let mut pow = DMatrix::<C64>::identity(r, r);
            for _ in 0..r {
                pow = &pow * &c;
            }
            nilpotent &= pow.norm() < 1e-12;
        }
        report.data(&format!("{name}/check"), &check);
        report.data(&format!("{name}/rank"), inst.rank());
        report.data(&format!("{name}/nilpotent"), nilpotent);
    }
    Ok(report)
}
