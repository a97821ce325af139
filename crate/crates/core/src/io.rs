//! JSON containers for fields, forms, Higgs instances and SU(2) configurations.
//!
//! Every container carries its chart as `{n, resolution, periods}`. Grid data
//! is listed point by point in lexicographic order of the real lattice
//! coordinates `(x¹, y¹, …, xⁿ, yⁿ)`, the last coordinate varying fastest.
//! A complex number is a pair `[re, im]`; a matrix is a list of rows.
//!
//! ```json
//! {"chart": {"n": 1, "resolution": [4], "periods": [[1.0, 1.0]]},
//!  "data": [[1.0, 0.0], [0.5, -0.5], ...]}
//! ```

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::endforms::{EndForm, MetricField};
use crate::error::{Error, Result};
use crate::forms::ScalarForm;
use crate::higgs::{Connection, HiggsInstance};
use crate::hitchin2d::SU2Config;
use crate::lattice::{ChartSpec, LatticeChart, ScalarField, C64};
use crate::matrix::MatrixField;
use crate::multiindex::LabelList;

pub type Pair = [f64; 2];
pub type MatrixRows = Vec<Vec<Pair>>;

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn chart_of(spec: &ChartSpec) -> Result<Arc<LatticeChart>> {
    LatticeChart::new(spec.clone())
}

fn same_chart(a: &Arc<LatticeChart>, spec: &ChartSpec) -> Result<()> {
    if a.spec() != spec {
        return Err(Error::Container("nested chart differs from the outer chart".into()));
    }
    Ok(())
}

/// A scalar field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldContainer {
    pub chart: ChartSpec,
    pub data: Vec<Pair>,
}

impl FieldContainer {
    pub fn from_field(f: &ScalarField) -> Self {
        Self {
            chart: f.chart().spec().clone(),
            data: f.data().iter().map(|z| pair(*z)).collect(),
        }
    }

    pub fn into_field(self) -> Result<ScalarField> {
        let chart = chart_of(&self.chart)?;
        field_on(&chart, &self.data)
    }
}

fn field_on(chart: &Arc<LatticeChart>, data: &[Pair]) -> Result<ScalarField> {
    if data.len() != chart.num_points() {
        return Err(Error::Container(format!(
            "expected {} points, found {}",
            chart.num_points(),
            data.len()
        )));
    }
    ScalarField::new(chart.clone(), data.iter().map(unpair).collect())
}

fn matrix_data(x: &MatrixField) -> Vec<MatrixRows> {
    let r = x.rank();
    (0..x.num_points())
        .map(|p| {
            let m = x.at(p);
            (0..r).map(|i| (0..r).map(|j| pair(m[(i, j)])).collect()).collect()
        })
        .collect()
}

fn matrix_on(chart: &Arc<LatticeChart>, r: usize, data: &[MatrixRows]) -> Result<MatrixField> {
    if data.len() != chart.num_points() {
        return Err(Error::Container(format!(
            "expected {} matrices, found {}",
            chart.num_points(),
            data.len()
        )));
    }
    let mut out = Vec::with_capacity(data.len() * r * r);
    for rows in data {
        if rows.len() != r || rows.iter().any(|row| row.len() != r) {
            return Err(Error::Container(format!("matrix is not {r}x{r}")));
        }
        let m = DMatrix::from_fn(r, r, |i, j| unpair(&rows[i][j]));
        out.extend_from_slice(m.as_slice());
    }
    MatrixField::new(chart.clone(), r, out)
}

/// A matrix-valued field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixContainer {
    pub chart: ChartSpec,
    pub rank: usize,
    pub data: Vec<MatrixRows>,
}

impl MatrixContainer {
    pub fn from_field(x: &MatrixField) -> Self {
        Self {
            chart: x.chart().spec().clone(),
            rank: x.rank(),
            data: matrix_data(x),
        }
    }

    pub fn into_field(self) -> Result<MatrixField> {
        let chart = chart_of(&self.chart)?;
        matrix_on(&chart, self.rank, &self.data)
    }
}

/// One `(A, B)` coefficient of a scalar form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarMonomial {
    pub a: LabelListRepr,
    pub b: LabelListRepr,
    pub data: Vec<Pair>,
}

/// Labels of a multi-index, 1-based and strictly increasing.
pub type LabelListRepr = Vec<usize>;

/// A scalar `(p,q)`-form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormContainer {
    pub chart: ChartSpec,
    pub p: usize,
    pub q: usize,
    pub monomials: Vec<ScalarMonomial>,
}

impl FormContainer {
    pub fn from_form(f: &ScalarForm) -> Self {
        let (p, q) = f.bidegree();
        Self {
            chart: f.chart().spec().clone(),
            p,
            q,
            monomials: f
                .coeffs()
                .iter()
                .map(|((a, b), c)| ScalarMonomial {
                    a: a.entries(),
                    b: b.entries(),
                    data: c.data().iter().map(|z| pair(*z)).collect(),
                })
                .collect(),
        }
    }

    pub fn into_form(self) -> Result<ScalarForm> {
        let chart = chart_of(&self.chart)?;
        let n = chart.n();
        let mut out = ScalarForm::zero(&chart, self.p, self.q)?;
        for m in self.monomials {
            let a = LabelList(m.a).into_index(n)?;
            let b = LabelList(m.b).into_index(n)?;
            out.set(a, b, field_on(&chart, &m.data)?)?;
        }
        Ok(out)
    }
}

/// One `(A, B)` coefficient of a matrix-valued form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixMonomial {
    pub a: LabelListRepr,
    pub b: LabelListRepr,
    pub data: Vec<MatrixRows>,
}

/// An `End(E)`-valued `(p,q)`-form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndFormContainer {
    pub chart: ChartSpec,
    pub rank: usize,
    pub p: usize,
    pub q: usize,
    pub monomials: Vec<MatrixMonomial>,
}

impl EndFormContainer {
    pub fn from_form(f: &EndForm) -> Self {
        let (p, q) = f.bidegree();
        Self {
            chart: f.chart().spec().clone(),
            rank: f.rank(),
            p,
            q,
            monomials: f
                .coeffs()
                .iter()
                .map(|((a, b), x)| MatrixMonomial {
                    a: a.entries(),
                    b: b.entries(),
                    data: matrix_data(x),
                })
                .collect(),
        }
    }

    pub fn into_form(self) -> Result<EndForm> {
        let chart = chart_of(&self.chart)?;
        self.into_form_on(&chart)
    }

    fn into_form_on(self, chart: &Arc<LatticeChart>) -> Result<EndForm> {
        same_chart(chart, &self.chart)?;
        let n = chart.n();
        let mut out = EndForm::zero(chart, self.rank, self.p, self.q)?;
        for m in self.monomials {
            let a = LabelList(m.a).into_index(n)?;
            let b = LabelList(m.b).into_index(n)?;
            out.set(a, b, matrix_on(chart, self.rank, &m.data)?)?;
        }
        Ok(out)
    }
}

/// A connection given by its `(1,0)` and `(0,1)` parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionContainer {
    pub a10: EndFormContainer,
    pub a01: EndFormContainer,
}

/// A Higgs instance: chart, metric components `h_{jk̄}`, Higgs monomials and
/// the optional connection and curvature overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceContainer {
    pub chart: ChartSpec,
    pub rank: usize,
    pub h: Vec<MatrixRows>,
    pub phi: EndFormContainer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<ConnectionContainer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_curvature: Option<EndFormContainer>,
}

impl InstanceContainer {
    pub fn from_instance(inst: &HiggsInstance) -> Self {
        Self {
            chart: inst.chart().spec().clone(),
            rank: inst.rank(),
            h: matrix_data(inst.metric().components()),
            phi: EndFormContainer::from_form(inst.higgs()),
            connection: inst.connection_override().map(|c| ConnectionContainer {
                a10: EndFormContainer::from_form(&c.a10),
                a01: EndFormContainer::from_form(&c.a01),
            }),
            synthetic_curvature: inst.synthetic_curvature().map(EndFormContainer::from_form),
        }
    }

    /// Rebuilds and revalidates the instance.
    pub fn into_instance(self) -> Result<HiggsInstance> {
        let chart = chart_of(&self.chart)?;
        let metric = MetricField::from_components(matrix_on(&chart, self.rank, &self.h)?)?;
        let phi = self.phi.into_form_on(&chart)?;
        let connection = match self.connection {
            Some(c) => Some(Connection::new(c.a10.into_form_on(&chart)?, c.a01.into_form_on(&chart)?)?),
            None => None,
        };
        let synthetic = self.synthetic_curvature.map(|f| f.into_form_on(&chart)).transpose()?;
        HiggsInstance::from_parts(metric, phi, connection, synthetic)
    }
}

/// An SU(2) configuration on the periodic plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SU2Container {
    pub chart: ChartSpec,
    pub a1: Vec<MatrixRows>,
    pub a2: Vec<MatrixRows>,
    pub phi1: Vec<MatrixRows>,
    pub phi2: Vec<MatrixRows>,
}

impl SU2Container {
    pub fn from_config(cfg: &SU2Config) -> Self {
        Self {
            chart: cfg.chart().spec().clone(),
            a1: matrix_data(cfg.a1()),
            a2: matrix_data(cfg.a2()),
            phi1: matrix_data(cfg.phi1()),
            phi2: matrix_data(cfg.phi2()),
        }
    }

    pub fn into_config(self) -> Result<SU2Config> {
        let chart = chart_of(&self.chart)?;
        let m = |d: &[MatrixRows]| matrix_on(&chart, 2, d);
        SU2Config::new(m(&self.a1)?, m(&self.a2)?, m(&self.phi1)?, m(&self.phi2)?)
    }
}

/// Serializes any container as pretty JSON.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Parses a container from JSON.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs::{random_instance, central_curvature};

    #[test]
    fn scalar_and_form_round_trip() {
        let chart = LatticeChart::uniform(2, 4, 1.5).unwrap();
        let f = ScalarField::random(&chart, 3, 1).unwrap();
        let back: FieldContainer = from_json(&to_json(&FieldContainer::from_field(&f)).unwrap()).unwrap();
        assert_eq!(back.into_field().unwrap().data(), f.data());
        let form = ScalarForm::random(&chart, 1, 2, 7, 1).unwrap();
        let back: FormContainer = from_json(&to_json(&FormContainer::from_form(&form)).unwrap()).unwrap();
        assert_eq!(back.into_form().unwrap().sub(&form).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn instance_round_trip() {
        let chart = LatticeChart::uniform(2, 4, 1.0).unwrap();
        let inst = random_instance(&chart, 2, 4, 1, 0.03, 0.5)
            .unwrap()
            .with_synthetic_curvature(central_curvature(&chart, 2, 0.7).unwrap())
            .unwrap();
        let text = to_json(&InstanceContainer::from_instance(&inst)).unwrap();
        let back = from_json::<InstanceContainer>(&text).unwrap().into_instance().unwrap();
        assert_eq!(back.higgs().sub(inst.higgs()).unwrap().max_abs(), 0.0);
        assert_eq!(back.metric().components().sub(inst.metric().components()).unwrap().max_abs(), 0.0);
        assert!(back.synthetic_curvature().is_some());
        assert_eq!(to_json(&InstanceContainer::from_instance(&back)).unwrap(), text);
    }

    #[test]
    fn su2_round_trip_and_rejections() {
        let chart = LatticeChart::uniform(1, 4, 1.0).unwrap();
        let cfg = SU2Config::random(&chart, 2, 1, 0.3).unwrap();
        let c = SU2Container::from_config(&cfg);
        let back = from_json::<SU2Container>(&to_json(&c).unwrap()).unwrap().into_config().unwrap();
        assert_eq!(back.phi1().sub(cfg.phi1()).unwrap().max_abs(), 0.0);
        let mut bad = c.clone();
        bad.a1[0][0][0] = [1.0, 0.0];
        assert!(matches!(bad.into_config(), Err(Error::NotSu2(_))));
        let mut short = c;
        short.phi2.pop();
        assert!(matches!(short.into_config(), Err(Error::Container(_))));
        assert!(from_json::<FieldContainer>(r#"{"chart":{"n":1,"resolution":[4],"periods":[[1,1]]},"data":[],"x":1}"#).is_err());
    }
}
