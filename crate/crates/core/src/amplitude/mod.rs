//! Truncated expansions of massive amplitudes, edge by edge.

mod coefficients;
mod expansion;

use serde::{Deserialize, Serialize};

pub use coefficients::{
    asymptotic_eval, asymptotic_term_coefficient, taylor_eval, taylor_term_coefficient, taylor_terms,
    AsymptoticCoefficient, MassParam, TaylorBranch, TaylorCoefficient, TaylorTermSpec,
};
pub use expansion::{
    edge_gegenbauer_expansion, radial_log_expansion, radial_power_expansion, BivariateSeries, EdgeGeometry,
    ExpansionOrders, ExpansionRow, GegenExpansion,
};

use crate::error::{invalid, Error, Result};
use crate::propagators::{gm_real, Kinematics};
use crate::specfun::{BesselEvalConfig, HalfInt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    /// Bessel-function evaluation of each propagator.
    Direct,
    Taylor,
    Asymptotic,
    Gegenbauer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplitudeOrders {
    /// Number of log-branch terms of the small-distance expansion.
    pub taylor_terms: u32,
    pub asymptotic_terms: u32,
    pub expansion: ExpansionOrders,
}

impl Default for AmplitudeOrders {
    fn default() -> Self {
        AmplitudeOrders { taylor_terms: 20, asymptotic_terms: 6, expansion: ExpansionOrders::default() }
    }
}

/// A graph as seen by the amplitude: internal edges between numbered vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeInput {
    pub dim: u32,
    pub edges: Vec<(usize, usize)>,
    pub positions: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

/// Gegenbauer expansions of all small-distance terms of one propagator.
#[derive(Clone, Debug)]
pub struct EdgeExpansionSet {
    pub terms: Vec<(TaylorTermSpec, GegenExpansion)>,
}

impl EdgeExpansionSet {
    pub fn build(lambda: HalfInt, orders: &AmplitudeOrders) -> Result<Self> {
        if !lambda.is_integer() {
            return Err(invalid(format!(
                "the full small-distance expansion needs integer λ, got {lambda}"
            )));
        }
        let terms = taylor_terms(lambda, orders.taylor_terms, MassParam::Symbolic)?
            .into_iter()
            .map(|(t, _)| edge_gegenbauer_expansion(t, lambda, MassParam::Symbolic, orders.expansion).map(|e| (t, e)))
            .collect::<Result<_>>()?;
        Ok(EdgeExpansionSet { terms })
    }

    pub fn eval(&self, geom: &EdgeGeometry, m: f64) -> Result<f64> {
        self.terms.iter().map(|(_, e)| e.eval(geom, m)).sum()
    }
}

fn edge_value(
    dim: u32,
    xs: &[f64],
    xt: &[f64],
    m: f64,
    method: EvalMethod,
    orders: &AmplitudeOrders,
    cfg: &BesselEvalConfig,
    gegen: Option<&EdgeExpansionSet>,
) -> Result<f64> {
    let sep: Vec<f64> = xs.iter().zip(xt).map(|(a, b)| a - b).collect();
    let r = sep.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::Diagonal);
    }
    let lambda = HalfInt::from_twice(dim as i64 - 2);
    match method {
        EvalMethod::Direct => gm_real(&Kinematics::new(dim, sep, m)?, cfg),
        EvalMethod::Taylor => taylor_eval(lambda, m, r, orders.taylor_terms),
        EvalMethod::Asymptotic => asymptotic_eval(lambda, m, r, orders.asymptotic_terms),
        EvalMethod::Gegenbauer => {
            let geom = EdgeGeometry::from_points(xs, xt)?;
            if geom.ratio() >= 1.0 {
                return Err(Error::DivergentRatio(geom.ratio()));
            }
            gegen.expect("built for the gegenbauer method").eval(&geom, m)
        }
    }
}

/// Product over edges of the truncated per-edge propagator values.
pub fn amplitude_truncated_eval(
    input: &AmplitudeInput,
    method: EvalMethod,
    orders: &AmplitudeOrders,
    cfg: &BesselEvalConfig,
) -> Result<f64> {
    if input.dim < 3 {
        return Err(invalid(format!("need D >= 3, got {}", input.dim)));
    }
    if input.masses.len() != input.edges.len() {
        return Err(invalid(format!("{} edges but {} masses", input.edges.len(), input.masses.len())));
    }
    for p in &input.positions {
        if p.len() != input.dim as usize {
            return Err(invalid(format!("position {p:?} is not in R^{}", input.dim)));
        }
    }
    let gegen = match method {
        EvalMethod::Gegenbauer => Some(EdgeExpansionSet::build(HalfInt::from_twice(input.dim as i64 - 2), orders)?),
        _ => None,
    };
    let mut value = 1.0;
    for (&(s, t), &m) in input.edges.iter().zip(&input.masses) {
        let (xs, xt) = match (input.positions.get(s), input.positions.get(t)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(invalid(format!("edge ({s}, {t}) has an endpoint without a position"))),
        };
        value *= edge_value(input.dim, xs, xt, m, method, orders, cfg, gegen.as_ref())?;
    }
    Ok(value)
}
