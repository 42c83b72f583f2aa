//! Built-in test problems.
//!
//! - `pulse1d`: advected, diffusing Gaussian with an exact heat-kernel solution.
//! - `layer1d`: pure advection of a step, `u = 1` for `x < t`.
//! - `polyexact`: a fixed space-time polynomial of degree `p`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hdg::{Field, JetField, NeumannField, PenaltyWeight, ProblemSpec};
use crate::mesh::{BoundaryRoles, BoundaryTag, DeformationMap, SpaceTimeBox};
use crate::Point;

pub const CASE_NAMES: [&str; 3] = ["pulse1d", "layer1d", "polyexact"];

/// Default interior-penalty coefficient (`α = 10 p²`).
pub const DEFAULT_PENALTY: f64 = 10.0;

pub const PULSE_SIGMA: f64 = 0.1;
pub const PULSE_CENTER: f64 = -0.2;
pub const PULSE_VELOCITY: f64 = 1.0;
pub const DEFORMATION_AMPLITUDE: f64 = 0.1;

/// Neumann datum `−ζ u â_n + ν u_x n_x` traced from an exact jet, with
/// `ζ = 1` where `â_n < 0`.
fn traced_neumann(jet: JetField, velocity: Field, nu: f64) -> NeumannField {
    Arc::new(move |x: Point, n: Point| {
        let [u, _, ux, _] = jet(x);
        let an = n[0] + velocity(x) * n[1];
        let zeta = if an < 0.0 { 1.0 } else { 0.0 };
        -zeta * u * an + nu * ux * n[1]
    })
}

fn constant(c: f64) -> Field {
    Arc::new(move |_| c)
}

/// Exact advected heat kernel
/// `u = σ/s · exp(−ξ²/(2s²))`, `s² = σ² + 2νt`, `ξ = x − x_c − a t`.
pub fn pulse_jet(nu: f64) -> JetField {
    Arc::new(move |p: Point| {
        let [t, x] = p;
        let s2 = PULSE_SIGMA * PULSE_SIGMA + 2.0 * nu * t;
        let xi = x - PULSE_CENTER - PULSE_VELOCITY * t;
        let u = PULSE_SIGMA / s2.sqrt() * (-xi * xi / (2.0 * s2)).exp();
        let ux = -xi / s2 * u;
        let uxx = (xi * xi / (s2 * s2) - 1.0 / s2) * u;
        let ut = u * (-nu / s2 + PULSE_VELOCITY * xi / s2 + nu * xi * xi / (s2 * s2));
        [u, ut, ux, uxx]
    })
}

pub fn make_pulse1d(nu: f64, deform: bool) -> ProblemSpec {
    let jet = pulse_jet(nu);
    let velocity = constant(PULSE_VELOCITY);
    let j = jet.clone();
    let exact: Field = Arc::new(move |x| j(x)[0]);
    ProblemSpec {
        name: "pulse1d".into(),
        nu,
        velocity: velocity.clone(),
        source: constant(0.0),
        dirichlet: exact.clone(),
        neumann: traced_neumann(jet.clone(), velocity, nu),
        exact: Some(exact),
        jet: Some(jet),
        discontinuity: None,
        domain: SpaceTimeBox {
            t0: 0.0,
            tn: 1.0,
            x_lo: -0.5,
            x_hi: 1.0,
        },
        roles: BoundaryRoles::default(),
        deformation: deform.then(|| DeformationMap::new(DEFORMATION_AMPLITUDE)),
        penalty: DEFAULT_PENALTY,
        penalty_weight: PenaltyWeight::SkipTimeFacets,
    }
}

pub fn make_layer1d() -> ProblemSpec {
    let exact: Field = Arc::new(|p: Point| if p[1] < p[0] { 1.0 } else { 0.0 });
    let e = exact.clone();
    // away from the front every derivative vanishes
    let jet: JetField = Arc::new(move |p| [e(p), 0.0, 0.0, 0.0]);
    ProblemSpec {
        name: "layer1d".into(),
        nu: 0.0,
        velocity: constant(1.0),
        source: constant(0.0),
        // x = 0 carries u = 1 for t > 0, x = 1 carries u = 0
        dirichlet: Arc::new(|p: Point| if p[1] < 0.5 { 1.0 } else { 0.0 }),
        neumann: Arc::new(|_, _| 0.0),
        exact: Some(exact),
        jet: Some(jet),
        discontinuity: Some([0.0, -1.0, 1.0]),
        domain: SpaceTimeBox::unit(),
        roles: BoundaryRoles::default(),
        deformation: None,
        penalty: DEFAULT_PENALTY,
        penalty_weight: PenaltyWeight::SkipTimeFacets,
    }
}

pub const POLY_NU: f64 = 0.05;
pub const POLY_VELOCITY: f64 = 1.0;

/// Value and derivatives of the fixed degree-`p` polynomial.
fn poly_jet_value(p: usize, pt: Point) -> [f64; 4] {
    let [t, x] = pt;
    // u1 = 1 + t + x
    let mut j = [1.0 + t + x, 1.0, 1.0, 0.0];
    if p >= 2 {
        // + t x − x² + t²/2
        j[0] += t * x - x * x + 0.5 * t * t;
        j[1] += x + t;
        j[2] += t - 2.0 * x;
        j[3] += -2.0;
    }
    if p >= 3 {
        // + x³ − t² x + 0.5 t³
        j[0] += x * x * x - t * t * x + 0.5 * t * t * t;
        j[1] += -2.0 * t * x + 1.5 * t * t;
        j[2] += 3.0 * x * x - t * t;
        j[3] += 6.0 * x;
    }
    j
}

pub fn make_polyexact(p: usize) -> Result<ProblemSpec> {
    if !(1..=3).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "polyexact needs p in 1..=3, got {p}"
        )));
    }
    let jet: JetField = Arc::new(move |pt| poly_jet_value(p, pt));
    let velocity = constant(POLY_VELOCITY);
    let (j1, j2) = (jet.clone(), jet.clone());
    let exact: Field = Arc::new(move |x| j1(x)[0]);
    let source: Field = Arc::new(move |x| {
        let [_, ut, ux, uxx] = j2(x);
        ut + POLY_VELOCITY * ux - POLY_NU * uxx
    });
    Ok(ProblemSpec {
        name: "polyexact".into(),
        nu: POLY_NU,
        velocity: velocity.clone(),
        source,
        dirichlet: exact.clone(),
        neumann: traced_neumann(jet.clone(), velocity, POLY_NU),
        exact: Some(exact),
        jet: Some(jet),
        discontinuity: None,
        domain: SpaceTimeBox::unit(),
        roles: BoundaryRoles {
            lower: BoundaryTag::Dirichlet,
            upper: BoundaryTag::NeumannInflowLike,
        },
        deformation: None,
        penalty: DEFAULT_PENALTY,
        penalty_weight: PenaltyWeight::SkipTimeFacets,
    })
}

/// Looks up a case by name. `nu` is ignored by cases with fixed diffusivity,
/// `p` is used by `polyexact` only.
pub fn by_name(name: &str, nu: f64, p: usize, deform: bool) -> Result<ProblemSpec> {
    let mut prob = match name {
        "pulse1d" => make_pulse1d(nu, deform),
        "layer1d" => make_layer1d(),
        "polyexact" => make_polyexact(p)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown case '{name}' (known: {})",
                CASE_NAMES.join(", ")
            )))
        }
    };
    if deform && prob.deformation.is_none() && name != "layer1d" {
        prob.deformation = Some(DeformationMap::new(DEFORMATION_AMPLITUDE));
    }
    Ok(prob)
}

/// `u_t + a u_x − ν u_xx − f` evaluated from the case's exact derivatives.
pub fn manufactured_residual(prob: &ProblemSpec, x: Point) -> Option<f64> {
    let jet = prob.jet.as_ref()?;
    let [_, ut, ux, uxx] = jet(x);
    Some(ut + (prob.velocity)(x) * ux - prob.nu * uxx - (prob.source)(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(prob: &ProblemSpec, rng: &mut ChaCha8Rng) -> Point {
        let b = prob.domain;
        [rng.gen_range(b.t0..b.tn), rng.gen_range(b.x_lo..b.x_hi)]
    }

    #[test]
    fn pulse_initial_profile() {
        let u = make_pulse1d(0.0, false).exact.unwrap();
        for x in [-0.4, -0.2, 0.0, 0.3] {
            let expect = (-(x + 0.2f64).powi(2) / 0.02).exp();
            assert!((u([0.0, x]) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn pulse_peak_value() {
        let u = make_pulse1d(1e-2, false).exact.unwrap();
        let v = u([1.0, PULSE_CENTER + PULSE_VELOCITY]);
        assert!((v - 0.1 / 0.03f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.5774).abs() < 1e-4);
    }

    #[test]
    fn manufactured_residuals_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cases: Vec<ProblemSpec> = [0.0, 1e-6, 1e-2, 1e-1]
            .iter()
            .map(|&nu| make_pulse1d(nu, true))
            .collect();
        cases.push(make_layer1d());
        for p in 1..=3 {
            cases.push(make_polyexact(p).unwrap());
        }
        for prob in &cases {
            for _ in 0..100 {
                let x = sample(prob, &mut rng);
                let r = manufactured_residual(prob, x).unwrap();
                assert!(r.abs() <= 1e-8, "{}: residual {r} at {x:?}", prob.name);
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-4;
        let mut cases = vec![make_pulse1d(1e-2, false), make_pulse1d(1e-1, false)];
        for p in 1..=3 {
            cases.push(make_polyexact(p).unwrap());
        }
        for prob in &cases {
            let jet = prob.jet.as_ref().unwrap();
            let u = |x: Point| jet(x)[0];
            for _ in 0..100 {
                let x = sample(prob, &mut rng);
                let [_, ut, ux, uxx] = jet(x);
                let fd_t = (u([x[0] + h, x[1]]) - u([x[0] - h, x[1]])) / (2.0 * h);
                let fd_x = (u([x[0], x[1] + h]) - u([x[0], x[1] - h])) / (2.0 * h);
                let fd_xx = (u([x[0], x[1] + h]) - 2.0 * u(x) + u([x[0], x[1] - h])) / (h * h);
                assert!(
                    (ut - fd_t).abs() < 1e-4 * (1.0 + ut.abs()),
                    "{} u_t",
                    prob.name
                );
                assert!(
                    (ux - fd_x).abs() < 1e-4 * (1.0 + ux.abs()),
                    "{} u_x",
                    prob.name
                );
                assert!(
                    (uxx - fd_xx).abs() < 1e-2 * (1.0 + uxx.abs()),
                    "{} u_xx",
                    prob.name
                );
            }
        }
    }

    #[test]
    fn layer_values() {
        let u = make_layer1d().exact.unwrap();
        assert_eq!(u([0.5, 0.25]), 1.0);
        assert_eq!(u([0.5, 0.75]), 0.0);
    }

    #[test]
    fn layer_inflow_data_is_exact() {
        let prob = make_layer1d();
        let u = prob.exact.clone().unwrap();
        for i in 1..100 {
            let t = i as f64 / 100.0;
            // x = 0 inflow side
            assert_eq!((prob.dirichlet)([t, 0.0]), u([t, 0.0]));
            // t = 0 inflow surface: g_N = −ζ â_n u = u(0, x) = 0
            let x = t;
            assert_eq!((prob.neumann)([0.0, x], [-1.0, 0.0]), u([0.0, x]));
        }
    }

    #[test]
    fn poly_linear_source() {
        let prob = make_polyexact(1).unwrap();
        assert!(((prob.source)([0.3, 0.7]) - (1.0 + POLY_VELOCITY)).abs() < 1e-15);
    }

    #[test]
    fn unknown_case_rejected() {
        assert!(by_name("vortex", 0.0, 1, false).is_err());
        assert!(make_polyexact(4).is_err());
    }
}
