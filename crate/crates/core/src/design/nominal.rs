use nalgebra::DVector;

use super::{
    reduced_observer_design, rm_param_xm, rm_param_ym, solve_output_matching,
    solve_state_matching, ObserverDesign, OutputFbMatch, RmParamXm, RmParamYm, StateFbMatch,
};
use crate::adaptive::Scheme;
use crate::error::{Error, Result};
use crate::lti::{tf_from_ss, Polynomial, RationalTF, StateSpace};

/// Matched parameter vector `θ*` and gain `ρ*` for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalDesign {
    pub scheme: Scheme,
    pub theta_star: DVector<f64>,
    pub rho_star: f64,
}

fn missing(scheme: Scheme, what: &str) -> Error {
    Error::MissingComponent {
        scheme: scheme.to_string(),
        what: what.to_string(),
    }
}

fn stack(parts: &[&[f64]]) -> DVector<f64> {
    DVector::from_iterator(
        parts.iter().map(|p| p.len()).sum(),
        parts.iter().flat_map(|p| p.iter().copied()),
    )
}

/// Lays out `θ*` for `scheme`:
///
/// | scheme | `θ*` |
/// |---|---|
/// | SFB_XM | `[k1*, k2* α1, k2* α2]` |
/// | SFB_YM | `[k1*, k2* β1, k2* β2, k2* β20, k2* α2]` |
/// | OFB_XM | `[θ1*, θ2*, θ20*, θ3* α1, θ3* α2]` |
/// | OFB_YM | `[θ1*, θ2*, θ20*, θ3* β1, θ3* β2, θ3* β20, θ3* α2]` |
///
/// `ρ* = 1/k2*` for state feedback and `ρ* = 1/θ3* = k_p` for output feedback.
pub fn assemble_nominal(
    scheme: Scheme,
    ofb: Option<&OutputFbMatch>,
    sfb: Option<&StateFbMatch>,
    axm: Option<&RmParamXm>,
    aym: Option<&RmParamYm>,
) -> Result<NominalDesign> {
    let (gain, head): (f64, DVector<f64>) = if scheme.state_feedback() {
        let s = sfb.ok_or_else(|| missing(scheme, "state-feedback matching (k1*, k2*)"))?;
        (s.k2, s.k1.clone())
    } else {
        let o = ofb.ok_or_else(|| missing(scheme, "output-feedback matching (θ1*, θ2*, θ20*, θ3*)"))?;
        if o.theta1.len() != o.theta2.len() {
            return Err(Error::Dimension("θ1* and θ2* lengths differ".into()));
        }
        let head = stack(&[o.theta1.as_slice(), o.theta2.as_slice(), &[o.theta20]]);
        (o.theta3, head)
    };
    // plant order implied by the feedback part
    let n = if scheme.state_feedback() {
        head.len()
    } else {
        head.len().div_ceil(2)
    };

    let tail = if scheme.uses_reference_state() {
        let a = axm.ok_or_else(|| missing(scheme, "x_m parametrization (α1, α2)"))?;
        if a.alpha1.len() != n {
            return Err(Error::Dimension(format!(
                "α1 has {} entries, plant order is {n}",
                a.alpha1.len()
            )));
        }
        stack(&[(&a.alpha1 * gain).as_slice(), &[gain * a.alpha2]])
    } else {
        let b = aym.ok_or_else(|| missing(scheme, "y_m parametrization (β1, β2, β20, α2)"))?;
        if b.beta1.len() + 1 != n || b.beta2.len() + 1 != n {
            return Err(Error::Dimension(format!(
                "β1/β2 have {}/{} entries, expected {}",
                b.beta1.len(),
                b.beta2.len(),
                n - 1
            )));
        }
        stack(&[
            (&b.beta1 * gain).as_slice(),
            (&b.beta2 * gain).as_slice(),
            &[gain * b.beta20, gain * b.alpha2],
        ])
    };

    let theta_star = stack(&[head.as_slice(), tail.as_slice()]);
    debug_assert_eq!(theta_star.len(), scheme.param_dim(n));
    Ok(NominalDesign {
        scheme,
        theta_star,
        rho_star: 1.0 / gain,
    })
}

/// Everything needed to design one scheme.
#[derive(Debug, Clone)]
pub struct DesignInputs<'a> {
    /// Plant realization; state-feedback designs place poles on it.
    pub plant: &'a StateSpace,
    /// Transfer function used for output-feedback matching. When absent it
    /// is computed from `plant`.
    pub plant_tf: Option<&'a RationalTF>,
    pub reference: &'a StateSpace,
    pub pm: &'a Polynomial,
    pub lambda: Option<&'a Polynomial>,
    pub lambda_e: Option<&'a Polynomial>,
}

/// All intermediate results of a scheme design.
#[derive(Debug, Clone)]
pub struct SchemeDesign {
    pub scheme: Scheme,
    pub plant_tf: RationalTF,
    pub n: usize,
    pub n_star: usize,
    pub ofb: Option<OutputFbMatch>,
    pub sfb: Option<StateFbMatch>,
    pub axm: RmParamXm,
    pub obs: Option<ObserverDesign>,
    pub aym: Option<RmParamYm>,
    pub nominal: NominalDesign,
}

pub fn design_scheme(inputs: &DesignInputs<'_>, scheme: Scheme) -> Result<SchemeDesign> {
    let plant_tf = match inputs.plant_tf {
        Some(tf) => tf.clone(),
        None => tf_from_ss(inputs.plant)?,
    };
    let n = plant_tf.order();
    if inputs.reference.order() != n {
        return Err(Error::Dimension(format!(
            "reference order {} differs from plant order {n}",
            inputs.reference.order()
        )));
    }
    let n_star = plant_tf.relative_degree();

    let (ofb, sfb) = if scheme.state_feedback() {
        if inputs.plant_tf.is_some() {
            return Err(Error::Malformed(
                "state-feedback schemes are designed on the plant realization; drop the separate design transfer function".into(),
            ));
        }
        (None, Some(solve_state_matching(inputs.plant, inputs.pm)?))
    } else {
        let lambda = inputs
            .lambda
            .ok_or_else(|| missing(scheme, "filter polynomial Lambda"))?;
        (Some(solve_output_matching(&plant_tf, lambda, inputs.pm)?), None)
    };

    let axm = rm_param_xm(inputs.reference, inputs.pm, n_star)?;
    let (obs, aym) = if scheme.uses_reference_state() {
        (None, None)
    } else {
        let lambda_e = inputs
            .lambda_e
            .ok_or_else(|| missing(scheme, "observer polynomial Lambda_e"))?;
        let obs = reduced_observer_design(inputs.reference, lambda_e)?;
        let aym = rm_param_ym(&obs, &axm)?;
        (Some(obs), Some(aym))
    };

    let nominal = assemble_nominal(scheme, ofb.as_ref(), sfb.as_ref(), Some(&axm), aym.as_ref())?;
    Ok(SchemeDesign {
        scheme,
        plant_tf,
        n,
        n_star,
        ofb,
        sfb,
        axm,
        obs,
        aym,
        nominal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_sfb_xm() {
        let sfb = StateFbMatch {
            k1: DVector::from_element(1, -1.0),
            k2: 1.0,
        };
        let axm = RmParamXm {
            alpha1: DVector::from_element(1, 0.0),
            alpha2: 1.0,
        };
        let d = assemble_nominal(Scheme::SfbXm, None, Some(&sfb), Some(&axm), None).unwrap();
        assert_eq!(d.theta_star.as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(d.rho_star, 1.0);
    }

    #[test]
    fn missing_component_named() {
        let e = assemble_nominal(Scheme::OfbYm, None, None, None, None).unwrap_err();
        assert!(e.to_string().contains("OFB_YM"));
        assert!(e.to_string().contains("output-feedback matching"));
        let ofb = OutputFbMatch {
            theta1: DVector::zeros(1),
            theta2: DVector::zeros(1),
            theta20: 0.0,
            theta3: 2.0,
        };
        let e = assemble_nominal(Scheme::OfbYm, Some(&ofb), None, None, None).unwrap_err();
        assert!(e.to_string().contains("y_m parametrization"), "{e}");
    }

    #[test]
    fn output_feedback_rho_is_plant_gain() {
        let ofb = OutputFbMatch {
            theta1: DVector::from_element(1, 0.5),
            theta2: DVector::from_element(1, 0.25),
            theta20: 1.0,
            theta3: -4.0,
        };
        let axm = RmParamXm {
            alpha1: DVector::from_vec(vec![1.0, 2.0]),
            alpha2: 3.0,
        };
        let d = assemble_nominal(Scheme::OfbXm, Some(&ofb), None, Some(&axm), None).unwrap();
        assert_eq!(d.rho_star, -0.25);
        assert_eq!(d.theta_star.as_slice(), &[0.5, 0.25, 1.0, -4.0, -8.0, -12.0]);
    }
}
