use super::{FeatureVector, RankerError, RankerModel, DEFAULT_EPSILON};

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_schema(model: &RankerModel, phi: &FeatureVector) -> Result<(), RankerError> {
    if model.weights.len() != phi.len() {
        return Err(RankerError::SchemaMismatch { expected: model.weights.len(), got: phi.len() });
    }
    Ok(())
}

fn logit(model: &RankerModel, phi: &FeatureVector) -> f64 {
    model.weights.iter().zip(phi.values()).map(|(w, x)| w * x).sum::<f64>() + model.bias
}

fn clamp(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

/// ŷ = σ(w·φ + b), clamped to [ε, 1 − ε].
pub fn score(model: &RankerModel, phi: &FeatureVector) -> Result<f64, RankerError> {
    check_schema(model, phi)?;
    Ok(clamp(logistic(logit(model, phi)), model.epsilon))
}

/// Combined pair objective: −ln ŷ⁺ − ln(1 − ŷ⁻) + max(0, ŷ⁻ − ŷ⁺ + γ).
/// Inputs are clamped to [ε, 1 − ε] with the default ε first.
pub fn pair_loss(y_pos: f64, y_neg: f64, margin: f64) -> f64 {
    let yp = clamp(y_pos, DEFAULT_EPSILON);
    let yn = clamp(y_neg, DEFAULT_EPSILON);
    -yp.ln() - (1.0 - yn).ln() + (yn - yp + margin).max(0.0)
}

/// Gradient of the pair objective with respect to weights and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Self { weights: vec![0.0; n], bias: 0.0 }
    }

    pub fn add_scaled(&mut self, other: &Gradient, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += scale * b;
        }
        self.bias += scale * other.bias;
    }
}

/// Analytic gradient of `pair_loss(score(φ⁺), score(φ⁻), γ)`.
///
/// The hinge uses subgradient 0 at its kink, and a clamped score contributes
/// no gradient.
pub fn pair_gradient(
    model: &RankerModel,
    phi_pos: &FeatureVector,
    phi_neg: &FeatureVector,
    margin: f64,
) -> Result<Gradient, RankerError> {
    check_schema(model, phi_pos)?;
    check_schema(model, phi_neg)?;
    let eps = model.epsilon;
    let raw_pos = logistic(logit(model, phi_pos));
    let raw_neg = logistic(logit(model, phi_neg));
    let yp = clamp(raw_pos, eps);
    let yn = clamp(raw_neg, eps);
    let hinge_active = yn - yp + margin > 0.0;

    // dL/dz for each side, via dσ/dz = σ(1 − σ).
    let dz_pos = if raw_pos == yp {
        let mut d = -(1.0 - yp);
        if hinge_active {
            d -= yp * (1.0 - yp);
        }
        d
    } else {
        0.0
    };
    let dz_neg = if raw_neg == yn {
        let mut d = yn;
        if hinge_active {
            d += yn * (1.0 - yn);
        }
        d
    } else {
        0.0
    };

    let weights = phi_pos.values().iter().zip(phi_neg.values()).map(|(p, n)| dz_pos * p + dz_neg * n).collect();
    Ok(Gradient { weights, bias: dz_pos + dz_neg })
}
