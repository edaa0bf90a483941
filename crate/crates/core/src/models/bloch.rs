//! Full three-component Bloch state (q, Re u, Im u) of the driven qubit, for
//! inefficient detection where the angle reduction does not hold.
//!
//! No-click drift: q' = 2k Im u + γη q(1 − q),
//! u' = −ik(2q − 1) − (γ/2)u + γη(1 − q)u; click rate γη(1 − q), reset to q = u = 0.

use std::sync::Arc;

use crate::error::Result;
use crate::models::unitary::UnitaryParams;
use crate::pdmp::vector::{VectorChannel, VectorPdmp};

pub type BlochState = [f64; 3];

pub fn collapse_unitary_bloch_full(p: &UnitaryParams) -> Result<VectorPdmp<3>> {
    p.validate()?;
    Ok(bloch_model(p.k(), p.gamma, p.eta))
}

/// The same dynamics with a free coupling k, including k = 0.
pub fn bloch_model(k: f64, gamma: f64, eta: f64) -> VectorPdmp<3> {
    let ge = gamma * eta;
    let drift = Arc::new(move |s: &BlochState| {
        let [q, x, y] = *s;
        let g = ge * (1.0 - q);
        [2.0 * k * y + ge * q * (1.0 - q), -0.5 * gamma * x + g * x, -k * (2.0 * q - 1.0) - 0.5 * gamma * y + g * y]
    });
    let channel = VectorChannel {
        label: "N".into(),
        rate: Arc::new(move |s: &BlochState| (ge * (1.0 - s[0])).max(0.0)),
        jump_map: Arc::new(|_: &BlochState| [0.0, 0.0, 0.0]),
    };
    // Euler steps leave the Bloch ball at O(γ²dt); rescale the vector about the
    // centre onto the sphere when η = 1, and back into the ball otherwise.
    let project = Arc::new(move |s: &BlochState| {
        let r2 = purity(s);
        if !(r2 > 0.0) || (eta < 1.0 && r2 <= 1.0) {
            return *s;
        }
        let f = r2.sqrt().recip();
        [0.5 + f * (s[0] - 0.5), f * s[1], f * s[2]]
    });
    VectorPdmp {
        name: format!("bloch(k={k}, gamma={gamma}, eta={eta})"),
        drift,
        channels: vec![channel],
        project: Some(project),
    }
}

/// r² = (2q − 1)² + 4|u|².
pub fn purity(s: &BlochState) -> f64 {
    let d = 2.0 * s[0] - 1.0;
    d * d + 4.0 * (s[1] * s[1] + s[2] * s[2])
}

/// Pure state on the φ = π/2 plane with angle θ: q = cos²(θ/2), u = i sin θ / 2.
pub fn state_from_angle(theta: f64) -> BlochState {
    let c = (0.5 * theta).cos();
    [c * c, 0.0, 0.5 * theta.sin()]
}
