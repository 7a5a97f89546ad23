//! Two-spin NMR simulation: ¹³C is spin 1 (the control), ¹H is spin 2.
//!
//! All operators use the doubly rotating frame, angular units with ħ = 1,
//! and spin operators I_α = σ_α / 2. A rotation [θ]_α on a set of spins is
//! exp(−iθ Σ_k I_α^k), so for example [θ]_x maps I_z to cos θ·I_z − sin θ·I_y
//! under ρ → UρU†.

mod compile;
mod equivalence;
mod prep;
mod product_ops;
mod propagate;
mod sequence;

pub use compile::{cnot_pulse_sequence, hadamard_block, qspa_pulse_sequence, refocused_j_block, QspaMode};
pub use equivalence::{equivalent_up_to_phase, EquivalenceReport, PhaseFreedom};
pub use prep::{
    effective_state, prep_angle, prep_steps, prepare_input_state, pseudopure_prep, pseudopure_prep_sequence,
    pseudopure_target, transverse_coefficients, PrepConfig, PrepRun, PrepStep, TransverseCoefficients,
};
pub use product_ops::{product_operator_expand, ProductOperator, ProductOperatorExpansion};
pub use propagate::{
    delay_propagator, event_propagator, gradient_crush, rotation_propagator, run_sequence, sequence_unitary,
    thermal_state,
};
pub use sequence::{Axis, DelayDuration, PulseEvent, PulseSequence, Spins};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gates, kron, Matrix, C64};

/// ¹H gyromagnetic ratio, rad·s⁻¹·T⁻¹.
pub const GAMMA_H: f64 = 2.675_221_874_4e8;
/// ¹³C gyromagnetic ratio, rad·s⁻¹·T⁻¹.
pub const GAMMA_C: f64 = 6.728_284e7;
/// Measured ¹³C–¹H scalar coupling of chloroform, Hz.
pub const J_CHLOROFORM: f64 = 215.0;

/// Offsets and coupling in Hz, gyromagnetic ratios in rad·s⁻¹·T⁻¹.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    pub nu1: f64,
    pub nu2: f64,
    pub j12: f64,
    pub gamma_c: f64,
    pub gamma_h: f64,
}

impl Default for SpinSystem {
    fn default() -> Self {
        Self { nu1: 0.0, nu2: 0.0, j12: J_CHLOROFORM, gamma_c: GAMMA_C, gamma_h: GAMMA_H }
    }
}

impl SpinSystem {
    /// Checks J > 0 and γ_H > 2γ_C.
    pub fn validate(&self) -> Result<()> {
        let all = [self.nu1, self.nu2, self.j12, self.gamma_c, self.gamma_h];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("spin system"));
        }
        if self.j12 <= 0.0 {
            return Err(Error::InvalidArgument(format!("J12 must be positive, got {}", self.j12)));
        }
        if self.gamma_h <= 2.0 * self.gamma_c {
            return Err(Error::InvalidArgument(format!(
                "gamma_h ({}) must exceed 2*gamma_c ({})",
                self.gamma_h,
                2.0 * self.gamma_c
            )));
        }
        Ok(())
    }
}

/// Cartesian component of a spin operator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    X,
    Y,
    Z,
}

impl Component {
    fn pauli(self) -> Matrix {
        match self {
            Self::X => gates::pauli_x(),
            Self::Y => gates::pauli_y(),
            Self::Z => gates::pauli_z(),
        }
    }
}

/// I_α^k = σ_α/2 on spin `k`, identity on the other spin.
pub fn spin_operator(spin: usize, component: Component) -> Matrix {
    let half = component.pauli() * C64::new(0.5, 0.0);
    let id = gates::identity2();
    match spin {
        1 => kron(&half, &id).expect("2x2"),
        2 => kron(&id, &half).expect("2x2"),
        _ => panic!("spin index must be 1 or 2"),
    }
}

/// H = −πν₁σz¹ − πν₂σz² + (π/2)J₁₂σz¹σz², diagonal.
pub fn hamiltonian(sys: &SpinSystem) -> Matrix {
    use std::f64::consts::PI;
    let mut h = Matrix::zeros(4, 4);
    for i in 0..4 {
        let z1 = if i & 2 == 0 { 1.0 } else { -1.0 };
        let z2 = if i & 1 == 0 { 1.0 } else { -1.0 };
        let e = -PI * sys.nu1 * z1 - PI * sys.nu2 * z2 + 0.5 * PI * sys.j12 * z1 * z2;
        h[(i, i)] = C64::new(e, 0.0);
    }
    h
}
