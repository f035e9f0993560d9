#![allow(dead_code)]

use floquet_pt::{DefectSpec, DriveSpec, LatticeSpec, ModelConfig};

/// Chain with a = 1, b = 2, J = 1 and a static defect pair.
pub fn chain(n_sites: usize, omega: f64, a_over_omega: f64, m0: usize, gamma: f64) -> ModelConfig {
    ModelConfig::new(
        LatticeSpec {
            n_sites,
            a: 1.0,
            b: 2.0,
            j_hop: 1.0,
        },
        DriveSpec {
            amplitude: a_over_omega * omega,
            omega,
        },
        DefectSpec {
            m0,
            gamma,
            co_driven: false,
            theta: 0.0,
        },
    )
    .unwrap()
}

pub fn co_driven(mut model: ModelConfig, theta: f64) -> ModelConfig {
    model.defect.co_driven = true;
    model.defect.theta = theta;
    model
}
