//! Weights `alpha` for which classical holomorphic spaces coincide with `A^p_alpha`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Space {
    /// Diagonal Besov space `B^s_p`.
    Besov { s: f64, p: f64 },
    /// Holomorphic Sobolev space `W^p_{k,beta}`.
    Sobolev { k: u32, beta: f64, p: f64 },
    /// Hardy–Sobolev space `H^p_s`.
    HardySobolev { s: f64, p: f64 },
    Hardy { p: f64 },
}

pub fn space_index_map(space: Space) -> f64 {
    match space {
        Space::Besov { s, p } => -(p * s + 1.0),
        Space::Sobolev { k, beta, p } => -(p * k as f64 - beta + 1.0),
        Space::HardySobolev { s, .. } => -2.0 * s - 1.0,
        Space::Hardy { .. } => -1.0,
    }
}

/// The Besov smoothness `s = -(alpha + 1)/p` of `A^p_alpha`.
pub fn besov_smoothness(alpha: f64, p: f64) -> f64 {
    -(alpha + 1.0) / p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_values() {
        for (alpha, p) in [(0.0, 2.0), (-3.5, 1.5), (2.0, 4.0)] {
            let s = besov_smoothness(alpha, p);
            assert!((space_index_map(Space::Besov { s, p }) - alpha).abs() < 1e-12);
        }
        assert_eq!(space_index_map(Space::HardySobolev { s: 0.0, p: 3.0 }), -1.0);
        assert_eq!(space_index_map(Space::Sobolev { k: 1, beta: 0.0, p: 2.0 }), -3.0);
        assert_eq!(space_index_map(Space::Hardy { p: 1.0 }), -1.0);
    }
}
