#[allow(unused_imports)]
use num_traits::Float;

/// Physical constants carried through every formula.
///
/// `c` and `z0` are always derived from `eps0` and `mu0`, so
/// `c = 1/√(ε0 μ0)` and `Z0 = √(μ0/ε0)` hold for stored values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub hbar: f64,
    pub c: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub z0: f64,
}

impl Units {
    pub fn new(hbar: f64, eps0: f64, mu0: f64) -> Self {
        Units {
            hbar,
            c: 1.0 / (eps0 * mu0).sqrt(),
            eps0,
            mu0,
            z0: (mu0 / eps0).sqrt(),
        }
    }

    /// ħ = c = ε0 = μ0 = Z0 = 1.
    pub fn natural() -> Self {
        Units::new(1.0, 1.0, 1.0)
    }

    /// CODATA 2018 values.
    pub fn si() -> Self {
        Units::new(1.054_571_817e-34, 8.854_187_812_8e-12, 1.256_637_062_12e-6)
    }
}

impl Default for Units {
    fn default() -> Self {
        Units::natural()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let n = Units::natural();
        assert_eq!((n.hbar, n.c, n.eps0, n.mu0, n.z0), (1.0, 1.0, 1.0, 1.0, 1.0));

        let si = Units::si();
        assert_eq!(si.c, 1.0 / (si.eps0 * si.mu0).sqrt());
        assert_eq!(si.z0, (si.mu0 / si.eps0).sqrt());
        assert!((si.c - 299_792_458.0).abs() < 1.0);
        assert!((si.z0 - 376.730_313_668).abs() < 1e-6);
    }
}
