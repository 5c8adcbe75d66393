/// Numerical thresholds shared by every module.
///
/// Operations that do not take a `Tolerances` argument use
/// [`Tolerances::DEFAULT`]; the `*_with` variants accept overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max-norm of `H - H†` accepted as Hermitian input to the eigensolver.
    pub hermiticity: f64,
    /// Relative max-norm slack when verifying an operator's symmetry flag.
    pub symmetry_flag: f64,
    /// Coefficients below this modulus are skipped when fixing a ray's phase.
    pub phase: f64,
    /// Relative bound on `|T_ψ J(v)|` for `v` to count as level-set tangent.
    pub tangency: f64,
    /// Minimum dominant eigenvalue of the projector before re-projection.
    pub rank_one: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-10,
        symmetry_flag: 1e-12,
        phase: 1e-12,
        tangency: 1e-10,
        rank_one: 0.99,
    };

    /// Set a tolerance by its configuration key. Returns `false` for
    /// unknown keys.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "hermiticity" => &mut self.hermiticity,
            "symmetry_flag" => &mut self.symmetry_flag,
            "phase" => &mut self.phase,
            "tangency" => &mut self.tangency,
            "rank_one" => &mut self.rank_one,
            _ => return false,
        };
        *slot = value;
        true
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
