use crate::error::{Error, Result};

/// Smoothness and strong convexity constants of a minimization problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessProfile {
    pub l: f64,
    pub mu: f64,
    coordinate: Option<Vec<f64>>,
    s_half: Option<f64>,
}

impl SmoothnessProfile {
    pub fn new(l: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(l >= mu) || !l.is_finite() {
            return Err(Error::Config(format!("profile needs 0 < mu <= L, got mu = {mu}, L = {l}")));
        }
        Ok(Self { l, mu, coordinate: None, s_half: None })
    }

    pub fn with_coordinates(l: f64, mu: f64, li: Vec<f64>) -> Result<Self> {
        let mut p = Self::new(l, mu)?;
        if li.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Config("coordinate smoothness constants must be positive".into()));
        }
        p.s_half = Some(li.iter().map(|v| v.sqrt()).sum());
        p.coordinate = Some(li);
        Ok(p)
    }

    pub fn coordinate(&self) -> Option<&[f64]> {
        self.coordinate.as_deref()
    }

    /// `Σ √L_i`.
    pub fn s_half(&self) -> Option<f64> {
        self.s_half
    }

    pub fn condition_number(&self) -> f64 {
        self.l / self.mu
    }
}

/// `1 + √(L/μ)`
pub fn lambda_fenchel(profile: &SmoothnessProfile) -> Result<f64> {
    if !(profile.mu > 0.0) {
        return Err(Error::Config("strong convexity modulus must be positive".into()));
    }
    Ok(1.0 + (profile.l / profile.mu).sqrt())
}

/// Blockwise constants of a convex-concave objective.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxProfile {
    pub l_xx: f64,
    pub l_xy: f64,
    pub l_yy: f64,
    pub mu_x: f64,
    pub mu_y: f64,
}

/// `L_xx/μ_x + L_xy/√(μ_x μ_y) + L_yy/μ_y`
pub fn lambda_minimax(p: &MinimaxProfile) -> Result<f64> {
    if !(p.mu_x > 0.0 && p.mu_y > 0.0) {
        return Err(Error::Config("minimax moduli must be positive".into()));
    }
    if p.l_xx < 0.0 || p.l_xy < 0.0 || p.l_yy < 0.0 {
        return Err(Error::Config("blockwise smoothness bounds must be nonnegative".into()));
    }
    Ok(p.l_xx / p.mu_x + (p.l_xy * p.l_xy / (p.mu_x * p.mu_y)).sqrt() + p.l_yy / p.mu_y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenchel_constants() {
        assert_eq!(lambda_fenchel(&SmoothnessProfile::new(4.0, 1.0).unwrap()).unwrap(), 3.0);
        assert_eq!(lambda_fenchel(&SmoothnessProfile::new(2.5, 2.5).unwrap()).unwrap(), 2.0);
        assert_eq!(lambda_fenchel(&SmoothnessProfile::new(100.0, 1.0).unwrap()).unwrap(), 11.0);
        assert!(SmoothnessProfile::new(1.0, 0.0).is_err());
        assert!(SmoothnessProfile::new(1.0, 2.0).is_err());
    }

    #[test]
    fn minimax_constants() {
        let bilinear = MinimaxProfile { l_xx: 0.0, l_xy: 1.0, l_yy: 0.0, mu_x: 1.0, mu_y: 1.0 };
        assert_eq!(lambda_minimax(&bilinear).unwrap(), 1.0);
        let same = MinimaxProfile { l_xx: 5.0, l_xy: 5.0, l_yy: 5.0, mu_x: 0.5, mu_y: 0.5 };
        assert!((lambda_minimax(&same).unwrap() - 30.0).abs() < 1e-12);
        let mixed = MinimaxProfile { l_xx: 2.0, l_xy: 6.0, l_yy: 8.0, mu_x: 1.0, mu_y: 4.0 };
        assert_eq!(lambda_minimax(&mixed).unwrap(), 2.0 + 3.0 + 2.0);
        assert!(lambda_minimax(&MinimaxProfile { mu_x: 0.0, ..mixed }).is_err());
    }

    #[test]
    fn s_half_cached() {
        let p = SmoothnessProfile::with_coordinates(9.0, 1.0, vec![1.0, 4.0, 9.0]).unwrap();
        assert_eq!(p.s_half(), Some(6.0));
        assert!(SmoothnessProfile::with_coordinates(9.0, 1.0, vec![1.0, 0.0]).is_err());
    }
}
