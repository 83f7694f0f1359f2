use super::GscmError;

/// Estimates `(g0, xi)` of the scattering model `gain = g0 · exp(−xi · angle)`.
///
/// Least squares on `ln(gain)` is the maximum-likelihood fit under log-normal
/// errors. The decay is constrained to `xi ≥ 0`; when the unconstrained slope
/// would be negative the fit falls back to a constant gain.
pub fn fit_mpc_parameters(samples: &[(f64, f64)]) -> Result<(f64, f64), GscmError> {
    if samples.len() < 2 {
        return Err(GscmError::InsufficientSamples(samples.len()));
    }
    if let Some(&(a, g)) = samples
        .iter()
        .find(|(a, g)| !(g.is_finite() && *g > 0.0 && a.is_finite() && *a >= 0.0))
    {
        return Err(GscmError::InvalidSample { angle: a, gain: g });
    }
    let n = samples.len() as f64;
    let mean_a = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_l = samples.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(a, g) in samples {
        let da = a - mean_a;
        sxx += da * da;
        sxy += da * (g.ln() - mean_l);
    }
    if sxx <= f64::EPSILON * mean_a.abs().max(1.0) * n {
        return Err(GscmError::DegenerateFit);
    }
    let xi = -sxy / sxx;
    if xi <= 0.0 {
        return Ok((mean_l.exp(), 0.0));
    }
    Ok(((mean_l + xi * mean_a).exp(), xi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_identity() {
        let samples: Vec<_> = (0..20)
            .map(|k| {
                let a = k as f64 * 0.05;
                (a, 1e-3 * (-2.0 * a).exp())
            })
            .collect();
        let (g0, xi) = fit_mpc_parameters(&samples).unwrap();
        assert!(((g0 - 1e-3) / 1e-3).abs() < 1e-9, "{g0}");
        assert!(((xi - 2.0) / 2.0).abs() < 1e-9, "{xi}");
    }

    #[test]
    fn constant_gain_has_no_decay() {
        let (g0, xi) = fit_mpc_parameters(&[(0.1, 0.5), (0.7, 0.5)]).unwrap();
        assert_eq!(xi, 0.0);
        assert!((g0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_angles_are_degenerate() {
        assert!(matches!(
            fit_mpc_parameters(&[(0.3, 1.0), (0.3, 2.0), (0.3, 0.5)]),
            Err(GscmError::DegenerateFit)
        ));
        assert!(matches!(
            fit_mpc_parameters(&[(0.3, 1.0)]),
            Err(GscmError::InsufficientSamples(1))
        ));
        assert!(matches!(
            fit_mpc_parameters(&[(0.3, 1.0), (0.4, 0.0)]),
            Err(GscmError::InvalidSample { .. })
        ));
    }
}
