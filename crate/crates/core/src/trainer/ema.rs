use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::specnet::ModelParameters;

/// `θ ← α·θ + (1−α)·φ` for every weight and every batch-norm running statistic.
pub fn ema_update<T: Scalar>(
    theta: &mut ModelParameters<T>,
    phi: &ModelParameters<T>,
    alpha: f64,
) -> Result<()> {
    if !theta.same_shape(phi) {
        return Err(Error::dims(theta.weights.len(), phi.weights.len()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!(
            "EMA decay must lie in [0,1], got {alpha}"
        )));
    }
    let a = T::lit(alpha);
    let b = T::one() - a;
    let blend = |t: &mut T, p: &T| *t = a * *t + b * *p;
    theta
        .weights
        .iter_mut()
        .zip(&phi.weights)
        .for_each(|(t, p)| blend(t, p));
    theta
        .running
        .iter_mut()
        .zip(&phi.running)
        .for_each(|(t, p)| blend(t, p));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specnet::NetworkConfig;

    fn pair() -> (ModelParameters<f64>, ModelParameters<f64>) {
        let cfg = NetworkConfig {
            hidden_size: 2,
            mlp_width: 3,
            ..NetworkConfig::new(2)
        };
        (
            ModelParameters::init(&cfg, 1).unwrap(),
            ModelParameters::init(&cfg, 2).unwrap(),
        )
    }

    #[test]
    fn boundaries() {
        let (theta, mut phi) = pair();
        phi.running[0] = 0.75;
        let mut t = theta.clone();
        ema_update(&mut t, &phi, 0.0).unwrap();
        assert_eq!(t, phi);
        let mut t = theta.clone();
        ema_update(&mut t, &phi, 1.0).unwrap();
        assert_eq!(t, theta);
    }

    #[test]
    fn scalar_example() {
        let (mut theta, mut phi) = pair();
        theta.weights.iter_mut().for_each(|w| *w = 0.5);
        phi.weights.iter_mut().for_each(|w| *w = 1.0);
        let phi_before = phi.clone();
        ema_update(&mut theta, &phi, 0.9).unwrap();
        assert!(theta.weights.iter().all(|w| (w - 0.55).abs() < 1e-15));
        assert_eq!(phi, phi_before);
    }

    #[test]
    fn shape_mismatch() {
        let (mut theta, _) = pair();
        let other = ModelParameters::<f64>::init(&NetworkConfig::new(3), 0).unwrap();
        assert!(matches!(
            ema_update(&mut theta, &other, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
