use crate::error::{Error, Result};

/// Default constant for the source-restricted size envelope.
pub const DEFAULT_ENVELOPE_C: f64 = 16.0;

/// Default constant for the pairwise regression tripwire.
pub const DEFAULT_TRIPWIRE_C: f64 = 32.0;

/// `c · (sqrt(n · p · sigma) + n)`: the edge budget for a session whose
/// demand pairs share `sigma` sources (backwards growth) or sinks (forwards
/// growth).
pub fn size_envelope_source_restricted(n: usize, p: usize, sigma: usize, c: f64) -> Result<f64> {
    if n == 0 || p == 0 || sigma == 0 {
        return Err(Error::InvalidParameter(format!("envelope needs n, p, sigma >= 1 (got {n}, {p}, {sigma})")));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("envelope constant {c} must be positive")));
    }
    let (n, p, sigma) = (n as f64, p as f64, sigma as f64);
    Ok(c * ((n * p * sigma).sqrt() + n))
}

/// `c · (n^0.72 · p^0.56 + n^0.6 · p^0.7 + n)`, a soft ceiling for pairwise
/// sessions. Exceeding it flags a run for investigation; it is not a proof
/// obligation.
pub fn pairwise_tripwire(n: usize, p: usize, c: f64) -> f64 {
    let (n, p) = (n as f64, p as f64);
    c * (n.powf(0.72) * p.powf(0.56) + n.powf(0.6) * p.powf(0.7) + n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_values() {
        assert_eq!(size_envelope_source_restricted(100, 1, 1, 16.0).unwrap(), 1760.0);
        assert_eq!(size_envelope_source_restricted(1, 1, 1, 16.0).unwrap(), 32.0);
        assert!(size_envelope_source_restricted(0, 1, 1, 16.0).is_err());
        assert!(size_envelope_source_restricted(1, 0, 1, 16.0).is_err());
        assert!(size_envelope_source_restricted(1, 1, 0, 16.0).is_err());
        assert!(size_envelope_source_restricted(1, 1, 1, -1.0).is_err());
    }

    #[test]
    fn tripwire_at_unit_scale() {
        assert_eq!(pairwise_tripwire(1, 1, 32.0), 96.0);
    }
}
