use super::check_balanced;
use crate::error::{invalid, Result};

/// W2 between two weighted scalar samples via the quantile coupling
/// `∫ |F⁻¹ − G⁻¹|²`, merging the cumulative weight ladders in O(N + M).
///
/// Supports must be sorted ascending. Returns the square root of the total
/// transported cost (W2 when the weights are probabilities).
pub fn w2_1d(a: &[f64], b: &[f64], mu: &[f64], nu: &[f64]) -> Result<f64> {
    if a.len() != mu.len() || b.len() != nu.len() {
        return Err(invalid("support and weight lengths differ"));
    }
    check_balanced(mu, nu)?;
    if a.windows(2).any(|w| w[0] > w[1]) || b.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("supports must be sorted ascending"));
    }
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (mu[0], nu[0]);
    let mut cost = 0.0;
    loop {
        let t = ra.min(rb);
        cost += t * (a[i] - b[j]).powi(2);
        ra -= t;
        rb -= t;
        // Advance whichever ladder step is exhausted; on exact ties advance both.
        let adv_a = ra <= rb;
        let adv_b = rb <= ra;
        if adv_a {
            i += 1;
            if i == a.len() {
                break;
            }
            ra = mu[i];
        }
        if adv_b {
            j += 1;
            if j == b.len() {
                break;
            }
            rb = nu[j];
        }
    }
    Ok(cost.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(w2_1d(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], &[0.2, 0.5, 0.3], &[0.2, 0.5, 0.3]).unwrap(), 0.0);
        assert_eq!(w2_1d(&[0.0], &[1.0], &[1.0], &[1.0]).unwrap(), 1.0);
        assert!((w2_1d(&[0.0, 1.0], &[1.0, 2.0], &[0.5, 0.5], &[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn splits_atoms() {
        // Point mass at 0 against two half atoms at -1 and 1.
        let w = w2_1d(&[0.0], &[-1.0, 1.0], &[1.0], &[0.5, 0.5]).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(w2_1d(&[0.0], &[1.0], &[1.0], &[0.5]).is_err());
        assert!(w2_1d(&[1.0, 0.0], &[1.0, 2.0], &[0.5, 0.5], &[0.5, 0.5]).is_err());
        assert!(w2_1d(&[0.0], &[1.0, 2.0], &[1.0], &[0.5]).is_err());
        assert!(w2_1d(&[], &[], &[], &[]).is_err());
    }
}
