//! `start:end:step` grid arguments.

use gasleak::Error;

/// Inclusive arithmetic progression; a bare number gives a single point.
pub fn parse_range(text: &str) -> Result<Vec<f64>, Error> {
    let bad = |why: &str| Error::Config(format!("bad range `{text}`: {why}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [v] => Ok(vec![v]),
        [start, end, step] => {
            if !(step.is_finite() && step > 0.0) {
                return Err(bad("step must be positive"));
            }
            if end < start {
                return Err(bad("end precedes start"));
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(bad("expected start:end:step")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:100:25").unwrap(), vec![0.0, 25.0, 50.0, 75.0, 100.0]);
        assert_eq!(parse_range("100:900:100").unwrap().len(), 9);
        assert_eq!(parse_range("5").unwrap(), vec![5.0]);
        assert_eq!(parse_range("0:10:4").unwrap(), vec![0.0, 4.0, 8.0]);
        assert!(parse_range("0:10").is_err());
        assert!(parse_range("0:10:0").is_err());
        assert!(parse_range("10:0:1").is_err());
        assert!(parse_range("a:b:c").is_err());
    }
}
