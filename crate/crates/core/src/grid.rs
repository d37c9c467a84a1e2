//! Parameter grids given as `start:stop:step` or comma-separated lists.

use crate::error::{Error, Result};

/// Inclusive arithmetic grid. Points are computed as `start + i·step` and
/// rounded to 12 decimals so `0:1:0.1` yields exactly `0.1, 0.2, …`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::Config("grid bounds must be finite".into()));
    }
    if step <= 0.0 {
        return Err(Error::Config(format!("grid step must be positive, got {step}")));
    }
    if stop < start {
        return Err(Error::Config(format!("grid stop {stop} is below start {start}")));
    }
    let span = (stop - start) / step;
    if span > 1e6 {
        return Err(Error::Config("grid has more than a million points".into()));
    }
    let n = (span + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| round12(start + i as f64 * step)).collect())
}

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let t = s.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("`{t}` is not a finite number")))
}

/// Parses `start:stop:step` or `a,b,c`. The result is strictly increasing.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(Error::Config(format!(
                "grid `{spec}` must have the form start:stop:step"
            )));
        };
        linear_grid(parse_number(start)?, parse_number(stop)?, parse_number(step)?)?
    } else {
        spec.split(',').map(parse_number).collect::<Result<Vec<_>>>()?
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("grid `{spec}` is not strictly increasing")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenths() {
        let g = parse_grid("0:0.9:0.1").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[6], 0.6);
        assert_eq!(g[3], 0.3);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
    }

    #[test]
    fn lists() {
        assert_eq!(parse_grid("5, 10,15").unwrap(), vec![5.0, 10.0, 15.0]);
        assert_eq!(parse_grid("0.6").unwrap(), vec![0.6]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "1:2",
            "1:2:3:4",
            "0:1:0",
            "1:0:0.1",
            "a,b",
            "3,2",
            "1,1",
            "nan",
            "0:inf:1",
            "0:1e9:1e-3",
        ] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
