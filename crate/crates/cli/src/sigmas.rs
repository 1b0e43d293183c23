//! Radius list syntax: `start:stop:step` (both ends inclusive) or `a,b,c`.

use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaList(pub Vec<f64>);

fn num(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: `{s}`"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("radius must be positive: `{s}`"))
    }
}

// Grid points are snapped to 12 decimals so 0.4:8:0.4 ends at exactly 8.
fn snap(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

impl FromStr for SigmaList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if stop < start {
                    return Err(format!("empty range `{s}`"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| snap(start + k as f64 * step)).collect()
            }
            [_] => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
            _ => {
                return Err(format!(
                    "expected start:stop:step or a comma list, got `{s}`"
                ))
            }
        };
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err("radii must be strictly increasing".into());
        }
        Ok(SigmaList(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_sweep_grid_has_twenty_points() {
        let l: SigmaList = "0.4:8:0.4".parse().unwrap();
        assert_eq!(l.0.len(), 20);
        assert_eq!(l.0[0], 0.4);
        assert_eq!(l.0[1], 0.8);
        assert_eq!(l.0[19], 8.0);
    }

    #[test]
    fn lists_and_single_values() {
        assert_eq!("1.6".parse::<SigmaList>().unwrap().0, [1.6]);
        assert_eq!("0.5, 1,2".parse::<SigmaList>().unwrap().0, [0.5, 1.0, 2.0]);
    }

    #[test]
    fn bad_input_is_rejected() {
        for s in ["", "a", "1:0.5:0.1", "1:2", "0:1:0.5", "2,1", "1:2:-1"] {
            assert!(s.parse::<SigmaList>().is_err(), "{s}");
        }
    }
}
