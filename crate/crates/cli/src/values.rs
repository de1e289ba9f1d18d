/// Parses comma-separated numbers, where an item may also be an inclusive
/// `start:stop:step` range: `10:50:10` is `10,20,30,40,50`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(format!("empty item in `{spec}`"));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(number(x)?),
            [a, b, s] => {
                let (start, stop, step) = (number(a)?, number(b)?, number(s)?);
                if !(step > 0.0) {
                    return Err(format!("step must be > 0 in `{item}`"));
                }
                if stop < start {
                    return Err(format!("range `{item}` runs backwards"));
                }
                // Index-based so accumulated rounding cannot drop the end point.
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|k| start + k as f64 * step));
            }
            _ => return Err(format!("`{item}` is neither a number nor start:stop:step")),
        }
    }
    Ok(out)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_values("1,2.5").unwrap(), [1.0, 2.5]);
        assert_eq!(
            parse_values("10:50:10").unwrap(),
            [10.0, 20.0, 30.0, 40.0, 50.0]
        );
        assert_eq!(parse_values("0:0.3:0.1").unwrap().len(), 4);
        assert_eq!(parse_values("5, 1:2:1").unwrap(), [5.0, 1.0, 2.0]);
        assert_eq!(parse_values("3:3:1").unwrap(), [3.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["", "a", "1,,2", "1:2", "1:2:0", "5:1:1", "inf", "1:2:3:4"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }
}
