//! Sweep value syntax: a single value, a comma list, `start:stop:step`, or
//! `start:stop:lin|log:count`.

use anyhow::{bail, Context, Result};

pub fn parse_f64_values(s: &str) -> Result<Vec<f64>> {
    if s.contains(',') {
        return s
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}")))
            .collect();
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |v: &str| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?} in {s:?}"));
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if !(h > 0.0) || b < a {
                bail!("range {s:?} needs start <= stop and a positive step");
            }
            let n = ((b - a) / h + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| a + h * i as f64).collect())
        }
        [start, stop, mode, count] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count.trim().parse().with_context(|| format!("bad count in {s:?}"))?;
            if n == 0 {
                bail!("range {s:?} has zero points");
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            let frac = |i: usize| i as f64 / (n - 1) as f64;
            match mode.trim() {
                "lin" => Ok((0..n).map(|i| a + (b - a) * frac(i)).collect()),
                "log" => {
                    if !(a > 0.0 && b > 0.0) {
                        bail!("log range {s:?} needs positive endpoints");
                    }
                    let (la, lb) = (a.log10(), b.log10());
                    Ok((0..n).map(|i| 10f64.powf(la + (lb - la) * frac(i))).collect())
                }
                other => bail!("unknown spacing {other:?} in {s:?}, expected lin or log"),
            }
        }
        _ => bail!("malformed range {s:?}"),
    }
}

pub fn parse_usize_values(s: &str) -> Result<Vec<usize>> {
    parse_f64_values(s)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if r < 0.0 || (v - r).abs() > 1e-9 {
                bail!("{v} is not a non-negative integer");
            }
            Ok(r as usize)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_f64_values("1e-2").unwrap(), vec![1e-2]);
        assert_eq!(parse_f64_values("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_usize_values("10:100:10").unwrap(), (1..=10).map(|i| i * 10).collect::<Vec<_>>());
        assert_eq!(parse_usize_values("10:40:lin:4").unwrap(), vec![10, 20, 30, 40]);
        let v = parse_f64_values("1e-4:1e0:log:9").unwrap();
        assert_eq!(v.len(), 9);
        assert!((v[0] - 1e-4).abs() < 1e-18 && (v[8] - 1.0).abs() < 1e-15);
        assert!((v[2] - 1e-3).abs() < 1e-17);
    }

    #[test]
    fn malformed() {
        for bad in ["", "a", "1:2:3:4:5", "1:0:1", "1:10:cube:3", "0:1:log:3", "1:2:lin:0"] {
            assert!(parse_f64_values(bad).is_err(), "{bad}");
        }
        assert!(parse_usize_values("1.5").is_err());
    }
}
