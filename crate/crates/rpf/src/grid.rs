//! Number lists on the command line: `a:b:n` or `x1,x2,...`.

use crate::error::CliError;

/// `a:b:n` gives `n` equally spaced points from `a` to `b` inclusive
/// (`n = 1` gives `a`); anything else is read as a comma-separated list.
pub fn parse(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let a = num(a)?;
            let b = num(b)?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad point count in grid {s:?}")))?;
            match n {
                0 => Err(CliError::Usage(format!("grid {s:?} has no points"))),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        [_] => parse_list(s),
        _ => Err(CliError::Usage(format!("grid {s:?} must be a:b:n or a comma list"))),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    let v = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(num)
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err(CliError::Usage("empty number list".into()));
    }
    Ok(v)
}

fn num(x: &str) -> Result<f64, CliError> {
    let x = x.trim();
    let v: f64 = x
        .parse()
        .map_err(|_| CliError::Usage(format!("not a number: {x:?}")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("not a finite number: {x:?}")));
    }
    Ok(v)
}
