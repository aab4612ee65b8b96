//! Literal grammars for coupling matrices and parameter grids.

use faer::Mat;
use multilevel_rabi::rmt::{sample_ginibre, Ensemble};
use multilevel_rabi::{CMatrix, C64};

use crate::config::ConfigError;

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// `1.5`, `-2e-3`, `0.5+1i`, `3-2.5i`, `-i`.
pub fn parse_complex(text: &str) -> Result<C64, ConfigError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || invalid(format!("invalid number '{text}' (expected re, re+imi or imi)"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    // split at the last sign that is not a leading sign or an exponent sign
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64, ConfigError> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[k..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn parse_list(text: &str) -> Result<Vec<C64>, ConfigError> {
    text.split(',').map(parse_complex).collect()
}

fn check_shape(what: &str, got: (usize, usize), n: Option<usize>, m: Option<usize>) -> Result<(), ConfigError> {
    if n.is_some_and(|n| n != got.0) || m.is_some_and(|m| m != got.1) {
        return Err(invalid(format!(
            "{what} coupling is {}×{} but --n/--m ask for {}×{}",
            got.0,
            got.1,
            n.map_or("?".into(), |v| v.to_string()),
            m.map_or("?".into(), |v| v.to_string())
        )));
    }
    Ok(())
}

fn full_rows(body: &str) -> Result<Vec<Vec<C64>>, ConfigError> {
    let s: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| invalid("full: matrix must be written [[..],[..]]"))?;
    let mut rows = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let open = rest.strip_prefix('[').ok_or_else(|| invalid("full: each row must be bracketed"))?;
        let close = open.find(']').ok_or_else(|| invalid("full: unterminated row"))?;
        rows.push(parse_list(&open[..close])?);
        rest = &open[close + 1..];
        rest = rest.strip_prefix(',').unwrap_or(rest);
    }
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(invalid("full: rows must be non-empty and of equal length"));
    }
    Ok(rows)
}

/// Parses the coupling grammar into an `n × m` matrix. `n` and `m` may be
/// omitted for literals whose shape is explicit.
pub fn parse_coupling(text: &str, n: Option<usize>, m: Option<usize>) -> Result<CMatrix, ConfigError> {
    let (kind, body) = text
        .split_once(':')
        .ok_or_else(|| invalid(format!("coupling '{text}' lacks a kind prefix (diag:, uniform:, rank1:, full:, ginibre:)")))?;
    let need = |what: &str| -> Result<(usize, usize), ConfigError> {
        match (n, m) {
            (Some(n), Some(m)) if n > 0 && m > 0 => Ok((n, m)),
            _ => Err(invalid(format!("{what} coupling needs positive --n and --m"))),
        }
    };
    match kind {
        "diag" => {
            let d = parse_list(body)?;
            let (rows, cols) = (n.unwrap_or(d.len()), m.unwrap_or(d.len()));
            if d.len() != rows.min(cols) {
                return Err(invalid(format!("diag: has {} entries, expected min(n, m) = {}", d.len(), rows.min(cols))));
            }
            Ok(Mat::from_fn(rows, cols, |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) }))
        }
        "uniform" => {
            let (rows, cols) = need("uniform:")?;
            let v = parse_complex(body)?;
            Ok(Mat::from_fn(rows, cols, |_, _| v))
        }
        "rank1" => {
            let (v, w) = body.split_once(';').ok_or_else(|| invalid("rank1: expects v1,v2,..;w1,w2,.."))?;
            let (v, w) = (parse_list(v)?, parse_list(w)?);
            check_shape("rank1:", (v.len(), w.len()), n, m)?;
            Ok(Mat::from_fn(v.len(), w.len(), |i, j| v[i] * w[j]))
        }
        "full" => {
            let rows = full_rows(body)?;
            check_shape("full:", (rows.len(), rows[0].len()), n, m)?;
            Ok(Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]))
        }
        "ginibre" => {
            let (rows, cols) = need("ginibre:")?;
            let (seed, ensemble) = match body.split_once(':') {
                Some((s, e)) => (s, e.parse::<Ensemble>().map_err(|e| invalid(e.to_string()))?),
                None => (body, Ensemble::Complex),
            };
            let seed = seed.parse::<u64>().map_err(|_| invalid(format!("ginibre: seed '{seed}' is not an integer")))?;
            Ok(sample_ginibre(rows, cols, ensemble, seed))
        }
        other => Err(invalid(format!("unknown coupling kind '{other}' (diag, uniform, rank1, full, ginibre)"))),
    }
}

/// `start:stop:steps` (steps + 1 points, endpoints included) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || invalid(format!("invalid grid '{text}' (expected start:stop:steps or a comma list)"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, steps] => {
            let start: f64 = start.trim().parse().map_err(|_| bad())?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
            let steps: usize = steps.trim().parse().map_err(|_| bad())?;
            Ok(multilevel_rabi::experiments::linear_grid(start, stop, steps))
        }
        [list] => list.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

/// `lo:hi` (inclusive) or a comma list of integers.
pub fn parse_size_grid(text: &str) -> Result<Vec<usize>, ConfigError> {
    let bad = || invalid(format!("invalid size list '{text}' (expected lo:hi or a comma list)"));
    match text.split_once(':') {
        Some((lo, hi)) => {
            let lo: usize = lo.trim().parse().map_err(|_| bad())?;
            let hi: usize = hi.trim().parse().map_err(|_| bad())?;
            if hi < lo {
                return Err(bad());
            }
            Ok((lo..=hi).collect())
        }
        None => text.split(',').map(|v| v.trim().parse::<usize>().map_err(|_| bad())).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("0.5+1i").unwrap(), c(0.5, 1.0));
        assert_eq!(parse_complex("3-2.5i").unwrap(), c(3.0, -2.5));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("2e-3-1e-2i").unwrap(), c(2e-3, -1e-2));
        assert_eq!(parse_complex("-1e+2+4i").unwrap(), c(-100.0, 4.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn diag_literal() {
        let m = parse_coupling("diag:1.0,0.7", Some(2), Some(2)).unwrap();
        assert_eq!((m[(0, 0)], m[(1, 1)], m[(0, 1)]), (c(1.0, 0.0), c(0.7, 0.0), c(0.0, 0.0)));
        let rect = parse_coupling("diag:2", Some(1), Some(3)).unwrap();
        assert_eq!((rect.nrows(), rect.ncols()), (1, 3));
        assert!(parse_coupling("diag:1,2,3", Some(2), Some(2)).is_err());
    }

    #[test]
    fn uniform_rank1_full() {
        let u = parse_coupling("uniform:0.25", Some(3), Some(2)).unwrap();
        assert!(u.col_iter().flat_map(|c| c.iter()).all(|z| *z == c(0.25, 0.0)));
        assert!(parse_coupling("uniform:1", None, Some(2)).is_err());

        let r = parse_coupling("rank1:1,2;3,4i", None, None).unwrap();
        assert_eq!(r[(1, 1)], c(0.0, 8.0));
        assert!(parse_coupling("rank1:1,2;3", Some(3), None).is_err());

        let f = parse_coupling("full:[ [1+1i, 2], [0, -3i] ]", Some(2), Some(2)).unwrap();
        assert_eq!((f[(0, 0)], f[(1, 1)]), (c(1.0, 1.0), c(0.0, -3.0)));
        assert!(parse_coupling("full:[[1,2],[3]]", None, None).is_err());
    }

    #[test]
    fn ginibre_is_seeded() {
        let a = parse_coupling("ginibre:7", Some(3), Some(3)).unwrap();
        assert_eq!(a, parse_coupling("ginibre:7", Some(3), Some(3)).unwrap());
        let r = parse_coupling("ginibre:7:real", Some(3), Some(3)).unwrap();
        assert!(r.col_iter().flat_map(|c| c.iter()).all(|z| z.im == 0.0));
    }

    #[test]
    fn unknown_kind() {
        assert!(parse_coupling("banana:1", Some(1), Some(1)).is_err());
        assert!(parse_coupling("1,2", Some(1), Some(1)).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:4").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_grid("0:1").is_err());
        assert_eq!(parse_size_grid("2:5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_size_grid("2,10,50").unwrap(), vec![2, 10, 50]);
        assert!(parse_size_grid("5:2").is_err());
    }
}
