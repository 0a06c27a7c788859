//! Parsing of complex numbers, κ, θ and config files.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use cubic_core::params::KappaPoint;
use cubic_core::Complex64;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;

/// Parses `"re+imi"`, `"re-imi"`, `"imi"`, `"re"` or a JSON pair `[re, im]`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if t.starts_with('[') {
        let v: Value = serde_json::from_str(&t).map_err(|e| format!("bad pair '{s}': {e}"))?;
        return complex_from_json(&v);
    }
    let Some(body) = t.strip_suffix('i') else {
        return real(&t).map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not the leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, imag(&body[k..])?),
        None => (0.0, imag(body)?),
    };
    Ok(Complex64::new(re, im))
}

fn real(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("malformed number '{s}'"))
}

fn imag(s: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(s),
    }
}

fn complex_from_json(v: &Value) -> Result<Complex64, String> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(|| format!("malformed number {n}")),
        Value::String(s) => parse_complex(s),
        Value::Array(a) if a.len() == 2 => {
            let part = |x: &Value| x.as_f64().ok_or_else(|| format!("malformed pair {v}"));
            Ok(Complex64::new(part(&a[0])?, part(&a[1])?))
        }
        _ => Err(format!("expected a complex number, got {v}")),
    }
}

/// Splits a list given either as a JSON array or comma-separated text into
/// the textual form of each entry.
fn list_items(s: &str) -> Result<Vec<String>, String> {
    let t = s.trim();
    if t.starts_with('[') {
        let v: Value = serde_json::from_str(t).map_err(|e| format!("bad list '{s}': {e}"))?;
        let Value::Array(items) = v else {
            return Err(format!("expected a list, got '{s}'"));
        };
        Ok(items
            .iter()
            .map(|x| match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect())
    } else {
        Ok(t.split(',').map(|x| x.trim().to_string()).collect())
    }
}

pub fn parse_complex_list<const N: usize>(s: &str) -> Result<[Complex64; N], String> {
    let items = list_items(s)?;
    if items.len() != N {
        return Err(format!("expected {N} numbers, got {}", items.len()));
    }
    let v: Vec<Complex64> = items.iter().map(|x| parse_complex(x)).collect::<Result<_, _>>()?;
    Ok(v.try_into().expect("length checked"))
}

pub fn parse_theta(s: &str) -> Result<[Complex64; 4], String> {
    parse_complex_list::<4>(s)
}

pub fn parse_point(s: &str) -> Result<[Complex64; 3], String> {
    parse_complex_list::<3>(s)
}

pub fn parse_pair(s: &str) -> Result<[Complex64; 2], String> {
    parse_complex_list::<2>(s)
}

/// An integer, `p/q` or a plain decimal, read exactly.
fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (q != BigInt::from(0)).then(|| BigRational::new(p, q));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    let (int, frac) = s.split_once('.')?;
    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let negative = int.starts_with('-');
    let digits: BigInt = format!("{}{frac}", int.trim_start_matches(['-', '+'])).parse().ok()?;
    let value = BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32));
    Some(if negative { -value } else { value })
}

/// κ1..κ4, or all of κ0..κ4. When every entry is rational the exact values
/// are kept.
pub fn parse_kappa(s: &str) -> Result<KappaPoint, String> {
    let items = list_items(s)?;
    let rationals: Option<Vec<BigRational>> = items.iter().map(|x| parse_rational(x)).collect();
    match (items.len(), rationals) {
        (4, Some(q)) => Ok(KappaPoint::from_rationals(q.try_into().expect("length checked"))),
        (4, None) => {
            let v: Vec<Complex64> =
                items.iter().map(|x| parse_complex(x)).collect::<Result<_, _>>()?;
            Ok(KappaPoint::from_tail(v.try_into().expect("length checked")))
        }
        (5, Some(q)) => {
            let two = BigRational::from_integer(BigInt::from(2));
            let total = &q[0] * two + &q[1] + &q[2] + &q[3] + &q[4];
            if total != BigRational::from_integer(BigInt::from(1)) {
                return Err("κ must satisfy 2κ0 + κ1 + κ2 + κ3 + κ4 = 1".into());
            }
            let tail: [BigRational; 4] = q[1..].to_vec().try_into().expect("length checked");
            Ok(KappaPoint::from_rationals(tail))
        }
        (5, None) => {
            let v: Vec<Complex64> =
                items.iter().map(|x| parse_complex(x)).collect::<Result<_, _>>()?;
            KappaPoint::new(v.try_into().expect("length checked")).map_err(|e| e.to_string())
        }
        (n, _) => Err(format!("expected 4 or 5 values for κ, got {n}")),
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), lineno + 1);
        };
        let key = k.trim().trim_start_matches("--").to_string();
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            bail!("{}:{}: empty key", path.display(), lineno + 1);
        }
        out.insert(key, value);
    }
    Ok(out)
}

/// `re+imi` with shortest round-trip digits.
pub fn fmt_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("1.5+2i").unwrap(), Complex64::new(1.5, 2.0));
        assert_eq!(parse_complex("1e-3-2.5e2i").unwrap(), Complex64::new(1e-3, -250.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("-3").unwrap(), Complex64::new(-3.0, 0.0));
        assert_eq!(parse_complex("[0.5, -1]").unwrap(), Complex64::new(0.5, -1.0));
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn complex_format_round_trips() {
        for z in [Complex64::new(0.1, -0.2), Complex64::new(-1e-20, 3e15), Complex64::new(2.0, 0.0)] {
            assert_eq!(parse_complex(&fmt_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn lists() {
        let t = parse_theta("[[1,0], \"2-1i\", 3, 4]").unwrap();
        assert_eq!(t[1], Complex64::new(2.0, -1.0));
        assert_eq!(parse_theta("1,2,3,4+1i").unwrap()[3], Complex64::new(4.0, 1.0));
        assert!(parse_theta("1,2,3").is_err());
    }

    #[test]
    fn kappa_exact_and_float() {
        let k = parse_kappa("1/3, 2/7, 0.25, -1/5").unwrap();
        let q = k.exact().unwrap();
        assert_eq!(q[3], BigRational::new(1.into(), 4.into()));
        let f = parse_kappa("0.1+0.2i, 0.3, 0.4, 0.5").unwrap();
        assert!(f.exact().is_none());
        assert!(parse_kappa("0, 1/2, 1/2, 0, 0").is_ok());
        assert!(parse_kappa("1, 1/2, 1/2, 0, 0").is_err());
        assert!(parse_kappa("1/0, 1, 1, 1").is_err());
    }
}
