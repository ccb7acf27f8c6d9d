//! Hamiltonian JSON and density-matrix text formats.
//!
//! Hamiltonian: `{"local_dim":2,"terms":[{"ops":["X","X"],"coeff":1.0}, ...]}`.
//!
//! Density matrix: a header line `d M`, then `d^M` lines of `d^M` whitespace-separated
//! complex entries written as `re+imj`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{C64, HermitianOp, Pauli, PauliTwoBodyHamiltonian, pow};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct HamiltonianFile {
    local_dim: usize,
    terms: Vec<TermFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermFile {
    ops: Vec<String>,
    coeff: f64,
}

pub fn hamiltonian_from_json(text: &str) -> Result<PauliTwoBodyHamiltonian> {
    let file: HamiltonianFile = serde_json::from_str(text)?;
    if file.local_dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "only local_dim 2 Hamiltonians are supported, got {}",
            file.local_dim
        )));
    }
    let mut terms = Vec::with_capacity(file.terms.len());
    for t in &file.terms {
        if t.ops.len() != 2 {
            return Err(Error::Parse(format!("term {:?} is not two-body", t.ops)));
        }
        if !t.coeff.is_finite() {
            return Err(Error::Parse(format!("non-finite coefficient in term {:?}", t.ops)));
        }
        terms.push((t.ops[0].parse::<Pauli>()?, t.ops[1].parse::<Pauli>()?, t.coeff));
    }
    Ok(PauliTwoBodyHamiltonian::from_terms(terms))
}

pub fn hamiltonian_to_json(h: &PauliTwoBodyHamiltonian) -> String {
    let file = HamiltonianFile {
        local_dim: 2,
        terms: h
            .terms()
            .into_iter()
            .map(|(a, b, coeff)| TermFile { ops: vec![a.to_string(), b.to_string()], coeff })
            .collect(),
    };
    serde_json::to_string(&file).expect("serializing plain data")
}

fn parse_complex(tok: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("bad complex entry {tok:?}"));
    let num = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = tok.strip_suffix(['j', 'J']) else {
        return tok.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, num(&body[i..])?))
        }
        None => Ok(C64::new(0.0, num(body)?)),
    }
}

/// Parses the density-matrix text format; the result is symmetrized but not checked
/// for positivity or unit trace.
pub fn read_density_text(text: &str) -> Result<HermitianOp> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty density file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
        .collect::<Result<_>>()?;
    let [d, m] = dims[..] else {
        return Err(Error::Parse(format!("header must be `d M`, got {header:?}")));
    };
    if d < 2 || m == 0 || m > 16 {
        return Err(Error::Parse(format!("unsupported header d={d} M={m}")));
    }
    let dim = pow(d, m);
    let mut mat = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("expected {dim} rows, got {r}")))?;
        let row: Vec<C64> = line.split_whitespace().map(parse_complex).collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(Error::Parse(format!("row {} has {} entries, expected {dim}", r + 1, row.len())));
        }
        for (c, z) in row.into_iter().enumerate() {
            mat[(r, c)] = z;
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("more than {dim} rows")));
    }
    HermitianOp::new(d, m, mat)
}

pub fn write_density_text(op: &HermitianOp) -> String {
    let mut out = format!("{} {}\n", op.local_dim(), op.sites());
    for r in 0..op.dim() {
        let row: Vec<String> = (0..op.dim())
            .map(|c| {
                let z = op.matrix()[(r, c)];
                format!("{:.16e}{:+.16e}j", z.re, z.im)
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::DensityMatrix;

    #[test]
    fn complex_tokens() {
        let cases = [
            ("1.5", C64::new(1.5, 0.0)),
            ("0.5+0.25j", C64::new(0.5, 0.25)),
            ("-1e-3-2E-4j", C64::new(-1e-3, -2e-4)),
            ("1.0e0+0.0e0j", C64::new(1.0, 0.0)),
            ("2j", C64::new(0.0, 2.0)),
            ("-j", C64::new(0.0, -1.0)),
            ("+0.5-0j", C64::new(0.5, 0.0)),
        ];
        for (tok, want) in cases {
            assert_eq!(parse_complex(tok).unwrap(), want, "{tok}");
        }
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2").is_err());
    }

    #[test]
    fn density_text_round_trip() {
        let s = 0.5f64.sqrt();
        let rho = DensityMatrix::pure(2, 2, &[C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(0.0, -s), C64::new(0.0, 0.0)]).unwrap();
        let text = write_density_text(rho.op());
        assert!(text.starts_with("2 2\n"));
        let back = read_density_text(&text).unwrap();
        assert_eq!(&back, rho.op());
    }

    #[test]
    fn density_text_errors() {
        assert!(read_density_text("").is_err());
        assert!(read_density_text("2\n1 0\n0 1\n").is_err());
        assert!(read_density_text("2 1\n1 0\n").is_err());
        assert!(read_density_text("2 1\n1 0\n0 1 2\n").is_err());
        assert!(read_density_text("2 1\n1 0\n0 1\n0 0\n").is_err());
        assert!(matches!(read_density_text("2 1\n1 5\n0 0\n"), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let text = r#"{"local_dim":2,"terms":[{"ops":["X","X"],"coeff":0.5},{"ops":["Y","Y"],"coeff":1.5},{"ops":["X","X"],"coeff":0.5}]}"#;
        let h = hamiltonian_from_json(text).unwrap();
        assert_eq!(h.coeff(Pauli::X, Pauli::X), 1.0);
        assert_eq!(h.coeff(Pauli::Y, Pauli::Y), 1.5);
        assert_eq!(hamiltonian_from_json(&hamiltonian_to_json(&h)).unwrap(), h);
    }

    #[test]
    fn hamiltonian_json_errors() {
        assert!(hamiltonian_from_json(r#"{"local_dim":3,"terms":[]}"#).is_err());
        assert!(hamiltonian_from_json(r#"{"local_dim":2,"terms":[{"ops":["X"],"coeff":1}]}"#).is_err());
        assert!(hamiltonian_from_json(r#"{"local_dim":2,"terms":[{"ops":["X","W"],"coeff":1}]}"#).is_err());
        assert!(hamiltonian_from_json("not json").is_err());
    }
}
