use std::fmt::Write as _;

use super::{Cone, SparseMatrix};
use crate::error::check_dim;
use crate::{Error, Result};

/// `minimize c^T x  s.t.  A x + s = b,  s in K`, with `K` the ordered
/// product of `cones`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardConicProgram {
    c: Vec<f64>,
    a: SparseMatrix,
    b: Vec<f64>,
    cones: Vec<Cone>,
}

impl StandardConicProgram {
    pub fn new(c: Vec<f64>, a: SparseMatrix, b: Vec<f64>, cones: Vec<Cone>) -> Result<Self> {
        check_dim("program columns", c.len(), a.ncols())?;
        check_dim("program rows", b.len(), a.nrows())?;
        for cone in &cones {
            cone.validate()?;
        }
        let total: usize = cones.iter().map(Cone::dim).sum();
        check_dim("cone dimensions", a.nrows(), total)?;
        Ok(StandardConicProgram { c, a, b, cones })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<f64>, &mut SparseMatrix, &mut Vec<f64>) {
        (&mut self.c, &mut self.a, &mut self.b)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.c, x)
    }

    /// Plain-text serialization: header `n m k`, the objective on one line,
    /// one `row col value` triplet per line, `b` on one line, then one cone
    /// descriptor (`Z d`, `N d` or `Q d`) per line. Values carry 17
    /// significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.num_vars(), self.num_rows(), self.cones.len());
        out.push_str(&join_values(&self.c));
        out.push('\n');
        for (r, c, v) in self.a.triplets() {
            let _ = writeln!(out, "{r} {c} {v:.16e}");
        }
        out.push_str(&join_values(&self.b));
        out.push('\n');
        for cone in &self.cones {
            let (tag, d) = match *cone {
                Cone::Zero(d) => ('Z', d),
                Cone::NonNegative(d) => ('N', d),
                Cone::SecondOrder(d) => ('Q', d),
            };
            let _ = writeln!(out, "{tag} {d}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or_else(|| Error::parse(1, "empty input"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(1, format!("bad header token `{t}`"))))
            .collect::<Result<_>>()?;
        let [n, m, k] = dims[..] else {
            return Err(Error::parse(1, "header must be `n m k`"));
        };
        while lines.len() > 3 + k && lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        if lines.len() < 3 + k {
            return Err(Error::parse(lines.len(), "truncated program"));
        }
        let c = parse_values(lines[1], 2, n)?;
        let cone_start = lines.len() - k;
        let b_line = cone_start - 1;
        let b = parse_values(lines[b_line], b_line + 1, m)?;
        let mut triplets = Vec::new();
        for (i, line) in lines.iter().enumerate().take(b_line).skip(2) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::parse(i + 1, "expected `row col value`"));
            }
            let r = toks[0].parse().map_err(|_| Error::parse(i + 1, "bad row index"))?;
            let col = toks[1].parse().map_err(|_| Error::parse(i + 1, "bad column index"))?;
            let v = toks[2].parse().map_err(|_| Error::parse(i + 1, "bad value"))?;
            triplets.push((r, col, v));
        }
        let mut cones = Vec::with_capacity(k);
        for (i, line) in lines.iter().enumerate().skip(cone_start) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let d: usize = match toks.get(1).map(|t| t.parse()) {
                Some(Ok(d)) if toks.len() == 2 => d,
                _ => return Err(Error::parse(i + 1, "expected cone descriptor `Z|N|Q d`")),
            };
            cones.push(match toks[0] {
                "Z" => Cone::Zero(d),
                "N" => Cone::NonNegative(d),
                "Q" => Cone::SecondOrder(d),
                other => return Err(Error::parse(i + 1, format!("unknown cone `{other}`"))),
            });
        }
        let a = SparseMatrix::from_triplets(m, n, &triplets)?;
        StandardConicProgram::new(c, a, b, cones)
    }
}

fn join_values(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ")
}

fn parse_values(line: &str, lineno: usize, expected: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(lineno, format!("bad number `{t}`"))))
        .collect::<Result<_>>()?;
    if v.len() != expected {
        return Err(Error::parse(lineno, format!("expected {expected} values, found {}", v.len())));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> StandardConicProgram {
        let a = SparseMatrix::from_triplets(4, 2, &[(0, 0, -1.0), (1, 1, -1.0), (2, 0, 0.5), (3, 1, 2.0)])
            .unwrap();
        StandardConicProgram::new(
            vec![1.0, 0.25],
            a,
            vec![-1.0, 0.0, 3.0, 4.0],
            vec![Cone::NonNegative(1), Cone::SecondOrder(3)],
        )
        .unwrap()
    }

    #[test]
    fn text_roundtrip() {
        let p = small();
        let back = StandardConicProgram::from_text(&p.to_text()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn cone_dims_must_cover_rows() {
        let a = SparseMatrix::zeros(2, 1);
        assert!(StandardConicProgram::new(vec![0.0], a, vec![0.0; 2], vec![Cone::Zero(1)]).is_err());
    }

    #[test]
    fn empty_program_roundtrip() {
        let p = StandardConicProgram::new(vec![], SparseMatrix::zeros(0, 0), vec![], vec![]).unwrap();
        assert_eq!(StandardConicProgram::from_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn malformed_text_is_a_parse_error() {
        assert!(matches!(StandardConicProgram::from_text("1 1\n"), Err(Error::Parse { .. })));
        assert!(StandardConicProgram::from_text("1 1 1\n0\n0 0 1\n1\nX 1\n").is_err());
    }

    proptest! {
        #[test]
        fn text_roundtrip_preserves_values(vals in proptest::collection::vec(-1e6..1e6f64, 4)) {
            let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, vals[0]), (1, 1, vals[1])]).unwrap();
            let p = StandardConicProgram::new(vec![vals[2], vals[3]], a, vec![vals[0], vals[3]],
                vec![Cone::SecondOrder(2)]).unwrap();
            let back = StandardConicProgram::from_text(&p.to_text()).unwrap();
            prop_assert_eq!(p, back);
        }
    }
}
