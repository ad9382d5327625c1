//! Second-order cone programs over complex data, embedded into the real
//! standard form by stacking `(Re, Im)` parts.
//!
//! A complex variable `z_i` occupies real columns `2i` (real part) and
//! `2i + 1` (imaginary part); real variables follow after all complex ones.
//! The embedding is an isometry: `||z||_2` equals the 2-norm of its
//! interleaved real image.

use super::{Cone, SparseMatrix, StandardConicProgram};
use crate::{Error, Result, C64};

/// `Re(sum a_i z_i) + sum b_j r_j + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealForm {
    pub complex: Vec<(usize, C64)>,
    pub real: Vec<(usize, f64)>,
    pub constant: f64,
}

impl RealForm {
    pub fn constant(c: f64) -> Self {
        RealForm {
            constant: c,
            ..Default::default()
        }
    }

    pub fn real_var(j: usize) -> Self {
        RealForm {
            real: vec![(j, 1.0)],
            ..Default::default()
        }
    }
}

/// `sum a_i z_i + sum b_j r_j + constant`, complex valued.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub complex: Vec<(usize, C64)>,
    pub real: Vec<(usize, C64)>,
    pub constant: C64,
}

impl AffineExpr {
    pub fn var(i: usize) -> Self {
        AffineExpr {
            complex: vec![(i, C64::new(1.0, 0.0))],
            ..Default::default()
        }
    }

    pub fn constant(c: C64) -> Self {
        AffineExpr {
            constant: c,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComplexConstraint {
    /// Both real and imaginary parts vanish.
    Equal(AffineExpr),
    RealEqual(RealForm),
    NonNegative(RealForm),
    /// `||(e_1, ..., e_k)||_2 <= bound`.
    SecondOrder { bound: RealForm, entries: Vec<AffineExpr> },
}

/// `minimize objective  s.t.  constraints`, over `num_complex` complex and
/// `num_real` real variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplexSocp {
    pub num_complex: usize,
    pub num_real: usize,
    pub objective: RealForm,
    pub constraints: Vec<ComplexConstraint>,
}

#[derive(Debug, Clone)]
pub struct EmbeddedProgram {
    pub program: StandardConicProgram,
    pub num_complex: usize,
    pub num_real: usize,
    /// Constant term dropped from the real objective.
    pub objective_constant: f64,
}

impl EmbeddedProgram {
    pub fn complex_part(&self, x: &[f64]) -> Vec<C64> {
        (0..self.num_complex)
            .map(|i| C64::new(x[2 * i], x[2 * i + 1]))
            .collect()
    }

    pub fn real_part(&self, x: &[f64]) -> Vec<f64> {
        x[2 * self.num_complex..2 * self.num_complex + self.num_real].to_vec()
    }

    pub fn embed_point(&self, z: &[C64], r: &[f64]) -> Vec<f64> {
        let mut x = embed_vector(z);
        x.extend_from_slice(r);
        x
    }
}

/// Interleaved `(Re, Im)` image of a complex vector.
pub fn embed_vector(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

struct RowSink {
    n_complex: usize,
    n_real: usize,
    triplets: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
    cones: Vec<Cone>,
}

impl RowSink {
    fn check_complex(&self, i: usize) -> Result<()> {
        if i >= self.n_complex {
            return Err(Error::invalid(format!("complex variable {i} out of range")));
        }
        Ok(())
    }

    fn check_real(&self, j: usize) -> Result<()> {
        if j >= self.n_real {
            return Err(Error::invalid(format!("real variable {j} out of range")));
        }
        Ok(())
    }

    // s = value(x)  <=>  A row = -coefficients, b = constant
    fn push_real(&mut self, f: &RealForm) -> Result<()> {
        let row = self.b.len();
        for &(i, a) in &f.complex {
            self.check_complex(i)?;
            self.triplets.push((row, 2 * i, -a.re));
            self.triplets.push((row, 2 * i + 1, a.im));
        }
        for &(j, v) in &f.real {
            self.check_real(j)?;
            self.triplets.push((row, 2 * self.n_complex + j, -v));
        }
        self.b.push(f.constant);
        Ok(())
    }

    fn push_complex(&mut self, e: &AffineExpr) -> Result<()> {
        let re_row = self.b.len();
        let im_row = re_row + 1;
        for &(i, a) in &e.complex {
            self.check_complex(i)?;
            // Re(a z) = a.re zr - a.im zi ; Im(a z) = a.im zr + a.re zi
            self.triplets.push((re_row, 2 * i, -a.re));
            self.triplets.push((re_row, 2 * i + 1, a.im));
            self.triplets.push((im_row, 2 * i, -a.im));
            self.triplets.push((im_row, 2 * i + 1, -a.re));
        }
        for &(j, v) in &e.real {
            self.check_real(j)?;
            let col = 2 * self.n_complex + j;
            self.triplets.push((re_row, col, -v.re));
            self.triplets.push((im_row, col, -v.im));
        }
        self.b.push(e.constant.re);
        self.b.push(e.constant.im);
        Ok(())
    }
}

/// Builds the real standard-form program equivalent to `p`.
pub fn embed_complex(p: &ComplexSocp) -> Result<EmbeddedProgram> {
    let n = 2 * p.num_complex + p.num_real;
    let mut sink = RowSink {
        n_complex: p.num_complex,
        n_real: p.num_real,
        triplets: Vec::new(),
        b: Vec::new(),
        cones: Vec::new(),
    };
    // Objective via the same coefficient convention as a row.
    let mut c = vec![0.0; n];
    for &(i, a) in &p.objective.complex {
        sink.check_complex(i)?;
        c[2 * i] += a.re;
        c[2 * i + 1] -= a.im;
    }
    for &(j, v) in &p.objective.real {
        sink.check_real(j)?;
        c[2 * p.num_complex + j] += v;
    }

    // Cones are emitted grouped by constraint in the given order.
    for con in &p.constraints {
        match con {
            ComplexConstraint::Equal(e) => {
                sink.push_complex(e)?;
                sink.cones.push(Cone::Zero(2));
            }
            ComplexConstraint::RealEqual(f) => {
                sink.push_real(f)?;
                sink.cones.push(Cone::Zero(1));
            }
            ComplexConstraint::NonNegative(f) => {
                sink.push_real(f)?;
                sink.cones.push(Cone::NonNegative(1));
            }
            ComplexConstraint::SecondOrder { bound, entries } => {
                sink.push_real(bound)?;
                for e in entries {
                    sink.push_complex(e)?;
                }
                sink.cones.push(Cone::SecondOrder(1 + 2 * entries.len()));
            }
        }
    }
    let m = sink.b.len();
    let a = SparseMatrix::from_triplets(m, n, &sink.triplets)?;
    let program = StandardConicProgram::new(c, a, sink.b, merge_cones(sink.cones))?;
    Ok(EmbeddedProgram {
        program,
        num_complex: p.num_complex,
        num_real: p.num_real,
        objective_constant: p.objective.constant,
    })
}

/// Fuses runs of adjacent zero or nonnegative cones.
fn merge_cones(cones: Vec<Cone>) -> Vec<Cone> {
    let mut out: Vec<Cone> = Vec::with_capacity(cones.len());
    for c in cones {
        match (out.last_mut(), c) {
            (Some(Cone::Zero(d)), Cone::Zero(e)) => *d += e,
            (Some(Cone::NonNegative(d)), Cone::NonNegative(e)) => *d += e,
            _ => out.push(c),
        }
    }
    out
}
