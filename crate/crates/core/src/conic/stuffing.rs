//! Matrix stuffing: a program skeleton with a frozen sparsity pattern whose
//! numeric entries are filled from named instance parameters.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{Cone, SparseMatrix, StandardConicProgram};
use crate::{Error, Result};

pub type ParamValues = BTreeMap<String, f64>;

/// Value of one program entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Fixed(f64),
    /// `coefficient * product of the named parameters`.
    Slot { coefficient: f64, params: Vec<String> },
}

impl Entry {
    pub fn param(name: impl Into<String>) -> Self {
        Entry::Slot {
            coefficient: 1.0,
            params: vec![name.into()],
        }
    }

    pub fn scaled(coefficient: f64, params: &[&str]) -> Self {
        Entry::Slot {
            coefficient,
            params: params.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Target {
    A(usize),
    B(usize),
    C(usize),
}

#[derive(Debug, Clone)]
struct Slot {
    target: Target,
    coefficient: f64,
    params: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StuffingTemplate {
    skeleton: StandardConicProgram,
    slots: Vec<Slot>,
    names: Vec<String>,
}

#[derive(Debug, Default)]
pub struct TemplateBuilder {
    num_vars: usize,
    cones: Vec<Cone>,
    a: Vec<(usize, usize, Entry)>,
    b: Vec<(usize, Entry)>,
    c: Vec<(usize, Entry)>,
}

impl TemplateBuilder {
    pub fn new(num_vars: usize) -> Self {
        TemplateBuilder {
            num_vars,
            ..Default::default()
        }
    }

    /// Appends a cone block and returns the index of its first row.
    pub fn cone(&mut self, cone: Cone) -> usize {
        let start = self.num_rows();
        self.cones.push(cone);
        start
    }

    pub fn num_rows(&self) -> usize {
        self.cones.iter().map(Cone::dim).sum()
    }

    pub fn a(&mut self, row: usize, col: usize, entry: Entry) -> &mut Self {
        self.a.push((row, col, entry));
        self
    }

    pub fn b(&mut self, row: usize, entry: Entry) -> &mut Self {
        self.b.push((row, entry));
        self
    }

    pub fn c(&mut self, col: usize, entry: Entry) -> &mut Self {
        self.c.push((col, entry));
        self
    }

    pub fn build(self) -> Result<StuffingTemplate> {
        let m = self.num_rows();
        let n = self.num_vars;
        let mut seen = HashSet::new();
        for &(r, c, _) in &self.a {
            if !seen.insert((r, c)) {
                return Err(Error::invalid(format!("A entry ({r}, {c}) specified twice")));
            }
        }
        let triplets: Vec<(usize, usize, f64)> = self
            .a
            .iter()
            .map(|(r, c, e)| (*r, *c, fixed_value(e)))
            .collect();
        let a = SparseMatrix::from_triplets(m, n, &triplets)?;
        let mut b = vec![0.0; m];
        let mut c = vec![0.0; n];
        let mut names = BTreeSet::new();
        let mut raw_slots = Vec::new();
        let mut targets = HashSet::new();
        for (r, col, e) in &self.a {
            let k = a.find(*r, *col).expect("entry was just inserted");
            raw_slots.push((Target::A(k), e));
        }
        for (r, e) in &self.b {
            if *r >= m {
                return Err(Error::invalid(format!("b row {r} outside {m} rows")));
            }
            b[*r] = fixed_value(e);
            raw_slots.push((Target::B(*r), e));
        }
        for (col, e) in &self.c {
            if *col >= n {
                return Err(Error::invalid(format!("c entry {col} outside {n} variables")));
            }
            c[*col] = fixed_value(e);
            raw_slots.push((Target::C(*col), e));
        }
        for (t, e) in &raw_slots {
            if !targets.insert(*t) {
                return Err(Error::invalid(format!("{t:?} specified twice")));
            }
            if let Entry::Slot { params, .. } = e {
                names.extend(params.iter().cloned());
            }
        }
        let names: Vec<String> = names.into_iter().collect();
        let slots = raw_slots
            .into_iter()
            .filter_map(|(target, e)| match e {
                Entry::Fixed(_) => None,
                Entry::Slot { coefficient, params } => Some(Slot {
                    target,
                    coefficient: *coefficient,
                    params: params
                        .iter()
                        .map(|p| names.binary_search(p).expect("collected above"))
                        .collect(),
                }),
            })
            .collect();
        let skeleton = StandardConicProgram::new(c, a, b, self.cones)?;
        Ok(StuffingTemplate {
            skeleton,
            slots,
            names,
        })
    }
}

fn fixed_value(e: &Entry) -> f64 {
    match e {
        Entry::Fixed(v) => *v,
        Entry::Slot { .. } => 0.0,
    }
}

impl StuffingTemplate {
    /// Parameter names the template expects, sorted.
    pub fn parameter_names(&self) -> &[String] {
        &self.names
    }

    pub fn skeleton(&self) -> &StandardConicProgram {
        &self.skeleton
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }
}

/// Fills the template's slots. The result always has the skeleton's
/// sparsity pattern and cones.
pub fn stuff(template: &StuffingTemplate, params: &ParamValues) -> Result<StandardConicProgram> {
    for name in params.keys() {
        if template.names.binary_search(name).is_err() {
            return Err(Error::UnknownParameter(name.clone()));
        }
    }
    let mut values = Vec::with_capacity(template.names.len());
    for name in &template.names {
        let v = *params
            .get(name)
            .ok_or_else(|| Error::MissingParameter(name.clone()))?;
        if !v.is_finite() {
            return Err(Error::NonFinite(name.clone()));
        }
        values.push(v);
    }
    let mut prog = template.skeleton.clone();
    let (c, a, b) = prog.parts_mut();
    let a_vals = a.values_mut();
    for slot in &template.slots {
        let v = slot
            .params
            .iter()
            .fold(slot.coefficient, |acc, &p| acc * values[p]);
        match slot.target {
            Target::A(k) => a_vals[k] = v,
            Target::B(r) => b[r] = v,
            Target::C(j) => c[j] = v,
        }
    }
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_template() -> StuffingTemplate {
        // minimize p  s.t.  h^2 p >= gamma * sigma2
        let mut t = TemplateBuilder::new(1);
        let r = t.cone(Cone::NonNegative(1));
        t.c(0, Entry::Fixed(1.0))
            .a(r, 0, Entry::scaled(-1.0, &["h", "h"]))
            .b(r, Entry::scaled(-1.0, &["gamma", "sigma2"]));
        t.build().unwrap()
    }

    fn params(gamma: f64) -> ParamValues {
        [("gamma", gamma), ("sigma2", 1.0), ("h", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    #[test]
    fn stuffing_is_deterministic_and_keeps_pattern() {
        let t = power_template();
        assert_eq!(t.parameter_names(), ["gamma", "h", "sigma2"]);
        let p1 = stuff(&t, &params(1.0)).unwrap();
        let p2 = stuff(&t, &params(1.0)).unwrap();
        assert_eq!(p1, p2);
        let p3 = stuff(&t, &params(4.0)).unwrap();
        assert!(p1.a().same_pattern(p3.a()));
        assert!(t.skeleton().a().same_pattern(p3.a()));
        assert_eq!(p3.b(), &[-4.0]);
    }

    #[test]
    fn zero_parameters_keep_explicit_entries() {
        let t = power_template();
        let mut p = params(1.0);
        p.insert("h".into(), 0.0);
        let prog = stuff(&t, &p).unwrap();
        assert_eq!(prog.a().nnz(), 1);
    }

    #[test]
    fn parameter_errors() {
        let t = power_template();
        let mut p = params(1.0);
        p.remove("h");
        assert!(matches!(stuff(&t, &p), Err(Error::MissingParameter(n)) if n == "h"));
        let mut p = params(1.0);
        p.insert("bogus".into(), 1.0);
        assert!(matches!(stuff(&t, &p), Err(Error::UnknownParameter(_))));
        let p = params(f64::NAN);
        assert!(matches!(stuff(&t, &p), Err(Error::NonFinite(_))));
    }

    #[test]
    fn duplicate_entries_rejected() {
        let mut t = TemplateBuilder::new(1);
        let r = t.cone(Cone::Zero(1));
        t.a(r, 0, Entry::Fixed(1.0)).a(r, 0, Entry::Fixed(2.0));
        assert!(t.build().is_err());
    }
}
