//! ℚ/ℤ-valued cochains on finite groups and the bar differential.
//!
//! Orientation of the differential:
//!
//! ```text
//! (dη)(a,b)     = η(a) + η(b) − η(ab)
//! (dγ)(a,b,c)   = γ(a,b) + γ(ab,c) − γ(a,bc) − γ(b,c)
//! (dα)(a,b,c,d) = α(b,c,d) − α(ab,c,d) + α(a,bc,d) − α(a,b,cd) + α(a,b,c)
//! ```
//!
//! The degree-2 sign is the one under which the one-generator lift in
//! [`crate::lift`] satisfies `dγ̃ = ρ*α`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupHom};
use crate::qz::QZ;
use crate::snf::{solve_sparse, Certificate, SolveOutcome, SparseRow};

pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    group: Arc<FiniteGroup>,
    degree: usize,
    values: Vec<QZ>,
}

/// The signed terms of `(d c)(args)` for a cochain `c` of degree
/// `args.len() - 1`, as `(sign, argument tuple of c)`.
pub fn differential_terms(group: &FiniteGroup, args: &[usize]) -> Vec<(i64, Vec<usize>)> {
    let m = |a, b| group.mul(a, b);
    match *args {
        [_] => vec![],
        [a, b] => vec![(1, vec![a]), (1, vec![b]), (-1, vec![m(a, b)])],
        [a, b, c] => vec![
            (1, vec![a, b]),
            (1, vec![m(a, b), c]),
            (-1, vec![a, m(b, c)]),
            (-1, vec![b, c]),
        ],
        [a, b, c, d] => vec![
            (1, vec![b, c, d]),
            (-1, vec![m(a, b), c, d]),
            (1, vec![a, m(b, c), d]),
            (-1, vec![a, b, m(c, d)]),
            (1, vec![a, b, c]),
        ],
        _ => panic!("differential_terms: unsupported arity {}", args.len()),
    }
}

fn tuple_index(order: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &x| acc * order + x)
}

fn index_tuple(order: usize, degree: usize, mut idx: usize) -> Vec<usize> {
    let mut t = vec![0; degree];
    for slot in t.iter_mut().rev() {
        *slot = idx % order;
        idx /= order;
    }
    t
}

impl Cochain {
    pub fn zero(group: Arc<FiniteGroup>, degree: usize) -> Result<Cochain> {
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooHigh(degree));
        }
        let size = group.order().pow(degree as u32);
        Ok(Cochain { group, degree, values: vec![QZ::ZERO; size] })
    }

    pub fn from_fn(group: Arc<FiniteGroup>, degree: usize, mut f: impl FnMut(&[usize]) -> QZ) -> Result<Cochain> {
        let mut c = Cochain::zero(group, degree)?;
        let n = c.group.order();
        for (i, v) in c.values.iter_mut().enumerate() {
            *v = f(&index_tuple(n, degree, i));
        }
        Ok(c)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[QZ] {
        &self.values
    }

    #[inline]
    pub fn get(&self, args: &[usize]) -> QZ {
        debug_assert_eq!(args.len(), self.degree);
        self.values[tuple_index(self.group.order(), args)]
    }

    /// Shorthand for degree-3 cochains.
    #[inline]
    pub fn at3(&self, a: usize, b: usize, c: usize) -> QZ {
        let n = self.group.order();
        self.values[(a * n + b) * n + c]
    }

    pub fn set(&mut self, args: &[usize], v: QZ) -> Result<()> {
        if args.len() != self.degree {
            return Err(Error::DimensionMismatch(format!("degree {} cochain, {} arguments", self.degree, args.len())));
        }
        for &a in args {
            self.group.check_element(a)?;
        }
        let i = tuple_index(self.group.order(), args);
        self.values[i] = v;
        Ok(())
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let (n, k) = (self.group.order(), self.degree);
        (0..self.values.len()).map(move |i| index_tuple(n, k, i))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(QZ::is_zero)
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        if self.group != other.group || self.degree != other.degree {
            return Err(Error::GroupMismatch("adding cochains of different shape".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| *a + *b).collect();
        Ok(Cochain { group: self.group.clone(), degree: self.degree, values })
    }

    pub fn scale(&self, k: i64) -> Cochain {
        Cochain { group: self.group.clone(), degree: self.degree, values: self.values.iter().map(|v| v.scale(k)).collect() }
    }

    pub fn differential(&self) -> Result<Cochain> {
        if self.degree >= MAX_DEGREE {
            return Err(Error::DegreeTooHigh(self.degree));
        }
        let g = self.group.clone();
        Cochain::from_fn(g.clone(), self.degree + 1, |args| {
            differential_terms(&g, args).into_iter().map(|(s, t)| self.get(&t).scale(s)).sum()
        })
    }

    pub fn is_normalized(&self) -> bool {
        self.tuples().zip(&self.values).all(|(t, v)| v.is_zero() || !t.contains(&0))
    }

    /// Degree-4 cochains have no modeled differential and report closed.
    pub fn validate(&self) -> CochainReport {
        let closed = if self.degree < MAX_DEGREE {
            self.differential().map(|d| d.is_zero()).unwrap_or(false)
        } else {
            true
        };
        CochainReport { closed, normalized: self.is_normalized() }
    }

    /// [`Cochain::validate`] restricted to tuples from `elements`, which
    /// should be closed under multiplication.
    pub fn validate_on(&self, elements: &[usize]) -> Result<CochainReport> {
        for &x in elements {
            self.group.check_element(x)?;
        }
        let k = elements.len();
        let tuple = |idx: usize, len: usize| -> Vec<usize> { index_tuple(k, len, idx).into_iter().map(|i| elements[i]).collect() };
        let normalized = (0..k.pow(self.degree as u32))
            .map(|i| tuple(i, self.degree))
            .all(|t| !t.contains(&self.group.identity()) || self.get(&t).is_zero());
        let closed = self.degree >= MAX_DEGREE
            || (0..k.pow(self.degree as u32 + 1)).all(|i| {
                let t = tuple(i, self.degree + 1);
                differential_terms(&self.group, &t).into_iter().map(|(s, u)| self.get(&u).scale(s)).sum::<QZ>().is_zero()
            });
        Ok(CochainReport { closed, normalized })
    }

    pub fn pullback(&self, f: &GroupHom) -> Result<Cochain> {
        if **f.target() != *self.group {
            return Err(Error::GroupMismatch(format!(
                "homomorphism lands in {}, cochain lives on {}",
                f.target().label(),
                self.group.label()
            )));
        }
        Cochain::from_fn(f.source().clone(), self.degree, |args| {
            let img: Vec<usize> = args.iter().map(|&x| f.apply(x)).collect();
            self.get(&img)
        })
    }

    /// Solves `d b = self` for a closed cochain of degree 2 or 3.
    pub fn coboundary_solve(&self) -> Result<Coboundary> {
        if !(2..=3).contains(&self.degree) {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        if !self.validate().closed {
            return Err(Error::NotClosed);
        }
        let n = self.group.order();
        let unknowns = n.pow(self.degree as u32 - 1);
        let rows: Vec<SparseRow> = self
            .tuples()
            .zip(&self.values)
            .map(|(t, v)| {
                let mut row = SparseRow::new(*v);
                for (s, arg) in differential_terms(&self.group, &t) {
                    row.add_term(tuple_index(n, &arg), s);
                }
                row
            })
            .collect();
        match solve_sparse(unknowns, rows)? {
            SolveOutcome::Solved(values) => {
                let b = Cochain { group: self.group.clone(), degree: self.degree - 1, values };
                debug_assert_eq!(&b.differential()?, self);
                Ok(Coboundary::Exact(b))
            }
            SolveOutcome::Unsolvable(cert) => Ok(Coboundary::Nontrivial(cert)),
        }
    }

    /// Text format: `group <spec> degree k` followed by `i₁ … iₖ p/q`
    /// lines; omitted tuples are 0.
    pub fn to_text(&self) -> String {
        let mut out = format!("group {} degree {}\n", self.group.label(), self.degree);
        for (t, v) in self.tuples().zip(&self.values) {
            if !v.is_zero() {
                let args: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "{} {}", args.join(" "), v);
            }
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Cochain> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty cochain file".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let [_, spec, _, k] = toks[..] else {
            return Err(Error::Parse(format!("expected `group <spec> degree k`, got {header:?}")));
        };
        if toks[0] != "group" || toks[2] != "degree" {
            return Err(Error::Parse(format!("expected `group <spec> degree k`, got {header:?}")));
        }
        let degree: usize = k.parse().map_err(|_| Error::Parse(format!("bad degree {k:?}")))?;
        let group = Arc::new(FiniteGroup::from_spec(spec)?);
        let mut c = Cochain::zero(group, degree)?;
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != degree + 1 {
                return Err(Error::Parse(format!("expected {} indices and a value in {line:?}", degree)));
            }
            let args: Vec<usize> = toks[..degree]
                .iter()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad index {t:?}"))))
                .collect::<Result<_>>()?;
            let v: QZ = toks[degree].parse()?;
            c.set(&args, v)?;
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Cochain> {
        Cochain::parse_text(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CochainReport {
    pub closed: bool,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coboundary {
    Exact(Cochain),
    Nontrivial(Certificate),
}

impl Coboundary {
    pub fn is_exact(&self) -> bool {
        matches!(self, Coboundary::Exact(_))
    }
}

/// `α(j,k,l) = N·j/n` if `k + l ≥ n` and 0 otherwise, on representatives
/// `0..n`.
pub fn alpha_cyclic(n: usize, level: i64) -> Result<Cochain> {
    let group = Arc::new(FiniteGroup::cyclic(n)?);
    alpha_cyclic_on(group, level)
}

fn alpha_cyclic_on(group: Arc<FiniteGroup>, level: i64) -> Result<Cochain> {
    let n = group.order();
    Cochain::from_fn(group, 3, |args| {
        let (j, k, l) = (args[0], args[1], args[2]);
        if k + l >= n {
            QZ::new(level * j as i64, n as i64)
        } else {
            QZ::ZERO
        }
    })
}

/// Pullback of `alpha_cyclic(m, level)` along a homomorphism into ℤ/m.
pub fn alpha_pulled_back(character: &GroupHom, level: i64) -> Result<Cochain> {
    let target = character.target().clone();
    let cyclic = FiniteGroup::cyclic(target.order())?;
    if *target != cyclic {
        return Err(Error::GroupMismatch(format!("{} is not presented as a cyclic group", target.label())));
    }
    alpha_cyclic_on(target, level)?.pullback(character)
}
