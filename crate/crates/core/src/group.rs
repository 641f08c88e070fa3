//! Finite groups backed by multiplication tables.
//!
//! Elements are dense indices `0..order`; index 0 is the identity and
//! `table[a * order + b]` is the product `a·b`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverses: Vec<usize>,
    label: String,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.label, self.order)
    }
}

impl FiniteGroup {
    /// Validates a row-major multiplication table (row = left factor).
    pub fn from_table(order: usize, table: Vec<usize>) -> Result<FiniteGroup> {
        Self::from_table_labeled(order, table, format!("table:{order}"))
    }

    fn from_table_labeled(order: usize, table: Vec<usize>, label: String) -> Result<FiniteGroup> {
        if order == 0 {
            return Err(Error::InvalidPresentation("group of order 0".into()));
        }
        if table.len() != order * order {
            return Err(Error::DimensionMismatch(format!(
                "table of a group of order {order} needs {} entries, got {}",
                order * order,
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= order) {
            return Err(Error::InvalidElement { index: bad, order });
        }
        for i in 0..order {
            let row: BTreeSet<usize> = (0..order).map(|j| table[i * order + j]).collect();
            let col: BTreeSet<usize> = (0..order).map(|j| table[j * order + i]).collect();
            if row.len() != order {
                return Err(Error::NotLatinSquare(format!("row {i} repeats an element")));
            }
            if col.len() != order {
                return Err(Error::NotLatinSquare(format!("column {i} repeats an element")));
            }
        }
        if (0..order).any(|a| table[a] != a || table[a * order] != a) {
            return Err(Error::IdentityNotZero);
        }
        for a in 0..order {
            for b in 0..order {
                let ab = table[a * order + b];
                for c in 0..order {
                    if table[ab * order + c] != table[a * order + table[b * order + c]] {
                        return Err(Error::NonAssociative(a, b, c));
                    }
                }
            }
        }
        let mut inverses = vec![0; order];
        for (a, inv) in inverses.iter_mut().enumerate() {
            let right = (0..order).find(|&b| table[a * order + b] == 0);
            match right {
                Some(b) if table[b * order + a] == 0 => *inv = b,
                _ => return Err(Error::MissingInverse(a)),
            }
        }
        Ok(FiniteGroup { order, table, inverses, label })
    }

    pub fn cyclic(n: usize) -> Result<FiniteGroup> {
        if n == 0 {
            return Err(Error::ZeroModulus);
        }
        let table = (0..n * n).map(|k| (k / n + k % n) % n).collect();
        Self::from_table_labeled(n, table, format!("cyclic:{n}"))
    }

    /// `G × H` with `(g, h)` at index `g * |H| + h`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<FiniteGroup> {
        let (m, n) = (g.order, h.order);
        let order = m * n;
        let mut table = vec![0; order * order];
        for x in 0..order {
            for y in 0..order {
                let a = g.mul(x / n, y / n);
                let b = h.mul(x % n, y % n);
                table[x * order + y] = a * n + b;
            }
        }
        Self::from_table_labeled(order, table, format!("{}*{}", g.label, h.label))
    }

    pub fn klein4() -> FiniteGroup {
        let c2 = FiniteGroup::cyclic(2).expect("order 2");
        let mut v = FiniteGroup::direct_product(&c2, &c2).expect("product of groups");
        v.label = "klein4".into();
        v
    }

    /// S₃ as permutations of {0,1,2} in lexicographic order, composed as
    /// functions: `(σ·τ)(i) = σ(τ(i))`. Indices 1, 2, 5 are transpositions,
    /// 3 and 4 are 3-cycles.
    pub fn symmetric3() -> FiniteGroup {
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("permutation");
        let mut table = vec![0; 36];
        for (i, s) in perms.iter().enumerate() {
            for (j, t) in perms.iter().enumerate() {
                table[i * 6 + j] = index([s[t[0]], s[t[1]], s[t[2]]]);
            }
        }
        Self::from_table_labeled(6, table, "s3".into()).expect("S3 table is valid")
    }

    /// Parses `cyclic:n`, `klein4`, `s3`, `file:<path>`, or a direct
    /// product `A*B` of those (splitting at the first `*`).
    pub fn from_spec(spec: &str) -> Result<FiniteGroup> {
        let spec = spec.trim();
        if !spec.starts_with("file:") {
            if let Some((a, b)) = spec.split_once('*') {
                return FiniteGroup::direct_product(&FiniteGroup::from_spec(a)?, &FiniteGroup::from_spec(b)?);
            }
        }
        if let Some(n) = spec.strip_prefix("cyclic:") {
            let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad cyclic order in {spec:?}")))?;
            return FiniteGroup::cyclic(n);
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let mut g = FiniteGroup::from_file(Path::new(path))?;
            g.label = spec.to_string();
            return Ok(g);
        }
        match spec {
            "klein4" => Ok(FiniteGroup::klein4()),
            "s3" => Ok(FiniteGroup::symmetric3()),
            _ => Err(Error::Parse(format!("unknown group spec {spec:?}"))),
        }
    }

    pub fn from_file(path: &Path) -> Result<FiniteGroup> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_table_text(&text)
    }

    /// Text format: `order n`, then `n` rows of `n` indices.
    pub fn parse_table_text(text: &str) -> Result<FiniteGroup> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty group file".into()))?;
        let order: usize = header
            .strip_prefix("order")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected `order n`, got {header:?}")))?;
        let mut table = Vec::with_capacity(order * order);
        for i in 0..order {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing table row {i}")))?;
            let row: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad entry {t:?} in row {i}"))))
                .collect::<Result<_>>()?;
            if row.len() != order {
                return Err(Error::Parse(format!("row {i} has {} entries, expected {order}", row.len())));
            }
            table.extend(row);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content {extra:?}")));
        }
        FiniteGroup::from_table(order, table)
    }

    pub fn to_table_text(&self) -> String {
        let mut out = format!("order {}\n", self.order);
        for i in 0..self.order {
            let row: Vec<String> = (0..self.order).map(|j| self.mul(i, j).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(a) } else { a };
        let mut e = k.unsigned_abs() % self.element_order(a) as u64;
        let (mut acc, mut sq) = (0, base);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, sq);
            }
            sq = self.mul(sq, sq);
            e >>= 1;
        }
        acc
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut n = 1;
        while x != 0 {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }

    pub fn commute(&self, a: usize, b: usize) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    /// `z·g·z⁻¹`
    pub fn conj(&self, z: usize, g: usize) -> usize {
        self.mul(self.mul(z, g), self.inv(z))
    }

    /// `[g, h] = g·h·g⁻¹·h⁻¹`
    pub fn commutator(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.mul(self.inv(g), self.inv(h)))
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.commute(a, b)))
    }

    pub fn check_element(&self, a: usize) -> Result<usize> {
        if a < self.order {
            Ok(a)
        } else {
            Err(Error::InvalidElement { index: a, order: self.order })
        }
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Result<Vec<usize>> {
        for &g in gens {
            self.check_element(g)?;
        }
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut frontier = vec![0];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    frontier.push(y);
                }
            }
        }
        Ok((0..self.order).filter(|&x| seen[x]).collect())
    }

    /// `{z : z·g = g·z for every g in gens}`, sorted.
    pub fn centralizer(&self, gens: &[usize]) -> Result<Vec<usize>> {
        for &g in gens {
            self.check_element(g)?;
        }
        Ok(self.elements().filter(|&z| gens.iter().all(|&g| self.commute(z, g))).collect())
    }

    /// Smallest element index generating the subgroup `⟨gens⟩`, if cyclic.
    pub fn cyclic_generator(&self, gens: &[usize]) -> Result<Option<usize>> {
        let sub = self.generated_subgroup(gens)?;
        Ok(sub.iter().copied().find(|&k| self.element_order(k) == sub.len()))
    }

    pub fn subgroup_tools(&self, gens: &[usize]) -> Result<SubgroupReport> {
        Ok(SubgroupReport {
            subgroup: self.generated_subgroup(gens)?,
            generator_orders: gens.iter().map(|&g| self.element_order(g)).collect(),
            centralizer: self.centralizer(gens)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupReport {
    pub subgroup: Vec<usize>,
    pub generator_orders: Vec<usize>,
    pub centralizer: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    images: Vec<usize>,
}

impl GroupHom {
    pub fn new(source: Arc<FiniteGroup>, target: Arc<FiniteGroup>, images: Vec<usize>) -> Result<GroupHom> {
        if images.len() != source.order() {
            return Err(Error::DimensionMismatch(format!(
                "homomorphism needs {} images, got {}",
                source.order(),
                images.len()
            )));
        }
        for &x in &images {
            target.check_element(x)?;
        }
        if images[0] != 0 {
            return Err(Error::NotHomomorphism(0, 0));
        }
        for x in source.elements() {
            for y in source.elements() {
                if images[source.mul(x, y)] != target.mul(images[x], images[y]) {
                    return Err(Error::NotHomomorphism(x, y));
                }
            }
        }
        Ok(GroupHom { source, target, images })
    }

    pub fn identity(g: Arc<FiniteGroup>) -> GroupHom {
        let images = g.elements().collect();
        GroupHom { source: g.clone(), target: g, images }
    }

    pub fn trivial(source: Arc<FiniteGroup>, target: Arc<FiniteGroup>) -> GroupHom {
        let images = vec![0; source.order()];
        GroupHom { source, target, images }
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }
}
