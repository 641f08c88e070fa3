//! ℚ/ℤ-valued cocycles on finite groupoid presentations, the line
//! bundles they describe, and equivariant assembly over a group action.
//!
//! Composition is written diagrammatically: for `f: x → y` and
//! `g: y → z`, `compose(f, g)` is the morphism `x → z`, and a cocycle
//! satisfies `R(f) + R(g) = R(compose(f, g))`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lift::{lift_gamma, GammaLift, TorusRep};
use crate::moduli::{enumerate_torus_reps, holonomy_cocycle_lift, r_diff_lift, sl2z_act, SL2Z};
use crate::qz::QZ;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub src: usize,
    pub dst: usize,
    pub label: String,
}

/// Objects `0..n`, explicit morphisms and a composition table. In a
/// partial presentation only some composable pairs have a recorded
/// composite and inverses are not required; this is how truncations of
/// infinite groupoids are represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidPresentation {
    objects: usize,
    morphisms: Vec<Morphism>,
    comp: HashMap<(usize, usize), usize>,
    identities: Vec<usize>,
    out: Vec<Vec<usize>>,
    partial: bool,
}

impl GroupoidPresentation {
    pub fn new(objects: usize, morphisms: Vec<Morphism>, comp: Vec<(usize, usize, usize)>) -> Result<Self> {
        Self::build(objects, morphisms, comp, false)
    }

    pub fn new_partial(objects: usize, morphisms: Vec<Morphism>, comp: Vec<(usize, usize, usize)>) -> Result<Self> {
        Self::build(objects, morphisms, comp, true)
    }

    fn build(objects: usize, morphisms: Vec<Morphism>, comp: Vec<(usize, usize, usize)>, partial: bool) -> Result<Self> {
        let bad = |s: String| Err(Error::InvalidPresentation(s));
        for (i, m) in morphisms.iter().enumerate() {
            if m.src >= objects || m.dst >= objects {
                return bad(format!("morphism {} ({i}) has an endpoint outside 0..{objects}", m.label));
            }
        }
        let mut labels = HashMap::new();
        for (i, m) in morphisms.iter().enumerate() {
            if labels.insert(m.label.as_str(), i).is_some() {
                return bad(format!("duplicate label {}", m.label));
            }
        }
        let mut table = HashMap::new();
        for (f, g, h) in comp {
            let n = morphisms.len();
            if f >= n || g >= n || h >= n {
                return bad(format!("composition ({f}, {g}, {h}) refers to a missing morphism"));
            }
            let (mf, mg, mh) = (&morphisms[f], &morphisms[g], &morphisms[h]);
            if mf.dst != mg.src {
                return bad(format!("{} and {} are not composable", mf.label, mg.label));
            }
            if mh.src != mf.src || mh.dst != mg.dst {
                return bad(format!("{} ∘ {} = {} has the wrong endpoints", mf.label, mg.label, mh.label));
            }
            if table.insert((f, g), h).is_some_and(|old| old != h) {
                return bad(format!("{} ∘ {} is defined twice", mf.label, mg.label));
            }
        }
        let mut out = vec![Vec::new(); objects];
        for (i, m) in morphisms.iter().enumerate() {
            out[m.src].push(i);
        }
        let mut p = GroupoidPresentation { objects, morphisms, comp: table, identities: Vec::new(), out, partial };
        p.identities = (0..objects)
            .map(|x| {
                p.loops(x)
                    .find(|&e| p.compose(e, e) == Some(e))
                    .ok_or_else(|| Error::InvalidPresentation(format!("object {x} has no identity")))
            })
            .collect::<Result<_>>()?;
        p.check_axioms()?;
        Ok(p)
    }

    fn check_axioms(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidPresentation(s));
        for (f, m) in self.morphisms.iter().enumerate() {
            let (ids, idd) = (self.identities[m.src], self.identities[m.dst]);
            for (c, want) in [(self.compose(ids, f), f), (self.compose(f, idd), f)] {
                match c {
                    Some(h) if h != want => return bad(format!("identity is not neutral for {}", m.label)),
                    None if !self.partial => return bad(format!("missing composite with identity for {}", m.label)),
                    _ => {}
                }
            }
        }
        for f in 0..self.morphisms.len() {
            for g in self.outgoing(self.morphisms[f].dst) {
                let fg = self.compose(f, g);
                if fg.is_none() && !self.partial {
                    return bad(format!("{} ∘ {} is missing", self.morphisms[f].label, self.morphisms[g].label));
                }
                for h in self.outgoing(self.morphisms[g].dst) {
                    let left = fg.and_then(|fg| self.compose(fg, h));
                    let right = self.compose(g, h).and_then(|gh| self.compose(f, gh));
                    if let (Some(l), Some(r)) = (left, right) {
                        if l != r {
                            return bad(format!(
                                "composition is not associative at {}, {}, {}",
                                self.morphisms[f].label, self.morphisms[g].label, self.morphisms[h].label
                            ));
                        }
                    }
                }
            }
        }
        if !self.partial {
            for (f, m) in self.morphisms.iter().enumerate() {
                let has_inverse = self.outgoing(m.dst).any(|g| {
                    self.compose(f, g) == Some(self.identities[m.src]) && self.compose(g, f) == Some(self.identities[m.dst])
                });
                if !has_inverse {
                    return bad(format!("{} has no inverse", m.label));
                }
            }
        }
        Ok(())
    }

    pub fn objects(&self) -> usize {
        self.objects
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn morphism(&self, f: usize) -> &Morphism {
        &self.morphisms[f]
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identities[x]
    }

    pub fn compose(&self, f: usize, g: usize) -> Option<usize> {
        self.comp.get(&(f, g)).copied()
    }

    /// Recorded composites as `(f, g, f∘g)`, sorted.
    pub fn compositions(&self) -> Vec<(usize, usize, usize)> {
        let mut v: Vec<_> = self.comp.iter().map(|(&(f, g), &h)| (f, g, h)).collect();
        v.sort_unstable();
        v
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.morphisms.iter().position(|m| m.label == label)
    }

    pub fn outgoing(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[x].iter().copied()
    }

    pub fn loops(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.outgoing(x).filter(move |&i| self.morphisms[i].dst == x)
    }

    /// Component index per object, numbered by first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.objects];
        for m in &self.morphisms {
            adj[m.src].push(m.dst);
            adj[m.dst].push(m.src);
        }
        let mut comp = vec![usize::MAX; self.objects];
        let mut next = 0;
        for start in 0..self.objects {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// `∗⫽G` with morphism labels equal to element indices.
    pub fn one_object(group: &FiniteGroup) -> Result<Self> {
        Self::left_action(1, group, |_, x| x)
    }

    /// The groupoid of a left action: a morphism `(x, z): x → z·x` for each
    /// object and group element, labelled `x:z`, composing as
    /// `(x, z₂)` then `(z₂·x, z₁)` equals `(x, z₁z₂)`.
    pub fn left_action(objects: usize, group: &FiniteGroup, act: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let n = group.order();
        let id = |x: usize, z: usize| x * n + z;
        let mut morphisms = Vec::with_capacity(objects * n);
        for x in 0..objects {
            for z in group.elements() {
                let label = if objects == 1 { z.to_string() } else { format!("{x}:{z}") };
                morphisms.push(Morphism { src: x, dst: act(z, x), label });
            }
        }
        let mut comp = Vec::new();
        for x in 0..objects {
            for z2 in group.elements() {
                let y = act(z2, x);
                for z1 in group.elements() {
                    comp.push((id(x, z2), id(y, z1), id(x, group.mul(z1, z2))));
                }
            }
        }
        Self::new(objects, morphisms, comp)
    }

    /// Disjoint union of pair groupoids times cyclic groups: component
    /// `(k, m)` has `k` objects and morphisms `(x, y, t)` for all `x, y`
    /// and `t ∈ ℤ/m`.
    pub fn from_components(parts: &[(usize, usize)]) -> Result<Self> {
        let mut morphisms = Vec::new();
        let mut index = BTreeMap::new();
        let mut offset = 0;
        for (ci, &(k, m)) in parts.iter().enumerate() {
            if k == 0 || m == 0 {
                return Err(Error::InvalidPresentation(format!("component {ci} is empty")));
            }
            for x in 0..k {
                for y in 0..k {
                    for t in 0..m {
                        index.insert((offset + x, offset + y, t), morphisms.len());
                        morphisms.push(Morphism { src: offset + x, dst: offset + y, label: format!("c{ci}:{x}>{y}:{t}") });
                    }
                }
            }
            offset += k;
        }
        let mut comp = Vec::new();
        let mut offset = 0;
        for &(k, m) in parts {
            for x in 0..k {
                for y in 0..k {
                    for z in 0..k {
                        for s in 0..m {
                            for t in 0..m {
                                let (o, f) = (offset, index[&(offset + x, offset + y, s)]);
                                comp.push((f, index[&(o + y, o + z, t)], index[&(o + x, o + z, (s + t) % m)]));
                            }
                        }
                    }
                }
            }
            offset += k;
        }
        Self::new(offset, morphisms, comp)
    }

    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        let (n, k) = (self.objects, self.morphisms.len());
        let mut morphisms = self.morphisms.clone();
        for m in &other.morphisms {
            morphisms.push(Morphism { src: m.src + n, dst: m.dst + n, label: format!("{}'", m.label) });
        }
        let mut comp = self.compositions();
        comp.extend(other.compositions().into_iter().map(|(f, g, h)| (f + k, g + k, h + k)));
        Self::build(n + other.objects, morphisms, comp, self.partial || other.partial)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("objects {}\n", self.objects);
        if self.partial {
            out.push_str("partial\n");
        }
        for m in &self.morphisms {
            out.push_str(&format!("mor {} {} {}\n", m.src, m.dst, m.label));
        }
        for (f, g, h) in self.compositions() {
            let l = |i: usize| &self.morphisms[i].label;
            out.push_str(&format!("comp {} {} {}\n", l(f), l(g), l(h)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidCocycle {
    presentation: Arc<GroupoidPresentation>,
    values: Vec<QZ>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CocycleViolation {
    Composition { f: usize, g: usize, composite: usize, lhs: QZ, rhs: QZ },
    Identity { object: usize, value: QZ },
}

impl CocycleViolation {
    pub fn describe(&self, p: &GroupoidPresentation) -> String {
        match *self {
            CocycleViolation::Composition { f, g, composite, lhs, rhs } => format!(
                "R({}) + R({}) = {lhs} but R({}) = {rhs}",
                p.morphism(f).label,
                p.morphism(g).label,
                p.morphism(composite).label
            ),
            CocycleViolation::Identity { object, value } => {
                format!("R({}) = {value} on the identity of object {object}", p.morphism(p.identity(object)).label)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleReport {
    pub violations: Vec<CocycleViolation>,
    pub checked_pairs: usize,
}

impl CocycleReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GroupoidCocycle {
    pub fn new(presentation: Arc<GroupoidPresentation>, values: Vec<QZ>) -> Result<Self> {
        if values.len() != presentation.morphisms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} morphisms",
                values.len(),
                presentation.morphisms.len()
            )));
        }
        Ok(GroupoidCocycle { presentation, values })
    }

    pub fn zero(presentation: Arc<GroupoidPresentation>) -> Self {
        let values = vec![QZ::ZERO; presentation.morphisms.len()];
        GroupoidCocycle { presentation, values }
    }

    pub fn presentation(&self) -> &Arc<GroupoidPresentation> {
        &self.presentation
    }

    pub fn values(&self) -> &[QZ] {
        &self.values
    }

    pub fn value(&self, f: usize) -> QZ {
        self.values[f]
    }

    /// `R + dτ` with `(dτ)(f: x → y) = τ(y) − τ(x)`.
    pub fn add_coboundary(&self, tau: &[QZ]) -> Result<Self> {
        let p = &self.presentation;
        if tau.len() != p.objects {
            return Err(Error::DimensionMismatch(format!("{} values for {} objects", tau.len(), p.objects)));
        }
        let values = self.values.iter().zip(&p.morphisms).map(|(v, m)| *v + tau[m.dst] - tau[m.src]).collect();
        Ok(GroupoidCocycle { presentation: p.clone(), values })
    }

    pub fn validate(&self) -> CocycleReport {
        let p = &self.presentation;
        let mut violations = Vec::new();
        for x in 0..p.objects {
            let v = self.values[p.identity(x)];
            if !v.is_zero() {
                violations.push(CocycleViolation::Identity { object: x, value: v });
            }
        }
        let comps = p.compositions();
        for &(f, g, h) in &comps {
            let lhs = self.values[f] + self.values[g];
            if lhs != self.values[h] {
                violations.push(CocycleViolation::Composition { f, g, composite: h, lhs, rhs: self.values[h] });
            }
        }
        CocycleReport { violations, checked_pairs: comps.len() }
    }

    /// Number of components carrying a nonzero flat section, i.e. on which
    /// every loop has zero holonomy.
    pub fn sections_dim(&self) -> Result<usize> {
        let report = self.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidCocycle(v.describe(&self.presentation)));
        }
        Ok(self.trivial_components().iter().filter(|&&t| t).count())
    }

    /// Per component: can `R` be written as `τ(dst) − τ(src)` there?
    fn trivial_components(&self) -> Vec<bool> {
        let p = &self.presentation;
        let comp = p.components();
        let ncomp = comp.iter().max().map_or(0, |m| m + 1);
        let mut potential: Vec<Option<QZ>> = vec![None; p.objects];
        let mut adj = vec![Vec::new(); p.objects];
        for (i, m) in p.morphisms.iter().enumerate() {
            adj[m.src].push(i);
            adj[m.dst].push(i);
        }
        for start in 0..p.objects {
            if potential[start].is_some() {
                continue;
            }
            potential[start] = Some(QZ::ZERO);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                let px = potential[x].unwrap();
                for &i in &adj[x] {
                    let m = &p.morphisms[i];
                    let (y, py) = if m.src == x { (m.dst, px + self.values[i]) } else { (m.src, px - self.values[i]) };
                    if potential[y].is_none() {
                        potential[y] = Some(py);
                        queue.push_back(y);
                    }
                }
            }
        }
        let mut ok = vec![true; ncomp];
        for (i, m) in p.morphisms.iter().enumerate() {
            if potential[m.dst].unwrap() - potential[m.src].unwrap() != self.values[i] {
                ok[comp[m.src]] = false;
            }
        }
        ok
    }

    /// Presentation text plus `val label p/q` lines (zeros omitted).
    pub fn to_text(&self) -> String {
        let mut out = self.presentation.to_text();
        for (m, v) in self.presentation.morphisms.iter().zip(&self.values) {
            if !v.is_zero() {
                out.push_str(&format!("val {} {}\n", m.label, v));
            }
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut objects = None;
        let mut partial = false;
        let mut morphisms = Vec::new();
        let mut comps = Vec::new();
        let mut vals = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = || Error::Parse(format!("line {}: cannot read {line:?}", lineno + 1));
            match toks[..] {
                ["objects", n] => objects = Some(n.parse::<usize>().map_err(|_| err())?),
                ["partial"] => partial = true,
                ["mor", s, d, label] => morphisms.push(Morphism {
                    src: s.parse().map_err(|_| err())?,
                    dst: d.parse().map_err(|_| err())?,
                    label: label.to_string(),
                }),
                ["comp", a, b, c] => comps.push((a.to_string(), b.to_string(), c.to_string())),
                ["val", label, v] => vals.push((label.to_string(), v.parse::<QZ>()?)),
                _ => return Err(err()),
            }
        }
        let objects = objects.ok_or_else(|| Error::Parse("missing `objects n` line".into()))?;
        let index: HashMap<&str, usize> = morphisms.iter().enumerate().map(|(i, m)| (m.label.as_str(), i)).collect();
        let look = |l: &str| index.get(l).copied().ok_or_else(|| Error::Parse(format!("unknown morphism {l}")));
        let comp = comps.iter().map(|(a, b, c)| Ok((look(a)?, look(b)?, look(c)?))).collect::<Result<Vec<_>>>()?;
        let mut values = vec![QZ::ZERO; morphisms.len()];
        for (label, v) in &vals {
            values[look(label)?] = *v;
        }
        let p = GroupoidPresentation::build(objects, morphisms, comp, partial)?;
        GroupoidCocycle::new(Arc::new(p), values)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_text(&std::fs::read_to_string(path)?)
    }
}

pub fn validate_groupoid_cocycle(r: &GroupoidCocycle) -> CocycleReport {
    r.validate()
}

pub fn sections_dim_groupoid(r: &GroupoidCocycle) -> Result<usize> {
    r.sections_dim()
}

/// A line over the presentation: a unit `τ(x)` in each fiber and a
/// transport per morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineData {
    pub tau: Vec<QZ>,
    pub transport: Vec<QZ>,
}

/// `R(f: x → y) = −τ(x) + transport(f) + τ(y)`.
pub fn cocycle_from_section(presentation: &Arc<GroupoidPresentation>, line: &LineData) -> Result<GroupoidCocycle> {
    let p = presentation;
    if line.tau.len() != p.objects || line.transport.len() != p.morphisms.len() {
        return Err(Error::DimensionMismatch("line data does not match the presentation".into()));
    }
    for (f, g, h) in p.compositions() {
        if line.transport[f] + line.transport[g] != line.transport[h] {
            return Err(Error::NonFunctorial(format!(
                "transport({}) + transport({}) != transport({})",
                p.morphism(f).label,
                p.morphism(g).label,
                p.morphism(h).label
            )));
        }
    }
    let values =
        p.morphisms.iter().zip(&line.transport).map(|(m, t)| *t - line.tau[m.src] + line.tau[m.dst]).collect();
    GroupoidCocycle::new(p.clone(), values)
}

/// The line with transports `R(f) + τ(x) − τ(y)` and units `τ`; feeding it
/// to [`cocycle_from_section`] gives back `R`.
pub fn line_from_cocycle(r: &GroupoidCocycle, tau: Vec<QZ>) -> Result<LineData> {
    let p = &r.presentation;
    if tau.len() != p.objects {
        return Err(Error::DimensionMismatch(format!("{} units for {} objects", tau.len(), p.objects)));
    }
    let transport = p.morphisms.iter().zip(&r.values).map(|(m, v)| *v + tau[m.src] - tau[m.dst]).collect();
    Ok(LineData { tau, transport })
}

/// A (possibly truncated) group Γ acting on the right on a presentation,
/// with the values `R_Γ(x, g)`.
#[derive(Debug, Clone)]
pub struct GammaAction {
    labels: Vec<String>,
    identity: usize,
    product: HashMap<(usize, usize), usize>,
    on_objects: Vec<Vec<usize>>,
    on_morphisms: Vec<Vec<usize>>,
    r_gamma: Vec<Vec<QZ>>,
}

impl GammaAction {
    /// `on_objects[g][x] = x·g`, `on_morphisms[g][f] = f·g`,
    /// `r_gamma[x][g] = R_Γ(x, g)`, and `product` holds the recorded
    /// products `(g₁, g₂) ↦ g₁g₂` with `x·(g₁g₂) = (x·g₁)·g₂`.
    pub fn new(
        presentation: &GroupoidPresentation,
        labels: Vec<String>,
        identity: usize,
        product: HashMap<(usize, usize), usize>,
        on_objects: Vec<Vec<usize>>,
        on_morphisms: Vec<Vec<usize>>,
        r_gamma: Vec<Vec<QZ>>,
    ) -> Result<Self> {
        let bad = |s: String| Err(Error::InvalidPresentation(s));
        let k = labels.len();
        if identity >= k || on_objects.len() != k || on_morphisms.len() != k || r_gamma.len() != presentation.objects {
            return bad("action tables have the wrong shape".into());
        }
        for g in 0..k {
            let mut seen = vec![false; presentation.objects];
            for &y in &on_objects[g] {
                if y >= presentation.objects || std::mem::replace(&mut seen[y], true) {
                    return bad(format!("{} does not act bijectively on objects", labels[g]));
                }
            }
            if on_objects[g].len() != presentation.objects || on_morphisms[g].len() != presentation.morphisms.len() {
                return bad(format!("{} has action tables of the wrong length", labels[g]));
            }
            for (f, &fg) in on_morphisms[g].iter().enumerate() {
                let (m, mg) = (presentation.morphism(f), presentation.morphism(fg));
                if mg.src != on_objects[g][m.src] || mg.dst != on_objects[g][m.dst] {
                    return bad(format!("{}·{} has the wrong endpoints", m.label, labels[g]));
                }
            }
        }
        for (&(a, b), &c) in &product {
            if a >= k || b >= k || c >= k {
                return bad("product refers to a missing element".into());
            }
            for x in 0..presentation.objects {
                if on_objects[b][on_objects[a][x]] != on_objects[c][x] {
                    return bad(format!("{}{} = {} is not compatible with the action", labels[a], labels[b], labels[c]));
                }
            }
        }
        if r_gamma.iter().any(|row| row.len() != k) {
            return bad("R_Γ table has the wrong shape".into());
        }
        Ok(GammaAction { labels, identity, product, on_objects, on_morphisms, r_gamma })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn r_gamma(&self, x: usize, g: usize) -> QZ {
        self.r_gamma[x][g]
    }

    pub fn act_object(&self, x: usize, g: usize) -> usize {
        self.on_objects[g][x]
    }

    fn is_total(&self) -> bool {
        self.product.len() == self.len() * self.len()
    }
}

/// The cocycle `(R_Γ·R)(f, g) = R_Γ(x, g) + R(f)` on the quotient, where
/// the morphism `(f, g): y → x` has `f: y → x·g`. Composition: `(f₂, g₂)`
/// then `(f₁, g₁)` is `(f₂ then f₁·g₂, g₁g₂)`.
pub fn equivariant_assemble(r: &GroupoidCocycle, action: &GammaAction) -> Result<GroupoidCocycle> {
    let p = &r.presentation;
    let nm = p.morphisms.len();
    let ng = action.len();
    // x = dst·g⁻¹
    let preimage: Vec<Vec<usize>> = (0..ng)
        .map(|g| {
            let mut inv = vec![0; p.objects];
            for x in 0..p.objects {
                inv[action.on_objects[g][x]] = x;
            }
            inv
        })
        .collect();
    let id = |f: usize, g: usize| g * nm + f;
    let mut morphisms = Vec::with_capacity(nm * ng);
    let mut values = Vec::with_capacity(nm * ng);
    for g in 0..ng {
        for (f, m) in p.morphisms.iter().enumerate() {
            let x = preimage[g][m.dst];
            morphisms.push(Morphism { src: m.src, dst: x, label: format!("{}@{}", m.label, action.labels[g]) });
            values.push(action.r_gamma[x][g] + r.values[f]);
        }
    }
    let mut comp = Vec::new();
    for (&(g1, g2), &g12) in &action.product {
        for f1 in 0..nm {
            let f1g2 = action.on_morphisms[g2][f1];
            let y = p.morphisms[f1].src;
            for f2 in 0..nm {
                if preimage[g2][p.morphisms[f2].dst] != y {
                    continue;
                }
                if let Some(f) = p.compose(f2, f1g2) {
                    comp.push((id(f2, g2), id(f1, g1), id(f, g12)));
                }
            }
        }
    }
    comp.sort_unstable();
    let partial = p.partial || !action.is_total();
    let quotient = GroupoidPresentation::build(p.objects, morphisms, comp, partial)?;
    let _ = action.identity;
    let out = GroupoidCocycle::new(Arc::new(quotient), values)?;
    let report = out.validate();
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidCocycle(v.describe(&out.presentation)));
    }
    Ok(out)
}

/// Distinct matrices given by words of length at most `max_len` in the
/// generators, with the shortest (then lexicographically first) word as
/// label and the empty word written `1`.
pub fn truncated_sl2z(generators: &[(&str, SL2Z)], max_len: usize) -> Vec<(String, SL2Z)> {
    let mut out: Vec<(String, SL2Z)> = vec![("1".into(), SL2Z::IDENTITY)];
    let mut frontier = out.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, m) in &frontier {
            for (name, gm) in generators {
                let word = if w == "1" { name.to_string() } else { format!("{w}{name}") };
                next.push((word, m.mul(gm)));
            }
        }
        next.sort_by(|a, b| a.0.cmp(&b.0));
        for (w, m) in &next {
            if !out.iter().any(|(_, o)| o == m) {
                out.push((w.clone(), *m));
            }
        }
        frontier = next;
    }
    out
}

/// The equivariant line over torus holonomies: objects are the commuting
/// pairs of `group`, morphisms are conjugations with the holonomy cocycle
/// as values, and Γ is the given truncation of SL₂(ℤ) acting by
/// precomposition with `R_Γ(ρ, A)` the matrix character.
pub fn moduli_instance(
    group: &Arc<FiniteGroup>,
    alpha: &Cochain,
    gamma: &[(String, SL2Z)],
) -> Result<(GroupoidCocycle, GammaAction)> {
    let reps: Vec<TorusRep> = enumerate_torus_reps(group);
    let index: HashMap<(usize, usize), usize> = reps.iter().enumerate().map(|(i, r)| (r.pair(), i)).collect();
    let conj = |z: usize, x: usize| index[&reps[x].conjugate(z).expect("valid element").pair()];
    let p = Arc::new(GroupoidPresentation::left_action(reps.len(), group, conj)?);
    let lifts: Vec<Arc<GammaLift>> =
        reps.iter().map(|r| lift_gamma(r, alpha, 2).map(Arc::new)).collect::<Result<_>>()?;
    let n = group.order();
    let values = (0..p.morphisms.len())
        .map(|i| holonomy_cocycle_lift(&lifts[i / n], i % n))
        .collect::<Result<Vec<_>>>()?;
    let r = GroupoidCocycle::new(p.clone(), values)?;

    let on_objects: Vec<Vec<usize>> =
        gamma.iter().map(|(_, m)| reps.iter().map(|r| index[&sl2z_act(r, m).pair()]).collect()).collect();
    // (x, z)·A = (x·A, z)
    let on_morphisms = on_objects.iter().map(|row| (0..p.morphisms.len()).map(|i| row[i / n] * n + i % n).collect()).collect();
    let mut product = HashMap::new();
    for (i, (_, a)) in gamma.iter().enumerate() {
        for (j, (_, b)) in gamma.iter().enumerate() {
            let ab = a.mul(b);
            if let Some(k) = gamma.iter().position(|(_, m)| *m == ab) {
                product.insert((i, j), k);
            }
        }
    }
    let identity = gamma
        .iter()
        .position(|(_, m)| *m == SL2Z::IDENTITY)
        .ok_or_else(|| Error::InvalidPresentation("Γ must contain the identity".into()))?;
    let r_gamma = lifts
        .iter()
        .map(|l| gamma.iter().map(|(_, m)| r_diff_lift(l, m)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let labels = gamma.iter().map(|(w, _)| w.clone()).collect();
    let action = GammaAction::new(&p, labels, identity, product, on_objects, on_morphisms, r_gamma)?;
    Ok((r, action))
}

impl fmt::Display for CocycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid ({} composable pairs checked)", self.checked_pairs)
        } else {
            write!(f, "invalid ({} violations in {} pairs)", self.violations.len(), self.checked_pairs)
        }
    }
}
