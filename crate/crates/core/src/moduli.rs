//! Flat G-bundles on surfaces as conjugation classes of holonomies, the
//! SL₂(ℤ) action on torus holonomies, and the characters of the line
//! bundle built from a lift `γ̃`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lift::{default_window, lift_gamma, lift_gamma_with, GammaLift, LiftPath, TorusRep, Z2};
use crate::qz::QZ;

pub const ENUMERATION_BOUND: u128 = 10_000_000;

/// `[[a, b], [c, d]]` with `ad − bc = 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SL2Z {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl SL2Z {
    pub const IDENTITY: SL2Z = SL2Z { a: 1, b: 0, c: 0, d: 1 };
    pub const S: SL2Z = SL2Z { a: 0, b: -1, c: 1, d: 0 };
    pub const T: SL2Z = SL2Z { a: 1, b: 1, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<SL2Z> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            let det = i64::try_from(det).unwrap_or(i64::MAX);
            return Err(Error::NotSl2z { a, b, c, d, det });
        }
        Ok(SL2Z { a, b, c, d })
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn mul(&self, o: &SL2Z) -> SL2Z {
        SL2Z {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> SL2Z {
        SL2Z { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn pow(&self, k: u32) -> SL2Z {
        (0..k).fold(SL2Z::IDENTITY, |acc, _| acc.mul(self))
    }

    /// Images of the basis vectors: `A e₁ = (a, c)`, `A e₂ = (b, d)`.
    pub fn columns(&self) -> (Z2, Z2) {
        ((self.a, self.c), (self.b, self.d))
    }
}

impl fmt::Debug for SL2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for SL2Z {
    type Err = Error;

    /// `a,b,c,d` in row order.
    fn from_str(s: &str) -> Result<SL2Z> {
        let v: Vec<i64> = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad matrix entry {t:?}"))))
            .collect::<Result<_>>()?;
        let [a, b, c, d] = v[..] else {
            return Err(Error::Parse(format!("matrix needs 4 entries, got {}", v.len())));
        };
        SL2Z::new(a, b, c, d)
    }
}

/// `A·(g, h) = (gᵃhᶜ, gᵇhᵈ)`, i.e. `ρ ↦ ρ∘A`. This is a right action:
/// `A·(B·ρ) = (BA)·ρ`.
pub fn sl2z_act(rep: &TorusRep, m: &SL2Z) -> TorusRep {
    let (c1, c2) = m.columns();
    TorusRep::new(rep.group().clone(), rep.eval(c1), rep.eval(c2)).expect("images of commuting elements commute")
}

/// `a ≡ 1` and `b ≡ 0` modulo n.
pub fn in_gamma1(m: &SL2Z, n: u64) -> bool {
    let n = n as i64;
    (m.a - 1).rem_euclid(n) == 0 && m.b.rem_euclid(n) == 0
}

/// Holonomies `(g₁, h₁, …, g_k, h_k)` with `∏ [gᵢ, hᵢ] = 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct SurfaceRep {
    group: Arc<FiniteGroup>,
    images: Vec<usize>,
}

fn surface_relation(g: &FiniteGroup, images: &[usize]) -> usize {
    images.chunks(2).fold(g.identity(), |acc, p| g.mul(acc, g.commutator(p[0], p[1])))
}

impl SurfaceRep {
    pub fn new(group: Arc<FiniteGroup>, images: Vec<usize>) -> Result<SurfaceRep> {
        if images.is_empty() || !images.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!("need 2g images, got {}", images.len())));
        }
        for &x in &images {
            group.check_element(x)?;
        }
        if surface_relation(&group, &images) != group.identity() {
            return Err(Error::SurfaceRelation);
        }
        Ok(SurfaceRep { group, images })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn genus(&self) -> usize {
        self.images.len() / 2
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn conjugate(&self, z: usize) -> SurfaceRep {
        let images = self.images.iter().map(|&x| self.group.conj(z, x)).collect();
        SurfaceRep { group: self.group.clone(), images }
    }

    pub fn to_torus(&self) -> Result<TorusRep> {
        if self.genus() != 1 {
            return Err(Error::UnsupportedGenus(self.genus()));
        }
        TorusRep::new(self.group.clone(), self.images[0], self.images[1])
    }
}

impl From<&TorusRep> for SurfaceRep {
    fn from(r: &TorusRep) -> SurfaceRep {
        SurfaceRep { group: r.group().clone(), images: vec![r.g(), r.h()] }
    }
}

impl fmt::Debug for SurfaceRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SurfaceRep({}; {:?})", self.group.label(), self.images)
    }
}

/// All holonomy tuples for a closed surface of genus 1 or 2, in
/// lexicographic order.
pub fn enumerate_bundles(group: &Arc<FiniteGroup>, genus: usize) -> Result<Vec<SurfaceRep>> {
    if !(1..=2).contains(&genus) {
        return Err(Error::UnsupportedGenus(genus));
    }
    let n = group.order();
    let total = (n as u128).pow(2 * genus as u32);
    if total > ENUMERATION_BOUND {
        return Err(Error::SizeBound(total));
    }
    let mut out = Vec::new();
    let mut tuple = vec![0usize; 2 * genus];
    for idx in 0..total as usize {
        let mut r = idx;
        for slot in tuple.iter_mut().rev() {
            *slot = r % n;
            r /= n;
        }
        if surface_relation(group, &tuple) == group.identity() {
            out.push(SurfaceRep { group: group.clone(), images: tuple.clone() });
        }
    }
    Ok(out)
}

pub fn enumerate_torus_reps(group: &Arc<FiniteGroup>) -> Vec<TorusRep> {
    let mut out = Vec::new();
    for g in group.elements() {
        for h in group.elements() {
            if group.commute(g, h) {
                out.push(TorusRep::new(group.clone(), g, h).expect("commuting pair"));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitStabilizer {
    /// Sorted lexicographically; the first entry is the canonical
    /// representative.
    pub orbit: Vec<SurfaceRep>,
    pub stabilizer: Vec<usize>,
}

pub fn orbit_stabilizer(rep: &SurfaceRep) -> OrbitStabilizer {
    let g = &rep.group;
    let mut orbit: Vec<SurfaceRep> = g.elements().map(|z| rep.conjugate(z)).collect();
    orbit.sort_by(|a, b| a.images.cmp(&b.images));
    orbit.dedup();
    let stabilizer = g.centralizer(&rep.images).expect("valid images");
    OrbitStabilizer { orbit, stabilizer }
}

/// `γ̃(be₁+de₂, ae₁+ce₂) − γ̃(ae₁+ce₂, be₁+de₂)` for a lift over `ρ`.
pub fn r_diff_lift(lift: &GammaLift, m: &SL2Z) -> Result<QZ> {
    let (u, v) = m.columns();
    Ok(lift.eval(v, u)? - lift.eval(u, v)?)
}

pub fn r_diff(rep: &TorusRep, alpha: &Cochain, m: &SL2Z) -> Result<QZ> {
    let lift = lift_gamma(rep, alpha, window_for(m))?;
    r_diff_lift(&lift, m)
}

/// [`r_diff`] with an explicit lift construction.
pub fn r_diff_with(rep: &TorusRep, alpha: &Cochain, m: &SL2Z, path: LiftPath, window: Option<i64>) -> Result<QZ> {
    let lift = lift_gamma_with(rep, alpha, path, window.unwrap_or_else(|| window_for(m)))?;
    r_diff_lift(&lift, m)
}

pub fn window_for(m: &SL2Z) -> i64 {
    let (u, v) = m.columns();
    default_window(&[u, v])
}

/// `Σ_{j<n} α(g, gʲ, g)` with `n` the order of g; equals `r_diff((g,1), Tⁿ)`.
pub fn dehn_character(alpha: &Cochain, g: usize) -> Result<QZ> {
    let grp = alpha.group();
    grp.check_element(g)?;
    let n = grp.element_order(g) as i64;
    Ok((0..n).map(|j| alpha.at3(g, grp.pow(g, j), g)).sum())
}

/// `N·b/n²` on Γ₁(n).
pub fn klein_character(n: u64, level: i64, m: &SL2Z) -> Result<QZ> {
    if n == 0 {
        return Err(Error::ZeroModulus);
    }
    if !in_gamma1(m, n) {
        return Err(Error::NotInGamma1(n));
    }
    let n2 = i64::try_from(n as u128 * n as u128).map_err(|_| Error::Overflow("n²"))?;
    Ok(QZ::new(level, n2).scale(m.b))
}

/// `σ` of the lift conjugated by z, which is the value of the line
/// bundle's descent cocycle on the morphism `ρ → zρz⁻¹`.
pub fn holonomy_cocycle_lift(lift: &Arc<GammaLift>, z: usize) -> Result<QZ> {
    lift.conjugate(z)?.sigma()
}

pub fn holonomy_cocycle_r(rep: &TorusRep, alpha: &Cochain, z: usize) -> Result<QZ> {
    let lift = Arc::new(lift_gamma(rep, alpha, 2)?);
    holonomy_cocycle_lift(&lift, z)
}

/// Orbits of torus holonomies with a lexicographically least
/// representative each, and whether the stabilizer character vanishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCharacter {
    pub representative: TorusRep,
    pub orbit_size: usize,
    pub character: Vec<(usize, QZ)>,
}

impl OrbitCharacter {
    pub fn vanishes(&self) -> bool {
        self.character.iter().all(|(_, v)| v.is_zero())
    }
}

pub fn orbit_characters(group: &Arc<FiniteGroup>, alpha: &Cochain) -> Result<Vec<OrbitCharacter>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for rep in enumerate_torus_reps(group) {
        if seen.contains(&rep.pair()) {
            continue;
        }
        let os = orbit_stabilizer(&SurfaceRep::from(&rep));
        for o in &os.orbit {
            seen.insert((o.images[0], o.images[1]));
        }
        let lift = Arc::new(lift_gamma(&rep, alpha, 2)?);
        let character = os
            .stabilizer
            .iter()
            .map(|&z| Ok((z, holonomy_cocycle_lift(&lift, z)?)))
            .collect::<Result<Vec<_>>>()?;
        out.push(OrbitCharacter { representative: rep, orbit_size: os.orbit.len(), character });
    }
    Ok(out)
}

/// Number of orbits on which the stabilizer character is trivial.
pub fn sections_dimension(group: &Arc<FiniteGroup>, alpha: &Cochain) -> Result<usize> {
    Ok(orbit_characters(group, alpha)?.iter().filter(|o| o.vanishes()).count())
}
