//! Lifts γ̃ on ℤ² with `dγ̃ = ρ*α` for a commuting pair `ρ = (g, h)`.
//!
//! Three constructions are available:
//!
//! * `Cyclic`: when `⟨g, h⟩` is cyclic with generator `k`, `g = kᵖ`,
//!   `h = k^q`, the lift factors through `λ(x,y) = px + qy` and the
//!   one-generator sums `F(m, z) = Σ_{j<m} α(k, kʲ, k^z)`.
//! * `Transport`: any commuting pair. The slices `γ(e₁, ·)` and
//!   `γ(e₂, ·)` are fixed in a gauge where the second vanishes, and the
//!   slice `γ(a, ·)` for general `a` is transported from the origin along
//!   `e₁` then `e₂` using the cocycle condition.
//! * `Window`: solve `dγ̃ = ρ*α` on the box `[-W, W]²` with the
//!   Smith-form solver. Only values inside the box are available.
//!
//! All three are followed by an antisymmetric bilinear correction making
//! `γ̃(e₁,e₂) = γ̃(e₂,e₁)`, and every lift is checked against `ρ*α` on a
//! box of triples before it is handed out.

use std::fmt;
use std::sync::Arc;

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::qz::QZ;
use crate::snf::{solve_sparse, SolveOutcome, SparseRow};

pub type Z2 = (i64, i64);

pub const E1: Z2 = (1, 0);
pub const E2: Z2 = (0, 1);
const ORIGIN: Z2 = (0, 0);

/// Formula-backed lifts are global; their certificate box is capped here.
pub const FORMULA_CERT_RADIUS: i64 = 2;

fn add(a: Z2, b: Z2) -> Z2 {
    (a.0 + b.0, a.1 + b.1)
}

fn scaled(e: Z2, k: i64) -> Z2 {
    (e.0 * k, e.1 * k)
}

/// `max(2, 1 + max |coordinate|)` over the points a caller will evaluate.
pub fn default_window(points: &[Z2]) -> i64 {
    let m = points.iter().map(|p| p.0.abs().max(p.1.abs())).max().unwrap_or(0);
    2.max(1 + m)
}

/// A homomorphism ℤ² → G, given by the commuting images of e₁ and e₂.
#[derive(Clone, PartialEq, Eq)]
pub struct TorusRep {
    group: Arc<FiniteGroup>,
    g: usize,
    h: usize,
}

impl TorusRep {
    pub fn new(group: Arc<FiniteGroup>, g: usize, h: usize) -> Result<TorusRep> {
        group.check_element(g)?;
        group.check_element(h)?;
        if !group.commute(g, h) {
            return Err(Error::NotCommuting(g, h));
        }
        Ok(TorusRep { group, g, h })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.g, self.h)
    }

    /// `ρ(x, y) = gˣ hʸ`.
    pub fn eval(&self, a: Z2) -> usize {
        self.group.mul(self.group.pow(self.g, a.0), self.group.pow(self.h, a.1))
    }

    /// `(zgz⁻¹, zhz⁻¹)`.
    pub fn conjugate(&self, z: usize) -> Result<TorusRep> {
        self.group.check_element(z)?;
        Ok(TorusRep { group: self.group.clone(), g: self.group.conj(z, self.g), h: self.group.conj(z, self.h) })
    }
}

impl fmt::Debug for TorusRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusRep({}; {}, {})", self.group.label(), self.g, self.h)
    }
}

/// `ρ*α` with power tables for fast evaluation.
#[derive(Debug, Clone)]
struct Pullback {
    group: Arc<FiniteGroup>,
    alpha: Arc<Cochain>,
    gpow: Vec<usize>,
    hpow: Vec<usize>,
}

impl Pullback {
    fn new(rep: &TorusRep, alpha: Arc<Cochain>) -> Pullback {
        let powers = |x: usize| (0..rep.group.element_order(x) as i64).map(|k| rep.group.pow(x, k)).collect();
        Pullback { group: rep.group.clone(), alpha, gpow: powers(rep.g), hpow: powers(rep.h) }
    }

    #[inline]
    fn rho(&self, a: Z2) -> usize {
        let gx = self.gpow[a.0.rem_euclid(self.gpow.len() as i64) as usize];
        let hy = self.hpow[a.1.rem_euclid(self.hpow.len() as i64) as usize];
        self.group.mul(gx, hy)
    }

    #[inline]
    fn c(&self, a: Z2, b: Z2, w: Z2) -> QZ {
        self.alpha.at3(self.rho(a), self.rho(b), self.rho(w))
    }
}

/// Prefix sums of a periodic step function: `sum(m) = Σ_{j<m} step(j)`
/// for `m ≥ 0` and `−Σ_{j=m}^{-1} step(j)` for `m < 0`.
#[derive(Debug, Clone)]
struct PeriodicSum {
    prefix: Vec<QZ>,
}

impl PeriodicSum {
    fn new(period: usize, step: impl Fn(usize) -> QZ) -> PeriodicSum {
        let mut prefix = Vec::with_capacity(period + 1);
        let mut acc = QZ::ZERO;
        prefix.push(acc);
        for j in 0..period {
            acc += step(j);
            prefix.push(acc);
        }
        PeriodicSum { prefix }
    }

    #[inline]
    fn sum(&self, m: i64) -> QZ {
        let period = (self.prefix.len() - 1) as i64;
        let (q, r) = (m.div_euclid(period), m.rem_euclid(period));
        self.prefix[period as usize].scale(q) + self.prefix[r as usize]
    }
}

#[derive(Debug, Clone)]
struct CyclicFormula {
    p: i64,
    q: i64,
    order: i64,
    // sums[z] accumulates j ↦ α(k, kʲ, k^z)
    sums: Vec<PeriodicSum>,
}

impl CyclicFormula {
    fn new(rep: &TorusRep, alpha: &Cochain) -> Result<Option<CyclicFormula>> {
        let grp = &rep.group;
        let Some(k) = grp.cyclic_generator(&[rep.g, rep.h])? else {
            return Ok(None);
        };
        let order = grp.element_order(k);
        let log = |x: usize| (0..order).find(|&e| grp.pow(k, e as i64) == x).expect("element lies in ⟨k⟩") as i64;
        let kpow: Vec<usize> = (0..order).map(|e| grp.pow(k, e as i64)).collect();
        let sums = (0..order).map(|z| PeriodicSum::new(order, |j| alpha.at3(k, kpow[j], kpow[z]))).collect();
        Ok(Some(CyclicFormula { p: log(rep.g), q: log(rep.h), order: order as i64, sums }))
    }

    fn f(&self, m: i64, z: i64) -> QZ {
        self.sums[z.rem_euclid(self.order) as usize].sum(m)
    }

    fn eval(&self, a: Z2, b: Z2) -> QZ {
        let lam = |v: Z2| self.p * v.0 + self.q * v.1;
        self.f(lam(a), lam(b))
    }
}

#[derive(Debug, Clone)]
struct TransportFormula {
    pb: Pullback,
    // u(x, ·) = γ(e₁, (x, ·)) is a periodic sum of K(x, j) in j
    u: Vec<PeriodicSum>,
}

impl TransportFormula {
    fn new(rep: &TorusRep, pb: Pullback) -> TransportFormula {
        let (og, oh) = (pb.gpow.len(), pb.hpow.len());
        let u = (0..og)
            .map(|x| {
                PeriodicSum::new(oh, |j| {
                    let w = pb.rho((x as i64, j as i64));
                    pb.alpha.at3(rep.h, rep.g, w) - pb.alpha.at3(rep.g, rep.h, w)
                })
            })
            .collect();
        TransportFormula { pb, u }
    }

    fn u(&self, w: Z2) -> QZ {
        self.u[w.0.rem_euclid(self.u.len() as i64) as usize].sum(w.1)
    }

    /// Moves the slice `S_b` to `S_{b+me}` for `e ∈ {e₁, e₂}`, where
    /// `step(q, w) = c(q, e, w) + γ(e, w)` and `base` evaluates `S_b`.
    fn transport(&self, b: Z2, e: Z2, m: i64, w: Z2, base: &dyn Fn(Z2) -> QZ, step: &dyn Fn(Z2, Z2) -> QZ) -> QZ {
        if m >= 0 {
            let mut acc = base(add(w, scaled(e, m))) - base(scaled(e, m));
            for i in 0..m {
                let q = add(b, scaled(e, i));
                let off = scaled(e, m - 1 - i);
                acc += step(q, add(w, off)) - step(q, off);
            }
            acc
        } else {
            let m = -m;
            let mut acc = base(add(w, scaled(e, -m))) - base(scaled(e, -m));
            for i in 1..=m {
                let q = add(b, scaled(e, -i));
                let off = scaled(e, -(m - i + 1));
                acc -= step(q, add(w, off)) - step(q, off);
            }
            acc
        }
    }

    fn slice_e1(&self, x: i64, w: Z2) -> QZ {
        let zero = |_: Z2| QZ::ZERO;
        let step = |q: Z2, w: Z2| self.pb.c(q, E1, w) + self.u(w);
        self.transport(ORIGIN, E1, x, w, &zero, &step)
    }

    fn eval(&self, a: Z2, w: Z2) -> QZ {
        let base = |w: Z2| self.slice_e1(a.0, w);
        let step = |q: Z2, w: Z2| self.pb.c(q, E2, w);
        self.transport((a.0, 0), E2, a.1, w, &base, &step)
    }
}

#[derive(Debug, Clone)]
struct WindowTable {
    radius: i64,
    values: Vec<QZ>,
}

impl WindowTable {
    fn side(radius: i64) -> usize {
        (2 * radius + 1) as usize
    }

    fn point_index(radius: i64, a: Z2) -> Option<usize> {
        if a.0.abs() > radius || a.1.abs() > radius {
            return None;
        }
        let s = Self::side(radius) as i64;
        Some(((a.0 + radius) * s + (a.1 + radius)) as usize)
    }

    fn pair_index(radius: i64, a: Z2, b: Z2) -> Option<usize> {
        let n = Self::side(radius).pow(2);
        Some(Self::point_index(radius, a)? * n + Self::point_index(radius, b)?)
    }

    fn points(radius: i64) -> Vec<Z2> {
        let r = -radius..=radius;
        r.clone().flat_map(|x| r.clone().map(move |y| (x, y))).collect()
    }

    fn solve(pb: &Pullback, radius: i64) -> Result<WindowTable> {
        let pts = Self::points(radius);
        let nvars = pts.len().pow(2);
        let idx = |a, b| Self::pair_index(radius, a, b);
        let mut rows = Vec::new();
        for &p in &pts {
            for (a, b) in [(ORIGIN, p), (p, ORIGIN)] {
                let mut row = SparseRow::new(QZ::ZERO);
                row.add_term(idx(a, b).unwrap(), 1);
                rows.push(row);
            }
        }
        for &a in &pts {
            for &b in &pts {
                let Some(ab) = idx(a, b) else { continue };
                for &c in &pts {
                    let (Some(abc1), Some(abc2)) = (idx(add(a, b), c), idx(a, add(b, c))) else { continue };
                    let mut row = SparseRow::new(pb.c(a, b, c));
                    row.add_term(ab, 1);
                    row.add_term(abc1, 1);
                    row.add_term(abc2, -1);
                    row.add_term(idx(b, c).unwrap(), -1);
                    rows.push(row);
                }
            }
        }
        match solve_sparse(nvars, rows)? {
            SolveOutcome::Solved(values) => Ok(WindowTable { radius, values }),
            SolveOutcome::Unsolvable(cert) => Err(Error::WindowInfeasible(cert)),
        }
    }

    fn eval(&self, a: Z2, b: Z2) -> Result<QZ> {
        match Self::pair_index(self.radius, a, b) {
            Some(i) => Ok(self.values[i]),
            None => Err(Error::OutsideWindow(if a.0.abs().max(a.1.abs()) > self.radius { a } else { b }, self.radius)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiftPath {
    /// `Cyclic` when the image is cyclic, `Transport` otherwise.
    Auto,
    Cyclic,
    Transport,
    Window,
}

impl std::str::FromStr for LiftPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<LiftPath> {
        match s {
            "auto" => Ok(LiftPath::Auto),
            "cyclic" => Ok(LiftPath::Cyclic),
            "transport" => Ok(LiftPath::Transport),
            "window" => Ok(LiftPath::Window),
            _ => Err(Error::Parse(format!("unknown lift path {s:?}"))),
        }
    }
}

#[derive(Clone)]
enum Base {
    Cyclic(CyclicFormula),
    Transport(Box<TransportFormula>),
    Window(WindowTable),
    /// `γ̃ − β̃` for the conjugation by `z` of the inner lift.
    Conjugate { inner: Arc<GammaLift>, z: usize },
}

pub type ExactShift = Arc<dyn Fn(Z2) -> QZ + Send + Sync>;

/// A lift `γ̃` with `dγ̃ = ρ*α`, immutable once built.
#[derive(Clone)]
pub struct GammaLift {
    rep: TorusRep,
    pb: Pullback,
    base: Base,
    path: LiftPath,
    window: i64,
    // coefficient of the bilinear form x₁y₂ − y₁x₂
    antisym: QZ,
    shifts: Vec<ExactShift>,
}

impl fmt::Debug for GammaLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GammaLift")
            .field("rep", &self.rep)
            .field("path", &self.path)
            .field("window", &self.window)
            .field("antisym", &self.antisym)
            .field("shifts", &self.shifts.len())
            .finish()
    }
}

/// [`lift_gamma_with`] on the automatic path.
pub fn lift_gamma(rep: &TorusRep, alpha: &Cochain, window: i64) -> Result<GammaLift> {
    lift_gamma_with(rep, alpha, LiftPath::Auto, window)
}

pub fn lift_gamma_with(rep: &TorusRep, alpha: &Cochain, path: LiftPath, window: i64) -> Result<GammaLift> {
    if alpha.degree() != 3 {
        return Err(Error::DimensionMismatch(format!("α must have degree 3, got {}", alpha.degree())));
    }
    if **alpha.group() != *rep.group {
        return Err(Error::GroupMismatch("α and ρ live on different groups".into()));
    }
    // only α on the image of ρ enters the lift
    let image = rep.group.generated_subgroup(&[rep.g, rep.h])?;
    let report = alpha.validate_on(&image)?;
    if !report.closed {
        return Err(Error::NotClosed);
    }
    if !report.normalized {
        return Err(Error::NotNormalized);
    }
    if window < 1 {
        return Err(Error::Parse(format!("window must be at least 1, got {window}")));
    }
    let pb = Pullback::new(rep, Arc::new(alpha.clone()));
    let cyclic = match path {
        LiftPath::Auto | LiftPath::Cyclic => CyclicFormula::new(rep, alpha)?,
        _ => None,
    };
    let (base, path) = match (path, cyclic) {
        (LiftPath::Auto | LiftPath::Cyclic, Some(f)) => (Base::Cyclic(f), LiftPath::Cyclic),
        (LiftPath::Cyclic, None) => {
            return Err(Error::GroupMismatch(format!("{rep:?} does not have cyclic image")));
        }
        (LiftPath::Window, _) => (Base::Window(WindowTable::solve(&pb, window)?), LiftPath::Window),
        _ => (Base::Transport(Box::new(TransportFormula::new(rep, pb.clone()))), LiftPath::Transport),
    };
    let mut lift = GammaLift { rep: rep.clone(), pb, base, path, window, antisym: QZ::ZERO, shifts: Vec::new() };
    let lambda0 = (-lift.sigma()?).halve();
    lift.antisym = lambda0;
    lift.certify(lift.cert_radius())?;
    Ok(lift)
}

impl GammaLift {
    pub fn rep(&self) -> &TorusRep {
        &self.rep
    }

    pub fn alpha(&self) -> &Cochain {
        &self.pb.alpha
    }

    pub fn path(&self) -> LiftPath {
        self.path
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    /// Radius of the box the construction certificate covers.
    pub fn cert_radius(&self) -> i64 {
        match self.base {
            Base::Window(ref t) => t.radius,
            Base::Conjugate { ref inner, .. } => inner.cert_radius(),
            _ => self.window.min(FORMULA_CERT_RADIUS),
        }
    }

    pub fn eval(&self, a: Z2, b: Z2) -> Result<QZ> {
        let mut v = match &self.base {
            Base::Cyclic(f) => f.eval(a, b),
            Base::Transport(f) => f.eval(a, b),
            Base::Window(t) => t.eval(a, b)?,
            Base::Conjugate { inner, z } => inner.eval(a, b)? - conjugation_beta(&inner.pb, *z, a, b),
        };
        v += self.antisym.scale(a.0 * b.1 - a.1 * b.0);
        for eta in &self.shifts {
            v += eta(a) + eta(b) - eta(add(a, b));
        }
        Ok(v)
    }

    /// Pairing with the fundamental class: `γ̃(e₁,e₂) − γ̃(e₂,e₁)`.
    pub fn sigma(&self) -> Result<QZ> {
        Ok(self.eval(E1, E2)? - self.eval(E2, E1)?)
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.sigma(), Ok(s) if s.is_zero())
    }

    /// `ρ*α(a, b, c)` for this lift's representation.
    pub fn target(&self, a: Z2, b: Z2, c: Z2) -> QZ {
        self.pb.c(a, b, c)
    }

    /// Checks `dγ̃ = ρ*α` on every triple `(a, b, c)` with `a, b, c, a+b,
    /// b+c` in `[-r, r]²`.
    pub fn certify(&self, r: i64) -> Result<()> {
        let pts = WindowTable::points(r);
        let inside = |p: Z2| p.0.abs() <= r && p.1.abs() <= r;
        for &a in &pts {
            for &b in &pts {
                if !inside(add(a, b)) {
                    continue;
                }
                let gab = self.eval(a, b)?;
                for &c in &pts {
                    if !inside(add(b, c)) {
                        continue;
                    }
                    let d = gab + self.eval(add(a, b), c)? - self.eval(a, add(b, c))? - self.eval(b, c)?;
                    if d != self.pb.c(a, b, c) {
                        return Err(Error::LiftVerification(format!(
                            "{a:?}, {b:?}, {c:?}: dγ̃ = {d}, ρ*α = {}",
                            self.pb.c(a, b, c)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds the closed form `λ·(x₁y₂ − y₁x₂)`; shifts σ by `2λ`.
    pub fn with_antisymmetric(&self, lambda: QZ) -> GammaLift {
        let mut out = self.clone();
        out.antisym += lambda;
        out
    }

    /// Adds the exact cochain `dη(a,b) = η(a) + η(b) − η(a+b)`.
    pub fn with_exact_shift(&self, eta: ExactShift) -> GammaLift {
        let mut out = self.clone();
        out.shifts.push(eta);
        out
    }

    /// The lift `ʰγ̃ = γ̃ − β̃` over `(zgz⁻¹, zhz⁻¹)`. Not normalized in
    /// general: its σ is the holonomy cocycle of `z`. Unlike
    /// [`lift_gamma`] this does not run the certificate; call
    /// [`GammaLift::certify`] when needed.
    pub fn conjugate(self: &Arc<Self>, z: usize) -> Result<GammaLift> {
        let rep = self.rep.conjugate(z)?;
        let pb = Pullback::new(&rep, self.pb.alpha.clone());
        Ok(GammaLift {
            rep,
            pb,
            base: Base::Conjugate { inner: self.clone(), z },
            path: self.path,
            window: self.window,
            antisym: QZ::ZERO,
            shifts: Vec::new(),
        })
    }
}

/// `β̃(a,b) = α(z, ρa, ρb) + α(zρaz⁻¹, zρbz⁻¹, z) − α(zρaz⁻¹, z, ρb)`.
fn conjugation_beta(pb: &Pullback, z: usize, a: Z2, b: Z2) -> QZ {
    let g = &pb.group;
    let (ra, rb) = (pb.rho(a), pb.rho(b));
    let (ca, cb) = (g.conj(z, ra), g.conj(z, rb));
    let al = &pb.alpha;
    al.at3(z, ra, rb) + al.at3(ca, cb, z) - al.at3(ca, z, rb)
}

pub fn conjugate_lift(lift: &Arc<GammaLift>, z: usize) -> Result<GammaLift> {
    lift.conjugate(z)
}

/// `σ(L₁) − σ(L₂)`; zero iff the lifts are isomorphic over the identity.
pub fn sigma_diff(l1: &GammaLift, l2: &GammaLift) -> Result<QZ> {
    if l1.rep != l2.rep {
        return Err(Error::RepMismatch);
    }
    if l1.pb.alpha != l2.pb.alpha {
        return Err(Error::GroupMismatch("lifts use different cocycles".into()));
    }
    Ok(l1.sigma()? - l2.sigma()?)
}
