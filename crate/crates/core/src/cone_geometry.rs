//! Which of the four cones C₊₊, C₊₋, C₋₊, C₋₋ coincide, and numerical
//! witnesses for coincidences of images.
//!
//! Cones are compared on sphere sections: the image intersected with
//! |x| = R is a finite union of closed curves, sampled with a seeded Weyl
//! sequence and compared by a brute-force nearest-neighbour pass followed by
//! golden-section refinement along the other curve.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex_space::{dot, ComplexPoint};
use crate::error::{Error, Result};
use crate::immersions::{CatalogImmersion, ConeParams, Immersion, Kind, ParityCase, Sign};

const ALL_SIGNS: [(Sign, Sign); 4] = [
    (Sign::Plus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Plus),
    (Sign::Minus, Sign::Minus),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConeId {
    pub signs: (Sign, Sign),
    pub params: ConeParams,
}

impl ConeId {
    pub fn new(params: ConeParams, first: Sign, second: Sign) -> Self {
        Self {
            signs: (first, second),
            params,
        }
    }

    /// "++", "+-", "-+" or "--".
    pub fn label(&self) -> String {
        format!("{}{}", self.signs.0.symbol(), self.signs.1.symbol())
    }

    pub fn immersion(&self) -> CatalogImmersion {
        CatalogImmersion::cone(self.params, self.signs.0, self.signs.1)
    }

    /// The cone obtained by θ ↦ θ + π.
    pub fn shifted_by_pi(&self) -> Self {
        let flip = |s: Sign, n: u32| if n % 2 == 1 { flip_sign(s) } else { s };
        Self::new(
            self.params,
            flip(self.signs.0, self.params.p()),
            flip(self.signs.1, self.params.q()),
        )
    }

    /// First member, in the order ++, +−, −+, −−, of the coincidence class.
    pub fn canonical(&self) -> Self {
        let other = self.shifted_by_pi();
        if order(&other) < order(self) {
            other
        } else {
            *self
        }
    }
}

impl Serialize for ConeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

fn flip_sign(s: Sign) -> Sign {
    match s {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    }
}

fn order(c: &ConeId) -> usize {
    ALL_SIGNS.iter().position(|s| *s == c.signs).expect("all sign pairs listed")
}

/// Partition of the four cones into coincidence classes, each class and
/// the list ordered canonically.
pub fn identify_coincidences(params: ConeParams) -> Vec<Vec<ConeId>> {
    let mut classes: Vec<Vec<ConeId>> = Vec::new();
    for (a, b) in ALL_SIGNS {
        let c = ConeId::new(params, a, b);
        let canon = c.canonical();
        match classes.iter_mut().find(|cl| cl[0] == canon) {
            Some(cl) => cl.push(c),
            None => classes.push(vec![c]),
        }
    }
    classes
}

/// Pointwise witness of a coincidence: max |C_a(y, θ+π) − C_b(y, θ)| on a
/// grid of y ∈ (0, 2] and θ ∈ [0, 2π).
pub fn shift_witness(a: &ConeId, b: &ConeId, grid: usize) -> Result<f64> {
    if a.shifted_by_pi() != *b {
        return Err(Error::Precondition(format!(
            "θ ↦ θ+π does not map C{} to C{}",
            a.label(),
            b.label()
        )));
    }
    let (ia, ib) = (a.immersion(), b.immersion());
    let mut worst: f64 = 0.0;
    for i in 1..=grid {
        let y = 2.0 * i as f64 / grid as f64;
        for j in 0..grid {
            let th = TAU * j as f64 / grid as f64;
            let pa = ia.evaluate(&[y, wrap_angle(th + PI)])?;
            let pb = ib.evaluate(&[y, th])?;
            worst = worst.max((&pa - &pb).max_abs());
        }
    }
    Ok(worst)
}

/// Reduces an angle to [0, 2π).
pub fn wrap_angle(th: f64) -> f64 {
    let w = th.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// One closed curve θ ↦ F(u, θ) of a sphere section.
struct SectionCurve<'a> {
    imm: &'a CatalogImmersion,
    u: f64,
}

impl SectionCurve<'_> {
    fn at(&self, th: f64) -> Result<ComplexPoint> {
        self.imm.evaluate(&[self.u, wrap_angle(th)])
    }
}

fn section<'a>(set: &'a [CatalogImmersion], radius: f64) -> Result<Vec<SectionCurve<'a>>> {
    let mut curves = Vec::new();
    for imm in set {
        let profile = imm.radial_profile().ok_or_else(|| {
            Error::Precondition(format!("{} has no radial profile", imm.name()))
        })?;
        let Some(u) = profile.param_at_radius(radius) else {
            continue;
        };
        curves.push(SectionCurve { imm, u });
        if imm.first_param_min() < 0.0 && u > 0.0 {
            curves.push(SectionCurve { imm, u: -u });
        }
    }
    if curves.is_empty() {
        return Err(Error::Precondition(format!("empty section at radius {radius}")));
    }
    Ok(curves)
}

struct Sample {
    curve: usize,
    theta: f64,
    point: ComplexPoint,
}

fn sample(curves: &[SectionCurve<'_>], n: usize, offset: f64) -> Result<Vec<Sample>> {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    (0..n)
        .map(|j| {
            let curve = j % curves.len();
            let theta = TAU * (offset + (j / curves.len()) as f64 * GOLDEN).fract();
            Ok(Sample {
                curve,
                theta,
                point: curves[curve].at(theta)?,
            })
        })
        .collect()
}

/// Distance from x to a curve, refined from a starting angle by golden
/// section search on |x − c(θ)|² over [θ₀ − w, θ₀ + w].
fn refine(x: &ComplexPoint, c: &SectionCurve<'_>, th0: f64, w: f64) -> Result<f64> {
    let f = |th: f64| -> Result<f64> { Ok((x - &c.at(th)?).norm_sq()) };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (th0 - w, th0 + w);
    let mut c1 = b - g * (b - a);
    let mut c2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(c1)?, f(c2)?);
    for _ in 0..80 {
        if f1 < f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = f(c1)?;
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = f(c2)?;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    Ok(f1.min(f2).min(f(th0)?).sqrt())
}

fn directed(from: &[Sample], to: &[Sample], to_curves: &[SectionCurve<'_>]) -> Result<f64> {
    let per_curve = (to.len() / to_curves.len()).max(1);
    let width = 4.0 * TAU / per_curve as f64;
    let mut worst: f64 = 0.0;
    for s in from {
        // brute-force nearest sample, then refine on each curve near its best sample
        let mut best = vec![(f64::INFINITY, 0.0); to_curves.len()];
        for t in to {
            let d = dot(&(&s.point - &t.point), &(&s.point - &t.point));
            if d < best[t.curve].0 {
                best[t.curve] = (d, t.theta);
            }
        }
        let mut d = f64::INFINITY;
        for (k, (_, th)) in best.iter().enumerate() {
            d = d.min(refine(&s.point, &to_curves[k], *th, width)?);
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Symmetric Hausdorff distance between the sections |x| = R of two unions
/// of immersions, divided by R.
pub fn image_distance_sets(
    a: &[CatalogImmersion],
    b: &[CatalogImmersion],
    section_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(section_radius > 0.0 && section_radius.is_finite()) {
        return Err(Error::Precondition(format!("section radius {section_radius} must be positive")));
    }
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let ca = section(a, section_radius)?;
    let cb = section(b, section_radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sa = sample(&ca, samples, rng.gen())?;
    let sb = sample(&cb, samples, rng.gen())?;
    let d = directed(&sa, &sb, &cb)?.max(directed(&sb, &sa, &ca)?);
    Ok(d / section_radius)
}

pub fn image_distance(
    a: &CatalogImmersion,
    b: &CatalogImmersion,
    section_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    image_distance_sets(std::slice::from_ref(a), std::slice::from_ref(b), section_radius, samples, seed)
}

/// The two cones a time-indexed family approaches as t → 0, canonicalized.
pub fn asymptotic_cone_pair(family: Kind, params: ConeParams) -> Result<(ConeId, ConeId)> {
    let second = match family {
        Kind::ShrinkerS | Kind::ShrinkerSt | Kind::VtCase2 => (Sign::Plus, Sign::Minus),
        Kind::ExpanderE | Kind::ExpanderEt | Kind::VtCase3 => (Sign::Minus, Sign::Plus),
        k => {
            return Err(Error::InvalidParams(format!("{k} is not a shrinker/expander family")));
        }
    };
    let expected_parity = match family {
        Kind::VtCase2 => Some(ParityCase::POddQEven),
        Kind::VtCase3 => Some(ParityCase::PEvenQOdd),
        _ => None,
    };
    if let Some(pc) = expected_parity {
        if params.parity() != pc {
            return Err(Error::InvalidParams(format!(
                "{family} needs the {} parity case, got {}",
                pc.as_str(),
                params.parity().as_str()
            )));
        }
    }
    Ok((
        ConeId::new(params, Sign::Plus, Sign::Plus).canonical(),
        ConeId::new(params, second.0, second.1).canonical(),
    ))
}

/// Section distance, at |x| = 1, between the time-ε slice of a family and
/// the union of its claimed asymptotic cones.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticWitness {
    pub epsilons: Vec<f64>,
    pub distances: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub within_threshold: bool,
    pub monotone: bool,
}

pub fn asymptotic_witness(
    family: &CatalogImmersion,
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<AsymptoticWitness> {
    let params = *family
        .cone_params()
        .ok_or_else(|| Error::InvalidParams("needs a cone family".into()))?;
    let (a, b) = asymptotic_cone_pair(family.kind(), params)?;
    let cones = [a.immersion(), b.immersion()];
    let sign = family.time().map(f64::signum).unwrap_or(1.0);
    let mut distances = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let slice = family.with_time(sign * eps)?;
        distances.push(image_distance_sets(std::slice::from_ref(&slice), &cones, 1.0, samples, seed)?);
    }
    let thresholds: Vec<f64> = epsilons.iter().map(|e| 10.0 * e.sqrt()).collect();
    Ok(AsymptoticWitness {
        within_threshold: distances.iter().zip(&thresholds).all(|(d, t)| d < t),
        monotone: distances.windows(2).all(|w| w[1] < w[0]),
        epsilons: epsilons.to_vec(),
        distances,
        thresholds,
    })
}

/// The reparametrization identities between the limit varifolds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reparametrization {
    /// E₀(y, θ) = S₀(y, θ + arg y), both p and q odd.
    ExpanderToShrinker,
    /// V₀(y, θ) = S₀(y, θ + arg y / q), p odd and q even.
    Case2ToShrinker,
    /// V₀(y, θ) = E₀(y, θ + arg y / p), p even and q odd.
    Case3ToExpander,
}

impl Reparametrization {
    pub fn for_parity(parity: ParityCase) -> Self {
        match parity {
            ParityCase::BothOdd => Self::ExpanderToShrinker,
            ParityCase::POddQEven => Self::Case2ToShrinker,
            ParityCase::PEvenQOdd => Self::Case3ToExpander,
        }
    }

    /// (left-hand kind, right-hand kind, divisor of arg y).
    fn parts(self, params: &ConeParams) -> (Kind, Kind, f64) {
        match self {
            Self::ExpanderToShrinker => (Kind::LimitE0, Kind::LimitS0, 1.0),
            Self::Case2ToShrinker => (Kind::LimitV0Case2, Kind::LimitS0, params.qf()),
            Self::Case3ToExpander => (Kind::LimitV0Case3, Kind::LimitE0, params.pf()),
        }
    }
}

/// max over a (y, θ) grid of |lhs(y, θ) − rhs(y, θ + arg y / d)|.
pub fn reparametrization_residual(which: Reparametrization, params: ConeParams, grid: usize) -> Result<f64> {
    if Reparametrization::for_parity(params.parity()) != which {
        return Err(Error::Precondition(format!(
            "{which:?} does not apply in the {} case",
            params.parity().as_str()
        )));
    }
    let (lk, rk, div) = which.parts(&params);
    let lhs = CatalogImmersion::new(lk, params)?;
    let rhs = CatalogImmersion::new(rk, params)?;
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        // symmetric in y, skipping 0
        let y = -2.0 + 4.0 * (i as f64 + 0.5) / grid as f64;
        let arg = if y < 0.0 { PI } else { 0.0 };
        for j in 0..grid {
            let th = TAU * j as f64 / grid as f64;
            let l = lhs.evaluate(&[y, th])?;
            let r = rhs.evaluate(&[y, wrap_angle(th + arg / div)])?;
            worst = worst.max((&l - &r).max_abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(p: u32, q: u32) -> Vec<Vec<String>> {
        identify_coincidences(ConeParams::new(p, q).unwrap())
            .iter()
            .map(|cl| cl.iter().map(ConeId::label).collect())
            .collect()
    }

    #[test]
    fn partitions_by_parity() {
        assert_eq!(labels(3, 1), vec![vec!["++", "--"], vec!["+-", "-+"]]);
        assert_eq!(labels(3, 2), vec![vec!["++", "-+"], vec!["+-", "--"]]);
        assert_eq!(labels(2, 1), vec![vec!["++", "+-"], vec!["-+", "--"]]);
    }

    #[test]
    fn coincident_and_distinct_sections() {
        let pr = ConeParams::new(3, 1).unwrap();
        let pp = ConeId::new(pr, Sign::Plus, Sign::Plus).immersion();
        let mm = ConeId::new(pr, Sign::Minus, Sign::Minus).immersion();
        let pm = ConeId::new(pr, Sign::Plus, Sign::Minus).immersion();
        assert!(image_distance(&pp, &mm, 1.0, 512, 7).unwrap() < 1e-3);
        assert!(image_distance(&pp, &pm, 1.0, 512, 7).unwrap() > 0.1);
    }

    #[test]
    fn shift_witness_is_exact() {
        let pr = ConeParams::new(5, 2).unwrap();
        for cl in identify_coincidences(pr) {
            assert!(shift_witness(&cl[0], &cl[1], 16).unwrap() < 1e-12);
        }
    }

    #[test]
    fn reparametrizations() {
        let r = reparametrization_residual(Reparametrization::Case2ToShrinker, ConeParams::new(3, 2).unwrap(), 20);
        assert!(r.unwrap() < 1e-12);
        assert!(reparametrization_residual(Reparametrization::Case2ToShrinker, ConeParams::new(3, 1).unwrap(), 4).is_err());
    }

    #[test]
    fn empty_section_is_an_error() {
        let pr = ConeParams::new(2, 1).unwrap();
        let st = CatalogImmersion::at_time(Kind::ShrinkerSt, pr, -1.0).unwrap();
        let cone = ConeId::new(pr, Sign::Plus, Sign::Plus).immersion();
        // |S_t| ≥ √q = 1 at t = −c
        assert!(image_distance(&st, &cone, 0.5, 16, 1).is_err());
    }
}
