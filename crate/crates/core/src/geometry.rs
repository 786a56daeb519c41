//! Bounded domains and the sign-changing weight they induce.
//!
//! A [`DomainSpec`] is one of a closed set of shapes. The weight is `+1`
//! inside the open set and `-1` on its closed complement, so points on the
//! boundary evaluate to `-1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Shape of a domain. Centers are points of length `dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r_in: f64, r_out: f64 },
    UnionOfBalls { balls: Vec<(Vec<f64>, f64)> },
    Box { center: Vec<f64>, half_widths: Vec<f64> },
}

/// A validated bounded open set in `R^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub dim: usize,
    pub allow_overlap: bool,
}

/// Signed coordinate permutation `(g x)_a = sign[a] * x[perm[a]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedPerm {
    pub perm: [usize; 3],
    pub sign: [f64; 3],
}

impl SignedPerm {
    pub fn identity() -> Self {
        SignedPerm { perm: [0, 1, 2], sign: [1.0; 3] }
    }

    pub fn apply(&self, x: &[f64]) -> [f64; 3] {
        [
            self.sign[0] * x[self.perm[0]],
            self.sign[1] * x[self.perm[1]],
            self.sign[2] * x[self.perm[2]],
        ]
    }

    /// All 48 symmetries of the cube.
    pub fn all() -> Vec<SignedPerm> {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(48);
        for perm in PERMS {
            for bits in 0..8u32 {
                let sign = [0, 1, 2].map(|a| if bits >> a & 1 == 1 { -1.0 } else { 1.0 });
                out.push(SignedPerm { perm, sign });
            }
        }
        out
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())))
}

impl DomainSpec {
    pub fn new(kind: DomainKind, dim: usize) -> Result<Self> {
        let d = DomainSpec { kind, dim, allow_overlap: false };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let dim = center.len();
        Self::new(DomainKind::Ball { center, radius }, dim)
    }

    /// Ball of the given radius centered at the origin of `R^3`.
    pub fn ball3(radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; 3], radius)
    }

    pub fn annulus(center: Vec<f64>, r_in: f64, r_out: f64) -> Result<Self> {
        let dim = center.len();
        Self::new(DomainKind::Annulus { center, r_in, r_out }, dim)
    }

    pub fn union_of_balls(balls: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let dim = balls.first().map(|b| b.0.len()).unwrap_or(3);
        Self::new(DomainKind::UnionOfBalls { balls }, dim)
    }

    /// Two balls of radius `r` centered at `±(sep/2) e_1` in `R^3`.
    pub fn two_balls(sep: f64, r: f64) -> Result<Self> {
        Self::union_of_balls(vec![(vec![-sep / 2.0, 0.0, 0.0], r), (vec![sep / 2.0, 0.0, 0.0], r)])
    }

    pub fn boxed(center: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        let dim = center.len();
        Self::new(DomainKind::Box { center, half_widths }, dim)
    }

    pub fn with_overlap(mut self, allow: bool) -> Result<Self> {
        self.allow_overlap = allow;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return invalid(format!("dimension must be at least 3, got {}", self.dim));
        }
        let pos = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                invalid(format!("{what} must be positive and finite, got {v}"))
            }
        };
        let pt = |c: &[f64]| -> Result<()> {
            if c.len() != self.dim || c.iter().any(|v| !v.is_finite()) {
                invalid(format!("center must be a finite point of length {}", self.dim))
            } else {
                Ok(())
            }
        };
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                pt(center)?;
                pos(*radius, "radius")
            }
            DomainKind::Annulus { center, r_in, r_out } => {
                pt(center)?;
                pos(*r_in, "r_in")?;
                pos(*r_out, "r_out")?;
                if r_in >= r_out {
                    return invalid(format!("annulus needs r_in < r_out, got {r_in} >= {r_out}"));
                }
                Ok(())
            }
            DomainKind::UnionOfBalls { balls } => {
                if balls.is_empty() {
                    return invalid("union of balls is empty");
                }
                for (c, r) in balls {
                    pt(c)?;
                    pos(*r, "radius")?;
                }
                if !self.allow_overlap && !self.balls_disjoint() {
                    return invalid("union members overlap and the overlap flag is not set");
                }
                Ok(())
            }
            DomainKind::Box { center, half_widths } => {
                pt(center)?;
                if half_widths.len() != self.dim {
                    return invalid("half_widths length must match the dimension");
                }
                for w in half_widths {
                    pos(*w, "half width")?;
                }
                Ok(())
            }
        }
    }

    fn balls_disjoint(&self) -> bool {
        if let DomainKind::UnionOfBalls { balls } = &self.kind {
            for i in 0..balls.len() {
                for j in i + 1..balls.len() {
                    let d = dist2(&balls[i].0, &balls[j].0).sqrt();
                    if d <= balls[i].1 + balls[j].1 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `+1` if `x` lies in the open set, `-1` otherwise.
    pub fn indicator(&self, x: &[f64]) -> i8 {
        let inside = match &self.kind {
            DomainKind::Ball { center, radius } => dist2(x, center) < radius * radius,
            DomainKind::Annulus { center, r_in, r_out } => {
                let d = dist2(x, center);
                d > r_in * r_in && d < r_out * r_out
            }
            DomainKind::UnionOfBalls { balls } => balls.iter().any(|(c, r)| dist2(x, c) < r * r),
            DomainKind::Box { center, half_widths } => x
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((xi, ci), w)| (xi - ci).abs() < *w),
        };
        if inside {
            1
        } else {
            -1
        }
    }

    /// Signed distance to the boundary, negative inside. Exact for balls and
    /// annuli; a lower bound on the magnitude for unions and boxes.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => dist2(x, center).sqrt() - radius,
            DomainKind::Annulus { center, r_in, r_out } => {
                let r = dist2(x, center).sqrt();
                (r_in - r).max(r - r_out)
            }
            DomainKind::UnionOfBalls { balls } => balls
                .iter()
                .map(|(c, r)| dist2(x, c).sqrt() - r)
                .fold(f64::INFINITY, f64::min),
            DomainKind::Box { center, half_widths } => {
                let q: Vec<f64> = x
                    .iter()
                    .zip(center)
                    .zip(half_widths)
                    .map(|((xi, ci), w)| (xi - ci).abs() - w)
                    .collect();
                let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
                let inside = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max).min(0.0);
                outside + inside
            }
        }
    }

    /// Returns `tΩ`.
    pub fn scale(&self, t: f64) -> Result<DomainSpec> {
        if !(t.is_finite() && t > 0.0) {
            return invalid(format!("scale factor must be positive, got {t}"));
        }
        let s = |c: &Vec<f64>| c.iter().map(|v| v * t).collect::<Vec<_>>();
        let kind = match &self.kind {
            DomainKind::Ball { center, radius } => DomainKind::Ball { center: s(center), radius: radius * t },
            DomainKind::Annulus { center, r_in, r_out } => {
                DomainKind::Annulus { center: s(center), r_in: r_in * t, r_out: r_out * t }
            }
            DomainKind::UnionOfBalls { balls } => {
                DomainKind::UnionOfBalls { balls: balls.iter().map(|(c, r)| (s(c), r * t)).collect() }
            }
            DomainKind::Box { center, half_widths } => {
                DomainKind::Box { center: s(center), half_widths: s(half_widths) }
            }
        };
        Ok(DomainSpec { kind, dim: self.dim, allow_overlap: self.allow_overlap })
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> Result<f64> {
        let n = self.dim;
        let wn = unit_ball_volume(n);
        match &self.kind {
            DomainKind::Ball { radius, .. } => Ok(wn * radius.powi(n as i32)),
            DomainKind::Annulus { r_in, r_out, .. } => Ok(wn * (r_out.powi(n as i32) - r_in.powi(n as i32))),
            DomainKind::UnionOfBalls { balls } => {
                let sum: f64 = balls.iter().map(|(_, r)| wn * r.powi(n as i32)).sum();
                if self.balls_disjoint() {
                    Ok(sum)
                } else if !self.allow_overlap {
                    invalid("overlapping union without overlap flag")
                } else if n == 3 && balls.len() == 2 {
                    let (c1, r1) = &balls[0];
                    let (c2, r2) = &balls[1];
                    let d = dist2(c1, c2).sqrt();
                    Ok(sum - lens_volume(*r1, *r2, d))
                } else {
                    Err(Error::Unsupported("volume of overlapping unions beyond two balls in R^3".into()))
                }
            }
            DomainKind::Box { half_widths, .. } => Ok(half_widths.iter().map(|w| 2.0 * w).product()),
        }
    }

    /// Origin-centered ball of equal measure.
    pub fn schwarz_ball(&self) -> Result<DomainSpec> {
        let r = (self.volume()? / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64);
        DomainSpec::ball(vec![0.0; self.dim], r)
    }

    /// Radius of the smallest origin-centered ball containing the closure.
    pub fn circumradius(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => norm(center) + radius,
            DomainKind::Annulus { center, r_out, .. } => norm(center) + r_out,
            DomainKind::UnionOfBalls { balls } => {
                balls.iter().map(|(c, r)| norm(c) + r).fold(0.0, f64::max)
            }
            DomainKind::Box { center, half_widths } => norm(center) + norm(half_widths),
        }
    }

    /// Coordinate-aligned bounding box as `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim;
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        let mut add = |c: &[f64], w: &[f64]| {
            for a in 0..n {
                lo[a] = lo[a].min(c[a] - w[a]);
                hi[a] = hi[a].max(c[a] + w[a]);
            }
        };
        match &self.kind {
            DomainKind::Ball { center, radius } => add(center, &vec![*radius; n]),
            DomainKind::Annulus { center, r_out, .. } => add(center, &vec![*r_out; n]),
            DomainKind::UnionOfBalls { balls } => {
                for (c, r) in balls {
                    add(c, &vec![*r; n]);
                }
            }
            DomainKind::Box { center, half_widths } => add(center, half_widths),
        }
        (lo, hi)
    }

    /// Center of mass.
    pub fn centroid(&self) -> Vec<f64> {
        match &self.kind {
            DomainKind::Ball { center, .. }
            | DomainKind::Annulus { center, .. }
            | DomainKind::Box { center, .. } => center.clone(),
            DomainKind::UnionOfBalls { balls } => {
                let mut c = vec![0.0; self.dim];
                let mut m = 0.0;
                for (ci, r) in balls {
                    let w = r.powi(self.dim as i32);
                    m += w;
                    for a in 0..self.dim {
                        c[a] += w * ci[a];
                    }
                }
                c.iter().map(|v| v / m).collect()
            }
        }
    }

    /// Outer radius of a ball or annulus, circumradius otherwise.
    pub fn char_radius(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => *radius,
            DomainKind::Annulus { r_out, .. } => *r_out,
            DomainKind::UnionOfBalls { balls } => balls.iter().map(|b| b.1).fold(0.0, f64::max),
            DomainKind::Box { half_widths, .. } => norm(half_widths),
        }
    }

    /// True for a ball or annulus centered at the origin.
    pub fn is_centered_radial(&self) -> bool {
        match &self.kind {
            DomainKind::Ball { center, .. } | DomainKind::Annulus { center, .. } => {
                center.iter().all(|v| *v == 0.0)
            }
            _ => false,
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.kind, DomainKind::Ball { .. })
    }

    /// Whether the signed permutation maps the domain onto itself (`dim == 3`).
    pub fn invariant_under(&self, g: &SignedPerm) -> bool {
        if self.dim != 3 {
            return false;
        }
        match &self.kind {
            DomainKind::Ball { center, .. } | DomainKind::Annulus { center, .. } => {
                close(&g.apply(center), center)
            }
            DomainKind::UnionOfBalls { balls } => balls.iter().all(|(c, r)| {
                let gc = g.apply(c);
                balls.iter().any(|(c2, r2)| close(&gc, c2) && (r - r2).abs() <= 1e-12 * r)
            }),
            DomainKind::Box { center, half_widths } => {
                let gw = [half_widths[g.perm[0]], half_widths[g.perm[1]], half_widths[g.perm[2]]];
                close(&g.apply(center), center) && close(&gw, half_widths)
            }
        }
    }

    /// Cube symmetries preserving the domain.
    pub fn symmetry_group(&self) -> Vec<SignedPerm> {
        SignedPerm::all().into_iter().filter(|g| self.invariant_under(g)).collect()
    }

    /// Sphere pieces of the boundary as `(center, radius, outward)`; `outward`
    /// is false where the exterior normal points toward the sphere center.
    pub fn spheres(&self) -> Result<Vec<(Vec<f64>, f64, bool)>> {
        match &self.kind {
            DomainKind::Ball { center, radius } => Ok(vec![(center.clone(), *radius, true)]),
            DomainKind::Annulus { center, r_in, r_out } => {
                Ok(vec![(center.clone(), *r_out, true), (center.clone(), *r_in, false)])
            }
            DomainKind::UnionOfBalls { balls } => {
                if !self.balls_disjoint() {
                    return Err(Error::Unsupported("boundary of overlapping balls".into()));
                }
                Ok(balls.iter().map(|(c, r)| (c.clone(), *r, true)).collect())
            }
            DomainKind::Box { .. } => Err(Error::Unsupported("box boundaries are not spheres".into())),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        let fmt = |c: &[f64]| c.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",");
        match &self.kind {
            DomainKind::Ball { center, radius } => format!("ball(c=[{}],r={radius})", fmt(center)),
            DomainKind::Annulus { center, r_in, r_out } => {
                format!("annulus(c=[{}],r_in={r_in},r_out={r_out})", fmt(center))
            }
            DomainKind::UnionOfBalls { balls } => {
                let parts: Vec<String> = balls.iter().map(|(c, r)| format!("[{}]:{r}", fmt(c))).collect();
                format!("balls({})", parts.join(";"))
            }
            DomainKind::Box { center, half_widths } => {
                format!("box(c=[{}],w=[{}])", fmt(center), fmt(half_widths))
            }
        }
    }
}

fn lens_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
    }
    std::f64::consts::PI * (r1 + r2 - d).powi(2)
        * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2))
        / (12.0 * d)
}

/// `+1` inside, `-1` on the closed complement.
pub fn indicator(domain: &DomainSpec, x: &[f64]) -> i8 {
    domain.indicator(x)
}

pub fn scale(domain: &DomainSpec, t: f64) -> Result<DomainSpec> {
    domain.scale(t)
}

pub fn schwarz_ball(domain: &DomainSpec) -> Result<DomainSpec> {
    domain.schwarz_ball()
}

pub fn volume(domain: &DomainSpec) -> Result<f64> {
    domain.volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn indicator_examples() {
        let b = DomainSpec::ball3(1.0).unwrap();
        assert_eq!(b.indicator(&[0.0, 0.0, 0.0]), 1);
        assert_eq!(b.indicator(&[2.0, 0.0, 0.0]), -1);
        assert_eq!(b.indicator(&[1.0, 0.0, 0.0]), -1);
        let a = DomainSpec::annulus(vec![0.0; 3], 1.0, 2.0).unwrap();
        assert_eq!(a.indicator(&[1.5, 0.0, 0.0]), 1);
        assert_eq!(a.indicator(&[0.5, 0.0, 0.0]), -1);
    }

    #[test]
    fn scale_examples() {
        let b = DomainSpec::ball3(1.0).unwrap();
        assert_eq!(b.scale(2.0).unwrap(), DomainSpec::ball3(2.0).unwrap());
        assert_eq!(b.scale(1.0).unwrap(), b);
        let a = DomainSpec::annulus(vec![0.0; 3], 1.0, 2.0).unwrap();
        assert_eq!(a.scale(0.5).unwrap(), DomainSpec::annulus(vec![0.0; 3], 0.5, 1.0).unwrap());
        assert!(b.scale(0.0).is_err());
        assert!(b.scale(-1.0).is_err());
    }

    #[test]
    fn volume_examples() {
        let b = DomainSpec::ball3(1.0).unwrap();
        assert!((b.volume().unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        let bx = DomainSpec::boxed(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(bx.volume().unwrap(), 8.0);
        let a = DomainSpec::annulus(vec![0.0; 3], 1.0, 2.0).unwrap();
        assert!((a.volume().unwrap() - 4.0 * PI / 3.0 * 7.0).abs() < 1e-12);
    }

    #[test]
    fn schwarz_examples() {
        let b = DomainSpec::ball(vec![3.0, -1.0, 2.0], 1.0).unwrap();
        let s = b.schwarz_ball().unwrap();
        match s.kind {
            DomainKind::Ball { center, radius } => {
                assert_eq!(center, vec![0.0; 3]);
                assert!((radius - 1.0).abs() < 1e-14);
            }
            _ => panic!(),
        }
        let a = DomainSpec::annulus(vec![0.0; 3], 1.0, 2.0).unwrap();
        if let DomainKind::Ball { radius, .. } = a.schwarz_ball().unwrap().kind {
            assert!((radius - 7f64.cbrt()).abs() < 1e-13);
        }
        let u = DomainSpec::two_balls(6.0, 1.0).unwrap();
        if let DomainKind::Ball { radius, .. } = u.schwarz_ball().unwrap().kind {
            assert!((radius - 2f64.cbrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn overlap_rules() {
        assert!(DomainSpec::two_balls(1.0, 1.0).is_err());
        let d = DomainKind::UnionOfBalls {
            balls: vec![(vec![-0.5, 0.0, 0.0], 1.0), (vec![0.5, 0.0, 0.0], 1.0)],
        };
        let u = DomainSpec { kind: d, dim: 3, allow_overlap: true };
        u.validate().unwrap();
        let v = u.volume().unwrap();
        assert!(v < 8.0 * PI / 3.0 && v > 4.0 * PI / 3.0);
        let mut strict = u.clone();
        strict.allow_overlap = false;
        assert!(strict.volume().is_err());
    }

    #[test]
    fn invalid_shapes() {
        assert!(DomainSpec::annulus(vec![0.0; 3], 2.0, 1.0).is_err());
        assert!(DomainSpec::ball3(0.0).is_err());
        assert!(DomainSpec::ball(vec![0.0, 0.0], 1.0).is_err());
        assert!(DomainSpec::boxed(vec![0.0; 3], vec![1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn symmetry_groups() {
        assert_eq!(DomainSpec::ball3(1.0).unwrap().symmetry_group().len(), 48);
        assert_eq!(DomainSpec::two_balls(6.0, 1.0).unwrap().symmetry_group().len(), 16);
        let off = DomainSpec::ball(vec![1.0, 0.0, 0.0], 0.5).unwrap();
        assert_eq!(off.symmetry_group().len(), 8);
    }

    #[test]
    fn signed_distance_sign_matches_indicator() {
        let doms = [
            DomainSpec::ball3(1.0).unwrap(),
            DomainSpec::annulus(vec![0.0; 3], 1.0, 2.0).unwrap(),
            DomainSpec::two_balls(4.0, 1.0).unwrap(),
            DomainSpec::boxed(vec![0.0; 3], vec![1.0, 2.0, 0.5]).unwrap(),
        ];
        for d in &doms {
            for i in 0..200 {
                let t = i as f64 * 0.37;
                let x = [2.5 * t.sin(), 1.7 * (1.3 * t).cos(), (0.7 * t).sin()];
                let sd = d.signed_distance(&x);
                if sd.abs() > 1e-9 {
                    assert_eq!(d.indicator(&x) == 1, sd < 0.0, "{:?} at {:?}", d.kind, x);
                }
            }
        }
    }

    fn arb_domain() -> impl Strategy<Value = DomainSpec> {
        prop_oneof![
            (0.1f64..3.0).prop_map(|r| DomainSpec::ball(vec![0.3, -0.2, 0.1], r).unwrap()),
            (0.1f64..1.0, 1.1f64..3.0).prop_map(|(a, b)| DomainSpec::annulus(vec![0.0; 3], a, a * b).unwrap()),
            (0.2f64..1.0, 2.1f64..4.0).prop_map(|(r, s)| DomainSpec::two_balls(s * r, r).unwrap()),
            (0.1f64..2.0, 0.1f64..2.0, 0.1f64..2.0)
                .prop_map(|(a, b, c)| DomainSpec::boxed(vec![0.1, 0.0, -0.3], vec![a, b, c]).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn volume_scales_like_t_cubed(d in arb_domain(), t in 0.1f64..10.0) {
            let v = d.volume().unwrap();
            let vt = d.scale(t).unwrap().volume().unwrap();
            prop_assert!((vt - t.powi(3) * v).abs() <= 1e-12 * vt);
        }

        #[test]
        fn indicator_commutes_with_scaling(d in arb_domain(), t in 0.1f64..10.0,
                                           x in prop::array::uniform3(-4.0f64..4.0)) {
            prop_assume!(d.signed_distance(&x).abs() > 1e-6);
            let ds = d.scale(t).unwrap();
            let tx = [t * x[0], t * x[1], t * x[2]];
            prop_assert_eq!(ds.indicator(&tx), d.indicator(&x));
        }

        #[test]
        fn schwarz_ball_preserves_volume(d in arb_domain()) {
            let v = d.volume().unwrap();
            let vs = d.schwarz_ball().unwrap().volume().unwrap();
            prop_assert!((v - vs).abs() <= 1e-12 * v);
        }

        #[test]
        fn indicator_is_plus_minus_one(d in arb_domain(), x in prop::array::uniform3(-5.0f64..5.0)) {
            let s = d.indicator(&x);
            prop_assert!(s == 1 || s == -1);
        }
    }
}
