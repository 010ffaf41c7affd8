//! Basins of attraction for (relaxed) Newton maps.
//!
//! Each pixel center is iterated until its orbit comes within `attract_tol`
//! of an attractor: a root, or any point of a prescribed cycle. With the
//! `parallel` feature rows are classified on rayon; the output is the same
//! image the sequential path produces.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{NewtonMap, Polynomial, Relaxation};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const DEFAULT_MAX_ITER: u32 = 200;
pub const DEFAULT_ATTRACT_TOL: f64 = 1e-6;

/// Index into [`RenderSpec::attractors`], or `None` for unresolved.
pub type Label = Option<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorKind {
    Root,
    Cycle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attractor {
    pub name: String,
    pub kind: AttractorKind,
    pub points: Vec<Complex64>,
}

/// Rectangle of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
}

impl Window {
    pub fn square(center: Complex64, side: f64) -> Self {
        Self {
            center,
            width: side,
            height: side,
        }
    }

    /// Window spanning `[x0, x1] x [y0, y1]`.
    pub fn from_bounds(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self {
            center: Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
            width: x1 - x0,
            height: y1 - y0,
        }
    }

    fn left(&self) -> f64 {
        self.center.re - 0.5 * self.width
    }

    fn top(&self) -> f64 {
        self.center.im + 0.5 * self.height
    }
}

#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub poly: Polynomial,
    pub h: Relaxation,
    pub window: Window,
    pub pixels_wide: usize,
    pub pixels_high: usize,
    pub max_iter: u32,
    pub attract_tol: f64,
    pub attractors: Vec<Attractor>,
}

impl RenderSpec {
    /// Spec with the roots of `poly` as singleton attractors, plus `cycle`
    /// as one extra attractor when given. Iteration cap and capture radius
    /// take their defaults.
    pub fn new(
        poly: Polynomial,
        h: Relaxation,
        window: Window,
        pixels: (usize, usize),
        cycle: Option<&[Complex64]>,
    ) -> Result<Self> {
        let mut attractors: Vec<Attractor> = find_roots(&poly)?
            .into_iter()
            .enumerate()
            .map(|(i, r)| Attractor {
                name: format!("root{i}"),
                kind: AttractorKind::Root,
                points: vec![r],
            })
            .collect();
        if let Some(cycle) = cycle {
            attractors.push(Attractor {
                name: "cycle".into(),
                kind: AttractorKind::Cycle,
                points: cycle.to_vec(),
            });
        }
        let spec = Self {
            poly,
            h,
            window,
            pixels_wide: pixels.0,
            pixels_high: pixels.1,
            max_iter: DEFAULT_MAX_ITER,
            attract_tol: DEFAULT_ATTRACT_TOL,
            attractors,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pixels_wide == 0 || self.pixels_high == 0 {
            return Err(Error::InvalidInput(
                "resolution must be at least 1x1".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if !(self.attract_tol > 0.0) {
            return Err(Error::InvalidInput("attract_tol must be positive".into()));
        }
        if !(self.window.width > 0.0 && self.window.height > 0.0) {
            return Err(Error::InvalidInput(
                "window must have positive extent".into(),
            ));
        }
        Ok(())
    }

    /// Plane coordinate of the center of pixel `(col, row)`; row 0 is the top.
    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let w = &self.window;
        Complex64::new(
            w.left() + (col as f64 + 0.5) * w.width / self.pixels_wide as f64,
            w.top() - (row as f64 + 0.5) * w.height / self.pixels_high as f64,
        )
    }

    /// Pixel containing `z`, if inside the window.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let w = &self.window;
        let fx = (z.re - w.left()) / w.width * self.pixels_wide as f64;
        let fy = (w.top() - z.im) / w.height * self.pixels_high as f64;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (col, row) = (fx.floor() as usize, fy.floor() as usize);
        (col < self.pixels_wide && row < self.pixels_high).then_some((col, row))
    }

    /// Index of the first attractor with `kind`.
    pub fn attractor_index(&self, kind: AttractorKind) -> Option<usize> {
        self.attractors.iter().position(|a| a.kind == kind)
    }
}

/// Per-pixel classification, row-major from the top row.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinImage {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Label>,
    pub iterations: Vec<u32>,
}

impl BasinImage {
    pub fn label_at(&self, col: usize, row: usize) -> Label {
        self.labels[row * self.width + col]
    }

    pub fn resolved_fraction(&self) -> f64 {
        let resolved = self.labels.iter().filter(|l| l.is_some()).count();
        resolved as f64 / self.labels.len() as f64
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

struct Classifier<'a> {
    spec: &'a RenderSpec,
    map: Option<NewtonMap>,
}

impl<'a> Classifier<'a> {
    fn new(spec: &'a RenderSpec) -> Self {
        Self {
            spec,
            map: NewtonMap::new(&spec.poly, spec.h).ok(),
        }
    }

    fn captured(&self, z: Complex64) -> Label {
        let tol = self.spec.attract_tol;
        self.spec
            .attractors
            .iter()
            .position(|a| a.points.iter().any(|&p| (z - p).norm() < tol))
    }

    fn classify(&self, z0: Complex64) -> (Label, u32) {
        let max_iter = self.spec.max_iter;
        let mut z = z0;
        for it in 0..=max_iter {
            if let Some(label) = self.captured(z) {
                return (Some(label), it);
            }
            if it == max_iter {
                break;
            }
            let Some(map) = &self.map else { break };
            match map.step(z) {
                Ok(next) if next.re.is_finite() && next.im.is_finite() => z = next,
                _ => return (None, it),
            }
        }
        (None, max_iter)
    }

    fn row(&self, row: usize) -> Vec<(Label, u32)> {
        (0..self.spec.pixels_wide)
            .map(|col| self.classify(self.spec.pixel_center(col, row)))
            .collect()
    }
}

/// Attractor reached from `z0` and the iteration at which it was reached.
/// Unresolved when the budget runs out or the orbit hits a pole.
pub fn classify_point(spec: &RenderSpec, z0: Complex64) -> (Label, u32) {
    Classifier::new(spec).classify(z0)
}

fn assemble(spec: &RenderSpec, rows: Vec<Vec<(Label, u32)>>) -> BasinImage {
    let (labels, iterations) = rows.into_iter().flatten().unzip();
    BasinImage {
        width: spec.pixels_wide,
        height: spec.pixels_high,
        labels,
        iterations,
    }
}

pub fn render_basins_sequential(spec: &RenderSpec) -> BasinImage {
    let classifier = Classifier::new(spec);
    let rows = (0..spec.pixels_high).map(|r| classifier.row(r)).collect();
    assemble(spec, rows)
}

#[cfg(feature = "parallel")]
pub fn render_basins_parallel(spec: &RenderSpec) -> BasinImage {
    let classifier = Classifier::new(spec);
    let rows = (0..spec.pixels_high)
        .into_par_iter()
        .map(|r| classifier.row(r))
        .collect();
    assemble(spec, rows)
}

/// Classifies every pixel; parallel over rows when the feature is on.
pub fn render_basins(spec: &RenderSpec) -> BasinImage {
    #[cfg(feature = "parallel")]
    {
        render_basins_parallel(spec)
    }
    #[cfg(not(feature = "parallel"))]
    {
        render_basins_sequential(spec)
    }
}

pub type Rgb = [u8; 3];

pub const PURPLE: Rgb = [128, 0, 128];
pub const BLACK: Rgb = [0, 0, 0];

const ROOT_COLORS: [Rgb; 8] = [
    [230, 180, 40],
    [40, 170, 220],
    [90, 200, 90],
    [220, 80, 60],
    [240, 240, 240],
    [60, 90, 200],
    [200, 120, 200],
    [120, 120, 120],
];

/// Color per attractor index plus one for unresolved pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub colors: Vec<Rgb>,
    pub unresolved: Rgb,
}

impl Palette {
    /// Roots cycle through a fixed hue list, cycles are purple and
    /// unresolved pixels black.
    pub fn for_attractors(attractors: &[Attractor]) -> Self {
        let mut root_idx = 0;
        let colors = attractors
            .iter()
            .map(|a| match a.kind {
                AttractorKind::Cycle => PURPLE,
                AttractorKind::Root => {
                    let c = ROOT_COLORS[root_idx % ROOT_COLORS.len()];
                    root_idx += 1;
                    c
                }
            })
            .collect();
        Self {
            colors,
            unresolved: BLACK,
        }
    }

    pub fn color(&self, label: Label) -> Rgb {
        match label {
            Some(i) => self.colors.get(i).copied().unwrap_or(self.unresolved),
            None => self.unresolved,
        }
    }
}

/// Binary P6 bytes.
pub fn encode_ppm(img: &BasinImage, palette: &Palette) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + 3 * img.labels.len());
    out.extend_from_slice(header.as_bytes());
    for &label in &img.labels {
        out.extend_from_slice(&palette.color(label));
    }
    out
}

pub fn write_ppm(img: &BasinImage, palette: &Palette, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_ppm(img, palette))?;
    w.flush()?;
    Ok(())
}

const ROOT_MAX_ITER: usize = 1000;

fn newton_root(q: &[Complex64], start: Complex64) -> Option<Complex64> {
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in q.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    let mut z = start;
    for _ in 0..ROOT_MAX_ITER {
        let (p, dp) = eval(z);
        if p.norm() == 0.0 {
            return Some(z);
        }
        if dp.norm() == 0.0 {
            // nudge off a critical point
            z += Complex64::new(1e-3, 1e-3) * z.norm().max(1.0);
            continue;
        }
        let step = p / dp;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    let (p, _) = eval(z);
    let scale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
    (p.norm() <= 1e-9 * scale * z.norm().max(1.0).powi(q.len() as i32)).then_some(z)
}

/// Divides `q` by `(z - r)`, dropping the remainder.
fn deflate(q: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let d = q.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    let mut carry = q[d];
    for k in (0..d).rev() {
        out[k] = carry;
        carry = q[k] + carry * r;
    }
    out
}

/// All complex roots with multiplicity, by Newton iteration with deflation
/// followed by polishing on the original polynomial.
pub fn find_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let monic = p.monic()?;
    let degree = monic.coeffs().len() - 1;
    if degree == 0 {
        return Err(Error::InvalidInput(
            "constant polynomial has no roots".into(),
        ));
    }
    let co = monic.coeffs();
    let radius = 1.0 + co[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut q = co.to_vec();
    let mut roots = Vec::with_capacity(degree);
    while q.len() > 2 {
        let m = q.len() - 1;
        let found = (0..4 * m + 4).find_map(|k| {
            let angle = 0.37 + std::f64::consts::TAU * k as f64 / (4 * m + 4) as f64;
            let r = 0.5 * radius * (1.0 + 0.1 * (k % 3) as f64);
            newton_root(&q, Complex64::from_polar(r, angle))
        });
        let Some(root) = found else {
            return Err(Error::ConvergenceFailure(format!(
                "no root found for deflated polynomial of degree {m}"
            )));
        };
        roots.push(root);
        q = deflate(&q, root);
    }
    roots.push(-q[0] / q[1]);

    let scale = p.max_coeff();
    let dp = p.derivative();
    for r in &mut roots {
        let mut best = *r;
        let mut best_val = p.eval(best).norm();
        let mut z = best;
        for _ in 0..50 {
            let d = dp.eval(z);
            if d.norm() == 0.0 {
                break;
            }
            z -= p.eval(z) / d;
            let v = p.eval(z).norm();
            if v < best_val {
                best = z;
                best_val = v;
            }
            if v == 0.0 {
                break;
            }
        }
        if best_val >= 1e-10 * scale * best.norm().max(1.0).powi(degree as i32) {
            return Err(Error::ConvergenceFailure(format!(
                "root {best} only reached |p| = {best_val:e}"
            )));
        }
        *r = best;
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_cycle, family_polynomial};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn five_cycle_spec(window: Window, pixels: (usize, usize)) -> (RenderSpec, Vec<Complex64>) {
        let (cyc, params) = build_cycle(3, 5).unwrap();
        let p = family_polynomial(3, params.c, c(1.0, 0.0)).unwrap();
        let pts = cyc.to_complex();
        let spec = RenderSpec::new(p, Relaxation::plain(), window, pixels, Some(&pts)).unwrap();
        (spec, pts)
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let r = sorted(find_roots(&Polynomial::from_real(&[-1.0, 0.0, 1.0]).unwrap()).unwrap());
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-12);

        let triple = Polynomial::from_real(&[-8.0, 12.0, -6.0, 1.0]).unwrap();
        let r = find_roots(&triple).unwrap();
        assert_eq!(r.len(), 3);
        for z in r {
            assert!((z - c(2.0, 0.0)).norm() < 1e-3);
        }
        assert!(find_roots(&Polynomial::constant(c(2.0, 0.0))).is_err());
    }

    #[test]
    fn smale_roots_against_bisection_oracle() {
        let f = |x: f64| x * x * x - 2.0 * x + 2.0;
        let (mut a, mut b) = (-3.0, 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m).signum() == f(a).signum() {
                a = m
            } else {
                b = m
            }
        }
        let real = 0.5 * (a + b);
        assert!((real + 1.7693).abs() < 1e-4);
        // z^3 - 2z + 2 = (z - r)(z^2 + r z + (r^2 - 2))
        let (bq, cq) = (real, real * real - 2.0);
        let disc = c(bq * bq - 4.0 * cq, 0.0).sqrt();
        let pair = [(-bq + disc) / 2.0, (-bq - disc) / 2.0];

        let roots = find_roots(&Polynomial::from_real(&[2.0, -2.0, 0.0, 1.0]).unwrap()).unwrap();
        for expected in [c(real, 0.0), pair[0], pair[1]] {
            assert!(
                roots.iter().any(|r| (r - expected).norm() < 1e-10),
                "{expected}"
            );
        }
    }

    #[test]
    fn classify_examples() {
        let (spec, pts) = five_cycle_spec(Window::square(c(0.0, 0.0), 1.5), (8, 8));
        let root = spec.attractors[0].points[0];
        assert_eq!(classify_point(&spec, root), (Some(0), 0));
        let cycle = spec.attractor_index(AttractorKind::Cycle);
        assert_eq!(classify_point(&spec, c(0.0, 0.0)).0, cycle);
        assert_eq!(classify_point(&spec, pts[2]).0, cycle);

        let mut zero = spec.clone();
        zero.max_iter = 0;
        assert_eq!(classify_point(&zero, c(50.0, 50.0)), (None, 0));
    }

    #[test]
    fn single_pixel_on_a_root() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let spec = RenderSpec::new(
            p,
            Relaxation::plain(),
            Window::square(c(1.0, 0.0), 0.1),
            (1, 1),
            None,
        )
        .unwrap();
        let img = render_basins(&spec);
        let label = img.label_at(0, 0).unwrap();
        assert!((spec.attractors[label].points[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pixel_geometry() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let spec = RenderSpec::new(
            p,
            Relaxation::plain(),
            Window::square(c(0.0, 0.0), 2.0),
            (4, 2),
            None,
        )
        .unwrap();
        assert_eq!(spec.pixel_center(0, 0), c(-0.75, 0.5));
        assert_eq!(spec.pixel_center(3, 1), c(0.75, -0.5));
        assert_eq!(spec.pixel_of(c(-0.75, 0.5)), Some((0, 0)));
        assert_eq!(spec.pixel_of(c(0.9, -0.9)), Some((3, 1)));
        assert_eq!(spec.pixel_of(c(1.5, 0.0)), None);
    }

    #[test]
    fn spec_validation() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let w = Window::square(c(0.0, 0.0), 1.0);
        assert!(RenderSpec::new(p.clone(), Relaxation::plain(), w, (0, 5), None).is_err());
        let mut s = RenderSpec::new(p, Relaxation::plain(), w, (2, 2), None).unwrap();
        s.attract_tol = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn main_window_shows_cycle_basin() {
        let (spec, pts) = five_cycle_spec(Window::square(c(0.0, 0.0), 1.5), (256, 256));
        let img = render_basins(&spec);
        let cycle = spec.attractor_index(AttractorKind::Cycle);
        assert!(
            img.resolved_fraction() >= 0.99,
            "{}",
            img.resolved_fraction()
        );
        assert!(img.count(cycle) > 0);
        for z in &pts {
            assert_eq!(classify_point(&spec, *z), (cycle, 0));
        }
        // z_1 = 0, z_3, z_4; z_2 = 1 is outside the window
        for z in &pts[..4] {
            if let Some((col, row)) = spec.pixel_of(*z) {
                assert_eq!(img.label_at(col, row), cycle, "cycle point {z}");
                assert!(spec.pixel_center(col, row).im.abs() < 0.01);
            }
        }
    }

    #[test]
    fn closeup_window_contains_cycle_pixels() {
        let window = Window::from_bounds(-0.05, 0.255, -0.125, 0.125);
        let (spec, pts) = five_cycle_spec(window, (128, 104));
        let img = render_basins(&spec);
        let cycle = spec.attractor_index(AttractorKind::Cycle);
        assert!(img.count(cycle) > 0);
        let inside: Vec<_> = pts.iter().filter_map(|z| spec.pixel_of(*z)).collect();
        // 0 and z_5 ~ 0.2458 fall in this window
        assert_eq!(inside.len(), 2);
        for (col, row) in inside {
            assert_eq!(img.label_at(col, row), cycle);
        }
    }

    #[test]
    fn labels_stable_when_budget_doubles() {
        let (mut spec, _) = five_cycle_spec(Window::square(c(0.0, 0.0), 1.5), (64, 64));
        spec.max_iter = 40;
        let short = render_basins(&spec);
        spec.max_iter = 80;
        let long = render_basins(&spec);
        for (a, b) in short.labels.iter().zip(&long.labels) {
            if a.is_some() {
                assert_eq!(a, b);
            }
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential() {
        let (spec, _) = five_cycle_spec(Window::square(c(0.1, 0.05), 1.2), (96, 80));
        assert_eq!(
            render_basins_parallel(&spec),
            render_basins_sequential(&spec)
        );
    }

    #[test]
    fn ppm_layout() {
        let img = BasinImage {
            width: 1,
            height: 1,
            labels: vec![Some(0)],
            iterations: vec![0],
        };
        let palette = Palette {
            colors: vec![[1, 2, 3]],
            unresolved: BLACK,
        };
        let bytes = encode_ppm(&img, &palette);
        assert_eq!(bytes, b"P6\n1 1\n255\n\x01\x02\x03");

        let img = BasinImage {
            width: 2,
            height: 2,
            labels: vec![Some(0); 4],
            iterations: vec![0; 4],
        };
        let bytes = encode_ppm(&img, &palette);
        let payload = &bytes[bytes.len() - 12..];
        assert_eq!(payload, [1, 2, 3].repeat(4).as_slice());
    }

    #[test]
    fn ppm_rerun_is_byte_identical() {
        let (spec, _) = five_cycle_spec(Window::square(c(0.0, 0.0), 1.5), (48, 48));
        let palette = Palette::for_attractors(&spec.attractors);
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.ppm"), dir.path().join("b.ppm"));
        write_ppm(&render_basins(&spec), &palette, &a).unwrap();
        write_ppm(&render_basins(&spec), &palette, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn palette_defaults() {
        let (spec, _) = five_cycle_spec(Window::square(c(0.0, 0.0), 1.5), (2, 2));
        let palette = Palette::for_attractors(&spec.attractors);
        let cycle = spec.attractor_index(AttractorKind::Cycle);
        assert_eq!(palette.color(cycle), PURPLE);
        assert_eq!(palette.color(None), BLACK);
        assert_ne!(palette.color(Some(0)), palette.color(Some(1)));
    }
}
