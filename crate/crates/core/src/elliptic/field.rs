//! Problem assembly and solution fields.
//!
//! A [`Problem`] bundles the domain, grid, curvature scale, and Dirichlet
//! boundary data, and precomputes everything geometric: the node
//! classification, ghost rules with their boundary terms, index strides,
//! and the interior row numbering used by the sparse Jacobian.
//!
//! A [`FieldSolution`] is a converged field: the full node array (`NaN`
//! at exterior nodes, extrapolated values at ghosts) plus the metadata
//! needed to interpret it. It round-trips through a plain-text format
//! whose header carries the dimension, spacing, box, curvature scale,
//! and gradient weight.

use std::fmt::Write as _;
use std::path::Path;

use super::domain::ConvexDomain;
use super::grid::{
    classify, ghost_rules, interp_at, update_ghost_values, GhostRule, GridSpec, Mask,
    NodeClass,
};
use super::operator::{strides, SolitonParams, Workspace};
use crate::{Error, Result};

/// Dirichlet data on the domain boundary.
pub enum BoundaryData {
    /// Constant value.
    Constant(f64),
    /// Arbitrary pointwise data.
    Func(Box<dyn Fn(&[f64]) -> f64>),
}

impl BoundaryData {
    /// Evaluates the datum at a boundary point.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            BoundaryData::Constant(c) => *c,
            BoundaryData::Func(f) => f(x),
        }
    }
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryData::Constant(c) => write!(f, "Constant({c})"),
            BoundaryData::Func(_) => write!(f, "Func(..)"),
        }
    }
}

/// A fully assembled Dirichlet problem on a grid-covered convex domain.
#[derive(Debug)]
pub struct Problem {
    /// The domain.
    pub domain: ConvexDomain,
    /// The covering grid.
    pub grid: GridSpec,
    /// Curvature scale `C > 1`.
    pub c: f64,
    /// Dirichlet data.
    pub boundary: BoundaryData,
    /// Node classification.
    pub mask: Mask,
    /// Ghost extrapolation rules, one per ghost node.
    pub rules: Vec<GhostRule>,
    /// Precomputed `w_b * g(x_b)` per rule.
    pub boundary_terms: Vec<f64>,
    /// Per-axis linear strides.
    pub strides: Vec<isize>,
    /// Interior row index per linear node (`u32::MAX` elsewhere).
    pub row_of: Vec<u32>,
    /// Ghost rule index per linear node (`u32::MAX` elsewhere).
    pub rule_of: Vec<u32>,
}

impl Problem {
    /// Assembles a problem: classifies nodes, builds ghost rules, and
    /// binds the boundary data.
    pub fn new(
        domain: ConvexDomain,
        grid: GridSpec,
        c: f64,
        boundary: BoundaryData,
    ) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::OutOfRange(format!("curvature scale C = {c} must be > 1")));
        }
        if domain.dim() != grid.dim() {
            return Err(Error::OutOfRange("domain/grid dimension mismatch".into()));
        }
        let mask = classify(&grid, &domain)?;
        if mask.interior.is_empty() {
            return Err(Error::OutOfRange("grid resolves no interior nodes".into()));
        }
        let rules = ghost_rules(&grid, &domain, &mask)?;
        let boundary_terms: Vec<f64> = rules
            .iter()
            .map(|r| r.boundary_weight * boundary.value(&r.boundary_point))
            .collect();
        let strides = strides(&grid);
        let mut row_of = vec![u32::MAX; grid.len()];
        for (row, &lin) in mask.interior.iter().enumerate() {
            row_of[lin] = row as u32;
        }
        let mut rule_of = vec![u32::MAX; grid.len()];
        for (idx, rule) in rules.iter().enumerate() {
            rule_of[rule.ghost] = idx as u32;
        }
        Ok(Problem {
            domain,
            grid,
            c,
            boundary,
            mask,
            rules,
            boundary_terms,
            strides,
            row_of,
            rule_of,
        })
    }

    /// Number of interior unknowns.
    pub fn interior_count(&self) -> usize {
        self.mask.interior.len()
    }

    /// Refreshes all ghost values from the current interior values and
    /// the bound boundary data.
    pub fn apply_ghosts(&self, u: &mut [f64]) {
        update_ghost_values(u, &self.rules, &self.boundary_terms);
    }

    /// Builds a full-grid field from a pointwise initializer: interior
    /// nodes take `f(x)`, ghosts follow their rules, exterior is `NaN`.
    pub fn init_field(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut u = vec![f64::NAN; self.grid.len()];
        for &lin in &self.mask.interior {
            u[lin] = f(&self.grid.point(&self.grid.to_multi(lin)));
        }
        self.apply_ghosts(&mut u);
        u
    }

    /// The default initial guess: the umbilic graph over the inscribed
    /// center, shifted so its boundary mean matches the data mean.
    pub fn hyperboloid_guess(&self) -> Vec<f64> {
        let (center, radius) = self.domain.inscribed_ball();
        let c2inv = 1.0 / (self.c * self.c);
        let base = (c2inv + radius * radius).sqrt();
        let data_mean = if self.rules.is_empty() {
            0.0
        } else {
            self.rules
                .iter()
                .map(|r| self.boundary.value(&r.boundary_point))
                .sum::<f64>()
                / self.rules.len() as f64
        };
        self.init_field(|x| {
            let d2: f64 = x.iter().zip(&center).map(|(xi, ci)| (xi - ci).powi(2)).sum();
            (c2inv + d2).sqrt() - base + data_mean
        })
    }

    /// Pointwise residual over interior nodes for the given gradient
    /// weight; `NaN` where the jet leaves the admissible cone. The
    /// returned vector is aligned with `mask.interior`.
    pub fn residual_field(&self, u: &[f64], sigma: f64) -> Result<Vec<f64>> {
        let params = SolitonParams::new(self.c, sigma)?;
        let mut ws = Workspace::new(self.grid.dim(), self.grid.h);
        let mut out = Vec::with_capacity(self.interior_count());
        for &lin in &self.mask.interior {
            ws.extract_jet(u, lin, &self.strides);
            out.push(ws.eval(&params).residual);
        }
        Ok(out)
    }

    /// Packages a solved node array as a self-contained [`FieldSolution`].
    pub fn solution(&self, sigma: f64, u: &[f64]) -> FieldSolution {
        FieldSolution {
            grid: self.grid.clone(),
            domain: self.domain.clone(),
            c: self.c,
            sigma,
            u: u.to_vec(),
        }
    }
}

/// A converged (or checkpointed) field with its interpretation metadata.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    /// The covering grid.
    pub grid: GridSpec,
    /// The domain the field was solved on.
    pub domain: ConvexDomain,
    /// Curvature scale.
    pub c: f64,
    /// Gradient weight the field solves for.
    pub sigma: f64,
    /// Full node array: interior and ghost values, `NaN` exterior.
    pub u: Vec<f64>,
}

impl FieldSolution {
    /// Interpolates the field at a point inside the domain.
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        interp_at(&self.grid, &self.u, x)
    }

    /// Serializes to the plain-text field format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "minksol-field 1");
        let _ = writeln!(s, "dim {}", self.grid.dim());
        let _ = writeln!(s, "h {:.16e}", self.grid.h);
        let origin: Vec<String> =
            self.grid.origin.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "origin {}", origin.join(" "));
        let dims: Vec<String> = self.grid.dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "dims {}", dims.join(" "));
        match &self.domain {
            ConvexDomain::Ball { center, radius } => {
                let c: Vec<String> = center.iter().map(|v| format!("{v:.16e}")).collect();
                let _ = writeln!(s, "domain ball {} {:.16e}", c.join(" "), radius);
            }
            ConvexDomain::Ellipsoid { center, semi_axes } => {
                let c: Vec<String> = center.iter().map(|v| format!("{v:.16e}")).collect();
                let a: Vec<String> =
                    semi_axes.iter().map(|v| format!("{v:.16e}")).collect();
                let _ = writeln!(s, "domain ellipsoid {} {}", c.join(" "), a.join(" "));
            }
        }
        let _ = writeln!(s, "c {:.16e}", self.c);
        let _ = writeln!(s, "sigma {:.16e}", self.sigma);
        let _ = writeln!(s, "values {}", self.u.len());
        for v in &self.u {
            if v.is_nan() {
                s.push_str("nan\n");
            } else {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
        s
    }

    /// Writes the text format to a file.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Parses the text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::BadFieldFile(msg.to_string());
        let mut lines = text.lines();
        let magic = lines.next().ok_or_else(|| bad("empty file"))?;
        if magic.trim() != "minksol-field 1" {
            return Err(bad(&format!("unrecognized header line: {magic}")));
        }
        let mut dim: Option<usize> = None;
        let mut h: Option<f64> = None;
        let mut origin: Option<Vec<f64>> = None;
        let mut dims: Option<Vec<usize>> = None;
        let mut domain: Option<ConvexDomain> = None;
        let mut c: Option<f64> = None;
        let mut sigma: Option<f64> = None;
        let mut count: Option<usize> = None;
        for line in lines.by_ref() {
            let mut parts = line.split_whitespace();
            let key = parts.next().ok_or_else(|| bad("blank header line"))?;
            let rest: Vec<&str> = parts.collect();
            let floats = |r: &[&str]| -> Result<Vec<f64>> {
                r.iter()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| bad(&format!("bad number: {t}")))
                    })
                    .collect()
            };
            match key {
                "dim" => {
                    dim = Some(
                        rest.first()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| bad("bad dim"))?,
                    )
                }
                "h" => h = Some(floats(&rest)?[0]),
                "origin" => origin = Some(floats(&rest)?),
                "dims" => {
                    dims = Some(
                        rest.iter()
                            .map(|t| t.parse().map_err(|_| bad("bad dims")))
                            .collect::<Result<_>>()?,
                    )
                }
                "domain" => {
                    let d = dim.ok_or_else(|| bad("domain before dim"))?;
                    match rest.first().copied() {
                        Some("ball") => {
                            let nums = floats(&rest[1..])?;
                            if nums.len() != d + 1 {
                                return Err(bad("ball needs center + radius"));
                            }
                            domain = Some(ConvexDomain::ball(
                                nums[..d].to_vec(),
                                nums[d],
                            )?);
                        }
                        Some("ellipsoid") => {
                            let nums = floats(&rest[1..])?;
                            if nums.len() != 2 * d {
                                return Err(bad("ellipsoid needs center + semi-axes"));
                            }
                            domain = Some(ConvexDomain::ellipsoid(
                                nums[..d].to_vec(),
                                nums[d..].to_vec(),
                            )?);
                        }
                        other => {
                            return Err(bad(&format!("unknown domain kind {other:?}")))
                        }
                    }
                }
                "c" => c = Some(floats(&rest)?[0]),
                "sigma" => sigma = Some(floats(&rest)?[0]),
                "values" => {
                    count = Some(
                        rest.first()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| bad("bad value count"))?,
                    );
                    break;
                }
                other => return Err(bad(&format!("unknown header key {other}"))),
            }
        }
        let dim = dim.ok_or_else(|| bad("missing dim"))?;
        let grid = GridSpec::new(
            origin.ok_or_else(|| bad("missing origin"))?,
            dims.ok_or_else(|| bad("missing dims"))?,
            h.ok_or_else(|| bad("missing h"))?,
        )?;
        if grid.dim() != dim {
            return Err(bad("dim/origin/dims inconsistent"));
        }
        let count = count.ok_or_else(|| bad("missing values"))?;
        if count != grid.len() {
            return Err(bad(&format!(
                "value count {count} does not match grid size {}",
                grid.len()
            )));
        }
        let mut u = Vec::with_capacity(count);
        for line in lines {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if t == "nan" {
                u.push(f64::NAN);
            } else {
                u.push(t.parse::<f64>().map_err(|_| bad(&format!("bad value {t}")))?);
            }
        }
        if u.len() != count {
            return Err(bad(&format!("expected {count} values, found {}", u.len())));
        }
        Ok(FieldSolution {
            grid,
            domain: domain.ok_or_else(|| bad("missing domain"))?,
            c: c.ok_or_else(|| bad("missing c"))?,
            sigma: sigma.ok_or_else(|| bad("missing sigma"))?,
            u,
        })
    }

    /// Reads the text format from a file.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Largest absolute difference between two fields over the interior
/// nodes of a shared mask.
pub fn interior_sup_diff(mask: &Mask, a: &[f64], b: &[f64]) -> f64 {
    let mut sup: f64 = 0.0;
    for &lin in &mask.interior {
        sup = sup.max((a[lin] - b[lin]).abs());
    }
    sup
}

/// Convenience: nodes of the interior that touch a ghost through the
/// operator stencil (the discrete boundary ring).
pub fn boundary_ring(problem: &Problem) -> Vec<usize> {
    let offs = super::grid::stencil_offsets(problem.grid.dim());
    let mut ring = Vec::new();
    for &lin in &problem.mask.interior {
        let multi = problem.grid.to_multi(lin);
        let mut touches = false;
        for o in &offs {
            if let Some(nb) = problem.grid.offset(&multi, o) {
                if problem.mask.class[problem.grid.to_lin(&nb)] == NodeClass::Ghost {
                    touches = true;
                    break;
                }
            }
        }
        if touches {
            ring.push(lin);
        }
    }
    ring
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use tempfile::tempdir;

    fn ball_problem(h: f64) -> Problem {
        let dom = ConvexDomain::ball(vec![0.0; 3], 1.0).unwrap();
        let grid = GridSpec::cover(&dom, h).unwrap();
        Problem::new(dom, grid, 2.0, BoundaryData::Constant(0.0)).unwrap()
    }

    #[test]
    fn problem_assembly_counts() {
        let p = ball_problem(0.2);
        assert!(p.interior_count() > 0);
        assert_eq!(p.rules.len(), p.mask.ghosts.len());
        assert_eq!(p.boundary_terms.len(), p.rules.len());
        // Row map is a bijection onto 0..interior_count.
        let mut seen = vec![false; p.interior_count()];
        for &lin in &p.mask.interior {
            let r = p.row_of[lin] as usize;
            assert!(!seen[r]);
            seen[r] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert!(Problem::new(
            ConvexDomain::ball(vec![0.0; 3], 1.0).unwrap(),
            GridSpec::cover(&ConvexDomain::ball(vec![0.0; 3], 1.0).unwrap(), 0.2).unwrap(),
            0.9,
            BoundaryData::Constant(0.0),
        )
        .is_err());
    }

    #[test]
    fn hyperboloid_guess_residual_structure() {
        // With zero boundary data on the unit ball the default guess is
        // the exact zero-sigma solution. Away from the boundary the
        // residual is pure central-difference truncation, O(h^2). On the
        // boundary ring the ghost extrapolation error (O(h^3) in values,
        // O(h) in second derivatives) is amplified by nu^3 ~ 11, so the
        // ring residual is much larger but still decays ~ O(h).
        let sups = |h: f64| -> (f64, f64) {
            let p = ball_problem(h);
            let u = p.hyperboloid_guess();
            // Spot-check the classical form of the guess.
            let x0 = p.grid.point(&p.grid.to_multi(p.mask.interior[0]));
            let d2: f64 = x0.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(
                u[p.mask.interior[0]],
                (0.25 + d2).sqrt() - (0.25f64 + 1.0).sqrt(),
                epsilon = 1e-12
            );
            let res = p.residual_field(&u, 0.0).unwrap();
            let (mut bulk, mut ring) = (0.0f64, 0.0f64);
            for (row, r) in res.iter().enumerate() {
                let x = p.grid.point(&p.grid.to_multi(p.mask.interior[row]));
                let dist = 1.0 - x.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(!r.is_nan(), "guess inadmissible at distance {dist}");
                if dist > 3.0 * h {
                    bulk = bulk.max(r.abs());
                } else {
                    ring = ring.max(r.abs());
                }
            }
            (bulk, ring)
        };
        let (bulk_c, ring_c) = sups(0.1);
        let (bulk_f, ring_f) = sups(0.05);
        assert!(bulk_c < 0.05, "bulk residual {bulk_c}");
        assert!(
            (3.0..6.0).contains(&(bulk_c / bulk_f)),
            "bulk not second order: {bulk_c} vs {bulk_f}"
        );
        assert!(ring_c < 3.0, "ring residual {ring_c}");
        assert!(
            (1.4..4.0).contains(&(ring_c / ring_f)),
            "ring not first order: {ring_c} vs {ring_f}"
        );
    }

    #[test]
    fn residual_field_flags_inadmissible_nodes() {
        let p = ball_problem(0.2);
        let u = p.init_field(|_| 0.0);
        let res = p.residual_field(&u, 1.0).unwrap();
        // The flat field has H2 = 0 away from the boundary: NaN there.
        assert!(res.iter().any(|r| r.is_nan()));
    }

    #[test]
    fn field_roundtrip_through_text() {
        let p = ball_problem(0.25);
        let u = p.hyperboloid_guess();
        let field = FieldSolution {
            grid: p.grid.clone(),
            domain: p.domain.clone(),
            c: p.c,
            sigma: 0.35,
            u,
        };
        let dir = tempdir().unwrap();
        let path = dir.path().join("field.txt");
        field.save(&path).unwrap();
        let back = FieldSolution::load(&path).unwrap();
        assert_eq!(back.grid, field.grid);
        assert_abs_diff_eq!(back.c, 2.0);
        assert_abs_diff_eq!(back.sigma, 0.35);
        assert_eq!(back.u.len(), field.u.len());
        for (a, b) in field.u.iter().zip(&back.u) {
            if a.is_nan() {
                assert!(b.is_nan());
            } else {
                // 17 significant digits round-trip doubles exactly.
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn malformed_field_files_are_rejected() {
        assert!(FieldSolution::from_text("garbage").is_err());
        let ok = FieldSolution {
            grid: GridSpec::new(vec![0.0], vec![4], 0.5).unwrap(),
            domain: ConvexDomain::ball(vec![0.75], 0.7).unwrap(),
            c: 2.0,
            sigma: 1.0,
            u: vec![0.0, 1.0, f64::NAN, 3.0],
        };
        let text = ok.to_text();
        assert!(FieldSolution::from_text(&text).is_ok());
        // Truncated values section.
        let cut: String = text.lines().take(9).collect::<Vec<_>>().join("\n");
        assert!(FieldSolution::from_text(&cut).is_err());
        // Wrong count.
        let wrong = text.replace("values 4", "values 5");
        assert!(FieldSolution::from_text(&wrong).is_err());
    }

    #[test]
    fn boundary_ring_is_nonempty_shell() {
        let p = ball_problem(0.2);
        let ring = boundary_ring(&p);
        assert!(!ring.is_empty());
        assert!(ring.len() < p.interior_count());
        // Ring nodes are relatively close to the boundary.
        for &lin in &ring {
            let x = p.grid.point(&p.grid.to_multi(lin));
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r > 1.0 - 3.0 * p.grid.h);
        }
    }
}
