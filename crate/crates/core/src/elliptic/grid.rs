//! Uniform Cartesian grids, node classification, and ghost-value rules.
//!
//! The discretization lives on a uniform grid covering the domain with a
//! margin. Nodes are classified as interior (inside the domain), ghost
//! (outside, but needed by the finite-difference stencil of some interior
//! node), or exterior (unused, value `NaN`).
//!
//! Ghost values are not unknowns: each ghost node carries a linear rule
//! `u_ghost = w_b * g(x_b) + sum_i w_i * u_i` obtained by extrapolating a
//! one-dimensional quadratic through the exact boundary crossing `x_b` on
//! a grid line and interior nodes on the same line. The rule is geometric
//! (weights and the crossing point); the Dirichlet datum `g(x_b)` is bound
//! later by the solver.

use serde::Serialize;

use super::domain::ConvexDomain;
use crate::{Error, Result};

/// Fraction of a step below which the boundary crossing is considered too
/// close to the first interior node for stable extrapolation; the rule
/// then skips that node and uses the next two along the line.
const THETA_GUARD: f64 = 0.1;

/// A uniform Cartesian grid: node `(i_0, ..., i_{n-1})` sits at
/// `origin + h * i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    /// Grid spacing, identical along every axis.
    pub h: f64,
    /// Coordinates of node `(0, ..., 0)`.
    pub origin: Vec<f64>,
    /// Node counts per axis.
    pub dims: Vec<usize>,
}

impl GridSpec {
    /// Builds a grid with validation.
    pub fn new(origin: Vec<f64>, dims: Vec<usize>, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::OutOfRange(format!("grid spacing {h} must be positive")));
        }
        if origin.len() != dims.len() || origin.is_empty() {
            return Err(Error::OutOfRange("grid origin/dims dimension mismatch".into()));
        }
        if dims.iter().any(|&d| d < 4) {
            return Err(Error::OutOfRange(format!(
                "grid dims {dims:?} too small; need at least 4 nodes per axis"
            )));
        }
        Ok(GridSpec { h, origin, dims })
    }

    /// Smallest grid of spacing `h` covering the domain's bounding box
    /// with a margin of at least `2h` on every side, so that every ghost
    /// node and every extrapolation stencil stays in bounds.
    pub fn cover(domain: &ConvexDomain, h: f64) -> Result<Self> {
        let (lo, hi) = domain.bounding_box();
        let margin = 2.0 * h;
        let origin: Vec<f64> = lo.iter().map(|l| l - margin).collect();
        let dims: Vec<usize> = hi
            .iter()
            .zip(&origin)
            .map(|(u, o)| ((u + margin - o) / h).ceil() as usize + 1)
            .collect();
        GridSpec::new(origin, dims, h)
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Whether the grid has no nodes (never true for a validated grid).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of a node.
    pub fn point(&self, multi: &[usize]) -> Vec<f64> {
        multi
            .iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + self.h * i as f64)
            .collect()
    }

    /// Row-major linear index (last axis fastest).
    pub fn to_lin(&self, multi: &[usize]) -> usize {
        let mut lin = 0;
        for (i, d) in multi.iter().zip(&self.dims) {
            debug_assert!(i < d);
            lin = lin * d + i;
        }
        lin
    }

    /// Inverse of [`GridSpec::to_lin`].
    pub fn to_multi(&self, lin: usize) -> Vec<usize> {
        let mut rest = lin;
        let mut multi = vec![0; self.dim()];
        for ax in (0..self.dim()).rev() {
            multi[ax] = rest % self.dims[ax];
            rest /= self.dims[ax];
        }
        multi
    }

    /// Node shifted by an integer step, or `None` when out of bounds.
    pub fn offset(&self, multi: &[usize], step: &[isize]) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.dim());
        for ((&i, &s), &d) in multi.iter().zip(step).zip(&self.dims) {
            let j = i as isize + s;
            if j < 0 || j as usize >= d {
                return None;
            }
            out.push(j as usize);
        }
        Some(out)
    }
}

/// Stencil offsets needed by the second-order operator at an interior
/// node: axis neighbors for `u_i`, `u_ii` and diagonal pairs for the
/// mixed derivatives `u_ij`.
pub fn stencil_offsets(dim: usize) -> Vec<Vec<isize>> {
    let mut offs = Vec::new();
    for d in 0..dim {
        for s in [-1isize, 1] {
            let mut o = vec![0isize; dim];
            o[d] = s;
            offs.push(o);
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            for si in [-1isize, 1] {
                for sj in [-1isize, 1] {
                    let mut o = vec![0isize; dim];
                    o[i] = si;
                    o[j] = sj;
                    offs.push(o);
                }
            }
        }
    }
    offs
}

/// Node classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeClass {
    /// Outside the domain and unused; value `NaN`.
    Exterior,
    /// Outside the domain but referenced by an interior stencil; value
    /// set by a [`GhostRule`].
    Ghost,
    /// Inside the domain; value is an unknown of the nonlinear system.
    Interior,
}

/// Classification of every node plus index lists.
#[derive(Debug, Clone)]
pub struct Mask {
    /// Per-node class, indexed linearly.
    pub class: Vec<NodeClass>,
    /// Linear indices of interior nodes, ascending.
    pub interior: Vec<usize>,
    /// Linear indices of ghost nodes, ascending.
    pub ghosts: Vec<usize>,
}

/// Relative (to `h`) depth below which a node counts as sitting on the
/// boundary rather than inside. Catches rounding dust from inexact grid
/// coordinates (e.g. radii that are exact multiples of an inexact `h`).
const SNAP_DEPTH: f64 = 1e-9;

/// Classifies all grid nodes against the domain.
///
/// A node is interior only if it is strictly inside by more than a snap
/// tolerance *and* has, on every axis, at least one axis neighbor that
/// is also strictly inside. The second condition demotes nodes where a
/// grid line is tangent to the boundary (the node sits inside, but both
/// neighbors on some axis are outside): such a node cannot carry a
/// well-posed centered stencil, while its value is pinned to first
/// order by the boundary datum, so it is treated as a ghost instead.
///
/// Fails with [`Error::StencilIncomplete`] if an interior node's stencil
/// leaves the grid, which indicates the cover margin was violated.
pub fn classify(grid: &GridSpec, domain: &ConvexDomain) -> Result<Mask> {
    let n = grid.len();
    let snap = SNAP_DEPTH * grid.h;
    let deep = |x: &[f64]| domain.signed_margin(x) < -snap;
    let mut class = vec![NodeClass::Exterior; n];
    let mut interior = Vec::new();
    for lin in 0..n {
        let multi = grid.to_multi(lin);
        let x = grid.point(&multi);
        if !deep(&x) {
            continue;
        }
        let supported = (0..grid.dim()).all(|d| {
            let mut nb = x.clone();
            nb[d] = x[d] + grid.h;
            if deep(&nb) {
                return true;
            }
            nb[d] = x[d] - grid.h;
            deep(&nb)
        });
        if supported {
            class[lin] = NodeClass::Interior;
            interior.push(lin);
        }
    }
    let offs = stencil_offsets(grid.dim());
    let mut ghosts = Vec::new();
    for &lin in &interior {
        let multi = grid.to_multi(lin);
        for o in &offs {
            let Some(nb) = grid.offset(&multi, o) else {
                return Err(Error::StencilIncomplete { node: multi });
            };
            let nb_lin = grid.to_lin(&nb);
            if class[nb_lin] == NodeClass::Exterior {
                class[nb_lin] = NodeClass::Ghost;
                ghosts.push(nb_lin);
            }
        }
    }
    ghosts.sort_unstable();
    Ok(Mask { class, interior, ghosts })
}

/// Linear rule producing a ghost value from the boundary datum and
/// interior values: `u_ghost = boundary_weight * g(boundary_point) +
/// sum w_i u_i`.
#[derive(Debug, Clone)]
pub struct GhostRule {
    /// Linear index of the ghost node.
    pub ghost: usize,
    /// Exact boundary crossing used by the rule.
    pub boundary_point: Vec<f64>,
    /// Weight of the Dirichlet datum at `boundary_point`.
    pub boundary_weight: f64,
    /// Interior nodes and weights.
    pub nodes: Vec<(usize, f64)>,
    /// Polynomial order of the extrapolation (2 = quadratic, 1 = linear,
    /// 0 = nearest boundary value).
    pub order: u8,
}

/// Lagrange weights for evaluating at `0` a polynomial interpolating at
/// the given nodes.
fn weights_at_zero(nodes: &[f64]) -> Vec<f64> {
    let mut w = vec![1.0; nodes.len()];
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            if i != j {
                w[i] *= (0.0 - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
    }
    w
}

struct Candidate {
    rule: GhostRule,
    order: u8,
    /// Distance from the crossing to the first data node, in units of the
    /// step along the line; larger is better conditioned.
    gap: f64,
}

/// Attempts to build an extrapolation rule for `ghost` along one march
/// direction (an axis or a two-axis diagonal step).
fn try_direction(
    grid: &GridSpec,
    domain: &ConvexDomain,
    mask: &Mask,
    ghost_multi: &[usize],
    step: &[isize],
) -> Option<Candidate> {
    let x0 = grid.point(ghost_multi);
    let dir: Vec<f64> = step.iter().map(|&s| s as f64 * grid.h).collect();
    let step_len = grid.h * (step.iter().map(|&s| (s * s) as f64).sum::<f64>()).sqrt();

    // Nodes one, two, three steps along the line, with their classes.
    let mut line = Vec::with_capacity(3);
    for k in 1..=3 {
        let stepped: Vec<isize> = step.iter().map(|&s| s * k).collect();
        let multi = grid.offset(ghost_multi, &stepped)?;
        let lin = grid.to_lin(&multi);
        line.push((lin, mask.class[lin] == NodeClass::Interior));
    }
    if !line[0].1 {
        return None; // first node along the line must be interior
    }
    // Crossing between the ghost and the first interior node, as a
    // fraction of one step.
    let t = domain.line_crossing(&x0, &dir, 1.0)?;
    let a = t * step_len; // distance from ghost to the boundary
    let boundary_point: Vec<f64> = x0.iter().zip(&dir).map(|(x, d)| x + t * d).collect();

    // Preferred: quadratic through the crossing and the first two nodes.
    // Guarded: when the crossing sits within THETA_GUARD of the first
    // node, drop that node and use the next two.
    let near_first = step_len - a < THETA_GUARD * step_len;
    let (nodes_s, nodes_lin, order): (Vec<f64>, Vec<usize>, u8) =
        if !near_first && line[1].1 {
            (vec![a, step_len, 2.0 * step_len], vec![line[0].0, line[1].0], 2)
        } else if near_first && line[1].1 && line[2].1 {
            (vec![a, 2.0 * step_len, 3.0 * step_len], vec![line[1].0, line[2].0], 2)
        } else if near_first && line[1].1 {
            (vec![a, 2.0 * step_len], vec![line[1].0], 1)
        } else if !near_first {
            (vec![a, step_len], vec![line[0].0], 1)
        } else {
            return None;
        };
    let w = weights_at_zero(&nodes_s);
    let gap = nodes_s[1] - a;
    Some(Candidate {
        rule: GhostRule {
            ghost: grid.to_lin(ghost_multi),
            boundary_point,
            boundary_weight: w[0],
            nodes: nodes_lin.into_iter().zip(w[1..].iter().copied()).collect(),
            order,
        },
        order,
        gap,
    })
}

/// Builds an extrapolation rule for every ghost node.
///
/// Ghosts that sit inside the domain (nodes demoted by [`classify`] for
/// lacking axis support) take the boundary value at their projection
/// onto the boundary. For the ordinary outside ghosts, axis directions
/// are tried first, then two-axis diagonals (needed for corner ghosts
/// that only touch the interior diagonally); among valid candidates the
/// highest order wins, ties broken by the better conditioned crossing.
/// As a last resort the ghost takes the boundary value at the crossing
/// toward the inscribed center (order 0).
pub fn ghost_rules(
    grid: &GridSpec,
    domain: &ConvexDomain,
    mask: &Mask,
) -> Result<Vec<GhostRule>> {
    let dim = grid.dim();
    let mut steps: Vec<Vec<isize>> = Vec::new();
    for d in 0..dim {
        for s in [-1isize, 1] {
            let mut v = vec![0isize; dim];
            v[d] = s;
            steps.push(v);
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            for si in [-1isize, 1] {
                for sj in [-1isize, 1] {
                    let mut v = vec![0isize; dim];
                    v[i] = si;
                    v[j] = sj;
                    steps.push(v);
                }
            }
        }
    }

    let (center, _) = domain.inscribed_ball();
    let mut rules = Vec::with_capacity(mask.ghosts.len());
    for &g in &mask.ghosts {
        let multi = grid.to_multi(g);
        let x0 = grid.point(&multi);
        if domain.contains(&x0) {
            // A demoted node: on (or a whisker inside) the boundary. The
            // directional march below assumes the ghost is outside, so
            // pin the value to the boundary datum at the nearest
            // boundary point instead.
            rules.push(GhostRule {
                ghost: g,
                boundary_point: domain.project_to_boundary(&x0),
                boundary_weight: 1.0,
                nodes: Vec::new(),
                order: 0,
            });
            continue;
        }
        let mut best: Option<Candidate> = None;
        for step in &steps {
            if let Some(cand) = try_direction(grid, domain, mask, &multi, step) {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        cand.order > b.order || (cand.order == b.order && cand.gap > b.gap)
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let rule = match best {
            Some(c) => c.rule,
            None => {
                // Project toward the inscribed center; the ghost takes the
                // boundary value there. Nodes exactly on the boundary land
                // here with a zero-length march.
                let dir: Vec<f64> = center.iter().zip(&x0).map(|(c, x)| c - x).collect();
                let t = domain.line_crossing(&x0, &dir, 1.0).unwrap_or(0.0);
                let boundary_point: Vec<f64> =
                    x0.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
                GhostRule {
                    ghost: g,
                    boundary_point,
                    boundary_weight: 1.0,
                    nodes: Vec::new(),
                    order: 0,
                }
            }
        };
        rules.push(rule);
    }
    Ok(rules)
}

/// Applies ghost rules: `u[ghost] = w_b * g_b + sum w_i u[i]`, with the
/// Dirichlet part `w_b * g_b` precomputed in `boundary_terms` (one entry
/// per rule, aligned with `rules`).
pub fn update_ghost_values(u: &mut [f64], rules: &[GhostRule], boundary_terms: &[f64]) {
    for (rule, &bt) in rules.iter().zip(boundary_terms) {
        let mut v = bt;
        for &(node, w) in &rule.nodes {
            v += w * u[node];
        }
        u[rule.ghost] = v;
    }
}

/// Interpolates grid data at an arbitrary point.
///
/// Uses a tensor-product quadratic on the 3^n block around the nearest
/// node when all its values are finite, otherwise falls back to
/// multilinear interpolation on the containing cell. Fails if the cell
/// touches exterior (`NaN`) nodes.
pub fn interp_at(grid: &GridSpec, u: &[f64], x: &[f64]) -> Result<f64> {
    let dim = grid.dim();
    // Quadratic attempt around the nearest node.
    let mut base = Vec::with_capacity(dim);
    let mut s = Vec::with_capacity(dim);
    let mut ok = true;
    for d in 0..dim {
        let rel = (x[d] - grid.origin[d]) / grid.h;
        let c = rel.round() as isize;
        if c < 1 || c as usize + 1 >= grid.dims[d] {
            ok = false;
            break;
        }
        base.push(c as usize);
        s.push(rel - c as f64);
    }
    if ok {
        let mut wts = Vec::with_capacity(dim);
        for &si in &s {
            wts.push([0.5 * si * (si - 1.0), 1.0 - si * si, 0.5 * si * (si + 1.0)]);
        }
        let val = tensor_sum(grid, u, &base, &wts, dim);
        if let Some(v) = val {
            return Ok(v);
        }
    }
    // Multilinear fallback on the containing cell.
    let mut corner = Vec::with_capacity(dim);
    let mut t = Vec::with_capacity(dim);
    for d in 0..dim {
        let rel = (x[d] - grid.origin[d]) / grid.h;
        let f = rel.floor();
        let i = f as isize;
        if i < 0 || (i as usize) + 1 >= grid.dims[d] {
            return Err(Error::OutOfRange(format!(
                "interpolation point {x:?} outside the grid"
            )));
        }
        corner.push(i as usize);
        t.push(rel - f);
    }
    let mut acc = 0.0;
    for bits in 0..(1usize << dim) {
        let mut w = 1.0;
        let mut multi = corner.clone();
        for d in 0..dim {
            if bits >> d & 1 == 1 {
                multi[d] += 1;
                w *= t[d];
            } else {
                w *= 1.0 - t[d];
            }
        }
        let v = u[grid.to_lin(&multi)];
        if !v.is_finite() {
            return Err(Error::StencilIncomplete { node: multi });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Weighted sum over the 3^n block centered at `base`; `None` if any
/// value is non-finite.
fn tensor_sum(
    grid: &GridSpec,
    u: &[f64],
    base: &[usize],
    wts: &[[f64; 3]],
    dim: usize,
) -> Option<f64> {
    let mut acc = 0.0;
    let count = 3usize.pow(dim as u32);
    let mut multi = vec![0usize; dim];
    for k in 0..count {
        let mut rest = k;
        let mut w = 1.0;
        for d in 0..dim {
            let o = rest % 3;
            rest /= 3;
            multi[d] = base[d] + o - 1;
            w *= wts[d][o];
        }
        let v = u[grid.to_lin(&multi)];
        if !v.is_finite() {
            return None;
        }
        acc += w * v;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_ball3() -> ConvexDomain {
        ConvexDomain::ball(vec![0.0; 3], 1.0).unwrap()
    }

    #[test]
    fn indexing_roundtrip() {
        let g = GridSpec::new(vec![-1.0, -2.0, 0.0], vec![5, 7, 6], 0.5).unwrap();
        assert_eq!(g.len(), 5 * 7 * 6);
        for lin in [0, 1, 37, 209] {
            assert_eq!(g.to_lin(&g.to_multi(lin)), lin);
        }
        let p = g.point(&[1, 2, 3]);
        assert_abs_diff_eq!(p[0], -0.5);
        assert_abs_diff_eq!(p[1], -1.0);
        assert_abs_diff_eq!(p[2], 1.5);
        assert!(g.offset(&[0, 0, 0], &[-1, 0, 0]).is_none());
        assert_eq!(g.offset(&[1, 2, 3], &[1, -1, 0]).unwrap(), vec![2, 1, 3]);
    }

    #[test]
    fn cover_margin_and_classification() {
        let dom = unit_ball3();
        let h = 0.25;
        let g = GridSpec::cover(&dom, h).unwrap();
        // Margin of at least 2h on each side.
        for d in 0..3 {
            assert!(g.origin[d] <= -1.0 - 2.0 * h + 1e-12);
            let top = g.origin[d] + h * (g.dims[d] - 1) as f64;
            assert!(top >= 1.0 + 2.0 * h - 1e-12);
        }
        let mask = classify(&g, &dom).unwrap();
        // Interior nodes are exactly the nodes strictly inside the ball.
        for &lin in &mask.interior {
            let x = g.point(&g.to_multi(lin));
            assert!(x.iter().map(|v| v * v).sum::<f64>() < 1.0);
        }
        assert!(!mask.interior.is_empty());
        assert!(!mask.ghosts.is_empty());
        // Every stencil neighbor of an interior node has a value class.
        let offs = stencil_offsets(3);
        for &lin in &mask.interior {
            let multi = g.to_multi(lin);
            for o in &offs {
                let nb = g.offset(&multi, o).unwrap();
                assert_ne!(mask.class[g.to_lin(&nb)], NodeClass::Exterior);
            }
        }
        // Ghosts are outside the domain.
        for &lin in &mask.ghosts {
            let x = g.point(&g.to_multi(lin));
            assert!(x.iter().map(|v| v * v).sum::<f64>() >= 1.0);
        }
    }

    #[test]
    fn ghost_rules_reproduce_quadratics() {
        // A ghost rule interpolates along a straight line through the
        // boundary crossing and grid nodes, so any global quadratic must
        // be reproduced exactly wherever the rule is at least linear and
        // the data itself is quadratic along that line.
        let dom = unit_ball3();
        let g = GridSpec::cover(&dom, 0.1).unwrap();
        let mask = classify(&g, &dom).unwrap();
        let rules = ghost_rules(&g, &dom, &mask).unwrap();
        assert_eq!(rules.len(), mask.ghosts.len());

        let q = |x: &[f64]| {
            0.7 - 0.3 * x[0] + 0.2 * x[1] * x[2] + 0.5 * x[0] * x[0] - 0.1 * x[2] + x[1]
        };
        let mut u = vec![f64::NAN; g.len()];
        for &lin in &mask.interior {
            u[lin] = q(&g.point(&g.to_multi(lin)));
        }
        let mut quadratic_rules = 0;
        for rule in &rules {
            let mut v = rule.boundary_weight * q(&rule.boundary_point);
            for &(node, w) in &rule.nodes {
                v += w * u[node];
            }
            let exact = q(&g.point(&g.to_multi(rule.ghost)));
            if rule.order == 2 {
                quadratic_rules += 1;
                assert_abs_diff_eq!(v, exact, epsilon = 1e-11);
            }
            // The crossing point really is on the boundary.
            assert_abs_diff_eq!(dom.level(&rule.boundary_point), 0.0, epsilon = 1e-12);
        }
        // On a ball at this resolution virtually every ghost admits the
        // quadratic rule.
        assert!(quadratic_rules as f64 >= 0.9 * rules.len() as f64);
    }

    #[test]
    fn ghost_update_applies_rules() {
        let dom = unit_ball3();
        let g = GridSpec::cover(&dom, 0.2).unwrap();
        let mask = classify(&g, &dom).unwrap();
        let rules = ghost_rules(&g, &dom, &mask).unwrap();
        // Linear data with constant boundary extension: u = 1 everywhere
        // on the boundary and interior => ghosts extrapolate to 1.
        let mut u = vec![f64::NAN; g.len()];
        for &lin in &mask.interior {
            u[lin] = 1.0;
        }
        let terms: Vec<f64> = rules.iter().map(|r| r.boundary_weight).collect();
        update_ghost_values(&mut u, &rules, &terms);
        for &lin in &mask.ghosts {
            assert_abs_diff_eq!(u[lin], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolation_orders() {
        let dom = unit_ball3();
        let g = GridSpec::cover(&dom, 0.1).unwrap();
        let f = |x: &[f64]| 1.0 + x[0] - 0.5 * x[1] + 0.25 * x[2] + x[0] * x[1];
        let mut u = vec![0.0; g.len()];
        for lin in 0..g.len() {
            u[lin] = f(&g.point(&g.to_multi(lin)));
        }
        // Quadratic interior interpolation reproduces bilinear exactly.
        let x = [0.137, -0.261, 0.509];
        assert_abs_diff_eq!(interp_at(&g, &u, &x).unwrap(), f(&x), epsilon = 1e-12);
        // NaN in the quadratic block forces the multilinear fallback,
        // which is still exact for this data.
        let mut u2 = u.clone();
        let near = g.to_lin(&[2, 2, 2]);
        u2[near] = f64::NAN;
        let y = [
            g.origin[0] + 0.15 * g.h + g.h,
            g.origin[1] + 0.35 * g.h + g.h,
            g.origin[2] + 0.45 * g.h + g.h,
        ];
        // Point in the cell whose quadratic block touches the NaN but
        // whose corners do not.
        let v = interp_at(&g, &u2, &y);
        assert!(v.is_err() || (v.unwrap() - f(&y)).abs() < 1e-10);
        // Out of bounds is an error.
        assert!(interp_at(&g, &u, &[100.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn tangent_nodes_are_demoted_to_pinned_ghosts() {
        // Shift a radius-2 ball by eps so the node at (2, 0, 0) lands a
        // whisker inside the sphere while both its y- and z-neighbors
        // are outside: the grid lines through it are tangent to the
        // boundary. Such a node must not carry a centered stencil; it is
        // demoted to a ghost pinned to the boundary datum. Covers both
        // the rounding-dust depth (1e-13) and a genuinely tangent depth
        // (1e-4).
        for eps in [1e-13, 1e-4] {
            let dom = ConvexDomain::ball(vec![eps, 0.0, 0.0], 2.0).unwrap();
            let g = GridSpec::new(vec![-3.0; 3], vec![13; 3], 0.5).unwrap();
            let mask = classify(&g, &dom).unwrap();

            // Every interior node has an inside axis neighbor per axis.
            for &lin in &mask.interior {
                let x = g.point(&g.to_multi(lin));
                for d in 0..3 {
                    let mut plus = x.clone();
                    plus[d] += g.h;
                    let mut minus = x.clone();
                    minus[d] -= g.h;
                    assert!(
                        dom.contains(&plus) || dom.contains(&minus),
                        "interior node {x:?} lacks axis-{d} support (eps={eps})"
                    );
                }
            }

            let tangent = g.to_lin(&[10, 6, 6]);
            assert_eq!(g.point(&[10, 6, 6]), vec![2.0, 0.0, 0.0]);
            assert!(dom.contains(&[2.0, 0.0, 0.0]));
            assert_eq!(mask.class[tangent], NodeClass::Ghost, "eps={eps}");

            // Its rule pins it to the boundary datum at the projection.
            let rules = ghost_rules(&g, &dom, &mask).unwrap();
            let rule = rules.iter().find(|r| r.ghost == tangent).unwrap();
            assert_eq!(rule.order, 0);
            assert_abs_diff_eq!(rule.boundary_weight, 1.0);
            assert!(rule.nodes.is_empty());
            assert_abs_diff_eq!(dom.level(&rule.boundary_point), 0.0, epsilon = 1e-12);
            let dist: f64 = rule
                .boundary_point
                .iter()
                .zip(&[2.0, 0.0, 0.0])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(dist <= 2.0 * eps + 1e-12, "projection moved {dist} (eps={eps})");

            // Applying the rules gives the node the datum's value there.
            let datum = |x: &[f64]| 0.3 * x[0] - 0.1 * x[1] + 0.05 * x[2] * x[2];
            let mut u = vec![f64::NAN; g.len()];
            for &lin in &mask.interior {
                u[lin] = datum(&g.point(&g.to_multi(lin)));
            }
            let terms: Vec<f64> = rules
                .iter()
                .map(|r| r.boundary_weight * datum(&r.boundary_point))
                .collect();
            update_ghost_values(&mut u, &rules, &terms);
            assert_abs_diff_eq!(u[tangent], datum(&[2.0, 0.0, 0.0]), epsilon = 1e-3);
        }
    }
}
