//! Control sets made of one ball per unit lattice cell: `(γ,σ)`-distributed
//! sets (radius `γ^{1+|k|^σ}` in cell `k`) and γ-equidistributed sets
//! (radius `γ` everywhere), their grid indicators, and a grid audit of
//! thickness.
//!
//! Exponent convention: `|k|^0 = 1` for every `k` (so `σ = 0` gives `γ²`
//! uniformly), while `|0|^σ = 0` for `σ > 0` (so the central cell gets `γ`).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RadiusRule {
    /// `r_k = γ^{1+|k|^σ}`.
    Distributed { sigma: f64 },
    /// `r_k = γ`.
    Equidistributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Placement {
    CellCenter,
    SeededRandom { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedSet {
    pub n: usize,
    pub gamma: f64,
    pub rule: RadiusRule,
    pub placement: Placement,
    /// Cells `k` with `|k_i| ≤ box_halfwidth` are populated.
    pub box_halfwidth: f64,
    #[serde(with = "center_list")]
    pub centers: BTreeMap<Vec<i64>, Vec<f64>>,
}

/// Centers as a list of `{cell, center}` entries (JSON maps need string keys).
mod center_list {
    use alloc::collections::BTreeMap;
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        cell: Vec<i64>,
        center: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<Vec<i64>, Vec<f64>>, ser: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Entry> = map.iter().map(|(k, z)| Entry { cell: k.clone(), center: z.clone() }).collect();
        list.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<Vec<i64>, Vec<f64>>, D::Error> {
        Ok(Vec::<Entry>::deserialize(de)?.into_iter().map(|e| (e.cell, e.center)).collect())
    }
}

/// `|k|^σ` with the conventions of the module docs.
pub fn lattice_power(k: &[i64], sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let norm = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    if norm == 0.0 {
        0.0
    } else {
        norm.powf(sigma)
    }
}

impl DistributedSet {
    pub fn radius(&self, k: &[i64]) -> f64 {
        match self.rule {
            RadiusRule::Distributed { sigma } => self.gamma.powf(1.0 + lattice_power(k, sigma)),
            RadiusRule::Equidistributed => self.gamma,
        }
    }

    pub fn smallest_radius(&self) -> Option<(Vec<i64>, f64)> {
        self.centers.keys().map(|k| (k.clone(), self.radius(k))).min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Same centers, different `γ`.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { gamma, ..self.clone() })
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Drops every ball, keeping the parameters.
    pub fn cleared(&self) -> Self {
        Self { centers: BTreeMap::new(), ..self.clone() }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")))
    }
}

fn lattice_cells(n: usize, box_halfwidth: f64) -> Vec<Vec<i64>> {
    let m = box_halfwidth.floor() as i64;
    let side = (2 * m + 1) as usize;
    let total = side.pow(n as u32);
    (0..total)
        .map(|mut flat| {
            let mut k = vec![0i64; n];
            for slot in k.iter_mut().rev() {
                *slot = (flat % side) as i64 - m;
                flat /= side;
            }
            k
        })
        .collect()
}

fn build(n: usize, gamma: f64, rule: RadiusRule, box_halfwidth: f64, placement: Placement) -> Result<DistributedSet> {
    check_gamma(gamma)?;
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be ≥ 1"));
    }
    ensure_positive("bounding_box", box_halfwidth)?;
    let mut set = DistributedSet { n, gamma, rule, placement, box_halfwidth, centers: BTreeMap::new() };
    let mut rng = match placement {
        Placement::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Placement::CellCenter => None,
    };
    for k in lattice_cells(n, box_halfwidth) {
        // Keep the ball inside its cell when it fits.
        let slack = (0.5 - set.radius(&k)).max(0.0);
        let z = k
            .iter()
            .map(|&ki| match rng.as_mut() {
                Some(rng) if slack > 0.0 => ki as f64 + rng.gen_range(-slack..=slack),
                _ => ki as f64,
            })
            .collect();
        set.centers.insert(k, z);
    }
    Ok(set)
}

/// A `(γ,σ)`-distributed set with one ball per lattice cell of `[-L, L]^n`.
pub fn make_distributed(n: usize, gamma: f64, sigma: f64, box_halfwidth: f64, placement: Placement) -> Result<DistributedSet> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", "must be ≥ 0"));
    }
    build(n, gamma, RadiusRule::Distributed { sigma }, box_halfwidth, placement)
}

/// A γ-equidistributed set: a ball of radius `γ` in every lattice cell.
pub fn make_equidistributed(n: usize, gamma: f64, box_halfwidth: f64, placement: Placement) -> Result<DistributedSet> {
    build(n, gamma, RadiusRule::Equidistributed, box_halfwidth, placement)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseGridWarning {
    pub cell: Vec<i64>,
    pub radius: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetIndicator {
    pub grid: Grid,
    pub mask: Vec<bool>,
    /// `h^n · #mask`.
    pub measure: f64,
    pub warning: Option<CoarseGridWarning>,
}

impl SetIndicator {
    pub fn from_mask(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: mask.len() });
        }
        let measure = grid.cell_volume() * mask.iter().filter(|m| **m).count() as f64;
        Ok(Self { grid, mask, measure, warning: None })
    }

    pub fn full(grid: Grid) -> Self {
        Self::from_mask(grid, vec![true; grid.len()]).expect("sizes agree")
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Flat indices of the nodes in the set.
    pub fn nodes(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect()
    }
}

/// Marks the grid nodes lying in some ball of `set`.
pub fn indicator(set: &DistributedSet, grid: &Grid) -> Result<SetIndicator> {
    if set.n != grid.dim {
        return Err(Error::DimensionMismatch { expected: grid.dim, got: set.n });
    }
    let h = grid.spacing();
    let n_pts = grid.points_per_dim as i64;
    let first = grid.coordinate(0);
    let mut mask = vec![false; grid.len()];
    let mut idx = vec![0usize; grid.dim];
    for (k, z) in &set.centers {
        let r = set.radius(k);
        // Index range of nodes within the bounding box of the ball.
        let ranges: Vec<(i64, i64)> = z
            .iter()
            .map(|&c| {
                let lo = ((c - r - first) / h).ceil().max(0.0) as i64;
                let hi = (((c + r - first) / h).floor() as i64).min(n_pts - 1);
                (lo, hi)
            })
            .collect();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        let count: usize = ranges.iter().map(|(lo, hi)| (hi - lo + 1) as usize).product();
        for mut flat in 0..count {
            let mut dist2 = 0.0;
            for (d, (lo, hi)) in ranges.iter().enumerate().rev() {
                let span = (hi - lo + 1) as usize;
                let i = *lo as usize + flat % span;
                flat /= span;
                idx[d] = i;
                let dx = grid.coordinate(i) - z[d];
                dist2 += dx * dx;
            }
            if dist2 <= r * r {
                mask[grid.flat_index(&idx)] = true;
            }
        }
    }
    let mut ind = SetIndicator::from_mask(*grid, mask)?;
    if let Some((cell, radius)) = set.smallest_radius() {
        if h > radius {
            ind.warning = Some(CoarseGridWarning { cell, radius, spacing: h });
        }
    }
    Ok(ind)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessAudit {
    pub gamma_est: f64,
    pub worst_cube_center: Vec<f64>,
    /// Nodes per cube side, `round(ℓ/h)`.
    pub nodes_per_side: usize,
    /// `2h√n/ℓ`.
    pub discretization_error: f64,
}

/// Minimum over grid-aligned cubes of side `ℓ` (translates stepping by one
/// node, cubes inside the grid) of the fraction of cube nodes in the set.
pub fn thickness(ind: &SetIndicator, scale: f64) -> Result<ThicknessAudit> {
    ensure_positive("scale", scale)?;
    let grid = &ind.grid;
    if scale > 2.0 * grid.halfwidth {
        return Err(Error::invalid("scale", format!("ℓ = {scale} exceeds the box side {}", 2.0 * grid.halfwidth)));
    }
    let h = grid.spacing();
    let n = grid.dim;
    let np = grid.points_per_dim;
    let m = ((scale / h).round() as usize).clamp(1, np);

    // Summed-area table with one layer of zero padding per axis.
    let side = np + 1;
    let total = side.pow(n as u32);
    let mut table = vec![0u32; total];
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut rem = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rem % side;
            rem /= side;
        }
        if idx.iter().any(|&i| i == 0) {
            continue;
        }
        let inner: Vec<usize> = idx.iter().map(|i| i - 1).collect();
        table[flat] = ind.mask[grid.flat_index(&inner)] as u32;
    }
    let mut stride = 1;
    for _ in 0..n {
        for flat in 0..total {
            if (flat / stride) % side != 0 {
                table[flat] += table[flat - stride];
            }
        }
        stride *= side;
    }

    let starts = np - m + 1;
    let windows = starts.pow(n as u32);
    let mut best = (u64::MAX, 0usize);
    let mut corner = vec![0usize; n];
    for w in 0..windows {
        let mut rem = w;
        for slot in corner.iter_mut().rev() {
            *slot = rem % starts;
            rem /= starts;
        }
        // Inclusion-exclusion over the 2^n corners of the window.
        let mut sum: i64 = 0;
        for bits in 0..(1usize << n) {
            let mut flat = 0;
            let mut sign = 1i64;
            for d in 0..n {
                let upper = bits >> (n - 1 - d) & 1 == 1;
                let coord = if upper { corner[d] + m } else { corner[d] };
                if !upper {
                    sign = -sign;
                }
                flat = flat * side + coord;
            }
            sum += sign * table[flat] as i64;
        }
        let sum = sum as u64;
        if sum < best.0 {
            best = (sum, w);
        }
    }
    let mut rem = best.1;
    for slot in corner.iter_mut().rev() {
        *slot = rem % starts;
        rem /= starts;
    }
    let center = corner.iter().map(|&c| grid.coordinate(c) + 0.5 * (m as f64 - 1.0) * h).collect();
    Ok(ThicknessAudit {
        gamma_est: best.0 as f64 / (m as f64).powi(n as i32),
        worst_cube_center: center,
        nodes_per_side: m,
        discretization_error: 2.0 * h * (n as f64).sqrt() / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_sigma_gives_gamma_squared() {
        let s = make_distributed(2, 0.3, 0.0, 3.0, Placement::CellCenter).unwrap();
        assert_eq!(s.centers.len(), 49);
        for (k, z) in &s.centers {
            assert_relative_eq!(s.radius(k), 0.09, max_relative = 1e-14);
            assert_eq!(z, &k.iter().map(|&v| v as f64).collect::<Vec<_>>());
        }
    }

    #[test]
    fn positive_sigma_shrinks_with_distance() {
        let s = make_distributed(1, 0.3, 1.0, 4.0, Placement::CellCenter).unwrap();
        assert_relative_eq!(s.radius(&[0]), 0.3);
        assert_relative_eq!(s.radius(&[2]), 0.3f64.powi(3), max_relative = 1e-14);
        assert!(s.radius(&[3]) < s.radius(&[2]));
    }

    #[test]
    fn seeded_placement_is_reproducible_and_inside_cells() {
        let a = make_distributed(2, 0.2, 0.5, 3.0, Placement::SeededRandom { seed: 7 }).unwrap();
        let b = make_distributed(2, 0.2, 0.5, 3.0, Placement::SeededRandom { seed: 7 }).unwrap();
        let c = make_distributed(2, 0.2, 0.5, 3.0, Placement::SeededRandom { seed: 8 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for (k, z) in &a.centers {
            let r = a.radius(k);
            for (ki, zi) in k.iter().zip(z) {
                assert!((zi - *ki as f64).abs() + r <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn indicator_examples() {
        let g = Grid::dirichlet(1, 3.0, 599).unwrap();
        let s = make_equidistributed(1, 0.2, 3.0, Placement::CellCenter).unwrap();
        assert_eq!(indicator(&s.cleared(), &g).unwrap().measure, 0.0);
        let full = SetIndicator::full(g);
        assert_relative_eq!(full.measure, 6.0 * 599.0 / 600.0, max_relative = 1e-12);

        let mut single = s.cleared();
        single.centers.insert(vec![0], vec![0.1]);
        let ind = indicator(&single, &g).unwrap();
        let h = g.spacing();
        assert!((ind.measure - 0.4).abs() <= 2.0 * h);
        assert!(ind.warning.is_none());

        let coarse = Grid::dirichlet(1, 3.0, 20).unwrap();
        let w = indicator(&s, &coarse).unwrap().warning.unwrap();
        assert_eq!(w.radius, 0.2);
    }

    #[test]
    fn thickness_examples() {
        let g = Grid::dirichlet(1, 4.0, 799).unwrap();
        assert_eq!(thickness(&SetIndicator::full(g), 1.0).unwrap().gamma_est, 1.0);
        let empty = SetIndicator::from_mask(g, vec![false; g.len()]).unwrap();
        assert_eq!(thickness(&empty, 1.0).unwrap().gamma_est, 0.0);
        let s = make_equidistributed(1, 0.2, 4.0, Placement::CellCenter).unwrap();
        let t = thickness(&indicator(&s, &g).unwrap(), 1.0).unwrap();
        assert!((t.gamma_est - 0.4).abs() <= 2.0 * g.spacing(), "{}", t.gamma_est);
        assert!(thickness(&empty, 9.0).is_err());
    }

    #[test]
    fn thickness_in_two_dimensions() {
        let g = Grid::dirichlet(2, 3.0, 119).unwrap();
        let s = make_distributed(2, 0.4, 0.0, 3.0, Placement::CellCenter).unwrap();
        let t = thickness(&indicator(&s, &g).unwrap(), 1.0).unwrap();
        let area = core::f64::consts::PI * 0.16f64.powi(2);
        assert!(t.gamma_est >= area - 4.0 * t.discretization_error * area.sqrt());
        assert!(t.gamma_est <= 1.0);
    }

    #[test]
    fn nodes_near_centers_are_marked() {
        let g = Grid::dirichlet(2, 2.0, 81).unwrap();
        let s = make_distributed(2, 0.45, 0.5, 2.0, Placement::SeededRandom { seed: 3 }).unwrap();
        let ind = indicator(&s, &g).unwrap();
        let h = g.spacing();
        let mut x = [0.0; 2];
        for flat in 0..g.len() {
            g.node(flat, &mut x);
            for (k, z) in &s.centers {
                let d = ((x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2)).sqrt();
                if d <= s.radius(k) - h * 2f64.sqrt() {
                    assert!(ind.mask[flat]);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn larger_gamma_never_thins(g1 in 0.05f64..0.45, dg in 0.0f64..0.04, sigma in 0.0f64..1.5) {
            let grid = Grid::dirichlet(1, 3.0, 301).unwrap();
            let a = make_distributed(1, g1, sigma, 3.0, Placement::CellCenter).unwrap();
            let b = a.with_gamma(g1 + dg).unwrap();
            let ta = thickness(&indicator(&a, &grid).unwrap(), 1.0).unwrap().gamma_est;
            let tb = thickness(&indicator(&b, &grid).unwrap(), 1.0).unwrap().gamma_est;
            prop_assert!(tb >= ta);
        }

        #[test]
        fn measure_stays_in_box(gamma in 0.05f64..0.95, seed in 0u64..1000) {
            let grid = Grid::dirichlet(2, 2.0, 41).unwrap();
            let s = make_distributed(2, gamma, 0.3, 2.0, Placement::SeededRandom { seed }).unwrap();
            let ind = indicator(&s, &grid).unwrap();
            prop_assert!(ind.measure >= 0.0 && ind.measure <= 16.0);
        }
    }
}
