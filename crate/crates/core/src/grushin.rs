//! The (fractional) Grushin heat semigroup on `ℝⁿ × 𝕋ᵐ`, decoupled by a
//! Fourier series in `y` into the Schrödinger problems `-Δ_x + r_k V (+ Ṽ)`.
//!
//! Physical fields are flat arrays over `x`-nodes times `P^m` equispaced
//! `y`-nodes on `[0, 2π)^m` (x-major). Mode coefficients use the convention
//! `u(x, y) = (2π)^{-m/2} Σ_k û(x, k) e^{ik·y}`, so Parseval holds with no
//! extra factor.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::constants::{cobs_formula, AssumptionParams, ExponentTable, FreeConstants};
use crate::control_sets::{thickness, SetIndicator};
use crate::error::{ensure_positive, Error, Result};
use crate::grid::{Boundary, Grid};
use crate::operator::{DiscreteOperator, PotentialField};
use crate::spectral::{eigensolve, semigroup_apply, EigenRequest, SpectralData};
use crate::verify::{gramian_observability, GramianBundle};

/// Default mode cap per `y`-dimension.
pub const DEFAULT_MAX_MODE: i64 = 6;
/// Largest problem accepted by [`direct_oracle`].
pub const ORACLE_MAX_UNKNOWNS: usize = 10_000;

/// How `-∂²_y` acts on `e^{iky}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum YSymbol {
    /// `|k|²`, the torus itself.
    Exact,
    /// `Σ 4 sin²(k_i h/2)/h²` with `h = 2π/points`, the periodic three-point stencil.
    FiniteDifference { points: usize },
}

impl YSymbol {
    pub fn value(&self, k: &[i64]) -> f64 {
        // Sorted magnitudes make equal symbols bitwise equal.
        let mut a: Vec<i64> = k.iter().map(|v| v.abs()).collect();
        a.sort_unstable();
        match *self {
            YSymbol::Exact => a.iter().map(|v| (v * v) as f64).sum(),
            YSymbol::FiniteDifference { points } => {
                let h = 2.0 * PI / points as f64;
                a.iter().map(|&v| 4.0 * (v as f64 * h / 2.0).sin().powi(2) / (h * h)).sum()
            }
        }
    }
}

/// Potential used for every mode: `r V + Ṽ`.
pub struct ModePotentials<'a> {
    pub base: &'a dyn PotentialField,
    pub additive: Option<&'a dyn PotentialField>,
}

fn mode_operator(p: &ModePotentials<'_>, grid: &Grid, r: f64) -> Result<DiscreteOperator> {
    let mut x = vec![0.0; grid.dim];
    let values = (0..grid.len())
        .map(|i| {
            grid.node(i, &mut x);
            let extra = p.additive.map_or(0.0, |a| a.value(&x));
            if r == 0.0 {
                extra
            } else {
                r * p.base.value(&x) + extra
            }
        })
        .collect();
    DiscreteOperator::from_values(*grid, values)
}

/// Spectra of the decoupled problems for the modes `{-M..M}^m`.
#[derive(Debug, Clone)]
pub struct ModeFamily {
    pub x_grid: Grid,
    pub y_dim: usize,
    pub max_mode: i64,
    pub symbol: YSymbol,
    pub power: f64,
    pub modes: Vec<Vec<i64>>,
    spectra: BTreeMap<u64, Arc<SpectralData>>,
}

impl ModeFamily {
    pub fn r(&self, k: &[i64]) -> f64 {
        self.symbol.value(k)
    }

    pub fn spectrum(&self, k: &[i64]) -> Option<&Arc<SpectralData>> {
        self.spectra.get(&self.r(k).to_bits())
    }

    /// Number of distinct spectra actually computed.
    pub fn distinct_spectra(&self) -> usize {
        self.spectra.len()
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.y_dim && k.iter().all(|v| v.abs() <= self.max_mode)
    }
}

fn mode_box(m: usize, max_mode: i64) -> Vec<Vec<i64>> {
    let side = (2 * max_mode + 1) as usize;
    (0..side.pow(m as u32))
        .map(|mut flat| {
            let mut k = vec![0i64; m];
            for slot in k.iter_mut().rev() {
                *slot = (flat % side) as i64 - max_mode;
                flat /= side;
            }
            k
        })
        .collect()
}

/// Eigensolves `-Δ + r_k V (+Ṽ)` once per distinct `r_k` over `{-M..M}^m`.
pub fn build_modes(
    potentials: &ModePotentials<'_>,
    x_grid: &Grid,
    y_dim: usize,
    max_mode: i64,
    symbol: YSymbol,
    power: f64,
    request: EigenRequest,
) -> Result<ModeFamily> {
    if max_mode < 0 {
        return Err(Error::invalid("max_mode", "must be ≥ 0"));
    }
    if y_dim == 0 {
        return Err(Error::invalid("y_dim", "must be ≥ 1"));
    }
    ensure_positive("s", power)?;
    if potentials.base.dim() != x_grid.dim {
        return Err(Error::DimensionMismatch { expected: x_grid.dim, got: potentials.base.dim() });
    }
    let modes = mode_box(y_dim, max_mode);
    let mut spectra = BTreeMap::new();
    for k in &modes {
        let r = symbol.value(k);
        if spectra.contains_key(&r.to_bits()) {
            continue;
        }
        let solved = mode_operator(potentials, x_grid, r).and_then(|op| eigensolve(&op, request));
        let s = solved.map_err(|e| Error::Mode { mode: k.clone(), cause: alloc::boxed::Box::new(e) })?;
        spectra.insert(r.to_bits(), Arc::new(s));
    }
    Ok(ModeFamily { x_grid: *x_grid, y_dim, max_mode, symbol, power, modes, spectra })
}

// -------------------------------------------------------------------- state

#[derive(Debug, Clone, PartialEq)]
pub struct GrushinState {
    pub time: f64,
    /// `k ↦ û(·, k)` on the `x`-grid.
    pub modes: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

fn y_nodes(m: usize, points: usize) -> Vec<Vec<f64>> {
    (0..points.pow(m as u32))
        .map(|mut flat| {
            let mut y = vec![0.0; m];
            for slot in y.iter_mut().rev() {
                *slot = 2.0 * PI * (flat % points) as f64 / points as f64;
                flat /= points;
            }
            y
        })
        .collect()
}

fn check_alias(fam: &ModeFamily, points: usize) -> Result<()> {
    if (2 * fam.max_mode + 1) as usize > points {
        return Err(Error::invalid("y_points", format!("{points} points alias modes up to |k_i| = {}", fam.max_mode)));
    }
    Ok(())
}

fn phase(k: &[i64], y: &[f64]) -> Complex64 {
    let a: f64 = k.iter().zip(y).map(|(k, y)| *k as f64 * y).sum();
    Complex64::new(a.cos(), a.sin())
}

impl GrushinState {
    pub fn zero(fam: &ModeFamily) -> Self {
        let n = fam.x_grid.len();
        Self { time: 0.0, modes: fam.modes.iter().map(|k| (k.clone(), vec![Complex64::new(0.0, 0.0); n])).collect() }
    }

    /// Only mode `k` populated, with real profile `profile`.
    pub fn single_mode(fam: &ModeFamily, k: &[i64], profile: &[f64]) -> Result<Self> {
        if !fam.contains(k) {
            return Err(Error::invalid("k", format!("mode {k:?} is outside the family")));
        }
        if profile.len() != fam.x_grid.len() {
            return Err(Error::DimensionMismatch { expected: fam.x_grid.len(), got: profile.len() });
        }
        let mut s = Self::zero(fam);
        s.modes.insert(k.to_vec(), profile.iter().map(|v| Complex64::new(*v, 0.0)).collect());
        Ok(s)
    }

    /// Fourier coefficients of a real field sampled on `x`-nodes × `points^m` `y`-nodes.
    pub fn from_physical(fam: &ModeFamily, field: &[f64], points: usize) -> Result<Self> {
        check_alias(fam, points)?;
        let nx = fam.x_grid.len();
        let ys = y_nodes(fam.y_dim, points);
        if field.len() != nx * ys.len() {
            return Err(Error::DimensionMismatch { expected: nx * ys.len(), got: field.len() });
        }
        let scale = (2.0 * PI).powf(fam.y_dim as f64 / 2.0) / ys.len() as f64;
        let modes = fam
            .modes
            .iter()
            .map(|k| {
                let w: Vec<Complex64> = ys.iter().map(|y| phase(k, y).conj() * scale).collect();
                let coeffs = (0..nx).map(|i| field[i * ys.len()..(i + 1) * ys.len()].iter().zip(&w).map(|(u, w)| w * u).sum()).collect();
                (k.clone(), coeffs)
            })
            .collect();
        Ok(Self { time: 0.0, modes })
    }

    /// Real part of the synthesized field on `x`-nodes × `points^m` `y`-nodes.
    pub fn to_physical(&self, fam: &ModeFamily, points: usize) -> Result<Vec<f64>> {
        check_alias(fam, points)?;
        let nx = fam.x_grid.len();
        let ys = y_nodes(fam.y_dim, points);
        let scale = (2.0 * PI).powf(-(fam.y_dim as f64) / 2.0);
        let mut out = vec![0.0; nx * ys.len()];
        for (k, coeffs) in &self.modes {
            let w: Vec<Complex64> = ys.iter().map(|y| phase(k, y) * scale).collect();
            for (i, c) in coeffs.iter().enumerate() {
                for (j, w) in w.iter().enumerate() {
                    out[i * ys.len() + j] += (c * w).re;
                }
            }
        }
        Ok(out)
    }

    /// `(hⁿ Σ_k Σ_i |û(x_i,k)|²)^{1/2}`.
    pub fn norm(&self, fam: &ModeFamily) -> f64 {
        let s: f64 = self.modes.values().flat_map(|c| c.iter().map(|z| z.norm_sqr())).sum();
        (fam.x_grid.cell_volume() * s).sqrt()
    }
}

/// `hⁿ h_y^m Σ |u|²` for a physical field.
pub fn physical_norm(fam: &ModeFamily, field: &[f64], points: usize) -> f64 {
    let hy = 2.0 * PI / points as f64;
    (fam.x_grid.cell_volume() * hy.powi(fam.y_dim as i32) * field.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// `e^{-t 𝓛^s}` applied mode by mode.
pub fn evolve(fam: &ModeFamily, state: &GrushinState, t: f64) -> Result<GrushinState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let mut out = BTreeMap::new();
    for (k, c) in &state.modes {
        let spec = fam
            .spectrum(k)
            .filter(|_| fam.contains(k))
            .ok_or_else(|| Error::invalid("state", format!("mode {k:?} is not in the family")))?;
        let wrap = |e| Error::Mode { mode: k.clone(), cause: alloc::boxed::Box::new(e) };
        let re: Vec<f64> = c.iter().map(|z| z.re).collect();
        let im: Vec<f64> = c.iter().map(|z| z.im).collect();
        let re = semigroup_apply(spec, t, fam.power, &re).map_err(wrap)?;
        let im = if im.iter().all(|v| *v == 0.0) { im } else { semigroup_apply(spec, t, fam.power, &im).map_err(wrap)? };
        out.insert(k.clone(), re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect());
    }
    Ok(GrushinState { time: state.time + t, modes: out })
}

/// Dense eigen-decomposition of `-∂²_x − V(x)∂²_y` (Dirichlet in `x`,
/// periodic three-point stencil in `y`), applied as `e^{-tΛ^s}` to `u0`.
pub fn direct_oracle(v: &dyn PotentialField, x_grid: &Grid, y_points: usize, t: f64, s: f64, u0: &[f64]) -> Result<Vec<f64>> {
    if x_grid.dim != 1 || v.dim() != 1 {
        return Err(Error::invalid("x_grid", "the oracle is one-dimensional in x"));
    }
    if x_grid.boundary != Boundary::Dirichlet {
        return Err(Error::invalid("x_grid", "the oracle expects a Dirichlet x-grid"));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    ensure_positive("s", s)?;
    if y_points < 3 {
        return Err(Error::invalid("y_points", "must be at least 3"));
    }
    let (nx, ny) = (x_grid.points_per_dim, y_points);
    let total = nx * ny;
    if total > ORACLE_MAX_UNKNOWNS {
        return Err(Error::TooLarge { unknowns: total, cap: ORACLE_MAX_UNKNOWNS });
    }
    if u0.len() != total {
        return Err(Error::DimensionMismatch { expected: total, got: u0.len() });
    }
    let ihx = 1.0 / x_grid.spacing().powi(2);
    let ihy = 1.0 / (2.0 * PI / ny as f64).powi(2);
    let mut a = DMatrix::zeros(total, total);
    for i in 0..nx {
        let vi = v.value(&[x_grid.coordinate(i)]);
        for j in 0..ny {
            let p = i * ny + j;
            a[(p, p)] = 2.0 * ihx + 2.0 * vi * ihy;
            if i > 0 {
                a[(p, p - ny)] = -ihx;
            }
            if i + 1 < nx {
                a[(p, p + ny)] = -ihx;
            }
            let (jp, jm) = ((j + 1) % ny, (j + ny - 1) % ny);
            a[(p, i * ny + jp)] += -vi * ihy;
            a[(p, i * ny + jm)] += -vi * ihy;
        }
    }
    let eig = SymmetricEigen::new(a);
    let q = &eig.eigenvectors;
    let c = q.transpose() * DVector::from_column_slice(u0);
    let damped = DVector::from_fn(total, |k, _| c[k] * (-t * eig.eigenvalues[k].max(0.0).powf(s)).exp());
    Ok((q * damped).iter().copied().collect())
}

// ------------------------------------------------------------ observability

/// Paper-side inputs for the bound column.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs<'a> {
    pub params: &'a AssumptionParams,
    pub table: &'a ExponentTable,
    pub constants: &'a FreeConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub k: Vec<i64>,
    /// `|k|²` (or the discrete symbol).
    pub r: f64,
    #[serde(rename = "C_emp")]
    pub c_emp: Option<f64>,
    pub paper_bound: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub s: f64,
    pub rows: Vec<ModeRow>,
    #[serde(rename = "C_agg")]
    pub c_agg: f64,
    pub argmax_mode: Option<Vec<i64>>,
    /// Thickness of `ω` at scale 1, audited for the `k = 0` mode.
    pub zero_mode_thickness: Option<f64>,
}

impl ObservabilityReport {
    pub fn row(&self, k: &[i64]) -> Option<&ModeRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

fn paper_bound(bound: Option<BoundInputs<'_>>, t: f64, s: f64, r: f64) -> Option<f64> {
    let b = bound?;
    if r <= 0.0 {
        return None;
    }
    cobs_formula(t, s, r, b.params, b.table, b.constants).ok()
}

/// Per-mode `C_emp(k)` on `ω × 𝕋ᵐ` and the aggregate `sup_k C_emp(k)`.
pub fn grushin_observability(
    fam: &ModeFamily,
    mask_x: &SetIndicator,
    t: f64,
    s: f64,
    bound: Option<BoundInputs<'_>>,
) -> Result<ObservabilityReport> {
    ensure_positive("T", t)?;
    ensure_positive("s", s)?;
    if mask_x.grid != fam.x_grid {
        return Err(Error::DimensionMismatch { expected: fam.x_grid.len(), got: mask_x.grid.len() });
    }
    let mut cache: BTreeMap<u64, core::result::Result<f64, String>> = BTreeMap::new();
    let mut rows = Vec::with_capacity(fam.modes.len());
    for k in &fam.modes {
        let r = fam.r(k);
        let spec = fam.spectrum(k).expect("every family mode has a spectrum");
        let entry = cache.entry(r.to_bits()).or_insert_with(|| {
            GramianBundle::for_horizon(spec, mask_x.clone(), t, s)
                .and_then(|b| gramian_observability(&b))
                .map(|e| e.c_emp)
                .map_err(|e| format!("{e}"))
        });
        let mut flags = Vec::new();
        if k.iter().all(|v| *v == 0) {
            flags.push(String::from("thickness fallback"));
        }
        let c_emp = match entry {
            Ok(c) => {
                if c.is_infinite() {
                    flags.push(String::from("singular observability matrix"));
                }
                Some(*c)
            }
            Err(msg) => {
                flags.push(msg.clone());
                None
            }
        };
        rows.push(ModeRow { k: k.clone(), r, c_emp, paper_bound: paper_bound(bound, t, s, r), flags });
    }
    let best = rows.iter().filter_map(|r| r.c_emp.map(|c| (c, &r.k))).max_by(|a, b| a.0.total_cmp(&b.0));
    let (c_agg, argmax_mode) = match best {
        Some((c, k)) => (c, Some(k.clone())),
        None => (f64::NAN, None),
    };
    let zero_mode_thickness = if 1.0 <= 2.0 * fam.x_grid.halfwidth { thickness(mask_x, 1.0).ok().map(|a| a.gamma_est) } else { None };
    Ok(ObservabilityReport { t, s, rows, c_agg, argmax_mode, zero_mode_thickness })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    #[serde(rename = "C_emp")]
    pub c_emp: f64,
    pub bound: Option<f64>,
}

/// `C_emp` of `-Δ + rV (+Ṽ)` for each `r`, next to the paper bound.
pub fn scan_scaled_observability(
    potentials: &ModePotentials<'_>,
    x_grid: &Grid,
    request: EigenRequest,
    r_values: &[f64],
    mask: &SetIndicator,
    t: f64,
    s: f64,
    bound: Option<BoundInputs<'_>>,
) -> Result<Vec<ScanRow>> {
    r_values
        .iter()
        .map(|&r| {
            ensure_positive("r", r)?;
            let spec = eigensolve(&mode_operator(potentials, x_grid, r)?, request)?;
            let est = gramian_observability(&GramianBundle::for_horizon(&spec, mask.clone(), t, s)?)?;
            Ok(ScanRow { r, c_emp: est.c_emp, bound: paper_bound(bound, t, s, r) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_power_potential;
    use approx::assert_relative_eq;

    fn family(max_mode: i64, symbol: YSymbol, nx: usize) -> ModeFamily {
        let v = make_power_potential(1.0, 2.0, 1).unwrap();
        let grid = Grid::dirichlet(1, 6.0, nx).unwrap();
        build_modes(&ModePotentials { base: &v, additive: None }, &grid, 1, max_mode, symbol, 1.0, EigenRequest::Count(nx)).unwrap()
    }

    #[test]
    fn modes_are_deduplicated() {
        let f = family(2, YSymbol::Exact, 241);
        assert_eq!(f.modes.len(), 5);
        assert_eq!(f.distinct_spectra(), 3);
        assert!(Arc::ptr_eq(f.spectrum(&[2]).unwrap(), f.spectrum(&[-2]).unwrap()));
        assert_relative_eq!(f.spectrum(&[1]).unwrap().eigenvalues[0], 1.0, epsilon = 1e-3);
        assert_relative_eq!(f.spectrum(&[2]).unwrap().eigenvalues[0], 2.0, epsilon = 2e-3);
        // Dirichlet Laplacian on [-6, 6].
        assert_relative_eq!(f.spectrum(&[0]).unwrap().eigenvalues[0], (PI / 12.0).powi(2), max_relative = 1e-3);
        let single = family(0, YSymbol::Exact, 41);
        assert_eq!(single.modes, vec![vec![0]]);
    }

    #[test]
    fn parseval_and_round_trip() {
        let f = family(3, YSymbol::FiniteDifference { points: 8 }, 31);
        let nx = 31;
        let field: Vec<f64> = (0..nx * 8).map(|p| ((p * 37 % 11) as f64 - 5.0) / 7.0).collect();
        // Keep only representable content: drop the Nyquist frequency.
        let s = GrushinState::from_physical(&f, &field, 8).unwrap();
        let back = s.to_physical(&f, 8).unwrap();
        let again = GrushinState::from_physical(&f, &back, 8).unwrap();
        assert_relative_eq!(s.norm(&f), physical_norm(&f, &back, 8), max_relative = 1e-10);
        assert_relative_eq!(again.norm(&f), s.norm(&f), max_relative = 1e-10);
        assert!(GrushinState::from_physical(&f, &field, 6).is_err());
    }

    #[test]
    fn evolution_examples() {
        let f = family(2, YSymbol::Exact, 121);
        let spec = f.spectrum(&[1]).unwrap();
        let s0 = GrushinState::single_mode(&f, &[1], &spec.eigenvectors[0]).unwrap();
        let same = evolve(&f, &s0, 0.0).unwrap();
        assert_relative_eq!(same.norm(&f), s0.norm(&f), max_relative = 1e-12);
        let s1 = evolve(&f, &s0, 0.3).unwrap();
        assert_relative_eq!(s1.norm(&f) / s0.norm(&f), (-0.3 * spec.eigenvalues[0]).exp(), max_relative = 1e-10);
        assert!(evolve(&f, &s0, -1.0).is_err());
        let a = evolve(&f, &evolve(&f, &s0, 0.1).unwrap(), 0.2).unwrap();
        let diff: f64 = a.modes[&vec![1]].iter().zip(&s1.modes[&vec![1]]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
        assert_relative_eq!(a.time, 0.3);
    }

    #[test]
    fn oracle_matches_modes() {
        let nx = 31;
        let points = 8;
        let f = family(3, YSymbol::FiniteDifference { points }, nx);
        let mut s = GrushinState::zero(&f);
        for (k, c) in s.modes.iter_mut() {
            let spec = f.spectrum(k).unwrap();
            for (j, z) in c.iter_mut().enumerate() {
                let v = spec.eigenvectors[0][j] + 0.5 * spec.eigenvectors[2][j];
                *z = Complex64::new(v / (1.0 + k[0].abs() as f64), 0.3 * k[0] as f64 * v);
            }
        }
        let u0 = s.to_physical(&f, points).unwrap();
        let v = make_power_potential(1.0, 2.0, 1).unwrap();
        let oracle = direct_oracle(&v, &f.x_grid, points, 0.1, 1.0, &u0).unwrap();
        let modal = evolve(&f, &s, 0.1).unwrap().to_physical(&f, points).unwrap();
        let err = oracle.iter().zip(&modal).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = oracle.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(err / scale < 1e-8, "{}", err / scale);
    }

    #[test]
    fn oracle_on_y_constant_data_is_free_heat_flow() {
        let grid = Grid::dirichlet(1, 3.0, 21).unwrap();
        let v = make_power_potential(1.0, 2.0, 1).unwrap();
        let prof: Vec<f64> = (0..21).map(|i| (i as f64 * 0.3).sin()).collect();
        let u0: Vec<f64> = prof.iter().flat_map(|p| vec![*p; 6]).collect();
        let out = direct_oracle(&v, &grid, 6, 0.2, 1.0, &u0).unwrap();
        let free = DiscreteOperator::from_values(grid, vec![0.0; 21]).unwrap();
        let spec = eigensolve(&free, EigenRequest::Count(21)).unwrap();
        let expect = semigroup_apply(&spec, 0.2, 1.0, &prof).unwrap();
        for (i, e) in expect.iter().enumerate() {
            for j in 0..6 {
                assert_relative_eq!(out[i * 6 + j], e, epsilon = 1e-8);
            }
        }
        let big = Grid::dirichlet(1, 3.0, 700).unwrap();
        assert!(matches!(direct_oracle(&v, &big, 16, 0.1, 1.0, &vec![0.0; 700 * 16]), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn full_mask_observability_is_at_most_one() {
        let f = family(2, YSymbol::Exact, 121);
        let full = SetIndicator::full(f.x_grid);
        let rep = grushin_observability(&f, &full, 0.5, 1.0, None).unwrap();
        assert!(rep.c_agg <= 1.0);
        for row in &rep.rows {
            let c = row.c_emp.unwrap();
            assert!(c <= rep.c_agg);
            let mirror: Vec<i64> = row.k.iter().map(|v| -v).collect();
            assert_eq!(rep.row(&mirror).unwrap().c_emp, Some(c));
        }
        assert!(rep.row(&[0]).unwrap().flags.iter().any(|f| f == "thickness fallback"));
        assert_eq!(rep.zero_mode_thickness, Some(1.0));
    }

    #[test]
    fn scan_at_unit_r_is_plain_schrodinger() {
        let v = make_power_potential(1.0, 2.0, 1).unwrap();
        let grid = Grid::dirichlet(1, 6.0, 121).unwrap();
        let mask = SetIndicator::from_mask(grid, grid.nodes().map(|x| x[0].abs() > 0.5).collect()).unwrap();
        let p = ModePotentials { base: &v, additive: None };
        let rows = scan_scaled_observability(&p, &grid, EigenRequest::Count(40), &[1.0, 4.0], &mask, 0.5, 1.0, None).unwrap();
        let op = crate::operator::discretize(&v, &grid).unwrap();
        let spec = eigensolve(&op, EigenRequest::Count(40)).unwrap();
        let direct = gramian_observability(&GramianBundle::for_horizon(&spec, mask, 0.5, 1.0).unwrap()).unwrap().c_emp;
        assert_relative_eq!(rows[0].c_emp, direct, max_relative = 1e-10);
    }
}
