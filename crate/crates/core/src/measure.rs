//! Alpha-stable Levy measures in polar form and the jump uncertainty band.
//!
//! A measure here is `F(B) = ∫_S mu(dz) ∫_0^∞ 1_B(r z) r^{-1-alpha} dr` with
//! `mu` a symmetric finite measure on the unit sphere.  Model uncertainty
//! enters only through the spherical mass `mu(S)`, constrained to a band
//! `[mass_lo, mass_hi]`.  The band is kept closed so suprema are attained.

use crate::error::{domain, Result};

const UNIT_NORM_TOL: f64 = 1e-12;
const MIRROR_TOL: f64 = 1e-12;

/// Stability index `alpha` restricted to `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableIndex {
    alpha: f64,
}

impl StableIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
            return Err(domain(format!(
                "stability index must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Whether the compensated increment applies (`alpha == 1`).
    #[inline]
    pub fn is_one(&self) -> bool {
        self.alpha == 1.0
    }
}

/// Discrete symmetric finite measure on the unit sphere: mirror-closed
/// direction/weight atoms with positive total mass.
#[derive(Debug, Clone)]
pub struct SphericalMeasure {
    atoms: Vec<(Vec<f64>, f64)>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn is_mirror(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x + y).abs() <= MIRROR_TOL)
}

impl SphericalMeasure {
    pub fn new(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(domain("spherical measure needs at least one atom"));
        }
        let dim = atoms[0].0.len();
        for (z, w) in &atoms {
            if z.len() != dim {
                return Err(domain("mixed atom dimensions"));
            }
            if (norm(z) - 1.0).abs() > UNIT_NORM_TOL {
                return Err(domain(format!("atom direction {z:?} is not unit length")));
            }
            if !(*w >= 0.0) {
                return Err(domain("atom weights must be nonnegative"));
            }
        }
        // Mirror closure: every (z, w) must have a partner (-z, w).
        for (z, w) in &atoms {
            let partner = atoms
                .iter()
                .find(|(z2, _)| is_mirror(z, z2))
                .ok_or_else(|| domain(format!("missing mirror atom for {z:?}")))?;
            if (partner.1 - w).abs() > MIRROR_TOL {
                return Err(domain(format!(
                    "mirror atoms for {z:?} carry unequal weights"
                )));
            }
        }
        let mass: f64 = atoms.iter().map(|(_, w)| w).sum();
        if !(mass > 0.0) {
            return Err(domain("spherical measure must have positive total mass"));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.len()
    }
}

/// The jump uncertainty band: index, closed spherical-mass band and the
/// mirror-closed direction grid on which candidate measures may live.
#[derive(Debug, Clone)]
pub struct UncertaintySet {
    index: StableIndex,
    mass_lo: f64,
    mass_hi: f64,
    direction_grid: Vec<Vec<f64>>,
}

impl UncertaintySet {
    pub fn new(
        index: StableIndex,
        mass_lo: f64,
        mass_hi: f64,
        direction_grid: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(mass_lo > 0.0 && mass_lo <= mass_hi) || !mass_hi.is_finite() {
            return Err(domain(format!(
                "mass band must satisfy 0 < lo <= hi, got [{mass_lo}, {mass_hi}]"
            )));
        }
        if direction_grid.is_empty() {
            return Err(domain("direction grid is empty"));
        }
        let dim = direction_grid[0].len();
        for z in &direction_grid {
            if z.len() != dim {
                return Err(domain("mixed direction dimensions"));
            }
            if (norm(z) - 1.0).abs() > UNIT_NORM_TOL {
                return Err(domain(format!("direction {z:?} is not unit length")));
            }
        }
        for z in &direction_grid {
            if !direction_grid.iter().any(|z2| is_mirror(z, z2)) {
                return Err(domain(format!("direction grid not mirror-closed at {z:?}")));
            }
        }
        if dim == 1 {
            let mut vals: Vec<f64> = direction_grid.iter().map(|z| z[0]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if vals.len() != 2 || (vals[0] + 1.0).abs() > UNIT_NORM_TOL || (vals[1] - 1.0).abs() > UNIT_NORM_TOL {
                return Err(domain("one-dimensional direction grid must be exactly {+1, -1}"));
            }
        }
        Ok(Self {
            index,
            mass_lo,
            mass_hi,
            direction_grid,
        })
    }

    /// The one-dimensional set, grid `{+1, -1}`.
    pub fn one_dim(index: StableIndex, mass_lo: f64, mass_hi: f64) -> Result<Self> {
        Self::new(index, mass_lo, mass_hi, vec![vec![1.0], vec![-1.0]])
    }

    pub fn index(&self) -> StableIndex {
        self.index
    }
    pub fn mass_lo(&self) -> f64 {
        self.mass_lo
    }
    pub fn mass_hi(&self) -> f64 {
        self.mass_hi
    }
    pub fn direction_grid(&self) -> &[Vec<f64>] {
        &self.direction_grid
    }
    pub fn dim(&self) -> usize {
        self.direction_grid[0].len()
    }

    /// Indices `(i, j)` of mirror pairs with `i <= j`, each pair listed once.
    pub fn mirror_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        let mut seen = vec![false; self.direction_grid.len()];
        for i in 0..self.direction_grid.len() {
            if seen[i] {
                continue;
            }
            let j = (0..self.direction_grid.len())
                .find(|&j| is_mirror(&self.direction_grid[i], &self.direction_grid[j]))
                .expect("mirror closure validated at construction");
            seen[i] = true;
            seen[j] = true;
            pairs.push((i.min(j), i.max(j)));
        }
        pairs
    }
}

/// Mass of `{|lambda| > r}` under the polar measure with spherical mass
/// `total_mass`: the radial integral gives `total_mass * r^{-alpha} / alpha`.
pub fn tail_mass(index: StableIndex, total_mass: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain(format!("tail radius must be positive, got {r}")));
    }
    if !(total_mass >= 0.0) {
        return Err(domain("total mass must be nonnegative"));
    }
    Ok(total_mass * r.powf(-index.alpha()) / index.alpha())
}

/// The finiteness constant `K_alpha`: the supremum over the band of
/// `∫ (|lambda| ∧ 1) dF` for `alpha < 1` and `∫ (|lambda|^2 ∧ 1) dF` at
/// `alpha = 1`.  Radial closed forms: `1/(1-alpha) + 1/alpha` resp. `2`.
pub fn k_alpha(set: &UncertaintySet) -> f64 {
    let a = set.index().alpha();
    if set.index().is_one() {
        2.0 * set.mass_hi()
    } else {
        set.mass_hi() * (1.0 / (1.0 - a) + 1.0 / a)
    }
}

/// Outcome of the spherical supremum: attained value, maximizing mass and
/// the index of the maximizing direction in the set's grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupSpherical {
    pub value: f64,
    pub arg_mass: f64,
    pub arg_direction: usize,
}

/// Supremum of `∫_S g_sym dmu` over symmetric discrete `mu` on the grid with
/// `mu(S)` in the closed band.  `sym_values[i]` is the symmetrized integrand
/// at `direction_grid[i]`; the optimum concentrates the mass on the best
/// mirror pair, so the value is `m* · max_i sym_values[i]` with `m*` the band
/// endpoint selected by the sign of the maximum.  Ties break to the lowest
/// grid index; a zero maximum reports `mass_hi`.
pub fn sup_spherical(sym_values: &[f64], set: &UncertaintySet) -> Result<SupSpherical> {
    if sym_values.is_empty() || sym_values.len() != set.direction_grid().len() {
        return Err(domain(format!(
            "sym_values length {} does not match direction grid length {}",
            sym_values.len(),
            set.direction_grid().len()
        )));
    }
    if sym_values.iter().any(|v| !v.is_finite()) {
        return Err(domain("sym_values must be finite"));
    }
    let mut best = 0usize;
    for (i, v) in sym_values.iter().enumerate() {
        if *v > sym_values[best] {
            best = i;
        }
    }
    let g_max = sym_values[best];
    let mass = if g_max < 0.0 { set.mass_lo() } else { set.mass_hi() };
    Ok(SupSpherical {
        value: mass * g_max,
        arg_mass: mass,
        arg_direction: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(a: f64) -> StableIndex {
        StableIndex::new(a).unwrap()
    }

    #[test]
    fn index_rejects_out_of_range() {
        assert!(StableIndex::new(0.0).is_err());
        assert!(StableIndex::new(1.2).is_err());
        assert!(StableIndex::new(-0.3).is_err());
        assert!(StableIndex::new(f64::NAN).is_err());
        assert!(StableIndex::new(1.0).is_ok());
    }

    #[test]
    fn tail_mass_closed_form() {
        // alpha = 0.5, mass 1, r = 4: 2 * 4^{-1/2} = 1.
        let v = tail_mass(idx(0.5), 1.0, 4.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        // zero measure
        assert_eq!(tail_mass(idx(0.7), 0.0, 1.0).unwrap(), 0.0);
        // alpha = 1, mass 1, r = 1
        assert!((tail_mass(idx(1.0), 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(tail_mass(idx(0.5), 1.0, 0.0).is_err());
        assert!(tail_mass(idx(0.5), 1.0, -2.0).is_err());
    }

    #[test]
    fn k_alpha_closed_forms() {
        let set = UncertaintySet::one_dim(idx(0.5), 0.5, 1.0).unwrap();
        assert!((k_alpha(&set) - 4.0).abs() < 1e-15);
        let set1 = UncertaintySet::one_dim(idx(1.0), 0.5, 1.0).unwrap();
        assert!((k_alpha(&set1) - 2.0).abs() < 1e-15);
        // linear in mass_hi
        let small = UncertaintySet::one_dim(idx(0.5), 1e-9, 1e-9).unwrap();
        assert!(k_alpha(&small) < 1e-8);
    }

    #[test]
    fn sup_spherical_band_endpoints() {
        let set = UncertaintySet::one_dim(idx(0.5), 0.25, 0.5).unwrap();
        // zero integrand
        let z = sup_spherical(&[0.0, 0.0], &set).unwrap();
        assert_eq!(z.value, 0.0);
        assert_eq!(z.arg_mass, 0.5);
        // positive maximum picks mass_hi
        let p = sup_spherical(&[3.0, 3.0], &set).unwrap();
        assert!((p.value - 1.5).abs() < 1e-15);
        assert_eq!(p.arg_mass, 0.5);
        // negative maximum picks mass_lo
        let n = sup_spherical(&[-2.0, -2.0], &set).unwrap();
        assert!((n.value - (-0.5)).abs() < 1e-15);
        assert_eq!(n.arg_mass, 0.25);
        // tie breaks to lowest index
        let t = sup_spherical(&[1.0, 1.0], &set).unwrap();
        assert_eq!(t.arg_direction, 0);
    }

    #[test]
    fn spherical_measure_validation() {
        assert!(SphericalMeasure::new(vec![(vec![1.0], 1.0)]).is_err()); // no mirror
        assert!(SphericalMeasure::new(vec![(vec![2.0], 1.0), (vec![-2.0], 1.0)]).is_err());
        assert!(
            SphericalMeasure::new(vec![(vec![1.0], 1.0), (vec![-1.0], 0.5)]).is_err(),
            "unequal mirror weights must be rejected"
        );
        let m = SphericalMeasure::new(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]).unwrap();
        assert_eq!(m.dim(), 1);
        assert!((m.total_mass() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_dim_grid_must_be_plus_minus_one() {
        let bad = UncertaintySet::new(idx(0.5), 0.1, 0.2, vec![vec![1.0], vec![-1.0], vec![1.0]]);
        assert!(bad.is_err());
        let two_d = UncertaintySet::new(
            idx(0.5),
            0.1,
            0.2,
            vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
        );
        assert!(two_d.is_ok());
        assert_eq!(two_d.unwrap().mirror_pairs().len(), 2);
    }

    #[test]
    fn sup_spherical_rejects_bad_input() {
        let set = UncertaintySet::one_dim(idx(0.5), 0.25, 0.5).unwrap();
        assert!(matches!(
            sup_spherical(&[], &set),
            Err(crate::error::CoreError::Domain(_))
        ));
        assert!(sup_spherical(&[1.0], &set).is_err());
        assert!(sup_spherical(&[f64::NAN, 0.0], &set).is_err());
    }
}
