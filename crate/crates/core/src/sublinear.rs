//! The sublinear expectation engine: `E^[f] = sup_k E_k[f]` over the
//! one-parameter family of heavy-tailed laws, plus randomized checks of the
//! sublinear-expectation axioms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::measure::{StableIndex, UncertaintySet};
use crate::nonlocal::SampledFunction;
use crate::opt::grid_then_golden_max;
use crate::pareto::{BetaProfile, HeavyTailLaw};

/// The one-parameter law family `k in [k_lo, k_hi]`.  The tail parameter is
/// the per-direction spherical weight, so the family maps onto the mass
/// band `[2 k_lo, 2 k_hi]` of the jump uncertainty set.
#[derive(Debug, Clone)]
pub struct LawFamily {
    k_lo: f64,
    k_hi: f64,
    index: StableIndex,
    profile: BetaProfile,
    k_grid: usize,
}

impl LawFamily {
    pub fn new(
        k_lo: f64,
        k_hi: f64,
        index: StableIndex,
        profile: BetaProfile,
        k_grid: usize,
    ) -> Result<Self> {
        if !(k_lo > 0.0 && k_lo <= k_hi) || !k_hi.is_finite() {
            return Err(domain(format!(
                "need 0 < k_lo <= k_hi, got [{k_lo}, {k_hi}]"
            )));
        }
        if k_grid < 3 {
            return Err(domain("k_grid must be at least 3"));
        }
        // construct the endpoint laws so invalid profiles fail fast
        let family = Self {
            k_lo,
            k_hi,
            index,
            profile,
            k_grid,
        };
        family.law_at(k_lo)?;
        family.law_at(k_hi)?;
        Ok(family)
    }

    /// Singleton family (classical linear expectation).
    pub fn singleton(k: f64, index: StableIndex, profile: BetaProfile) -> Result<Self> {
        Self::new(k, k, index, profile, 3)
    }

    pub fn k_lo(&self) -> f64 {
        self.k_lo
    }
    pub fn k_hi(&self) -> f64 {
        self.k_hi
    }
    pub fn is_singleton(&self) -> bool {
        self.k_lo == self.k_hi
    }
    pub fn index(&self) -> StableIndex {
        self.index
    }
    pub fn alpha(&self) -> f64 {
        self.index.alpha()
    }
    pub fn profile(&self) -> &BetaProfile {
        &self.profile
    }
    pub fn k_grid(&self) -> usize {
        self.k_grid
    }

    /// The law at tail parameter `k` (clamped to the closed band).
    pub fn law_at(&self, k: f64) -> Result<HeavyTailLaw> {
        let k = k.clamp(self.k_lo, self.k_hi);
        match &self.profile {
            BetaProfile::ParetoCutoff => HeavyTailLaw::make_pareto_cutoff(k, self.index),
            BetaProfile::ParetoMollified { blend } => {
                HeavyTailLaw::make_pareto_mollified(k, self.index, *blend)
            }
            BetaProfile::Custom {
                gamma,
                c_bound,
                knots,
            } => HeavyTailLaw::make_custom(k, self.index, *gamma, *c_bound, knots.clone()),
        }
    }

    /// Largest cutoff across the band (the binding truncation constraint).
    pub fn max_cutoff(&self) -> Result<f64> {
        Ok(self.law_at(self.k_hi)?.support_min())
    }

    /// The jump uncertainty set this family induces: mass band
    /// `[2 k_lo, 2 k_hi]` on directions `{+1, -1}`.
    pub fn uncertainty_set(&self) -> Result<UncertaintySet> {
        UncertaintySet::one_dim(self.index, 2.0 * self.k_lo, 2.0 * self.k_hi)
    }
}

/// Result of the band supremum: value and the maximizing tail parameter.
#[derive(Debug, Clone, Copy)]
pub struct SupExpect {
    pub value: f64,
    pub arg_k: f64,
}

/// `sup_{k in [k_lo, k_hi]} E_k[f]` by a coarse grid over `k_grid` points
/// followed by golden-section refinement to tolerance `tol` in `k`.  The
/// refined value is cross-checked against the grid maximum; ties break
/// toward the smaller `k`.
pub fn sup_expect(family: &LawFamily, f: &SampledFunction, tol: f64) -> Result<SupExpect> {
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let quad_tol = (tol * 1e-2).min(1e-8);
    if family.is_singleton() {
        let law = family.law_at(family.k_lo)?;
        return Ok(SupExpect {
            value: law.expect(f, quad_tol)?,
            arg_k: family.k_lo,
        });
    }
    // expectations inside the optimizer cannot return Result; poison with
    // -inf and re-check afterwards
    let eval = |k: f64| -> f64 {
        match family.law_at(k).and_then(|law| law.expect(f, quad_tol)) {
            Ok(v) => v,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let (arg_k, value) =
        grid_then_golden_max(eval, family.k_lo, family.k_hi, family.k_grid, tol);
    if !value.is_finite() {
        // reproduce the underlying error
        let law = family.law_at(arg_k)?;
        law.expect(f, quad_tol)?;
        return Err(domain("expectation not finite across the band"));
    }
    Ok(SupExpect { value, arg_k })
}

/// Verdict for one sublinear-expectation axiom.
#[derive(Debug, Clone, Copy)]
pub struct AxiomResult {
    pub pass: bool,
    /// Worst signed margin observed (negative means violation beyond tol).
    pub worst_margin: f64,
}

/// Randomized verification of the four sublinear-expectation axioms.
#[derive(Debug, Clone, Copy)]
pub struct AxiomReport {
    pub monotonicity: AxiomResult,
    pub constants: AxiomResult,
    pub subadditivity: AxiomResult,
    pub homogeneity: AxiomResult,
    pub trials: u32,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.monotonicity.pass && self.constants.pass && self.subadditivity.pass && self.homogeneity.pass
    }
}

fn random_bump_mix(rng: &mut ChaCha8Rng) -> (SampledFunction, Vec<(f64, f64, f64)>) {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let a = rng.random_range(-1.0..1.0);
            let c = rng.random_range(-5.0..5.0);
            let s = rng.random_range(0.5..2.0);
            (a, c, s)
        })
        .collect();
    let bound: f64 = terms.iter().map(|(a, _, _)| a.abs()).sum();
    let t = terms.clone();
    let f = SampledFunction::new(bound.max(1e-9), move |x: f64| {
        t.iter()
            .map(|(a, c, s)| a * (-(x - c) * (x - c) / (2.0 * s * s)).exp())
            .sum()
    });
    (f, terms)
}

/// Check monotonicity, constant preservation, sub-additivity and positive
/// homogeneity on random smooth bump mixtures.  Deterministic in `seed`.
pub fn axiom_check(family: &LawFamily, trials: u32, tol: f64, seed: u64) -> Result<AxiomReport> {
    if trials == 0 {
        return Err(domain("need at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mono: f64 = f64::INFINITY;
    let mut consts: f64 = f64::INFINITY;
    let mut subadd: f64 = f64::INFINITY;
    let mut homog: f64 = f64::INFINITY;
    let opt_tol = (tol * 1e-2).min(1e-7);

    for _ in 0..trials {
        let (f, f_terms) = random_bump_mix(&mut rng);
        let (g, _) = random_bump_mix(&mut rng);

        let ef = sup_expect(family, &f, opt_tol)?.value;
        let eg = sup_expect(family, &g, opt_tol)?.value;

        // monotonicity: subtract a nonnegative bump from f
        let drop = rng.random_range(0.1..0.5);
        let center = rng.random_range(-4.0..4.0);
        let ft = f_terms.clone();
        let smaller = SampledFunction::new(f.bound() + drop, move |x: f64| {
            ft.iter()
                .map(|(a, c, s)| a * (-(x - c) * (x - c) / (2.0 * s * s)).exp())
                .sum::<f64>()
                - drop * (-(x - center) * (x - center)).exp()
        });
        let es = sup_expect(family, &smaller, opt_tol)?.value;
        mono = mono.min(ef - es + tol);

        // constants
        let c = rng.random_range(-7.0..7.0);
        let ec = sup_expect(family, &SampledFunction::constant(c), opt_tol)?.value;
        consts = consts.min(tol - (ec - c).abs());

        // sub-additivity
        let ftp = f_terms.clone();
        let gc = g.clone();
        let sum = SampledFunction::new(f.bound() + g.bound(), move |x: f64| {
            ftp.iter()
                .map(|(a, c2, s)| a * (-(x - c2) * (x - c2) / (2.0 * s * s)).exp())
                .sum::<f64>()
                + gc.eval(x)
        });
        let efg = sup_expect(family, &sum, opt_tol)?.value;
        subadd = subadd.min(ef + eg + tol - efg);

        // positive homogeneity
        let lambda = rng.random_range(0.25..4.0);
        let ftl = f_terms.clone();
        let scaled = SampledFunction::new(lambda * f.bound(), move |x: f64| {
            lambda
                * ftl
                    .iter()
                    .map(|(a, c2, s)| a * (-(x - c2) * (x - c2) / (2.0 * s * s)).exp())
                    .sum::<f64>()
        });
        let el = sup_expect(family, &scaled, opt_tol)?.value;
        homog = homog.min(tol * lambda.max(1.0) - (el - lambda * ef).abs());
    }

    let result = |worst: f64| AxiomResult {
        pass: worst >= 0.0,
        worst_margin: worst,
    };
    Ok(AxiomReport {
        monotonicity: result(mono),
        constants: result(consts),
        subadditivity: result(subadd),
        homogeneity: result(homog),
        trials,
    })
}
