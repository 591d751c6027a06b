//! Symmetric perturbed-Pareto laws: the one-parameter family of heavy-tailed
//! summand distributions with cumulative distribution function
//!
//! ```text
//! F(x) = 1 - [k/alpha + beta(x)] x^{-alpha}    (x > 0),
//! F(x) =     [k/alpha + beta(-x)] |x|^{-alpha} (x < 0),
//! ```
//!
//! together with inverse-transform sampling, quadrature expectations, and
//! the closed-form truncated moments used by the truncated-scheme bounds.
//!
//! The built-in `pareto_cutoff` profile has `beta(x) = x^alpha/2 - k/alpha`
//! below the cutoff `c_k = (2k/alpha)^{1/alpha}` and zero beyond, which
//! makes the density exactly `(alpha c_k^alpha / 2) |x|^{-alpha-1}` on
//! `|x| >= c_k` and zero inside.

use rand::Rng;

use crate::error::{domain, numeric, Result};
use crate::measure::StableIndex;
use crate::nonlocal::{integrate_radial, RadialParams, SampledFunction};

/// Shape of the CDF perturbation `beta_k`.
#[derive(Debug, Clone)]
pub enum BetaProfile {
    /// Exact Pareto with cutoff `c_k`; `beta` has a kink at the cutoff.
    ParetoCutoff,
    /// C1 variant: cubic blend carrying `beta` to zero across the cutoff.
    /// A blend confined to `[c_k - blend, c_k]` would need an interior slope
    /// exceeding the monotonicity budget of the CDF (negative density), so
    /// the blend runs over `[c_k - blend, c_k - blend + q]` with `q` chosen
    /// so the blended slope never overshoots; `q ~ 3 blend`.
    ParetoMollified { blend: f64 },
    /// User-supplied piecewise-linear `beta` on knots `(x, beta(x))` with
    /// `x > 0` ascending and the last value zero; beyond the last knot
    /// `beta = 0`, below the first knot the tail probability is held
    /// constant (no mass), which is the only continuation compatible with
    /// `F(0+) - 1/2 = 0`.  `|beta(x)| <= c_bound / x^gamma` is probed.
    Custom {
        gamma: f64,
        c_bound: f64,
        knots: Vec<(f64, f64)>,
    },
}

/// A symmetric heavy-tailed law from the perturbed-Pareto family.
#[derive(Debug, Clone)]
pub struct HeavyTailLaw {
    k: f64,
    index: StableIndex,
    profile: BetaProfile,
    /// Cutoff `c_k` of the Pareto profiles (zero for custom profiles).
    cutoff: f64,
    /// Smallest radius carrying density.
    support_min: f64,
    /// Radius beyond which the density is exactly `k |x|^{-1-alpha}`.
    power_tail_start: f64,
    /// Mollified profile: cached Hermite data (lo, width, value, slope).
    blend_data: Option<(f64, f64, f64, f64)>,
}

/// Truncation radius for the truncated summand `Z 1_{|Z| <= N}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationLevel(pub f64);

impl HeavyTailLaw {
    /// The exact Pareto-with-cutoff law: `c_k = (2k/alpha)^{1/alpha}`,
    /// density `(alpha c_k^alpha / 2) |x|^{-alpha-1}` on `|x| >= c_k`.
    pub fn make_pareto_cutoff(k: f64, index: StableIndex) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(domain(format!("tail coefficient k must be positive, got {k}")));
        }
        let a = index.alpha();
        let cutoff = (2.0 * k / a).powf(1.0 / a);
        let law = Self {
            k,
            index,
            profile: BetaProfile::ParetoCutoff,
            cutoff,
            support_min: cutoff,
            power_tail_start: cutoff,
            blend_data: None,
        };
        law.validate()?;
        Ok(law)
    }

    /// C1-mollified Pareto (see [`BetaProfile::ParetoMollified`]).
    pub fn make_pareto_mollified(k: f64, index: StableIndex, blend: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(domain("tail coefficient k must be positive"));
        }
        let a = index.alpha();
        let cutoff = (2.0 * k / a).powf(1.0 / a);
        if !(blend > 0.0 && blend < 0.2 * cutoff) {
            return Err(domain(format!(
                "blend width must lie in (0, c_k/5), got {blend} with c_k={cutoff}"
            )));
        }
        let lo = cutoff - blend;
        let v = 0.5 * lo.powf(a) - k / a; // negative
        let d = 0.5 * a * lo.powf(a - 1.0); // positive
        let width = 3.0 * (-v) / d; // Hermite slope then stays within [0, d]
        let law = Self {
            k,
            index,
            profile: BetaProfile::ParetoMollified { blend },
            cutoff,
            support_min: lo,
            power_tail_start: lo + width,
            blend_data: Some((lo, width, v, d)),
        };
        law.validate()?;
        Ok(law)
    }

    /// Law with a user-supplied perturbation profile.
    pub fn make_custom(
        k: f64,
        index: StableIndex,
        gamma: f64,
        c_bound: f64,
        knots: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if !(k > 0.0) {
            return Err(domain("tail coefficient k must be positive"));
        }
        if !(gamma >= 0.0 && c_bound > 0.0) {
            return Err(domain("need gamma >= 0 and c_bound > 0"));
        }
        if knots.len() < 2 {
            return Err(domain("custom beta needs at least two knots"));
        }
        if !(knots[0].0 > 0.0) {
            return Err(domain("custom beta knots must start at positive x"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(domain("custom beta knots must have strictly increasing x"));
            }
        }
        let last = *knots.last().unwrap();
        if last.1.abs() > 1e-12 {
            return Err(domain("custom beta must vanish at its last knot"));
        }
        let law = Self {
            k,
            index,
            profile: BetaProfile::Custom {
                gamma,
                c_bound,
                knots: knots.clone(),
            },
            cutoff: 0.0,
            support_min: knots[0].0,
            power_tail_start: last.0,
            blend_data: None,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn k(&self) -> f64 {
        self.k
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
    /// Cutoff `c_k` (zero for custom profiles).
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
    /// Smallest radius with positive density.
    pub fn support_min(&self) -> f64 {
        self.support_min
    }
    /// Radius beyond which the density is the exact power `k |x|^{-1-alpha}`.
    pub fn power_tail_start(&self) -> f64 {
        self.power_tail_start
    }

    /// The perturbation `beta(x)` for `x > 0`.
    pub fn beta(&self, x: f64) -> f64 {
        let a = self.alpha();
        match &self.profile {
            BetaProfile::ParetoCutoff => {
                if x < self.cutoff {
                    0.5 * x.powf(a) - self.k / a
                } else {
                    0.0
                }
            }
            BetaProfile::ParetoMollified { .. } => {
                let (lo, width, v, d) = self.blend_data.unwrap();
                if x <= lo {
                    0.5 * x.powf(a) - self.k / a
                } else if x >= lo + width {
                    0.0
                } else {
                    hermite(x, lo, lo + width, v, d)
                }
            }
            BetaProfile::Custom { knots, .. } => {
                if x >= self.power_tail_start {
                    return 0.0;
                }
                if x <= knots[0].0 {
                    // constant tail probability below the first knot
                    let t1 = (self.k / a + knots[0].1) * knots[0].0.powf(-a);
                    return t1 * x.powf(a) - self.k / a;
                }
                let i = knots.partition_point(|&(kx, _)| kx <= x) - 1;
                let (x0, y0) = knots[i];
                let (x1, y1) = knots[i + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// One-sided derivative of `beta`.
    pub fn beta_prime(&self, x: f64) -> f64 {
        let a = self.alpha();
        match &self.profile {
            BetaProfile::ParetoCutoff => {
                if x < self.cutoff {
                    0.5 * a * x.powf(a - 1.0)
                } else {
                    0.0
                }
            }
            BetaProfile::ParetoMollified { .. } => {
                let (lo, width, v, d) = self.blend_data.unwrap();
                if x <= lo {
                    0.5 * a * x.powf(a - 1.0)
                } else if x >= lo + width {
                    0.0
                } else {
                    hermite_prime(x, lo, lo + width, v, d)
                }
            }
            BetaProfile::Custom { knots, .. } => {
                if x >= self.power_tail_start {
                    return 0.0;
                }
                if x <= knots[0].0 {
                    let t1 = (self.k / a + knots[0].1) * knots[0].0.powf(-a);
                    return t1 * a * x.powf(a - 1.0);
                }
                let i = knots.partition_point(|&(kx, _)| kx <= x) - 1;
                let (x0, y0) = knots[i];
                let (x1, y1) = knots[i + 1];
                (y1 - y0) / (x1 - x0)
            }
        }
    }

    /// Mass of the atom at the origin.  Zero for the Pareto profiles; a
    /// custom `beta` whose tail probability at the first knot falls short of
    /// `1/2` places the remaining interior mass at zero.
    pub fn atom_mass(&self) -> f64 {
        match &self.profile {
            BetaProfile::Custom { knots, .. } => {
                let a = self.alpha();
                let t1 = (self.k / a + knots[0].1) * knots[0].0.powf(-a);
                (1.0 - 2.0 * t1).max(0.0)
            }
            _ => 0.0,
        }
    }

    /// Exact CDF value (right-continuous; at zero this includes the atom).
    pub fn cdf(&self, x: f64) -> f64 {
        let a = self.alpha();
        if x == 0.0 {
            return 0.5 + 0.5 * self.atom_mass();
        }
        if x > 0.0 {
            1.0 - (self.k / a + self.beta(x)) * x.powf(-a)
        } else {
            let y = -x;
            (self.k / a + self.beta(y)) * y.powf(-a)
        }
    }

    /// Probability density at `x != 0` (zero inside the support gap).
    pub fn density(&self, x: f64) -> f64 {
        let a = self.alpha();
        let y = x.abs();
        if y == 0.0 {
            return 0.0;
        }
        let d = (self.k + a * self.beta(y)) * y.powf(-a - 1.0) - self.beta_prime(y) * y.powf(-a);
        d.max(0.0)
    }

    /// `P(|W| > r)` for `r > 0`.
    pub fn two_sided_tail(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(domain("tail radius must be positive"));
        }
        let a = self.alpha();
        Ok((2.0 * (self.k / a + self.beta(r)) * r.powf(-a)).min(1.0))
    }

    /// Inverse-transform sample: for the exact Pareto the closed inverse
    /// `u > 1/2 -> c (2(1-u))^{-1/alpha}`, otherwise CDF bisection.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }

    /// Quantile function used by [`Self::sample`].
    pub fn quantile(&self, u: f64) -> f64 {
        let a = self.alpha();
        if u == 0.5 {
            return 0.0;
        }
        if let BetaProfile::ParetoCutoff = self.profile {
            return if u > 0.5 {
                self.cutoff * (2.0 * (1.0 - u)).powf(-1.0 / a)
            } else {
                -self.cutoff * (2.0 * u).powf(-1.0 / a)
            };
        }
        let target = if u > 0.5 { u } else { 1.0 - u };
        let mut lo = 0.0;
        let mut hi = self.power_tail_start.max(1.0);
        while self.cdf(hi) < target && hi < 1e300 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
                break;
            }
        }
        let x = 0.5 * (lo + hi);
        if u > 0.5 {
            x
        } else {
            -x
        }
    }

    /// `∫ f dF` by quadrature.  The pure-power tail reuses the radial cell
    /// machinery (adaptive refinement, constant detection, oscillation-decay
    /// stopping) with the remainder beyond the stop radius controlled by
    /// `f`'s bound times the closed-form tail mass; any non-power head
    /// region (mollified blend, custom knots) goes through adaptive Simpson.
    pub fn expect(&self, f: &SampledFunction, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(domain("tolerance must be positive"));
        }
        let a = self.alpha();
        let sym = |x: f64| 0.5 * (f.eval(x) + f.eval(-x));
        let start = self.power_tail_start;

        let mut head = 0.0;
        if self.support_min < start {
            let g = |x: f64| 2.0 * sym(x) * self.density(x);
            head = adaptive_simpson(&g, self.support_min, start, tol * 0.25, 40)?;
        }

        // 2k ∫_start^∞ f_sym(x) x^{-1-alpha} dx
        let scale = 2.0 * self.k;
        let params = RadialParams {
            alpha: a,
            epsilon: start,
            outer_cut: start * 100.0,
            nodes_per_decade: 64,
            inner_probe: start,
            integrand_bound: f.bound(),
            cell_tol: tol * 0.25 / scale,
            tail_tol: tol * 0.25 / scale,
            max_depth: 12,
            max_decades: 60,
        };
        let mut g = |x: f64| sym(x);
        let (tail_val, _) = integrate_radial(&mut g, 0.0, &params, 0.0)?;
        Ok(head + scale * tail_val.value + self.atom_mass() * f.eval(0.0))
    }

    /// `E[|Z^N|^2]` for the truncated summand `Z^N = Z 1_{|Z| <= N}`:
    /// `(alpha c^alpha / (2-alpha)) (N^{2-alpha} - c^{2-alpha})` for the
    /// exact Pareto, quadrature otherwise.
    pub fn truncated_second_moment(&self, n_level: TruncationLevel) -> Result<f64> {
        let nn = n_level.0;
        if nn < self.support_min {
            return Err(domain(format!(
                "truncation level {nn} below the support minimum {}",
                self.support_min
            )));
        }
        let a = self.alpha();
        if let BetaProfile::ParetoCutoff = self.profile {
            let c = self.cutoff;
            return Ok(a * c.powf(a) / (2.0 - a) * (nn.powf(2.0 - a) - c.powf(2.0 - a)));
        }
        let head_hi = nn.min(self.power_tail_start);
        let g = |x: f64| 2.0 * x * x * self.density(x);
        let mut total = adaptive_simpson(&g, self.support_min, head_hi, 1e-11 * (1.0 + nn * nn), 48)?;
        if nn > self.power_tail_start {
            let s = self.power_tail_start;
            total += 2.0 * self.k / (2.0 - a) * (nn.powf(2.0 - a) - s.powf(2.0 - a));
        }
        Ok(total)
    }

    /// `E[|Z - Z^N|^delta]`, the excess moment beyond the truncation:
    /// `(alpha c^alpha / (alpha-delta)) N^{delta-alpha}` once `N` clears the
    /// perturbed region.
    pub fn excess_delta_moment(&self, n_level: TruncationLevel, delta: f64) -> Result<f64> {
        let nn = n_level.0;
        let a = self.alpha();
        if nn < self.support_min {
            return Err(domain(format!(
                "truncation level {nn} below the support minimum {}",
                self.support_min
            )));
        }
        if !(delta > 0.0 && delta < a) {
            return Err(domain(format!("need 0 < delta < alpha, got delta={delta}")));
        }
        if nn >= self.power_tail_start {
            return Ok(2.0 * self.k * nn.powf(delta - a) / (a - delta));
        }
        let g = |x: f64| 2.0 * x.powf(delta) * self.density(x);
        let mid = adaptive_simpson(&g, nn, self.power_tail_start, 1e-12, 48)?;
        let tail = 2.0 * self.k * self.power_tail_start.powf(delta - a) / (a - delta);
        Ok(mid + tail)
    }

    /// Closed-form capped moment `E[min(|Z|^delta, m)]` for the exact Pareto.
    pub fn capped_moment_pareto(&self, delta: f64, m: f64) -> Result<f64> {
        match self.profile {
            BetaProfile::ParetoCutoff => {}
            _ => return Err(domain("closed capped moment requires the pareto_cutoff profile")),
        }
        let a = self.alpha();
        if !(delta > 0.0 && delta < a) || !(m > 0.0) {
            return Err(domain("need 0 < delta < alpha and m > 0"));
        }
        let c = self.cutoff;
        let x0 = m.powf(1.0 / delta);
        if x0 <= c {
            return Ok(m);
        }
        let ca = a * c.powf(a);
        Ok(ca / (a - delta) * (c.powf(delta - a) - x0.powf(delta - a)) + m * c.powf(a) * x0.powf(-a))
    }

    /// The three decay quantities of the example family's condition (ii) at
    /// scale `N = n^{1/alpha}`: `|beta(N)|`,
    /// `∫_1^∞ |beta(Nx)| x^{-(1+alpha-delta)} dx`, and
    /// `∫_0^1 |beta(Nx)| x^{-alpha} dx`.
    ///
    /// For the exact Pareto the first two vanish exactly once `N >= c_k`.
    /// The third never vanishes: the interior branch of `beta` tends to
    /// `-k/alpha` at zero, giving the closed form
    /// `N^{alpha-1} (c_k/2) alpha/(1-alpha)` (infinite at `alpha = 1`).
    pub fn condition_ii_quantities(&self, n: u64, delta: f64) -> Result<(f64, f64, f64)> {
        let a = self.alpha();
        if !(delta > 0.0 && delta < a) {
            return Err(domain("need 0 < delta < alpha"));
        }
        if n == 0 {
            return Err(domain("n must be positive"));
        }
        let nn = (n as f64).powf(1.0 / a);
        let q1 = self.beta(nn).abs();

        let hi = self.power_tail_start / nn;
        let q2 = if hi <= 1.0 {
            0.0
        } else {
            let g = |x: f64| self.beta(nn * x).abs() * x.powf(-(1.0 + a - delta));
            adaptive_simpson(&g, 1.0, hi, 1e-12, 48)?
        };

        let q3 = if a == 1.0 {
            // beta -> -k at zero makes ∫ |beta(Nx)|/x dx diverge
            f64::INFINITY
        } else if matches!(self.profile, BetaProfile::ParetoCutoff) && nn >= self.cutoff {
            nn.powf(a - 1.0) * 0.5 * self.cutoff * a / (1.0 - a)
        } else {
            // substitute x = t^{1/(1-alpha)}: ∫_0^1 |beta(N x)| x^{-alpha} dx
            // = 1/(1-alpha) ∫_0^1 |beta(N t^{1/(1-alpha)})| dt, bounded integrand
            let g = |t: f64| self.beta(nn * t.powf(1.0 / (1.0 - a))).abs();
            adaptive_simpson(&g, 0.0, 1.0, 1e-12, 48)? / (1.0 - a)
        };
        Ok((q1, q2, q3))
    }

    fn validate(&self) -> Result<()> {
        let a = self.alpha();
        let mut probes: Vec<f64> = (-24..=40).map(|e| 10f64.powf(e as f64 / 4.0)).collect();
        // cover kink neighbourhoods and the head region densely
        let lo = 0.5 * self.support_min.max(1e-6);
        let hi = 1.5 * self.power_tail_start.max(self.support_min + 1.0);
        for i in 0..=64 {
            probes.push(lo + (hi - lo) * i as f64 / 64.0);
        }
        probes.retain(|&x| x > 0.0);
        probes.sort_by(|p, q| p.partial_cmp(q).unwrap());

        let mut prev = 0.5; // F(0) by symmetry
        for &x in &probes {
            let f = self.cdf(x);
            if !(0.0..=1.0 + 1e-12).contains(&f) {
                return Err(domain(format!("CDF out of [0,1] at x={x}: {f}")));
            }
            if f + 1e-9 < prev {
                return Err(domain(format!("CDF decreasing near x={x}")));
            }
            prev = prev.max(f);
            let s = self.cdf(-x) + self.cdf(x);
            if (s - 1.0).abs() > 1e-9 {
                return Err(domain(format!("CDF symmetry violated at x={x}: {s}")));
            }
            let (gamma, c_bound) = match &self.profile {
                BetaProfile::Custom { gamma, c_bound, .. } => (*gamma, *c_bound),
                _ => (0.0, self.k / a + 1e-12),
            };
            if self.beta(x).abs() > c_bound * x.powf(-gamma) + 1e-12 {
                return Err(domain(format!(
                    "beta bound |beta| <= {c_bound}/x^{gamma} violated at x={x}"
                )));
            }
        }
        if self.cdf(-1e18) > 1e-6 || self.cdf(1e18) < 1.0 - 1e-6 {
            return Err(domain("CDF limits at infinity violated"));
        }
        Ok(())
    }
}

/// Cubic Hermite from `(a, va)` with slope `da` down to `(b, 0)` with slope 0.
fn hermite(x: f64, a: f64, b: f64, va: f64, da: f64) -> f64 {
    let h = b - a;
    let t = (x - a) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    va * (2.0 * t3 - 3.0 * t2 + 1.0) + da * h * (t3 - 2.0 * t2 + t)
}

fn hermite_prime(x: f64, a: f64, b: f64, va: f64, da: f64) -> f64 {
    let h = b - a;
    let t = (x - a) / h;
    let t2 = t * t;
    va * (6.0 * t2 - 6.0 * t) / h + da * (3.0 * t2 - 4.0 * t + 1.0)
}

/// Plain adaptive Simpson on a finite interval.
pub(crate) fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, ()> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(());
        }
        Ok(rec(f, a, lm, m, fa, flm, fm, left, tol * 0.5, depth - 1)?
            + rec(f, m, rm, b, fm, frm, fb, right, tol * 0.5, depth - 1)?)
    }
    if b <= a {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(&f, a, m, b, fa, fm, fb, whole, tol, max_depth).map_err(|_| {
        numeric(
            "adaptive Simpson failed to converge",
            format!("interval [{a}, {b}], tol {tol}"),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn idx(a: f64) -> StableIndex {
        StableIndex::new(a).unwrap()
    }

    fn remark_law() -> HeavyTailLaw {
        // k = alpha/2 gives cutoff 1, the Pareto of the classical remark
        HeavyTailLaw::make_pareto_cutoff(0.25, idx(0.5)).unwrap()
    }

    #[test]
    fn cutoff_and_density_match_remark() {
        let law = remark_law();
        assert!((law.cutoff() - 1.0).abs() < 1e-14);
        let a = 0.5;
        for &x in &[1.0f64, 2.0, 7.5, -3.0] {
            let expected = a / (2.0 * x.abs().powf(a + 1.0));
            assert!((law.density(x) - expected).abs() < 1e-14, "x={x}");
        }
        assert_eq!(law.density(0.5), 0.0);
        assert!(law.beta(1.0 - 1e-12).abs() < 1e-11);
        assert!(HeavyTailLaw::make_pareto_cutoff(-1.0, idx(0.5)).is_err());
    }

    #[test]
    fn cdf_closed_values() {
        let law = remark_law();
        assert_eq!(law.cdf(0.0), 0.5);
        // 1 - (k/alpha) x^{-alpha}: at x = 4, 1 - 0.5 * 0.5 = 0.75
        assert!((law.cdf(4.0) - 0.75).abs() < 1e-14);
        // no mass below the cutoff, so F(c) continues the interior value 1/2
        // (oracle: integrating the remark density over [1, 4] gives 1/4 per side)
        assert!((law.cdf(1.0) - 0.5).abs() < 1e-14);
        let numeric_mass = adaptive_simpson(&|x: f64| law.density(x), 1.0, 4.0, 1e-12, 40).unwrap();
        assert!(((law.cdf(4.0) - law.cdf(1.0)) - numeric_mass).abs() < 1e-10);
        assert!(law.cdf(-1e16) < 1e-7);
        assert!(law.cdf(1e16) > 1.0 - 1e-7);
    }

    #[test]
    fn quantile_closed_values() {
        let law = remark_law();
        // u = 0.875: (2 * 0.125)^{-2} = 16
        assert!((law.quantile(0.875) - 16.0).abs() < 1e-12);
        assert_eq!(law.quantile(0.5), 0.0);
        assert!((law.quantile(0.125) + 16.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_matches_tail_mass() {
        let law = remark_law();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        let mut beyond = 0u32;
        for _ in 0..n {
            if law.sample(&mut rng).abs() > 10.0 {
                beyond += 1;
            }
        }
        let p = law.two_sided_tail(10.0).unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let frac = beyond as f64 / n as f64;
        assert!(
            (frac - p).abs() < 3.0 * se,
            "frac {frac} vs tail {p} (3se {})",
            3.0 * se
        );
    }

    #[test]
    fn expect_trivial_and_odd() {
        let law = remark_law();
        let one = SampledFunction::constant(1.0);
        assert!((law.expect(&one, 1e-10).unwrap() - 1.0).abs() < 1e-9);
        let odd = SampledFunction::new(1.0, f64::tanh).with_lip(1.0);
        assert!(law.expect(&odd, 1e-10).unwrap().abs() < 1e-10);
    }

    #[test]
    fn expect_capped_power_matches_closed_form() {
        let law = remark_law();
        let (delta, m) = (0.25, 5.0);
        let f = SampledFunction::new(m, move |x: f64| x.abs().powf(delta).min(m));
        let quad = law.expect(&f, 1e-9).unwrap();
        let closed = law.capped_moment_pareto(delta, m).unwrap();
        assert!((quad - closed).abs() < 1e-8, "{quad} vs {closed}");
    }

    #[test]
    fn infinite_first_moment_growth() {
        // E[min(|x|, m)] grows like m^{1-alpha}: decade ratios approach
        // 10^{1-alpha}.
        let law = remark_law();
        let mut values = Vec::new();
        for &m in &[100.0, 1000.0, 10000.0] {
            let f = SampledFunction::new(m, move |x: f64| x.abs().min(m));
            values.push(law.expect(&f, 1e-8).unwrap());
        }
        let target = 10f64.powf(0.5);
        assert!((values[1] / values[0] - target).abs() < 0.2);
        assert!((values[2] / values[1] - target).abs() < 0.1);
    }

    #[test]
    fn truncated_moments_closed_forms() {
        let law = remark_law();
        assert!(law.truncated_second_moment(TruncationLevel(1.0)).unwrap().abs() < 1e-14);
        // (alpha c^alpha/(alpha-delta)) N^{delta-alpha} = 2 * 16^{-1/4} = 1
        let e = law.excess_delta_moment(TruncationLevel(16.0), 0.25).unwrap();
        assert!((e - 1.0).abs() < 1e-13, "{e}");
        assert!(law.truncated_second_moment(TruncationLevel(0.5)).is_err());
        assert!(law.excess_delta_moment(TruncationLevel(16.0), 0.7).is_err());
    }

    #[test]
    fn truncated_moment_quadrature_agrees_with_closed_form() {
        // the Simpson head integration (used for non-pareto profiles) must
        // reproduce the pareto closed forms on random (N, delta)
        let law = remark_law();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let nn = 2.0 + 50.0 * rand::Rng::random::<f64>(&mut rng);
            let delta = 0.05 + 0.4 * rand::Rng::random::<f64>(&mut rng);
            let m2_closed = law.truncated_second_moment(TruncationLevel(nn)).unwrap();
            let g = |x: f64| 2.0 * x * x * law.density(x);
            let m2_quad = adaptive_simpson(&g, 1.0, nn, 1e-11 * nn * nn, 48).unwrap();
            assert!(
                (m2_closed - m2_quad).abs() <= 1e-8 * (1.0 + m2_closed.abs()),
                "N={nn}: {m2_closed} vs {m2_quad}"
            );
            let ex_closed = law.excess_delta_moment(TruncationLevel(nn), delta).unwrap();
            let tail_num = 2.0 * law.k()
                * adaptive_simpson(
                    &|x: f64| x.powf(delta) * x.powf(-1.0 - law.alpha()),
                    nn,
                    1e9,
                    1e-12,
                    52,
                )
                .unwrap();
            // the numeric tail stops at 1e9; the remainder is analytic
            let rem = 2.0 * law.k() * 1e9f64.powf(delta - 0.5) / (0.5 - delta);
            assert!(
                (ex_closed - (tail_num + rem)).abs() < 1e-6 * (1.0 + ex_closed),
                "N={nn} delta={delta}"
            );
        }
    }

    #[test]
    fn condition_ii_decay() {
        let law = remark_law();
        // N = n^2 >= c = 1 for every n >= 1: the first two vanish exactly
        for n in [1u64, 4, 16, 64] {
            let (q1, q2, q3) = law.condition_ii_quantities(n, 0.25).unwrap();
            assert_eq!(q1, 0.0);
            assert_eq!(q2, 0.0);
            assert!(q3 > 0.0);
        }
        let q3s: Vec<f64> = [1u64, 4, 16, 64]
            .iter()
            .map(|&n| law.condition_ii_quantities(n, 0.25).unwrap().2)
            .collect();
        for w in q3s.windows(2) {
            assert!(w[1] < w[0]);
        }
        // closed form at N = 1: (c/2) alpha/(1-alpha) = 0.5
        assert!((q3s[0] - 0.5).abs() < 1e-12);
        // substitution quadrature agrees with the closed form
        let law2 = HeavyTailLaw::make_pareto_cutoff(0.5, idx(0.5)).unwrap();
        let (_, _, q3_closed) = law2.condition_ii_quantities(9, 0.25).unwrap();
        let nn = 81.0;
        let g = |t: f64| law2.beta(nn * t.powf(2.0)).abs();
        let q3_sub = adaptive_simpson(&g, 0.0, 1.0, 1e-12, 48).unwrap() / 0.5;
        assert!((q3_closed - q3_sub).abs() < 1e-9, "{q3_closed} vs {q3_sub}");
    }

    #[test]
    fn mollified_law_is_c1_and_valid() {
        let law = HeavyTailLaw::make_pareto_mollified(0.25, idx(0.5), 0.05).unwrap();
        let lo = law.support_min();
        let hi = law.power_tail_start();
        for &x in &[lo, hi] {
            assert!((law.beta(x - 1e-7) - law.beta(x + 1e-7)).abs() < 1e-6);
            let pl = law.beta_prime(x - 1e-7);
            let pr = law.beta_prime(x + 1e-7);
            assert!((pl - pr).abs() < 1e-4, "slope jump at {x}: {pl} vs {pr}");
        }
        // density stays nonnegative through the blend (monotone CDF)
        let mut prev = law.cdf(lo - 1e-3);
        let steps = 2000;
        for i in 0..=steps {
            let x = lo - 1e-3 + (hi + 1e-3 - lo) * i as f64 / steps as f64;
            let f = law.cdf(x);
            assert!(f + 1e-12 >= prev, "CDF dip at {x}");
            prev = f;
        }
        let one = SampledFunction::constant(1.0);
        assert!((law.expect(&one, 1e-9).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn custom_profile_round_trip() {
        let law = HeavyTailLaw::make_custom(
            0.25,
            idx(0.5),
            0.0,
            0.6,
            vec![(1.0, -0.1), (2.0, 0.0)],
        )
        .unwrap();
        // tail probability at the first knot is 0.4, leaving a 0.2 atom
        assert!((law.atom_mass() - 0.2).abs() < 1e-12);
        let one = SampledFunction::constant(1.0);
        assert!((law.expect(&one, 1e-9).unwrap() - 1.0).abs() < 1e-7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let atom_lo = 0.4;
        let atom_hi = 0.6;
        for _ in 0..100 {
            let u: f64 = rand::Rng::random(&mut rng);
            let x = law.quantile(u);
            if u > atom_lo + 1e-6 && u < atom_hi - 1e-6 {
                assert!(x.abs() < 1e-9, "u={u} should land in the atom, got {x}");
            } else if (u - atom_lo).abs() > 1e-6 && (u - atom_hi).abs() > 1e-6 {
                assert!((law.cdf(x) - u).abs() < 1e-8, "u={u}");
            }
        }
    }

    #[test]
    fn invalid_custom_profiles_rejected() {
        // knots must start above zero and end at zero
        assert!(
            HeavyTailLaw::make_custom(0.25, idx(0.5), 0.0, 1.0, vec![(0.0, -0.5), (1.0, 0.0)])
                .is_err()
        );
        assert!(
            HeavyTailLaw::make_custom(0.25, idx(0.5), 0.0, 1.0, vec![(1.0, -0.5), (2.0, 0.3)])
                .is_err()
        );
        // a beta that makes the tail probability increase is rejected
        assert!(
            HeavyTailLaw::make_custom(0.25, idx(0.5), 0.0, 1.0, vec![(1.0, -0.4), (2.0, 0.0)])
                .is_err()
        );
        // decay certificate too small for the interior branch
        assert!(
            HeavyTailLaw::make_custom(0.25, idx(0.5), 0.0, 0.2, vec![(1.0, -0.1), (2.0, 0.0)])
                .is_err()
        );
    }
}
