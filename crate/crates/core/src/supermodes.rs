//! Three-mode supermode spectrum, splittings and exceptional points.
//!
//! The supermode frequencies solve `det(w I - M) = 0` for
//!
//! ```text
//!     | -Delta - i kappa   -J                0       |
//! M = | -J                 -Delta + i gamma  G       |
//!     |  0                  G*               omega_m |
//! ```
//!
//! which expands to `w^3 + l1 w^2 + l2 w + l3`.

const SQRT_3: f64 = 1.732_050_807_568_877_2;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelError, SystemParams};
use crate::numkernel::{
    apply_permutation, cardano_parts, eval_compensated, eval_with_derivative, match_branches,
    solve_cubic_cardano, NumError, SmallMatrix, C64,
};
use crate::steady_state::{solve_steady_state_with, BranchSelect, SteadyStateError};
use crate::sweep::{Axis, Grid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SupermodeError {
    #[error("asymptotic expansion invalid: |G|^2/(Delta+omega_m)^2 = {ratio:e} exceeds 0.1")]
    RegimeViolation { ratio: f64 },
    #[error("asymptotic expansion undefined: unperturbed roots are degenerate")]
    DegenerateUnperturbed,
    #[error("coalescence measure has no interior minimum in [{lo}, {hi}]")]
    NoMinimumInBracket { lo: f64, hi: f64 },
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchLabel {
    Plus,
    Minus,
    Zero,
}

impl BranchLabel {
    pub fn name(self) -> &'static str {
        match self {
            BranchLabel::Plus => "plus",
            BranchLabel::Minus => "minus",
            BranchLabel::Zero => "zero",
        }
    }
}

/// Storage order of [`SupermodeSpectrum::omegas`].
pub const LABELS: [BranchLabel; 3] = [BranchLabel::Plus, BranchLabel::Minus, BranchLabel::Zero];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermodeSpectrum {
    /// Eigenfrequencies in [`LABELS`] order, rad/s.
    pub omegas: [C64; 3],
    pub labels: [BranchLabel; 3],
    /// `(l1, l2, l3)`.
    pub lambda_coeffs: [C64; 3],
    /// `|f(w)| / scale^3` per root.
    pub residuals: [f64; 3],
}

impl SupermodeSpectrum {
    pub fn omega(&self, label: BranchLabel) -> C64 {
        self.omegas[LABELS.iter().position(|&l| l == label).expect("all labels present")]
    }

    pub fn max_separation(&self) -> f64 {
        pairwise(&self.omegas).into_iter().map(|(_, _, d)| d).fold(0.0, f64::max)
    }

    pub fn min_separation(&self) -> f64 {
        pairwise(&self.omegas).into_iter().map(|(_, _, d)| d).fold(f64::INFINITY, f64::min)
    }
}

fn pairwise(w: &[C64; 3]) -> [(usize, usize, f64); 3] {
    [(0, 1, (w[0] - w[1]).norm()), (0, 2, (w[0] - w[2]).norm()), (1, 2, (w[1] - w[2]).norm())]
}

/// `(l1, l2, l3)` of the supermode cubic, written out term by term.
pub fn cubic_coeffs(params: &SystemParams, g: C64) -> [C64; 3] {
    let (d, k, gm, j, wm) = (params.delta(), params.kappa(), params.gamma(), params.j(), params.omega_m());
    let g2 = g.norm_sqr();
    let i = C64::i();
    let l1 = 2.0 * d + i * (k - gm) - wm;
    let l2 = (-2.0 * d + i * (gm - k)) * wm + d * d + i * (k - gm) * d + k * gm - g2 - j * j;
    let l3 = (j * j - d * d - i * (k - gm) * d - k * gm) * wm + g2 * C64::new(-d, -k);
    [l1, l2, l3]
}

/// The matrix `M` whose characteristic polynomial is the supermode cubic.
pub fn determinant_matrix(params: &SystemParams, g: C64) -> SmallMatrix {
    let (d, k, gm, j, wm) = (params.delta(), params.kappa(), params.gamma(), params.j(), params.omega_m());
    let z = C64::new(0.0, 0.0);
    SmallMatrix::from_rows(&[
        vec![C64::new(-d, -k), C64::new(-j, 0.0), z],
        vec![C64::new(-j, 0.0), C64::new(-d, gm), g],
        vec![z, g.conj(), C64::new(wm, 0.0)],
    ])
    .expect("finite 3x3")
}

/// The two optical roots of the uncoupled (`G = 0`) problem,
/// `-Delta + i (gamma - kappa)/2 +- sqrt(J^2 - ((kappa + gamma)/2)^2)`,
/// with the `+` root first.
pub fn optical_roots(params: &SystemParams) -> [C64; 2] {
    let h = 0.5 * (params.kappa() + params.gamma());
    let j = params.j();
    // Factored radicand: exact zero at kappa = 2J - gamma.
    let radicand = (j - h) * (j + h);
    let root = if radicand >= 0.0 {
        C64::new(radicand.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-radicand).sqrt())
    };
    let center = C64::new(-params.delta(), 0.5 * (params.gamma() - params.kappa()));
    [center + root, center - root]
}

/// Exact spectrum from the closed-form cubic solution.
///
/// The Cardano roots receive a compensated Newton polish. When `G` is
/// exactly zero the cubic factors into `(w - omega_m)` times the two-mode
/// quadratic, and the factored roots are used instead: they stay exact at the
/// optical exceptional point where the cubic's double root is ill-conditioned.
pub fn spectrum_exact(params: &SystemParams, g: C64) -> Result<SupermodeSpectrum, SupermodeError> {
    let lambda = cubic_coeffs(params, g);
    let cubic = solve_cubic_cardano(lambda[0], lambda[1], lambda[2])?;
    let poly = [C64::new(1.0, 0.0), lambda[0], lambda[1], lambda[2]];
    let mut roots = cubic.roots;
    if g == C64::new(0.0, 0.0) {
        let [plus, minus] = optical_roots(params);
        let exact = [plus, minus, C64::new(params.omega_m(), 0.0)];
        let perm = match_branches(&roots, &exact)?;
        roots = apply_permutation(&exact, &perm).try_into().expect("three roots");
    } else {
        for r in roots.iter_mut() {
            polish(&poly, r);
        }
    }
    let labeled = label_initial(&roots, params.omega_m());
    Ok(build_spectrum(labeled, lambda, cubic.scale))
}

fn polish(poly: &[C64; 4], z: &mut C64) {
    for _ in 0..2 {
        let p = eval_compensated(poly, *z);
        let (_, dp) = eval_with_derivative(poly, *z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            return;
        }
        let next = *z - p / dp;
        if eval_compensated(poly, next).norm() >= p.norm() {
            return;
        }
        *z = next;
    }
}

fn build_spectrum(omegas: [C64; 3], lambda: [C64; 3], scale: f64) -> SupermodeSpectrum {
    let poly = [C64::new(1.0, 0.0), lambda[0], lambda[1], lambda[2]];
    let residuals = omegas.map(|w| eval_compensated(&poly, w).norm() / scale.powi(3));
    SupermodeSpectrum { omegas, labels: LABELS, lambda_coeffs: lambda, residuals }
}

/// `zero` = root nearest `omega_m`; the other two ordered by descending real
/// part (descending imaginary part on ties) become `plus`, `minus`.
fn label_initial(roots: &[C64; 3], omega_m: f64) -> [C64; 3] {
    let zero = (0..3)
        .min_by(|&a, &b| {
            let da = (roots[a] - omega_m).norm();
            let db = (roots[b] - omega_m).norm();
            da.total_cmp(&db)
        })
        .expect("three roots");
    let mut rest: Vec<C64> = (0..3).filter(|&k| k != zero).map(|k| roots[k]).collect();
    rest.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    [rest[0], rest[1], roots[zero]]
}

/// First-order perturbative spectrum about the uncoupled roots.
///
/// With `Q(w) = (w + Delta + i kappa)(w + Delta - i gamma) - J^2` the
/// determinant reads `(w - omega_m) Q(w) - |G|^2 (w + Delta + i kappa)`, so
///
/// ```text
/// w0  = omega_m + |G|^2 (omega_m + Delta + i kappa) / Q(omega_m)
/// w+- = r+- + |G|^2 (r+- + Delta + i kappa) / ((r+- - omega_m)(r+- - r-+))
/// ```
///
/// exact at `G = 0` with an `O(|G|^4)` error. Valid only far from the
/// mechanical sideband resonance.
pub fn spectrum_asymptotic(params: &SystemParams, g: C64) -> Result<SupermodeSpectrum, SupermodeError> {
    let g2 = g.norm_sqr();
    let offset = params.delta() + params.omega_m();
    let ratio = g2 / (offset * offset);
    if !(ratio <= 0.1) {
        return Err(SupermodeError::RegimeViolation { ratio });
    }
    let [rp, rm] = optical_roots(params);
    let wm = C64::new(params.omega_m(), 0.0);
    let shift = C64::new(params.delta(), params.kappa());
    let q_wm = (wm + shift) * (wm + C64::new(params.delta(), -params.gamma())) - params.j().powi(2);
    let degenerate = |z: C64| z.norm() == 0.0;
    if g2 > 0.0 && (degenerate(q_wm) || degenerate(rp - rm) || degenerate(rp - wm) || degenerate(rm - wm)) {
        return Err(SupermodeError::DegenerateUnperturbed);
    }
    let correct = |r: C64, other: C64| {
        if g2 == 0.0 {
            r
        } else {
            r + g2 * (r + shift) / ((r - wm) * (r - other))
        }
    };
    let w0 = if g2 == 0.0 { wm } else { wm + g2 * (wm + shift) / q_wm };
    let lambda = cubic_coeffs(params, g);
    let scale = crate::numkernel::solve_cubic_cardano(lambda[0], lambda[1], lambda[2])?.scale;
    Ok(build_spectrum([correct(rp, rm), correct(rm, rp), w0], lambda, scale))
}

/// Side of the optical exceptional point `kappa = 2J - gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpRegime {
    BelowEp,
    AboveEp,
}

impl EpRegime {
    pub fn of(params: &SystemParams) -> Self {
        if params.kappa() < 2.0 * params.j() - params.gamma() {
            EpRegime::BelowEp
        } else {
            EpRegime::AboveEp
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EpRegime::BelowEp => "below_EP",
            EpRegime::AboveEp => "above_EP",
        }
    }
}

/// Which rate sits in the splitting radicand. The uncoupled limit has `J`;
/// the far-detuned expansion prints `gamma`, which agrees only at `J = gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RadicandForm {
    #[default]
    Coupling,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingResult {
    /// Real-part splitting `omega_+ - omega_-`, rad/s.
    pub delta_omega: f64,
    /// Linewidth splitting `gamma_+ - gamma_-`, rad/s.
    pub delta_gamma: f64,
    pub regime: EpRegime,
}

/// Closed-form supermode splittings.
///
/// Below the EP: `dw = sqrt(4R^2 - (kappa+gamma)^2) - sqrt(3)|G|^2 (kappa-gamma)/(Delta+omega_m)^2`
/// and `dg = 0`; above: `dw = 0` and
/// `dg = sqrt((kappa+gamma)^2 - 4R^2) + sqrt(3)|G|^2/(Delta+omega_m)`, with
/// `R = J` or `gamma` per `form`. The `G` corrections are skipped when `G = 0`.
pub fn splitting(params: &SystemParams, g: C64, regime: EpRegime, form: RadicandForm) -> SplittingResult {
    let r = match form {
        RadicandForm::Coupling => params.j(),
        RadicandForm::Printed => params.gamma(),
    };
    let s = params.kappa() + params.gamma();
    // (2R - s)(2R + s) avoids cancellation near the EP.
    let radicand = (2.0 * r - s) * (2.0 * r + s);
    let g2 = g.norm_sqr();
    let offset = params.delta() + params.omega_m();
    match regime {
        EpRegime::BelowEp => {
            let corr = if g2 == 0.0 {
                0.0
            } else {
                SQRT_3 * g2 * (params.kappa() - params.gamma()) / (offset * offset)
            };
            SplittingResult { delta_omega: radicand.max(0.0).sqrt() - corr, delta_gamma: 0.0, regime }
        }
        EpRegime::AboveEp => {
            let corr = if g2 == 0.0 { 0.0 } else { SQRT_3 * g2 / offset };
            SplittingResult { delta_omega: 0.0, delta_gamma: (-radicand).max(0.0).sqrt() + corr, regime }
        }
    }
}

/// Coalescence thresholds in units of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpTolerances {
    pub ep2: f64,
    pub ep3: f64,
}

impl Default for EpTolerances {
    fn default() -> Self {
        Self { ep2: 1e-3, ep3: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpClassification {
    /// 1 (no EP), 2 or 3.
    pub order: u8,
    pub coalescing_pair: Option<(BranchLabel, BranchLabel)>,
    /// Smallest pairwise separation, rad/s.
    pub min_separation: f64,
    /// Largest pairwise separation, rad/s.
    pub max_separation: f64,
    pub depressed_p: C64,
    pub depressed_q: C64,
    /// `-4 p^3 - 27 q^2`.
    pub discriminant: C64,
}

pub fn classify_ep(spectrum: &SupermodeSpectrum, params: &SystemParams, tol: EpTolerances) -> EpClassification {
    let pairs = pairwise(&spectrum.omegas);
    let (i, j, min_separation) = pairs
        .iter()
        .copied()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("three pairs");
    let max_separation = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    let gamma = params.gamma();
    let order = if max_separation <= tol.ep3 * gamma {
        3
    } else if min_separation <= tol.ep2 * gamma {
        2
    } else {
        1
    };
    let [l1, l2, l3] = spectrum.lambda_coeffs;
    let (p, q) = match cardano_parts(l1, l2, l3) {
        Ok(parts) => (parts.p, parts.q),
        Err(_) => (C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0)),
    };
    EpClassification {
        order,
        coalescing_pair: (order == 2).then(|| (spectrum.labels[i], spectrum.labels[j])),
        min_separation,
        max_separation,
        depressed_p: p,
        depressed_q: q,
        discriminant: -4.0 * p * p * p - 27.0 * q * q,
    }
}

/// How `G` is obtained at each evaluated parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GPolicy {
    /// Re-solve the steady state at every point.
    SelfConsistent(BranchSelect),
    /// Keep this `G` regardless of the drive.
    Fixed(C64),
}

impl Default for GPolicy {
    fn default() -> Self {
        GPolicy::SelfConsistent(BranchSelect::Lowest)
    }
}

impl GPolicy {
    pub fn coupling(&self, params: &SystemParams) -> Result<C64, SupermodeError> {
        match *self {
            GPolicy::Fixed(g) => Ok(g),
            GPolicy::SelfConsistent(select) => Ok(solve_steady_state_with(params, select)?.g),
        }
    }
}

/// Coalescence measure minimized by [`locate_ep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CoalescenceMode {
    /// Smallest pairwise separation (pair coalescence).
    #[default]
    Ep2,
    /// Largest pairwise separation (all three roots together).
    Ep3,
}

impl CoalescenceMode {
    pub fn measure(self, s: &SupermodeSpectrum) -> f64 {
        match self {
            CoalescenceMode::Ep2 => s.min_separation(),
            CoalescenceMode::Ep3 => s.max_separation(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SpectrumOptions {
    pub g_policy: GPolicy,
    pub tolerances: EpTolerances,
}

/// Spectrum at one point of a sweep, with `G` from the policy.
pub fn spectrum_at(params: &SystemParams, opts: &SpectrumOptions) -> Result<SupermodeSpectrum, SupermodeError> {
    let g = opts.g_policy.coupling(params)?;
    spectrum_exact(params, g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpLocation {
    /// Axis value of the minimum.
    pub value: f64,
    /// Coalescence measure there, rad/s.
    pub measure: f64,
    pub spectrum: SupermodeSpectrum,
    pub classification: EpClassification,
}

const COARSE_POINTS: usize = 81;
const GOLDEN_ITERATIONS: usize = 200;

/// Minimum of the coalescence measure over `[lo, hi]`, endpoints included:
/// a coarse scan followed by golden-section refinement around the best
/// interior sample.
pub fn minimize_coalescence(
    template: &SystemParams,
    axis: Axis,
    lo: f64,
    hi: f64,
    mode: CoalescenceMode,
    opts: &SpectrumOptions,
) -> Result<(EpLocation, bool), SupermodeError> {
    let eval = |t: f64| -> Result<(f64, SupermodeSpectrum), SupermodeError> {
        let p = axis.apply(template, t)?;
        let s = spectrum_at(&p, opts)?;
        Ok((mode.measure(&s), s))
    };
    let grid: Vec<f64> = Grid::linspace(lo, hi, COARSE_POINTS)
        .map_err(|_| SupermodeError::NoMinimumInBracket { lo, hi })?
        .values()
        .to_vec();
    let coarse: Vec<f64> = grid
        .par_iter()
        .map(|&t| eval(t).map(|(m, _)| m))
        .collect::<Result<_, _>>()?;
    let best = (0..coarse.len()).min_by(|&a, &b| coarse[a].total_cmp(&coarse[b])).expect("nonempty");
    let interior = best > 0 && best + 1 < coarse.len();
    let value = if interior {
        golden_section(|t| eval(t).map(|(m, _)| m), grid[best - 1], grid[best + 1])?
    } else {
        grid[best]
    };
    let (measure, spectrum) = eval(value)?;
    let p = axis.apply(template, value)?;
    let classification = classify_ep(&spectrum, &p, opts.tolerances);
    Ok((EpLocation { value, measure, spectrum, classification }, interior))
}

/// Localizes an exceptional point along `axis` inside `bracket` by
/// minimizing the coalescence measure.
pub fn locate_ep(
    template: &SystemParams,
    axis: Axis,
    bracket: (f64, f64),
    mode: CoalescenceMode,
    opts: &SpectrumOptions,
) -> Result<EpLocation, SupermodeError> {
    let (lo, hi) = bracket;
    let (loc, interior) = minimize_coalescence(template, axis, lo, hi, mode, opts)?;
    if !interior {
        return Err(SupermodeError::NoMinimumInBracket { lo, hi });
    }
    Ok(loc)
}

fn golden_section<F>(mut f: F, mut a: f64, mut b: f64) -> Result<f64, SupermodeError>
where
    F: FnMut(f64) -> Result<f64, SupermodeError>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let tol = 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..GOLDEN_ITERATIONS {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { c } else { d })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub value: f64,
    pub g: C64,
    /// Branch-tracked spectrum; labels follow continuity from the first point.
    pub spectrum: SupermodeSpectrum,
    pub classification: EpClassification,
}

/// Spectra over a grid with continuous branch labels.
///
/// Points are evaluated in parallel; the labels are assigned afterwards in
/// grid order by minimal-displacement matching.
pub fn sweep_spectrum(
    template: &SystemParams,
    axis: Axis,
    grid: &Grid,
    opts: &SpectrumOptions,
) -> Result<Vec<SpectrumPoint>, SupermodeError> {
    let raw: Vec<(SystemParams, C64, SupermodeSpectrum)> = grid
        .values()
        .par_iter()
        .map(|&t| {
            let p = axis.apply(template, t)?;
            let g = opts.g_policy.coupling(&p)?;
            let s = spectrum_exact(&p, g)?;
            Ok((p, g, s))
        })
        .collect::<Result<_, SupermodeError>>()?;

    let mut out: Vec<SpectrumPoint> = Vec::with_capacity(raw.len());
    for ((p, g, mut s), &value) in raw.into_iter().zip(grid.values()) {
        if let Some(prev) = out.last() {
            let perm = match_branches(&prev.spectrum.omegas, &s.omegas)?;
            let omegas: [C64; 3] = apply_permutation(&s.omegas, &perm).try_into().expect("three");
            let residuals = [s.residuals[perm[0]], s.residuals[perm[1]], s.residuals[perm[2]]];
            s.omegas = omegas;
            s.residuals = residuals;
        }
        let classification = classify_ep(&s, &p, opts.tolerances);
        out.push(SpectrumPoint { value, g, spectrum: s, classification });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{char_poly, multiset_distance};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pure_optics(kappa_over_gamma: f64, j_over_gamma: f64, delta: f64) -> SystemParams {
        let p = SystemParams::default();
        p.with_raw(|r| {
            r.kappa_rad_s = kappa_over_gamma * p.gamma();
            r.j_rad_s = j_over_gamma * p.gamma();
            r.delta_rad_s = delta;
            r.xi_rad_per_s_m = Some(0.0);
        })
        .unwrap()
    }

    #[test]
    fn coefficients_at_balance_without_detuning() {
        let p = pure_optics(1.0, 0.6, 0.0);
        let (gm, j, wm) = (p.gamma(), p.j(), p.omega_m());
        let [l1, l2, l3] = cubic_coeffs(&p, c(0.0, 0.0));
        assert!((l1 - c(-wm, 0.0)).norm() <= 1e-15 * wm);
        assert!((l2 - c(gm * gm - j * j, 0.0)).norm() <= 1e-6);
        assert!((l3 - c((j * j - gm * gm) * wm, 0.0)).norm() <= 1e-12 * (gm * gm * wm));
    }

    #[test]
    fn coefficients_match_determinant_expansion() {
        let p = pure_optics(0.83, 1.1, -0.7e9).with_xi(6e19).unwrap();
        let g = c(3.1e7, -1.2e7);
        let lam = cubic_coeffs(&p, g);
        let poly = char_poly(&determinant_matrix(&p, g));
        for k in 0..3 {
            let scale = p.omega_m().powi(k as i32 + 1);
            assert!((poly[k + 1] - lam[k]).norm() <= 1e-12 * scale, "k = {k}");
        }
    }

    #[test]
    fn balanced_real_coupling_gives_real_l1() {
        let p = pure_optics(1.0, 1.0, -1e9);
        assert_eq!(cubic_coeffs(&p, c(2e7, 0.0))[0].im, 0.0);
    }

    #[test]
    fn uncoupled_spectrum_contains_the_mechanics() {
        let p = pure_optics(0.4, 1.0, -2e9);
        let s = spectrum_exact(&p, c(0.0, 0.0)).unwrap();
        assert_eq!(s.omega(BranchLabel::Zero), c(p.omega_m(), 0.0));
        let opt = optical_roots(&p);
        let d = multiset_distance(&s.omegas[..2], &opt).unwrap();
        assert!(d <= 1e-12 * p.omega_m());
    }

    #[test]
    fn optical_ep_is_a_double_root() {
        let p = pure_optics(1.0, 1.0, 0.0);
        let s = spectrum_exact(&p, c(0.0, 0.0)).unwrap();
        assert_eq!(s.omega(BranchLabel::Plus), s.omega(BranchLabel::Minus));
        let cls = classify_ep(&s, &p, EpTolerances::default());
        assert_eq!(cls.order, 2);
    }

    #[test]
    fn strong_coupling_splitting() {
        let p = pure_optics(0.0, 1.0, -1e9);
        let s = spectrum_exact(&p, c(0.0, 0.0)).unwrap();
        let split = (s.omega(BranchLabel::Plus) - s.omega(BranchLabel::Minus)).re;
        assert!((split - SQRT_3 * p.gamma()).abs() <= 1e-12 * p.gamma());
        let r = splitting(&p, c(0.0, 0.0), EpRegime::of(&p), RadicandForm::Coupling);
        assert!((r.delta_omega - SQRT_3 * p.gamma()).abs() <= 1e-12 * p.gamma());
        assert_eq!(r.delta_gamma, 0.0);
    }

    #[test]
    fn splitting_at_and_above_the_ep() {
        let at = pure_optics(1.0, 1.0, -1e9);
        let r = splitting(&at, c(0.0, 0.0), EpRegime::of(&at), RadicandForm::Coupling);
        assert_eq!((r.delta_omega, r.delta_gamma), (0.0, 0.0));
        let above = pure_optics(3.0, 1.0, -1e9);
        let r = splitting(&above, c(0.0, 0.0), EpRegime::of(&above), RadicandForm::Coupling);
        assert_eq!(r.regime, EpRegime::AboveEp);
        assert!((r.delta_gamma - 2.0 * SQRT_3 * above.gamma()).abs() <= 1e-12 * above.gamma());
    }

    #[test]
    fn classification_of_constructed_roots() {
        let p = SystemParams::default();
        let gm = p.gamma();
        let spec = |r: [f64; 3]| {
            let roots = r.map(|x| c(x * gm, 0.0));
            let poly = crate::numkernel::poly_from_roots(&roots);
            build_spectrum(roots, [poly[1], poly[2], poly[3]], 1.0)
        };
        let tol = EpTolerances::default();
        assert_eq!(classify_ep(&spec([1.0, 2.0, 3.0]), &p, tol).order, 1);
        let two = classify_ep(&spec([1.0, 1.0, 3.0]), &p, tol);
        assert_eq!(two.order, 2);
        assert_eq!(two.coalescing_pair, Some((BranchLabel::Plus, BranchLabel::Minus)));
        let three = classify_ep(&spec([2.0, 2.0, 2.0]), &p, tol);
        assert_eq!(three.order, 3);
        assert!(three.depressed_p.norm() <= 1e-6 * gm * gm);
        assert!(three.depressed_q.norm() <= 1e-6 * gm.powi(3));
    }

    #[test]
    fn asymptotic_is_exact_without_coupling() {
        let p = pure_optics(0.9, 1.0, -0.5 * SystemParams::default().omega_m());
        let a = spectrum_asymptotic(&p, c(0.0, 0.0)).unwrap();
        let e = spectrum_exact(&p, c(0.0, 0.0)).unwrap();
        assert!(multiset_distance(&a.omegas, &e.omegas).unwrap() <= 1e-9 * p.gamma());
    }

    #[test]
    fn asymptotic_rejects_the_sideband_resonance() {
        let p = pure_optics(0.9, 1.0, -SystemParams::default().omega_m());
        assert!(matches!(
            spectrum_asymptotic(&p, c(1e7, 0.0)),
            Err(SupermodeError::RegimeViolation { .. })
        ));
    }

    #[test]
    fn locates_the_optical_ep() {
        let p = pure_optics(0.0, 1.0, -SystemParams::default().omega_m());
        let opts = SpectrumOptions::default();
        let loc = locate_ep(&p, Axis::KappaOverGamma, (0.0, 2.0), CoalescenceMode::Ep2, &opts).unwrap();
        assert!((loc.value - 1.0).abs() <= 1e-4, "{}", loc.value);
    }

    #[test]
    fn constant_parameter_rows_are_identical() {
        // Temperature does not enter the spectrum.
        let p = SystemParams::default();
        let grid = Grid::linspace(1.0, 300.0, 4).unwrap();
        let rows = sweep_spectrum(&p, Axis::TemperatureK, &grid, &SpectrumOptions::default()).unwrap();
        for r in &rows[1..] {
            assert_eq!(r.spectrum, rows[0].spectrum);
            assert_eq!(r.g, rows[0].g);
        }
    }
}
