//! Energy evaluation, weak-form functional gradient and preconditioned gradient descent
//! `u_{t+1} = u_t − η (I − Δ)^{-1} (DE(u_t) − f)`.

mod quadrature;
mod report;

use serde::{Deserialize, Serialize};

pub use report::{ConvergenceReport, IterateRecord, ReportSummary, StopReason, CSV_HEADER};

use crate::barron::{
    conservative_rate, drift_bound, iteration_count, rate, recursion_step, sine_barron_norm, step_size,
    BarronCertificate,
};
use crate::error::{Error, Result};
use crate::lagrangian::{approximate_pair, sample_points, LagrangianSpec};
use crate::scalar::Scalar;
use crate::spectral::{poincare_constant, SineFunction};
use quadrature::{energy_of, gradient_of, sample, Nodal};

/// `∫ L(x, u, ∇u) − f u` by closed-grid trapezoid quadrature with `M` interior nodes per axis.
pub fn energy<T: Scalar>(spec: &LagrangianSpec<T>, u: &SineFunction<T>, f: &SineFunction<T>, m: usize) -> Result<T> {
    check_dims(spec, u, f)?;
    energy_of(spec, &sample(u, f, m)?)
}

/// Bandlimit-`w_next` sine coefficients of `DE(u) − f`, assembled in weak form:
/// `⟨g, φ_ω⟩ = ∫ ∇_z L·∇φ_ω + (∂_u L − f) φ_ω` for every retained `ω`.
pub fn functional_gradient<T: Scalar>(
    spec: &LagrangianSpec<T>,
    u: &SineFunction<T>,
    f: &SineFunction<T>,
    m: usize,
    w_next: usize,
) -> Result<SineFunction<T>> {
    check_dims(spec, u, f)?;
    gradient_of(spec, &sample(u, f, m)?, w_next)
}

fn check_dims<T: Scalar>(spec: &LagrangianSpec<T>, u: &SineFunction<T>, f: &SineFunction<T>) -> Result<()> {
    for got in [u.dim(), f.dim()] {
        if got != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Stopping<T> {
    /// Run the theorem's `T = iteration_count(ε, gap₀, …)` steps, or exactly `iterations` if set.
    Schedule {
        eps: T,
        gap0: Option<T>,
        iterations: Option<usize>,
    },
    /// Stop once `‖u_{t+1} − u_t‖_{H¹₀} < tol`, or after `max_iter` steps.
    Tolerance { tol: T, max_iter: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandlimitPolicy {
    /// `W_{t+1} = min(W_max, ⌈2π k_L W_t⌉)`; straight to `W_max` without growth constants.
    Grow,
    /// Every iterate lives in `Γ_{W_max}`.
    Fixed,
}

/// Known minimizer and/or minimal energy, used for gaps and errors in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct Reference<T> {
    pub u_star: Option<SineFunction<T>>,
    pub energy: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct SolverConfig<T> {
    /// Defaults to `step_size(λ, Λ, C_p)`.
    pub eta: Option<T>,
    pub w_max: usize,
    pub grid_factor: usize,
    pub stopping: Stopping<T>,
    pub policy: BandlimitPolicy,
    pub reference: Option<Reference<T>>,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(w_max: usize) -> Self {
        Self {
            eta: None,
            w_max,
            grid_factor: 4,
            stopping: Stopping::Tolerance {
                tol: T::lit(1e-10),
                max_iter: 10_000,
            },
            policy: BandlimitPolicy::Grow,
            reference: None,
        }
    }

    pub fn with_eta(mut self, eta: T) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_grid_factor(mut self, factor: usize) -> Self {
        self.grid_factor = factor;
        self
    }

    pub fn with_schedule(mut self, eps: T) -> Self {
        self.stopping = Stopping::Schedule {
            eps,
            gap0: None,
            iterations: None,
        };
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.stopping = match self.stopping {
            Stopping::Schedule { eps, gap0, .. } => Stopping::Schedule {
                eps,
                gap0,
                iterations: Some(iterations),
            },
            Stopping::Tolerance { .. } => Stopping::Schedule {
                eps: T::lit(1e-3),
                gap0: None,
                iterations: Some(iterations),
            },
        };
        self
    }

    pub fn with_tolerance(mut self, tol: T, max_iter: usize) -> Self {
        self.stopping = Stopping::Tolerance { tol, max_iter };
        self
    }

    pub fn with_policy(mut self, policy: BandlimitPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_reference(mut self, u_star: Option<SineFunction<T>>, energy: Option<T>) -> Self {
        self.reference = Some(Reference { u_star, energy });
        self
    }

    /// Interior nodes per axis of the quadrature grid.
    pub fn grid_points(&self) -> usize {
        self.grid_factor * self.w_max
    }

    fn reference_energy(&self) -> Option<T> {
        self.reference.as_ref().and_then(|r| r.energy)
    }

    fn reference_u(&self) -> Option<&SineFunction<T>> {
        self.reference.as_ref().and_then(|r| r.u_star.as_ref())
    }

    fn resolve_eta(&self, spec: &LagrangianSpec<T>) -> Result<T> {
        let c_p = poincare_constant::<T>(spec.dim())?;
        let max_eta = step_size(spec.lambda(), spec.cap_lambda(), c_p)?;
        match self.eta {
            None => Ok(max_eta),
            Some(eta) if eta >= T::zero() && eta <= max_eta * (T::one() + T::lit(1e-12)) => Ok(eta),
            Some(eta) => Err(Error::InvalidArgument(format!(
                "step size {eta} outside [0, {max_eta}]"
            ))),
        }
    }

    fn validate(&self, spec: &LagrangianSpec<T>, f: &SineFunction<T>, u0: &SineFunction<T>) -> Result<()> {
        check_dims(spec, u0, f)?;
        if self.w_max == 0 || self.grid_factor == 0 {
            return Err(Error::InvalidArgument("W_max and grid factor must be positive".into()));
        }
        let w = f.bandlimit().max(u0.bandlimit());
        if self.w_max < w {
            return Err(Error::InvalidArgument(format!(
                "W_max = {} is below the bandlimit {w} of f or u0",
                self.w_max
            )));
        }
        match &self.stopping {
            Stopping::Schedule { eps, gap0, .. } => {
                if !(*eps > T::zero()) {
                    return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
                }
                if let Some(g) = gap0 {
                    if !(*g >= T::zero()) {
                        return Err(Error::InvalidArgument(format!(
                            "initial gap must be nonnegative, got {g}"
                        )));
                    }
                }
            }
            Stopping::Tolerance { tol, .. } => {
                if !(*tol > T::zero()) {
                    return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
                }
            }
        }
        Ok(())
    }
}

fn box_check<T: Scalar>(spec: &LagrangianSpec<T>, nodal: &Nodal<T>, step: usize) -> Result<()> {
    let Some(bx) = spec.value_box() else {
        return Ok(());
    };
    let mut z = vec![T::zero(); nodal.dim];
    for k in 0..nodal.len() {
        nodal.z_at(k, &mut z);
        if !bx.contains(nodal.y[k], &z) {
            let mut x = vec![T::zero(); nodal.dim];
            nodal.node(k, &mut x);
            return Err(Error::BoxEscape {
                step,
                detail: format!(
                    "u = {}, grad u = {:?} at x = {:?} outside |y| <= {}, |z_i| <= {}",
                    nodal.y[k], z, x, bx.y_max, bx.z_max
                ),
            });
        }
    }
    Ok(())
}

fn energy_slack<T: Scalar>(e: T) -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(1000.0)) * e.abs().max(T::one())
}

/// One descent iteration at a time; [`solve`] and [`solve_pair`] drive it.
pub struct Descent<'a, T: Scalar> {
    spec: &'a LagrangianSpec<T>,
    f: &'a SineFunction<T>,
    eta: T,
    m: usize,
    w_max: usize,
    policy: BandlimitPolicy,
    u: SineFunction<T>,
    nodal: Nodal<T>,
    energy: T,
    t: usize,
    certificate: Option<BarronCertificate<T>>,
    f_barron: T,
}

/// What a single step changed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo<T> {
    pub increment_h1: T,
    pub truncation_residual: T,
    pub energy_before: T,
    pub energy_after: T,
}

impl<'a, T: Scalar> Descent<'a, T> {
    pub fn new(
        spec: &'a LagrangianSpec<T>,
        f: &'a SineFunction<T>,
        u0: &SineFunction<T>,
        config: &SolverConfig<T>,
    ) -> Result<Self> {
        config.validate(spec, f, u0)?;
        let eta = config.resolve_eta(spec)?;
        let m = config.grid_points();
        let nodal = sample(u0, f, m)?;
        box_check(spec, &nodal, 0)?;
        let energy = energy_of(spec, &nodal)?;
        let certificate = spec.assumptions().map(|_| {
            let seed = sine_barron_norm(u0).max(T::one());
            BarronCertificate::bound(seed, T::from_usize_lossy(u0.bandlimit())).expect("seed certificate is valid")
        });
        Ok(Self {
            spec,
            f,
            eta,
            m,
            w_max: config.w_max,
            policy: config.policy,
            u: u0.clone(),
            nodal,
            energy,
            t: 0,
            certificate,
            f_barron: sine_barron_norm(f),
        })
    }

    pub fn iterate(&self) -> &SineFunction<T> {
        &self.u
    }

    pub fn energy(&self) -> T {
        self.energy
    }

    pub fn step_index(&self) -> usize {
        self.t
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn grid_points(&self) -> usize {
        self.m
    }

    pub fn certificate(&self) -> Option<&BarronCertificate<T>> {
        self.certificate.as_ref()
    }

    fn next_bandlimit(&self) -> usize {
        let w = self.u.bandlimit();
        match (self.policy, self.spec.assumptions()) {
            (BandlimitPolicy::Fixed, _) | (BandlimitPolicy::Grow, None) => self.w_max,
            (BandlimitPolicy::Grow, Some(k)) => {
                let grown = (T::lit(2.0) * T::PI() * k.k * T::from_usize_lossy(w)).ceil();
                let grown = grown.to_usize().unwrap_or(usize::MAX);
                grown.clamp(w, self.w_max)
            }
        }
    }

    /// The preconditioned update and the L² norm of the update modes beyond the next bandlimit.
    fn proposal(&self) -> Result<(SineFunction<T>, T)> {
        let g = gradient_of(self.spec, &self.nodal, self.m)?;
        let (kept, discarded) = g.precondition().with_bandlimit(self.next_bandlimit());
        let (base, _) = self.u.with_bandlimit(kept.bandlimit());
        Ok((base.axpy(-self.eta, &kept)?, self.eta * discarded))
    }

    pub fn step(&mut self) -> Result<StepInfo<T>> {
        let (u_next, residual) = self.proposal()?;
        let step = self.t + 1;
        let nodal = sample(&u_next, self.f, self.m)?;
        box_check(self.spec, &nodal, step)?;
        let e_next = energy_of(self.spec, &nodal)?;
        if e_next > self.energy + energy_slack(self.energy) {
            return Err(Error::EnergyIncrease {
                step,
                before: self.energy.to_f64_lossy(),
                after: e_next.to_f64_lossy(),
            });
        }
        let increment = u_next.sub(&self.u)?.h01_norm();
        if let (Some(cert), Some(k)) = (&self.certificate, self.spec.assumptions()) {
            self.certificate = Some(recursion_step(cert, self.f_barron, self.eta, self.spec.dim(), k));
        }
        let info = StepInfo {
            increment_h1: increment,
            truncation_residual: residual,
            energy_before: self.energy,
            energy_after: e_next,
        };
        self.u = u_next;
        self.nodal = nodal;
        self.energy = e_next;
        self.t = step;
        Ok(info)
    }
}

/// One update `u − η (I − Δ)^{-1} (DE(u) − f)` under `config`'s step size and bandlimit policy.
pub fn pgd_step<T: Scalar>(
    spec: &LagrangianSpec<T>,
    u: &SineFunction<T>,
    f: &SineFunction<T>,
    config: &SolverConfig<T>,
) -> Result<SineFunction<T>> {
    config.validate(spec, f, u)?;
    let eta = config.resolve_eta(spec)?;
    let m = config.grid_points();
    let d = Descent {
        spec,
        f,
        eta,
        m,
        w_max: config.w_max,
        policy: config.policy,
        u: u.clone(),
        nodal: sample(u, f, m)?,
        energy: T::zero(),
        t: 0,
        certificate: None,
        f_barron: T::zero(),
    };
    Ok(d.proposal()?.0)
}

/// `‖g‖²_{H⁻¹} / (2λ)`, an upper bound on `E(u₀) − E(u*)` from strong convexity.
fn gap_bound<T: Scalar>(spec: &LagrangianSpec<T>, d: &Descent<'_, T>) -> Result<T> {
    let g = gradient_of(spec, &d.nodal, d.m)?;
    let pi2 = T::PI() * T::PI();
    let h_minus: T = g
        .iter()
        .map(|(idx, c)| c * c / (pi2 * T::from_u64(idx.norm_sq()).unwrap()))
        .sum::<T>()
        / T::lit(2.0).powi(spec.dim() as i32);
    Ok(h_minus / (T::lit(2.0) * spec.lambda()))
}

struct Tracker<T: Scalar> {
    records: Vec<IterateRecord>,
    reference_energy: Option<T>,
    u_star: Option<SineFunction<T>>,
    ledger_ok: bool,
    monotone: bool,
}

impl<T: Scalar> Tracker<T> {
    fn new(config: &SolverConfig<T>) -> Self {
        Self {
            records: Vec::new(),
            reference_energy: config.reference_energy(),
            u_star: config.reference_u().cloned(),
            ledger_ok: true,
            monotone: true,
        }
    }

    fn record(&mut self, d: &Descent<'_, T>, residual: T) -> Result<()> {
        let energy = d.energy().to_f64_lossy();
        let gap = self.reference_energy.map(|e| energy - e.to_f64_lossy());
        let h1_error = match &self.u_star {
            Some(u) => Some(d.iterate().sub(u)?.h01_norm().to_f64_lossy()),
            None => None,
        };
        let contraction = match (self.records.last().and_then(|r| r.gap), gap) {
            (Some(prev), Some(cur)) if prev != 0.0 => Some(cur / prev),
            _ => None,
        };
        if let Some(prev) = self.records.last() {
            let slack = energy_slack(T::lit(prev.energy)).to_f64_lossy();
            if energy > prev.energy + slack {
                self.monotone = false;
            }
        }
        let computed = sine_barron_norm(d.iterate()).to_f64_lossy();
        let bound = d.certificate().map(|c| c.value().to_f64_lossy());
        if let Some(b) = bound {
            if computed > b {
                self.ledger_ok = false;
            }
        }
        self.records.push(IterateRecord {
            t: d.step_index(),
            energy,
            gap,
            h1_error,
            contraction,
            barron_computed: computed,
            barron_bound: bound,
            bandlimit: d.iterate().bandlimit(),
            truncation_residual: residual.to_f64_lossy(),
            drift: None,
            drift_bound: None,
        });
        Ok(())
    }

    fn finish(
        self,
        spec: &LagrangianSpec<T>,
        d: &Descent<'_, T>,
        scheduled: Option<usize>,
        stop: StopReason,
    ) -> Result<ConvergenceReport> {
        let c_p = poincare_constant::<T>(spec.dim())?;
        let stated = rate(spec.lambda(), spec.cap_lambda(), c_p)?.to_f64_lossy();
        let last = self.records.last().expect("initial record present");
        let floor = rate_floor(self.reference_energy);
        let report = ConvergenceReport {
            summary: ReportSummary {
                problem: spec.name().to_string(),
                dim: spec.dim(),
                grid_points: d.grid_points(),
                eta: d.eta().to_f64_lossy(),
                lambda: spec.lambda().to_f64_lossy(),
                cap_lambda: spec.cap_lambda().to_f64_lossy(),
                poincare: c_p.to_f64_lossy(),
                stated_rate: stated,
                conservative_rate: conservative_rate(spec.lambda(), spec.cap_lambda(), c_p)?.to_f64_lossy(),
                scheduled_iterations: scheduled,
                iterations: d.step_index(),
                stop_reason: stop,
                reference_energy: self.reference_energy.map(|e| e.to_f64_lossy()),
                final_energy: last.energy,
                final_gap: last.gap,
                final_h1_error: last.h1_error,
                h1_error_bound: last
                    .gap
                    .map(|g| (2.0 * g.max(0.0) / spec.lambda().to_f64_lossy()).sqrt()),
                max_contraction: None,
                rate_violations: 0,
                energy_monotone: self.monotone,
                ledger_dominated: self.ledger_ok,
                final_bandlimit: d.iterate().bandlimit(),
                certificate_value: d.certificate().map(|c| c.value().to_f64_lossy()),
                certificate_bandlimit: d.certificate().map(|c| c.bandlimit().to_f64_lossy()),
            },
            records: self.records,
            ledger: d.certificate().map(|c| c.cast::<f64>()),
        };
        let cs = report.contractions_above(floor);
        let mut report = report;
        report.summary.max_contraction = cs.iter().copied().reduce(f64::max);
        report.summary.rate_violations = cs.iter().filter(|&&c| c > stated + 1e-12).count();
        Ok(report)
    }
}

/// Gaps below this are round-off; contraction factors computed from them are not meaningful.
fn rate_floor<T: Scalar>(reference: Option<T>) -> f64 {
    1e-10 * reference.map(|e| e.to_f64_lossy().abs()).unwrap_or(1.0).max(1.0)
}

fn scheduled_steps<T: Scalar>(
    spec: &LagrangianSpec<T>,
    d: &Descent<'_, T>,
    config: &SolverConfig<T>,
) -> Result<Option<usize>> {
    let Stopping::Schedule { eps, gap0, iterations } = &config.stopping else {
        return Ok(None);
    };
    if let Some(n) = iterations {
        return Ok(Some(*n));
    }
    let gap = match (gap0, config.reference_energy()) {
        (Some(g), _) => *g,
        (None, Some(e)) => d.energy() - e,
        (None, None) => gap_bound(spec, d)?,
    };
    if gap <= T::zero() {
        return Ok(Some(0));
    }
    let c_p = poincare_constant::<T>(spec.dim())?;
    Ok(Some(iteration_count(*eps, gap, spec.lambda(), spec.cap_lambda(), c_p)?))
}

/// Runs the descent from `u0` until the stopping rule fires.
pub fn solve<T: Scalar>(
    spec: &LagrangianSpec<T>,
    f: &SineFunction<T>,
    u0: &SineFunction<T>,
    config: &SolverConfig<T>,
) -> Result<(SineFunction<T>, ConvergenceReport)> {
    let mut d = Descent::new(spec, f, u0, config)?;
    let scheduled = scheduled_steps(spec, &d, config)?;
    let mut tracker = Tracker::new(config);
    tracker.record(&d, T::zero())?;
    let stop = loop {
        match (&config.stopping, scheduled) {
            (Stopping::Schedule { .. }, Some(n)) if d.step_index() >= n => break StopReason::Schedule,
            (Stopping::Tolerance { max_iter, .. }, _) if d.step_index() >= *max_iter => {
                break StopReason::MaxIterations
            }
            _ => {}
        }
        let info = d.step()?;
        tracker.record(&d, info.truncation_residual)?;
        if let Stopping::Tolerance { tol, .. } = &config.stopping {
            if info.increment_h1 < *tol {
                break StopReason::Tolerance;
            }
        }
    };
    let report = tracker.finish(spec, &d, scheduled, stop)?;
    Ok((d.iterate().clone(), report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub t: usize,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub exact: ConvergenceReport,
    pub approx: ConvergenceReport,
    pub eps_l: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub drift: Vec<DriftRecord>,
}

impl PairReport {
    pub fn drift_within_bound(&self) -> bool {
        self.drift.iter().all(|r| r.measured <= r.bound + 1e-12)
    }
}

const PAIR_SAMPLES: usize = 512;

fn pair_epsilon<T: Scalar>(exact: &LagrangianSpec<T>, approx: &LagrangianSpec<T>) -> Result<T> {
    if let Some(a) = approx.assumptions() {
        if a.eps > T::zero() {
            return Ok(a.eps);
        }
    }
    let bx = exact
        .value_box()
        .or(approx.value_box())
        .ok_or_else(|| Error::InvalidArgument("solve_pair needs a value box or a declared epsilon".into()))?;
    let samples = sample_points(exact.dim(), bx, PAIR_SAMPLES, 0xd1f7);
    approximate_pair(exact, approx, &samples)
}

/// Runs the exact and surrogate sequences in lockstep with the same `η` and `u₀`
/// and compares their separation with `drift_bound`.
/// `R = ‖u*‖_{H¹₀} + (E(u₀) − E(u*))/λ`, with `u*`, `E(u*)` from the reference when
/// given and from the final exact iterate otherwise.
pub fn solve_pair<T: Scalar>(
    exact: &LagrangianSpec<T>,
    approx: &LagrangianSpec<T>,
    f: &SineFunction<T>,
    u0: &SineFunction<T>,
    config: &SolverConfig<T>,
) -> Result<(SineFunction<T>, SineFunction<T>, PairReport)> {
    if exact.dim() != approx.dim() {
        return Err(Error::DimensionMismatch {
            expected: exact.dim(),
            got: approx.dim(),
        });
    }
    let eps_l = pair_epsilon(exact, approx)?;
    if !(eps_l < exact.lambda()) {
        return Err(Error::InvalidArgument(format!(
            "approximation error {eps_l} must be below lambda {}",
            exact.lambda()
        )));
    }
    let eta = config.resolve_eta(exact)?;
    let config = SolverConfig {
        eta: Some(eta),
        ..config.clone()
    };
    let mut de = Descent::new(exact, f, u0, &config)?;
    let mut da = Descent::new(approx, f, u0, &config)?;
    let scheduled = scheduled_steps(exact, &de, &config)?;
    let mut te = Tracker::new(&config);
    let mut ta = Tracker::new(&config);
    te.record(&de, T::zero())?;
    ta.record(&da, T::zero())?;
    let mut separation = vec![T::zero()];
    let (mut done_e, mut done_a) = (false, false);
    let stop = loop {
        match (&config.stopping, scheduled) {
            (Stopping::Schedule { .. }, Some(n)) if de.step_index() >= n => break StopReason::Schedule,
            (Stopping::Tolerance { max_iter, .. }, _) if de.step_index() >= *max_iter => {
                break StopReason::MaxIterations
            }
            _ => {}
        }
        let ie = de.step()?;
        let ia = da.step()?;
        te.record(&de, ie.truncation_residual)?;
        ta.record(&da, ia.truncation_residual)?;
        separation.push(de.iterate().sub(da.iterate())?.h01_norm());
        if let Stopping::Tolerance { tol, .. } = &config.stopping {
            done_e |= ie.increment_h1 < *tol;
            done_a |= ia.increment_h1 < *tol;
            if done_e && done_a {
                break StopReason::Tolerance;
            }
        }
    };
    let u_star_norm = match config.reference_u() {
        Some(u) => u.h01_norm(),
        None => de.iterate().h01_norm(),
    };
    let e_star = config.reference_energy().unwrap_or(de.energy());
    let e0 = energy(exact, u0, f, config.grid_points())?;
    let radius = u_star_norm + (e0 - e_star).max(T::zero()) / exact.lambda();
    let c_p = poincare_constant::<T>(exact.dim())?;
    let mut drift = Vec::with_capacity(separation.len());
    for (t, s) in separation.iter().enumerate() {
        let b = drift_bound(t as u32, eps_l, exact.cap_lambda(), radius, eta, c_p);
        drift.push(DriftRecord {
            t,
            measured: s.to_f64_lossy(),
            bound: b.to_f64_lossy(),
        });
    }
    let mut exact_report = te.finish(exact, &de, scheduled, stop.clone())?;
    let mut approx_report = ta.finish(approx, &da, scheduled, stop)?;
    for rep in [&mut exact_report, &mut approx_report] {
        for (rec, dr) in rep.records.iter_mut().zip(&drift) {
            rec.drift = Some(dr.measured);
            rec.drift_bound = Some(dr.bound);
        }
    }
    let report = PairReport {
        exact: exact_report,
        approx: approx_report,
        eps_l: eps_l.to_f64_lossy(),
        radius: radius.to_f64_lossy(),
        drift,
    };
    Ok((de.iterate().clone(), da.iterate().clone(), report))
}

#[cfg(test)]
mod tests;
