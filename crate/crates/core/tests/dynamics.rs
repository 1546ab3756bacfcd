use std::f64::consts::PI;

use plasmon_shift::coupling::{LorentzianOscillators, Oscillator};
use plasmon_shift::dynamics::{
    evolution_spectrum, spectral_dynamics, volterra_solve, weak_coupling_decay, DynamicsProblem,
    HilbertSelfEnergy, SelfEnergy, SubtractiveSelfEnergy,
};
use plasmon_shift::levelshift::{gamma_of, QuadraturePolicy};
use plasmon_shift::units::{fs_to_natural, natural_to_fs};
use plasmon_shift::{AnalyticCoupling, Complex64, CouplingSource, Result};

/// `g(ω) = (A/π) / (c − ω − iγ)`: a single lossy mode, `∫ Im g dω = A` over
/// the whole line.
struct Pseudomode {
    strength: f64,
    center: f64,
    width: f64,
}

impl CouplingSource for Pseudomode {
    fn coupling(&self, w: f64) -> Result<Complex64> {
        Ok(self.strength / PI / Complex64::new(self.center - w, -self.width))
    }
    fn feature_hints(&self) -> Vec<f64> {
        vec![self.center]
    }
    fn describe(&self) -> String {
        "pseudomode".into()
    }
}

/// `c̈ + z ċ + A c = 0`, `c(0) = 1`, `ċ(0) = 0` with `z = i(c − ω₀) + γ`:
/// the emitter amplitude when the memory kernel is `A e^{−zτ}`.
fn pseudomode_amplitude(m: &Pseudomode, omega0: f64, t: f64) -> Complex64 {
    let z = Complex64::new(m.width, m.center - omega0);
    let root = (z * z / 4.0 - m.strength).sqrt();
    let (r1, r2) = (-z / 2.0 + root, -z / 2.0 - root);
    (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r2 - r1)
}

fn pseudomode_problem() -> (Pseudomode, DynamicsProblem) {
    // Window [0, 2c] centred on ω₀ = c so the cut Lorentzian tails cancel.
    let m = Pseudomode { strength: 0.01, center: 52.0, width: 0.02 };
    let mut p = DynamicsProblem::new(52.0, 104.0, natural_to_fs(45.0), natural_to_fs(0.005)).unwrap();
    p.policy = QuadraturePolicy { abs_tol: 1e-12, node_budget: 400_000, ..Default::default() };
    (m, p)
}

#[test]
fn volterra_matches_pseudomode_solution() {
    let (m, p) = pseudomode_problem();
    let traj = volterra_solve(&m, &p).unwrap();
    let err = traj
        .t_fs
        .iter()
        .zip(&traj.c1)
        .map(|(&t, c)| (c.norm() - pseudomode_amplitude(&m, p.omega0, fs_to_natural(t)).norm()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "max |c₁| error {err:e}");
}

#[test]
fn spectral_matches_pseudomode_solution() {
    let (m, p) = pseudomode_problem();
    let se = HilbertSelfEnergy::new(&m, p.omega_max, &p.policy).unwrap();
    let spec = evolution_spectrum(&p, &se).unwrap();
    let t: Vec<f64> = p.time_grid_fs().into_iter().step_by(20).collect();
    let traj = spectral_dynamics(&spec, &t).unwrap();
    let err = t
        .iter()
        .zip(&traj.c1)
        .map(|(&t, c)| (c.norm() - pseudomode_amplitude(&m, p.omega0, fs_to_natural(t)).norm()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "max |c₁| error {err:e}");
}

fn single_mode(strength: f64, center: f64, width: f64) -> LorentzianOscillators {
    LorentzianOscillators::new(vec![Oscillator { strength, center, width }]).unwrap()
}

#[test]
fn broad_band_decay_is_exponential() {
    // Memory time 1/γ is far below the lifetime, so the decay is Markovian.
    let osc = single_mode(0.05, 5.0, 3.0);
    let gamma = gamma_of(&osc, 5.0).unwrap();
    let lifetime_fs = natural_to_fs(1.0 / gamma);
    let p = DynamicsProblem::new(5.0, 40.0, 3.0 * lifetime_fs, 0.02).unwrap();
    let traj = volterra_solve(&osc, &p).unwrap();
    traj.validate().unwrap();
    let markov = weak_coupling_decay(gamma, 0.0, &traj.t_fs);
    for (a, b) in traj.population().iter().zip(markov.population()) {
        assert!((a - b).abs() < 0.02 * b.max(0.05), "{a} vs {b}");
    }
}

#[test]
fn short_time_loss_is_quadratic() {
    let osc = single_mode(0.01, 3.0, 0.1);
    let dts = [1e-3, 2e-3, 5e-3, 1e-2];
    let loss: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let p = DynamicsProblem::new(3.0, 20.0, dt, dt).unwrap();
            1.0 - volterra_solve(&osc, &p).unwrap().population()[1]
        })
        .collect();
    let n = dts.len() as f64;
    let (x, y): (Vec<f64>, Vec<f64>) = dts.iter().zip(&loss).map(|(d, l)| (d.ln(), l.ln())).unzip();
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    assert!((1.8..=2.2).contains(&slope), "exponent {slope}");
}

#[test]
fn volterra_is_second_order_in_step() {
    let osc = single_mode(0.004, 3.0, 0.05);
    let run = |dt: f64| {
        let p = DynamicsProblem::new(3.0, 10.0, 20.0, dt).unwrap();
        volterra_solve(&osc, &p).unwrap()
    };
    let (a, b, c) = (run(0.04), run(0.02), run(0.01));
    let on_coarse = |fine: &plasmon_shift::dynamics::DecayTrajectory, stride: usize| {
        let mut t = fine.clone();
        t.t_fs = t.t_fs.iter().step_by(stride).copied().collect();
        t.c1 = t.c1.iter().step_by(stride).copied().collect();
        t
    };
    let d1 = a.max_population_difference(&on_coarse(&b, 2)).unwrap();
    let d2 = b.max_population_difference(&on_coarse(&c, 2)).unwrap();
    assert!(d1 > 0.0 && (3.0..5.0).contains(&(d1 / d2)), "{d1:e} / {d2:e}");
}

struct Offset<'a> {
    inner: &'a dyn SelfEnergy,
    shift: f64,
}

impl SelfEnergy for Offset<'_> {
    fn delta(&self, w: f64) -> Result<f64> {
        Ok(self.inner.delta(w)? + self.shift)
    }
    fn gamma(&self, w: f64) -> Result<f64> {
        self.inner.gamma(w)
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.inner.support()
    }
    fn feature_hints(&self) -> Vec<f64> {
        self.inner.feature_hints()
    }
}

#[test]
fn trajectory_tracks_level_shift_errors() {
    let osc = single_mode(0.0025, 2.05, 0.05);
    let p = DynamicsProblem::new(2.0, 10.0, 50.0, 0.05).unwrap();
    let g0 = osc.static_coupling().unwrap();
    let exact = SubtractiveSelfEnergy::new(&osc, g0, p.omega_max, &p.policy).unwrap();
    let run = |se: &dyn SelfEnergy| {
        spectral_dynamics(&evolution_spectrum(&p, se).unwrap(), &p.time_grid_fs()).unwrap()
    };
    let reference = run(&exact);
    reference.validate().unwrap();
    let deviation: Vec<f64> = [1e-3, 3e-3, 1e-2]
        .iter()
        .map(|&shift| {
            run(&Offset { inner: &exact, shift })
                .max_population_difference(&reference)
                .unwrap()
        })
        .collect();
    assert!(deviation.windows(2).all(|w| w[1] > w[0]), "{deviation:?}");
    assert!(deviation[0] > 1e-3, "{deviation:?}");
}

#[test]
fn solvers_agree_on_mode_with_background() {
    let osc = LorentzianOscillators::new(vec![
        Oscillator { strength: 0.0025, center: 2.05, width: 0.05 },
        Oscillator { strength: 0.05, center: 6.0, width: 2.0 },
    ])
    .unwrap();
    let p = DynamicsProblem::new(2.0, 60.0, 40.0, 0.02).unwrap();
    let v = volterra_solve(&osc, &p).unwrap();
    let se = HilbertSelfEnergy::new(&osc, p.omega_max, &p.policy).unwrap();
    let s = spectral_dynamics(&evolution_spectrum(&p, &se).unwrap(), &p.time_grid_fs()).unwrap();
    v.validate().unwrap();
    s.validate().unwrap();
    assert!(v.max_population_difference(&s).unwrap() < 1e-3);
}
