//! Acceptance checks. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits non-zero when any criterion fails.

use std::time::Instant;

use spinstat_core::currents::{evaluate_currents_with, CurrentOptions};
use spinstat_core::polarization::{
    averaged_polarization, boltzmann_polarization_magnitude, mean_polarization, spin_density_closed, vortex_state,
    VortexParameters,
};
use spinstat_core::quadrature::{integrate_dp_radial_oracle, QuadratureSpec};
use spinstat_core::sampling::{random_momentum, random_state, rng_from_seed, SamplingRanges};
use spinstat_core::spinor::{spin_density_from_spinors, verify_trace_identities};
use spinstat_core::statistics::{FluidState, Species, Statistics};
use spinstat_core::tensor::{a_norm, eb_compose, Antisym2Tensor, LorentzTransform};
use spinstat_core::thermo::{
    check_boltzmann_limit, check_euler, check_generating_function, check_thermodynamics, per_mode_euler_residual,
    PerturbationSpec,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn lambda_vortex(ratio: f64) -> FluidState {
    vortex_state(&VortexParameters {
        t0: 0.15,
        omega0: ratio * 0.15,
        mu0: 0.0,
        mass: 1.115683,
    })
    .unwrap()
}

fn spinor_equivalence() -> Outcome {
    let mut rng = rng_from_seed(1);
    let ranges = SamplingRanges::default();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let s = random_state(&mut rng, &ranges).map_err(|e| e.to_string())?;
        let p = random_momentum(&mut rng, s.mass(), ranges.momentum).map_err(|e| e.to_string())?;
        for species in [Species::Particle, Species::Antiparticle] {
            let closed = spin_density_closed(&s, &p, species, Statistics::FermiDirac).map_err(|e| e.to_string())?;
            let spinor =
                spin_density_from_spinors(&s, &p, species, Statistics::FermiDirac).map_err(|e| e.to_string())?;
            worst = worst.max(closed.max_abs_diff(&spinor));
        }
    }
    ensure(worst < 1e-10, format!("500 states, max entry residual {worst:.2e}"))
}

fn trace_identities() -> Outcome {
    let mut rng = rng_from_seed(2);
    let ranges = SamplingRanges::default();
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for _ in 0..200 {
        let s = random_state(&mut rng, &ranges).map_err(|e| e.to_string())?;
        let p = random_momentum(&mut rng, s.mass(), ranges.momentum).map_err(|e| e.to_string())?;
        let report = verify_trace_identities(&s, &p, Statistics::FermiDirac).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_residual);
        failed.extend(report.failures().map(|c| c.name));
    }
    ensure(
        worst < 1e-10 && failed.is_empty(),
        format!("200 pairs, max residual {worst:.2e}, failing checks {failed:?}"),
    )
}

fn polarization_bound() -> Outcome {
    let mut rng = rng_from_seed(3);
    let ranges = SamplingRanges {
        omega: 20.0,
        admissible_below: f64::INFINITY,
        ..SamplingRanges::default()
    };
    // saturated states round to within a few ulps of the bound
    let bound = 0.5 * (1.0 + 4.0 * f64::EPSILON);
    let mut violations = 0;
    let mut largest_norm: f64 = 0.0;
    let mut boltzmann_worst: f64 = 0.0;
    for _ in 0..10_000 {
        let s = random_state(&mut rng, &ranges).map_err(|e| e.to_string())?;
        let p = random_momentum(&mut rng, s.mass(), ranges.momentum).map_err(|e| e.to_string())?;
        let norm = a_norm(&s.omega(), &p).map_err(|e| e.to_string())?;
        if norm > 20.0 {
            continue;
        }
        largest_norm = largest_norm.max(norm);
        let fd = mean_polarization(&s, &p, Statistics::FermiDirac).map_err(|e| e.to_string())?;
        if fd.magnitude().is_nan() || fd.magnitude() > bound {
            violations += 1;
        }
        let b = mean_polarization(&s, &p, Statistics::Boltzmann).map_err(|e| e.to_string())?;
        boltzmann_worst = boltzmann_worst.max((b.magnitude() - boltzmann_polarization_magnitude(norm)).abs());
    }
    ensure(
        violations == 0 && boltzmann_worst < 1e-6 && largest_norm > 15.0,
        format!(
            "{violations} violations, spin norm up to {largest_norm:.1}, Boltzmann tanh deviation {boltzmann_worst:.2e}"
        ),
    )
}

fn vortex_alignment() -> Outcome {
    let q = spec();
    let mut previous = 0.0;
    let mut lines = Vec::new();
    let mut ok = true;
    for ratio in [0.05, 0.1, 0.2] {
        let p = averaged_polarization(&lambda_vortex(ratio), &q).map_err(|e| e.to_string())?;
        let [x, y, z] = p.0;
        let transverse = x.abs().max(y.abs());
        ok &= z > previous && transverse < q.rel_tol * z;
        previous = z;
        lines.push(format!("{ratio}: Pz {z:.6e} transverse {transverse:.1e}"));
    }
    ensure(ok, lines.join("; "))
}

fn thermodynamic_identities() -> Outcome {
    let q = spec();
    let pert = PerturbationSpec {
        tolerance: 1e-5,
        ..PerturbationSpec::default()
    };
    let states = [
        FluidState::at_rest(0.938, 0.2, 0.1, eb_compose([0.05, 0.0, 0.0], [0.0, 0.1, 0.2])).unwrap(),
        FluidState::from_velocity(
            0.5,
            0.3,
            -0.2,
            [0.3, -0.2, 0.1],
            eb_compose([0.1, 0.2, 0.0], [0.0, -0.1, 0.3]),
        )
        .unwrap(),
        lambda_vortex(0.1),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for s in &states {
        let r = check_thermodynamics(s, &q, &pert).map_err(|e| e.to_string())?;
        for report in [&r.gibbs_duhem, &r.first_law] {
            let order = report.convergence_order.unwrap_or(f64::NAN);
            ok &= report.max_relative_residual < 1e-5 && (order - 2.0).abs() <= 0.3;
            lines.push(format!(
                "{} {:.1e} order {order:.2}",
                report.name, report.max_relative_residual
            ));
        }
        ok &= r.triangle.passed;
    }
    ensure(ok, lines.join("; "))
}

fn euler_relation() -> Outcome {
    let q = spec();
    let pert = PerturbationSpec::default();
    let mut rng = rng_from_seed(6);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..3 {
        let s = random_state(&mut rng, &SamplingRanges::default()).map_err(|e| e.to_string())?;
        let r = check_euler(&s, &q, &pert).map_err(|e| e.to_string())?;
        ok &= r.max_relative_residual < 3.0 * q.rel_tol;
        worst = worst.max(r.max_relative_residual);
    }
    let per_mode = (-4000..=4000)
        .map(|k| per_mode_euler_residual(k as f64 * 0.01))
        .fold(0.0, f64::max);
    ensure(
        ok && per_mode < 1e-13,
        format!(
            "integrated {worst:.1e} (limit {:.1e}), per mode {per_mode:.1e}",
            3.0 * q.rel_tol
        ),
    )
}

fn generating_function() -> Outcome {
    let q = spec();
    let pert = PerturbationSpec::default();
    let s = FluidState::from_velocity(
        0.8,
        0.25,
        0.1,
        [0.1, 0.2, -0.1],
        eb_compose([0.1, 0.0, 0.2], [0.2, 0.1, 0.0]),
    )
    .unwrap();
    let reports = check_generating_function(&s, &q, &pert).map_err(|e| e.to_string())?;
    let ok = reports.iter().all(|r| r.passed)
        && reports
            .iter()
            .all(|r| r.tolerance <= if r.name.ends_with("Ncal") { 1e-5 } else { 1e-4 });
    let lines: Vec<String> = reports
        .iter()
        .map(|r| format!("{} {:.1e}", r.name, r.max_relative_residual))
        .collect();
    ensure(ok, lines.join("; "))
}

fn boltzmann_limit() -> Outcome {
    let q = spec();
    let pert = PerturbationSpec::default();
    let s = FluidState::from_velocity(
        0.6,
        0.2,
        0.3,
        [0.0, 0.2, 0.1],
        eb_compose([0.1, 0.0, 0.0], [0.0, 0.0, 0.3]),
    )
    .unwrap();
    let r = check_boltzmann_limit(&s, &q, &pert).map_err(|e| e.to_string())?;
    ensure(
        r.passed && r.residuals.len() >= 10,
        format!(
            "{} rates, worst deviation from e^2 {:.1}%",
            r.residuals.len(),
            100.0 * r.max_relative_residual
        ),
    )
}

fn quadrature_validation() -> Outcome {
    let q = spec();
    let (t, mu, m) = (0.15, 0.05, 0.14);
    let s = FluidState::at_rest(m, t, mu, Antisym2Tensor::ZERO).unwrap();
    let b = evaluate_currents_with(&s.multipliers(), &q, &CurrentOptions::default())
        .map_err(|e| e.to_string())?
        .currents;
    let fd = Statistics::FermiDirac;
    let xi = mu / t;
    let modes = |e: f64, f: &dyn Fn(f64) -> f64| 2.0 * (f(e / t - xi) + f(e / t + xi));
    let n = integrate_dp_radial_oracle(
        |_, e| 2.0 * e * (fd.occupation(e / t - xi) - fd.occupation(e / t + xi)),
        &s,
        &q,
    );
    let eps = integrate_dp_radial_oracle(|_, e| e * e * modes(e, &|w| fd.occupation(w)), &s, &q);
    let ent = integrate_dp_radial_oracle(|_, e| e * modes(e, &|w| fd.entropy(w)), &s, &q);
    let (n, eps, ent) = (
        n.map_err(|e| e.to_string())?,
        eps.map_err(|e| e.to_string())?,
        ent.map_err(|e| e.to_string())?,
    );
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let dev = [rel(b.n.0[0], n), rel(b.t[0][0], eps), rel(b.s_entropy.0[0], ent)];
    let worst = dev.iter().fold(0.0_f64, |a, x| a.max(*x));

    // Ncal = P beta, at rest and in a boosted frame
    let pressure = b.t[1][1];
    let mut ideal =
        rel(b.ncal.0[0], pressure / t).max(b.ncal.0[1..].iter().fold(0.0_f64, |a, x| a.max(x.abs())) / b.ncal.0[0]);
    let moving = FluidState::from_velocity(m, t, mu, [0.3, 0.1, -0.4], Antisym2Tensor::ZERO).unwrap();
    let bm = evaluate_currents_with(&moving.multipliers(), &q, &CurrentOptions::default())
        .map_err(|e| e.to_string())?
        .currents;
    let beta = moving.beta();
    let scale = bm.ncal.0.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    for mu_index in 0..4 {
        ideal = ideal.max((bm.ncal.0[mu_index] - pressure * beta.0[mu_index]).abs() / scale);
    }
    ensure(
        worst < 1e-8 && ideal < 1e-8,
        format!(
            "n/eps/s deviations {:.1e} {:.1e} {:.1e}, Ncal - P beta {ideal:.1e}",
            dev[0], dev[1], dev[2]
        ),
    )
}

fn lorentz_covariance() -> Outcome {
    let q = spec();
    let mut rng = rng_from_seed(10);
    let s = random_state(
        &mut rng,
        &SamplingRanges {
            max_speed: 0.0,
            admissible_below: 0.5,
            ..SamplingRanges::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let base = evaluate_currents_with(&s.multipliers(), &q, &CurrentOptions::default())
        .map_err(|e| e.to_string())?
        .currents;
    let boosts = [[0.6, 0.0, 0.0], [-0.2, 0.35, 0.3], [0.1, -0.3, -0.45]];
    let mut worst: f64 = 0.0;
    for v in boosts {
        let lambda = LorentzTransform::boost(v).map_err(|e| e.to_string())?;
        let moved = s.transformed(&lambda).map_err(|e| e.to_string())?;
        let direct = evaluate_currents_with(&moved.multipliers(), &q, &CurrentOptions::default())
            .map_err(|e| e.to_string())?
            .currents;
        worst = worst.max(direct.max_relative_deviation(&base.transformed(&lambda)));
    }
    ensure(
        worst < 1e-6,
        format!("3 boosts up to |v| = 0.6, max relative deviation {worst:.1e}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("spinor-oracle equivalence", spinor_equivalence),
        ("trace identities", trace_identities),
        ("polarization bound", polarization_bound),
        ("vortex alignment", vortex_alignment),
        ("Gibbs-Duhem and first law", thermodynamic_identities),
        ("Euler relation", euler_relation),
        ("generating function", generating_function),
        ("Boltzmann limit", boltzmann_limit),
        ("quadrature validation", quadrature_validation),
        ("Lorentz covariance", lorentz_covariance),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1} s]", k + 1);
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
