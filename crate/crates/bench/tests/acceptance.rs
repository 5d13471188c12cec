//! End-to-end acceptance run: one PASS/FAIL line per criterion, exit
//! status 1 if any criterion fails.

use std::time::Instant;

use cfem_bench::config::{ExperimentConfig, ExperimentId, Ordering};
use cfem_bench::experiments::{bvp1d_point, grid, lambda_1d, run_experiment, ConvergenceRecord};
use cfem_bench::report::convergence_onset;
use cfem_core::elastic::{
    dispersion_modes, fixed_point_residual, material_from_engineering, operator_scale,
    semidiscretize_z_elastic, ElasticProfile,
};
use cfem_core::layered::{
    assemble_2d_with, bump_load, interface_error, neumann_load_left, semidiscretize_z, solve_2d,
    LayerProfile, SubdomainSpec,
};
use cfem_core::pade_grid::{element_lengths, validate_against_table, GridOrdering, PadeGrid};
use cfem_core::scalar::{
    condense_dtn, element_dtn, generalized_spectrum, halfspace_fixed_point_check, mesh_propagator,
    propagator_magnitude_lemma_check, SpectralParameter,
};
use cfem_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    passed: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            notes: vec![],
        }
    }

    fn require(&mut self, ok: bool, note: String) {
        if !ok {
            self.passed = false;
            self.notes.push(format!("FAILED {note}"));
        } else {
            self.notes.push(note);
        }
    }

    fn runtime(&mut self, t: Instant, limit: f64) {
        let s = t.elapsed().as_secs_f64();
        self.require(s < limit, format!("runtime {s:.2}s < {limit}s"));
    }
}

fn table_regression() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let mut worst = (0, 0.0f64);
    for n in 1..=16 {
        let rep = validate_against_table(n).expect("table comparison");
        if rep.max_deviation > worst.1 {
            worst = (n, rep.max_deviation);
        }
        if !rep.passed {
            o.require(
                false,
                format!("n={n} max deviation {:.2e} > 1e-12", rep.max_deviation),
            );
        }
    }
    o.notes
        .push(format!("worst deviation {:.2e} at n={}", worst.1, worst.0));
    o.runtime(t, 1.0);
    o
}

fn fixed_point_suite() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut samples) = (0.0f64, 0);
    while samples < 1000 {
        let l = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lam = c(rng.gen_range(-400.0..400.0), rng.gen_range(-400.0..400.0));
        if l.norm() < 1e-3 || SpectralParameter::new(lam).k.re <= 1e-8 {
            continue;
        }
        let e = element_dtn(l, lam).expect("element");
        worst = worst.max(halfspace_fixed_point_check(&e) / (lam.norm() + 1.0));
        samples += 1;
    }
    o.require(
        worst <= 1e-12,
        format!("element residual {worst:.2e} <= 1e-12 (|lambda|+1) over {samples} samples"),
    );
    let mut mesh = 0.0f64;
    for n in 1..=16 {
        let g = element_lengths(n, 1.0).expect("grid");
        for lam in [
            c(1.0, 0.0),
            c(-30.0, 0.0),
            c(5.0, 2.0),
            c(400.0, 0.0),
            c(-100.0, 1.0),
        ] {
            let d = condense_dtn(&g, lam).expect("condense");
            mesh = mesh.max((d.determinant() - lam).norm() / (lam.norm() + 1.0));
        }
    }
    o.require(
        mesh <= 1e-10,
        format!("whole-mesh identity {mesh:.2e} for n <= 16"),
    );
    o.runtime(t, 5.0);
    o
}

fn hermitian_suite() -> Outcome {
    let mut o = Outcome::new();
    let mut worst = 0.0f64;
    for n in [2, 4, 8, 16] {
        let g = element_lengths(n, 1.0).expect("grid");
        for lam in [1.0, -1.0, 25.0, -25.0, 400.0, -400.0] {
            let d = condense_dtn(&g, c(lam, 0.0)).expect("condense");
            let big = d.k_diag.norm().max(d.k_off.norm());
            worst = worst.max(d.k_diag.im.abs().max(d.k_off.im.abs()) / big);
        }
    }
    o.require(
        worst <= 1e-9,
        format!("max relative imaginary part {worst:.2e}"),
    );
    o
}

fn spectrum_suite() -> Outcome {
    let mut o = Outcome::new();
    let mut worst = 0.0f64;
    for n in 1..=12 {
        for v in generalized_spectrum(&element_lengths(n, 1.0).expect("grid")).expect("spectrum") {
            let scale = v.norm().max(1.0);
            worst = worst.max(v.im.abs() / scale).max(-v.re / scale);
        }
    }
    o.require(
        worst <= 1e-8,
        format!("spectra real nonnegative within {worst:.2e}"),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ok = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=16);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let k = c(sign * rng.gen_range(0.05..20.0), rng.gen_range(-40.0..40.0));
        let g = element_lengths(n, 1.0).expect("grid");
        if propagator_magnitude_lemma_check(&g, k).expect("lemma") {
            ok += 1;
        }
    }
    o.require(ok == 200, format!("magnitude lemma {ok}/200"));
    o
}

fn pade_order() -> Outcome {
    let mut o = Outcome::new();
    let k = c(0.1, 0.0);
    for n in 1..=4 {
        let p = mesh_propagator(&element_lengths(n, 1.0).expect("grid"), k).expect("propagator");
        let err = (p - k.exp()).norm();
        let bound = 10.0 * 0.1f64.powi(2 * n as i32 + 1);
        o.require(err <= bound, format!("n={n}: {err:.2e} <= {bound:.1e}"));
    }
    o
}

fn e1_errors(k: f64, ns: std::ops::RangeInclusive<usize>) -> Vec<f64> {
    ns.map(|n| {
        bvp1d_point(
            lambda_1d(ExperimentId::E1Elliptic, k),
            n,
            1.0,
            Ordering::Phase,
        )
        .expect("bvp")
        .1
    })
    .collect()
}

fn e1() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let e200 = e1_errors(200.0, 20..=20)[0];
    o.require(e200 <= 1e-3, format!("k=200 n=20: {e200:.2e}"));
    let e10 = e1_errors(10.0, 1..=40);
    o.require(e10[14] <= 1e-12, format!("k=10 n=15: {:.2e}", e10[14]));
    let monotone = e10.windows(2).all(|w| w[1] < w[0] || w[0] < 1e-14);
    o.require(monotone, "k=10 monotone above the floor".into());
    let floor = e10[30..].iter().copied().fold(0.0, f64::max);
    o.require(floor <= 1e-14, format!("k=10 floor {floor:.1e} (n=31..40)"));
    o.runtime(t, 10.0);
    o
}

fn e2() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let sweep = |ord| -> Vec<(usize, f64)> {
        (1..=40)
            .map(|n| {
                (
                    n,
                    bvp1d_point(lambda_1d(ExperimentId::E2Helmholtz1d, 40.0), n, 1.0, ord)
                        .expect("bvp")
                        .1,
                )
            })
            .collect()
    };
    let phase = sweep(Ordering::Phase);
    let inter = sweep(Ordering::Interleave);
    let onset = convergence_onset(&phase);
    o.require(
        onset.is_some_and(|n| (17..=23).contains(&n)),
        format!("onset {onset:?} in [17, 23]"),
    );
    let (fp, fi) = (phase[39].1, inter[39].1);
    o.require(
        fi * 1e2 <= fp,
        format!("floor at n=40: phase {fp:.2e}, interleave {fi:.2e}"),
    );
    o.runtime(t, 30.0);
    o
}

fn layered(id: ExperimentId, n: Vec<usize>, baseline: Vec<usize>) -> Vec<ConvergenceRecord> {
    let c = ExperimentConfig {
        n,
        baseline,
        timing: false,
        ..ExperimentConfig::defaults(id)
    };
    assert_eq!(c.ordering, Ordering::Interleave);
    run_experiment(&c).expect("sweep")
}

fn err_at(r: &[ConvergenceRecord], id: ExperimentId, n: usize, fem: bool) -> f64 {
    r.iter()
        .find(|r| r.experiment == id.as_str() && r.n == n && (r.ordering == "fem") == fem)
        .expect("sweep point")
        .error
}

fn e3() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let id = ExperimentId::E3Laplace2d;
    let fem = vec![100, 200, 400, 800];
    let r = layered(id, vec![10, 14], fem.clone());
    let (a, b) = (err_at(&r, id, 10, false), err_at(&r, id, 14, false));
    o.require(a <= 1.5e-2, format!("n=10: {a:.2e} <= 1.5e-2"));
    o.require(b <= 2e-4, format!("n=14: {b:.2e} <= 2e-4"));
    let pts: Vec<(f64, f64)> = fem
        .iter()
        .map(|&nx| ((nx as f64).ln(), err_at(&r, id, nx, true).ln()))
        .collect();
    let (mx, my) = pts.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1));
    let (mx, my) = (mx / pts.len() as f64, my / pts.len() as f64);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    o.require((slope + 2.0).abs() <= 0.3, format!("FEM slope {slope:.2}"));
    o.runtime(t, 300.0);
    o
}

fn e4() -> Outcome {
    let mut o = Outcome::new();
    let id = ExperimentId::E4Helmholtz2d;
    let r = layered(id, vec![17, 20], vec![]);
    let (a, b) = (err_at(&r, id, 17, false), err_at(&r, id, 20, false));
    o.require(a <= 1.5e-2, format!("n=17: {a:.2e} <= 1.5e-2"));
    o.require(b <= 1.5e-3, format!("n=20: {b:.2e} <= 1.5e-3"));
    o
}

fn e5() -> Outcome {
    let mut o = Outcome::new();
    let id = ExperimentId::E5Multidomain;
    let r = layered(id, vec![20, 28], vec![]);
    let (a, b) = (err_at(&r, id, 20, false), err_at(&r, id, 28, false));
    o.require(a <= 1.5e-2, format!("n=20: {a:.2e} <= 1.5e-2"));
    o.require(b <= 1.5e-3, format!("n=28: {b:.2e} <= 1.5e-3"));

    // Same material on both sides: the split run must equal one subdomain
    // carrying both grids.
    let cfg = ExperimentConfig::defaults(id);
    let p = LayerProfile::uniform(
        cfg.height,
        c(cfg.modulus[0], cfg.modulus[1]),
        cfg.rho,
        cfg.nz,
    )
    .expect("profile");
    let ops = semidiscretize_z(&p);
    let load = neumann_load_left(&p, bump_load);
    let g = grid(12, 5.0, Ordering::Interleave).expect("grid");
    let one = c(1.0, 0.0);
    let two = assemble_2d_with(
        &ops,
        &[
            SubdomainSpec::new(g.clone(), one),
            SubdomainSpec::new(g.clone(), one),
        ],
        cfg.omega,
    )
    .expect("assemble");
    let merged = PadeGrid {
        n: 24,
        total_length: 10.0,
        lengths: g.lengths.iter().chain(&g.lengths).copied().collect(),
        ordering: GridOrdering::CustomPermutation,
    };
    let single =
        assemble_2d_with(&ops, &[SubdomainSpec::new(merged, one)], cfg.omega).expect("assemble");
    let nodes = [0, 12, 24];
    let ua = solve_2d(&two, &load).expect("solve").stacked(&nodes);
    let ub = solve_2d(&single, &load).expect("solve").stacked(&nodes);
    let d = interface_error(&ua, &ub).expect("error");
    o.require(
        d <= 1e-10,
        format!("identical-material split vs single {d:.1e}"),
    );
    o
}

fn e6() -> Outcome {
    let mut o = Outcome::new();
    let id = ExperimentId::E6Elastic;
    let r = layered(id, vec![28, 60], vec![]);
    let (a, b) = (err_at(&r, id, 28, false), err_at(&r, id, 60, false));
    o.require(a <= 1.5e-2, format!("n=28 combined: {a:.2e} <= 1.5e-2"));
    o.require(b <= 1.5e-3, format!("n=60 combined: {b:.2e} <= 1.5e-3"));

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut samples, mut worst) = (0, 0.0f64);
    while samples < 60 {
        let g = c(rng.gen_range(0.5..2.0), rng.gen_range(0.0..0.05));
        let nu = rng.gen_range(0.0..0.45);
        let m = material_from_engineering(g, nu, rng.gen_range(0.5..2.0)).expect("material");
        let nz = rng.gen_range(1..=6);
        let ops = semidiscretize_z_elastic(
            &ElasticProfile::uniform(1.0, m, nz).expect("profile"),
            rng.gen_range(0.5..5.0),
        );
        let modes = dispersion_modes(&ops).expect("modes");
        let mode = &modes[rng.gen_range(0..modes.len())];
        let l = c(rng.gen_range(0.05..3.0), rng.gen_range(-1.5..1.5));
        let Ok(res) = fixed_point_residual(l, &ops, mode) else {
            continue;
        };
        let phi = mode.phi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(res / (operator_scale(&ops) * phi));
        samples += 1;
    }
    o.require(
        worst <= 1e-9,
        format!("fixed-point residual {worst:.2e} over {samples} samples"),
    );
    o
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 table regression", table_regression),
        ("2 fixed-point suite", fixed_point_suite),
        ("3 condensed map real symmetric", hermitian_suite),
        ("4 spectra and propagator magnitude", spectrum_suite),
        ("5 approximation order", pade_order),
        ("6 elliptic convergence", e1),
        ("7 Helmholtz onset and reordering", e2),
        ("8 Laplace layer", e3),
        ("9 Helmholtz layer", e4),
        ("10 two subdomains", e5),
        ("11 elastic layer", e6),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} criterion {name} [{secs:.1}s]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.notes.join("; ")
        );
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
