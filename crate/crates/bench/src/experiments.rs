//! Sweep drivers for the six convergence studies.

use std::time::Instant;

use cfem_core::elastic::{
    material_from_engineering, regular_fem_elastic, semidiscretize_z_elastic,
    solve_elastic_multidomain, traction_load_left, ElasticProfile, ElasticVerticalOperators,
};
use cfem_core::layered::{
    assemble_2d_with, bump_load, interface_error, neumann_load_left, regular_fem_baseline_with,
    semidiscretize_z, solve_2d, LayerProfile, Segment, SubdomainSpec, VerticalOperators,
};
use cfem_core::pade_grid::{
    element_lengths, order_phase_monotone, reorder_conjugate_interleave, PadeGrid,
};
use cfem_core::scalar::{exact_u0, relative_error, solve_two_point};
use cfem_core::Complex64;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentId, Ordering};
use crate::BenchError;

/// One sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub experiment: String,
    pub n: usize,
    pub param: f64,
    pub error: f64,
    pub seconds: f64,
    /// `phase` or `interleave` for complex grids, `fem` for the regular baseline.
    pub ordering: String,
}

pub fn grid(n: usize, length: f64, ordering: Ordering) -> cfem_core::Result<PadeGrid> {
    let g = element_lengths(n, length)?;
    Ok(match ordering {
        Ordering::Phase => order_phase_monotone(&g),
        Ordering::Interleave => reorder_conjugate_interleave(&g),
    })
}

fn annotate(point: String) -> impl Fn(cfem_core::CfemError) -> BenchError {
    move |source| BenchError::Solver {
        point: point.clone(),
        source,
    }
}

fn timed<T>(timing: bool, f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (
        v,
        if timing {
            t.elapsed().as_secs_f64()
        } else {
            0.0
        },
    )
}

/// Worker pool honoring `CFEM_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool, BenchError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CFEM_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            BenchError::Config(format!(
                "CFEM_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| BenchError::Config(e.to_string()))
}

/// Runs the whole sweep of `config`. Records come back sorted by
/// `(param, n, experiment, ordering)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>, BenchError> {
    config.validate()?;
    let pool = thread_pool()?;
    let mut records = pool.install(|| match config.experiment {
        ExperimentId::E1Elliptic | ExperimentId::E2Helmholtz1d => run_1d(config),
        ExperimentId::E6Elastic => run_elastic(config),
        _ => run_layered(config),
    })?;
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [ConvergenceRecord]) {
    records.sort_by(|a, b| {
        a.param
            .total_cmp(&b.param)
            .then(a.n.cmp(&b.n))
            .then_with(|| a.experiment.cmp(&b.experiment))
            .then_with(|| a.ordering.cmp(&b.ordering))
    });
}

/// `lambda` of the 1D experiments: `k^2` for E1, `-omega^2` for E2.
pub fn lambda_1d(id: ExperimentId, param: f64) -> Complex64 {
    match id {
        ExperimentId::E2Helmholtz1d => Complex64::new(-param * param, 0.0),
        _ => Complex64::new(param * param, 0.0),
    }
}

/// Relative error of the Neumann-end value for unit flux at x = 0 and
/// u = 0 at x = L.
pub fn bvp1d_point(
    lambda: Complex64,
    n: usize,
    length: f64,
    ordering: Ordering,
) -> cfem_core::Result<(Complex64, f64)> {
    let g = grid(n, length, ordering)?;
    let one = Complex64::new(1.0, 0.0);
    let u0 = solve_two_point(&g, lambda, one, Complex64::new(0.0, 0.0))?.u0;
    Ok((u0, relative_error(exact_u0(lambda, length), u0)))
}

fn run_1d(c: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>, BenchError> {
    let points: Vec<(f64, usize)> = c
        .params
        .iter()
        .flat_map(|&p| c.n.iter().map(move |&n| (p, n)))
        .collect();
    points
        .par_iter()
        .map(|&(p, n)| {
            let lam = lambda_1d(c.experiment, p);
            let (r, secs) = timed(c.timing, || bvp1d_point(lam, n, c.length, c.ordering));
            let (_, error) = r.map_err(annotate(format!("{} param={p} n={n}", c.experiment)))?;
            Ok(ConvergenceRecord {
                experiment: c.experiment.to_string(),
                n,
                param: p,
                error,
                seconds: secs,
                ordering: c.ordering.as_str().into(),
            })
        })
        .collect()
}

fn modulus(c: &ExperimentConfig) -> Complex64 {
    Complex64::new(c.modulus[0], c.modulus[1])
}

fn segments(c: &ExperimentConfig) -> Vec<Segment> {
    c.subdomains
        .iter()
        .map(|s| Segment {
            x_length: s.length,
            modulus_scale: Complex64::new(s.scale, 0.0),
        })
        .collect()
}

fn specs(c: &ExperimentConfig, n: usize) -> cfem_core::Result<Vec<SubdomainSpec>> {
    c.subdomains
        .iter()
        .map(|s| {
            Ok(SubdomainSpec::new(
                grid(n, s.length, c.ordering)?,
                Complex64::new(s.scale, 0.0),
            ))
        })
        .collect()
}

/// Which subdomain-end columns enter the error: the loaded edge for the
/// single-layer studies, every interface for the multi-domain ones.
pub fn error_columns(id: ExperimentId, ends: usize) -> Vec<usize> {
    match id {
        ExperimentId::E3Laplace2d | ExperimentId::E4Helmholtz2d => vec![0],
        _ => (0..ends).collect(),
    }
}

fn stack(cols: &[Vec<Complex64>], which: &[usize]) -> Vec<Complex64> {
    which
        .iter()
        .flat_map(|&i| cols[i].iter().copied())
        .collect()
}

/// Precomputed pieces of a scalar layered study.
pub struct LayeredSetup {
    pub ops: VerticalOperators,
    pub load: Vec<Complex64>,
    pub reference: Vec<Vec<Complex64>>,
}

pub fn layered_setup(c: &ExperimentConfig) -> Result<LayeredSetup, BenchError> {
    let profile = LayerProfile::uniform(c.height, modulus(c), c.rho, c.nz)
        .map_err(annotate(format!("{} profile", c.experiment)))?;
    let ops = semidiscretize_z(&profile);
    let load = neumann_load_left(&profile, bump_load);
    let reference =
        regular_fem_baseline_with(&ops, &segments(c), c.omega, c.reference_nx, &load).map_err(
            annotate(format!("{} reference nx={}", c.experiment, c.reference_nx)),
        )?;
    Ok(LayeredSetup {
        ops,
        load,
        reference,
    })
}

/// CFEM solution at the subdomain ends for `n` elements per subdomain.
pub fn layered_cfem(
    c: &ExperimentConfig,
    s: &LayeredSetup,
    n: usize,
) -> cfem_core::Result<Vec<Vec<Complex64>>> {
    let sys = assemble_2d_with(&s.ops, &specs(c, n)?, c.omega)?;
    let field = solve_2d(&sys, &s.load)?;
    Ok(sys
        .interface_nodes
        .iter()
        .map(|&i| field.columns[i].clone())
        .collect())
}

fn run_layered(c: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>, BenchError> {
    let s = layered_setup(c)?;
    let cols = error_columns(c.experiment, c.subdomains.len() + 1);
    let reference = stack(&s.reference, &cols);
    let cfem = c.n.par_iter().map(|&n| {
        let point = format!("{} n={n}", c.experiment);
        let (u, secs) = timed(c.timing, || layered_cfem(c, &s, n));
        let u = u.map_err(annotate(point.clone()))?;
        let error = interface_error(&stack(&u, &cols), &reference).map_err(annotate(point))?;
        Ok(record(c, n, error, secs, c.ordering.as_str()))
    });
    let segs = segments(c);
    let fem = c.baseline.par_iter().map(|&nx| {
        let point = format!("{} fem nx={nx}", c.experiment);
        let (u, secs) = timed(c.timing, || {
            regular_fem_baseline_with(&s.ops, &segs, c.omega, nx, &s.load)
        });
        let u = u.map_err(annotate(point.clone()))?;
        let error = interface_error(&stack(&u, &cols), &reference).map_err(annotate(point))?;
        Ok(record(c, nx, error, secs, "fem"))
    });
    cfem.chain(fem).collect()
}

fn record(
    c: &ExperimentConfig,
    n: usize,
    error: f64,
    seconds: f64,
    ordering: &str,
) -> ConvergenceRecord {
    ConvergenceRecord {
        experiment: c.experiment.to_string(),
        n,
        param: c.omega,
        error,
        seconds,
        ordering: ordering.into(),
    }
}

pub struct ElasticSetup {
    pub ops: ElasticVerticalOperators,
    pub load: Vec<Complex64>,
    pub reference: Vec<Vec<Complex64>>,
}

pub fn elastic_setup(c: &ExperimentConfig) -> Result<ElasticSetup, BenchError> {
    let point = |s: &str| annotate(format!("{} {s}", c.experiment));
    let m = material_from_engineering(modulus(c), c.nu, c.rho).map_err(point("material"))?;
    let profile = ElasticProfile::uniform(c.height, m, c.nz).map_err(point("profile"))?;
    let ops = semidiscretize_z_elastic(&profile, c.omega);
    let load = traction_load_left(&profile, bump_load, |_| 0.0);
    let reference = regular_fem_elastic(&ops, &segments(c), c.reference_nx, &load)
        .map_err(point("reference"))?;
    Ok(ElasticSetup {
        ops,
        load,
        reference,
    })
}

pub fn elastic_cfem(
    c: &ExperimentConfig,
    s: &ElasticSetup,
    n: usize,
) -> cfem_core::Result<Vec<Vec<Complex64>>> {
    solve_elastic_multidomain(&s.ops, &specs(c, n)?, &s.load)
}

/// Combined error over all interfaces plus one record per interface,
/// tagged `e6_elastic@x=<position>`.
fn elastic_records(
    c: &ExperimentConfig,
    u: &[Vec<Complex64>],
    reference: &[Vec<Complex64>],
    n: usize,
    secs: f64,
    ordering: &str,
) -> cfem_core::Result<Vec<ConvergenceRecord>> {
    let all: Vec<usize> = (0..reference.len()).collect();
    let mut out = vec![record(
        c,
        n,
        interface_error(&stack(u, &all), &stack(reference, &all))?,
        secs,
        ordering,
    )];
    let mut x = 0.0;
    for i in 0..reference.len() {
        let mut r = record(c, n, interface_error(&u[i], &reference[i])?, secs, ordering);
        r.experiment = format!("{}@x={x}", c.experiment);
        out.push(r);
        if i < c.subdomains.len() {
            x += c.subdomains[i].length;
        }
    }
    Ok(out)
}

fn run_elastic(c: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>, BenchError> {
    let s = elastic_setup(c)?;
    let segs = segments(c);
    let cfem = c.n.par_iter().map(|&n| {
        let point = format!("{} n={n}", c.experiment);
        let (u, secs) = timed(c.timing, || elastic_cfem(c, &s, n));
        let u = u.map_err(annotate(point.clone()))?;
        elastic_records(c, &u, &s.reference, n, secs, c.ordering.as_str()).map_err(annotate(point))
    });
    let fem = c.baseline.par_iter().map(|&nx| {
        let point = format!("{} fem nx={nx}", c.experiment);
        let (u, secs) = timed(c.timing, || regular_fem_elastic(&s.ops, &segs, nx, &s.load));
        let u = u.map_err(annotate(point.clone()))?;
        elastic_records(c, &u, &s.reference, nx, secs, "fem").map_err(annotate(point))
    });
    let nested: Vec<Vec<ConvergenceRecord>> = cfem.chain(fem).collect::<Result<_, BenchError>>()?;
    Ok(nested.into_iter().flatten().collect())
}
