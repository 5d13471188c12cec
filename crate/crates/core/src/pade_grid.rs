//! Complex element lengths from the poles of the diagonal Pade approximant
//! of the exponential.
//!
//! For `n` elements on an interval of length `L` the lengths are `2L / x_j`
//! where `x_j` are the roots of
//!
//! ```text
//! p_n(x) = sum_{j=0}^{n} (2n - j)! / (j! (n - j)!) (-x)^j
//! ```
//!
//! so that the product of Crank-Nicolson propagators over the mesh equals
//! the `[n/n]` Pade approximant of `exp(kL)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use dashu_int::IBig;
use num_complex::Complex64;

use crate::numerics::{companion_eigenvalues, refine_integer_poly_roots};
use crate::{CfemError, Result};

/// Largest supported element count. Coefficients are kept as exact integers
/// so the bound only limits the cost of root refinement.
pub const MAX_ELEMENTS: usize = 128;

/// Largest `n` for which reference lengths are tabulated.
pub const TABLE_MAX_N: usize = 16;

/// Coefficients of `p_n` in ascending powers of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PadePolynomial {
    pub n: usize,
    pub coeffs: Vec<IBig>,
}

impl PadePolynomial {
    /// Coefficients rounded to double precision.
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().value()).collect()
    }
}

pub fn pade_polynomial(n: usize) -> Result<PadePolynomial> {
    if n == 0 || n > MAX_ELEMENTS {
        return Err(CfemError::domain(format!(
            "element count must be in 1..={MAX_ELEMENTS}, got {n}"
        )));
    }
    // c_j = (2n-j)! / (j! (n-j)!) (-1)^j, built from c_n = (-1)^n downwards:
    // c_{j-1} / c_j = -(2n-j+1) j / (n-j+1)
    let mut coeffs = vec![IBig::from(0); n + 1];
    let mut c = if n.is_multiple_of(2) {
        IBig::from(1)
    } else {
        IBig::from(-1)
    };
    coeffs[n] = c.clone();
    for j in (1..=n).rev() {
        c = -(c * IBig::from(2 * n - j + 1) * IBig::from(j)) / IBig::from(n - j + 1);
        coeffs[j - 1] = c.clone();
    }
    Ok(PadePolynomial { n, coeffs })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridOrdering {
    PhaseMonotone,
    ConjugateInterleaved,
    CustomPermutation,
}

/// Ordered complex element lengths of one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeGrid {
    pub n: usize,
    pub total_length: f64,
    pub lengths: Vec<Complex64>,
    pub ordering: GridOrdering,
}

impl PadeGrid {
    /// Node coordinates: partial sums of the lengths, starting at 0.
    pub fn nodes(&self) -> Vec<Complex64> {
        let mut x = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(x);
        for l in &self.lengths {
            x += l;
            out.push(x);
        }
        out
    }

    pub fn sum(&self) -> Complex64 {
        self.lengths.iter().sum()
    }

    /// Largest `|Im|` over the node coordinates.
    pub fn max_imag_excursion(&self) -> f64 {
        self.nodes().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Same lengths, rearranged so that position `i` holds `lengths[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<PadeGrid> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n
            || perm
                .iter()
                .any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true))
        {
            return Err(CfemError::domain("not a permutation of the grid elements"));
        }
        Ok(PadeGrid {
            lengths: perm.iter().map(|&p| self.lengths[p]).collect(),
            ordering: GridOrdering::CustomPermutation,
            ..self.clone()
        })
    }

    pub fn scaled(&self, total_length: f64) -> PadeGrid {
        let s = total_length / self.total_length;
        PadeGrid {
            total_length,
            lengths: self.lengths.iter().map(|l| l * s).collect(),
            ..self.clone()
        }
    }
}

fn unit_cache() -> &'static Mutex<HashMap<usize, Vec<Complex64>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<Complex64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Roots of `p_n`, paired into exact conjugates (plus one real root for odd n).
fn pade_roots(n: usize) -> Result<Vec<Complex64>> {
    let poly = pade_polynomial(n)?;
    let seeds = companion_eigenvalues(&poly.coeffs_f64())?;
    let roots = refine_integer_poly_roots(&poly.coeffs, &seeds, 96 + 2 * n)?;
    pair_conjugates(roots)
}

fn pair_conjugates(mut roots: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = roots.len();
    roots.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()));
    let mut out = Vec::with_capacity(n);
    if n % 2 == 1 {
        out.push(Complex64::new(roots.remove(0).re, 0.0));
    }
    let (mut upper, mut lower): (Vec<_>, Vec<_>) = roots.into_iter().partition(|r| r.im > 0.0);
    if upper.len() != lower.len() {
        return Err(CfemError::Numerical {
            what: "roots do not split into conjugate pairs".into(),
            residual: f64::NAN,
        });
    }
    while let Some(r) = upper.pop() {
        let (k, _) = lower
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - r.conj()).norm().total_cmp(&(b.1 - r.conj()).norm()))
            .expect("equal counts");
        let partner = lower.swap_remove(k);
        let avg = (r + partner.conj()) * 0.5;
        out.push(avg);
        out.push(avg.conj());
    }
    Ok(out)
}

/// Element lengths `2L / x_j` in phase-monotone order.
pub fn element_lengths(n: usize, total_length: f64) -> Result<PadeGrid> {
    if !(total_length > 0.0) || !total_length.is_finite() {
        return Err(CfemError::domain(format!(
            "interval length must be positive, got {total_length}"
        )));
    }
    let cached = unit_cache().lock().unwrap().get(&n).cloned();
    let unit = match cached {
        Some(u) => u,
        None => {
            let u: Vec<Complex64> = pade_roots(n)?.iter().map(|x| 2.0 / x).collect();
            unit_cache().lock().unwrap().insert(n, u.clone());
            u
        }
    };
    let grid = PadeGrid {
        n,
        total_length,
        lengths: unit.iter().map(|l| l * total_length).collect(),
        ordering: GridOrdering::PhaseMonotone,
    };
    Ok(order_phase_monotone(&grid))
}

/// Sorts by increasing phase angle.
pub fn order_phase_monotone(grid: &PadeGrid) -> PadeGrid {
    let mut lengths = grid.lengths.clone();
    lengths.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    PadeGrid {
        lengths,
        ordering: GridOrdering::PhaseMonotone,
        ..grid.clone()
    }
}

/// Starting from phase-monotone order, swaps each even (1-based) position
/// `j <= n/2` with its mirror `n + 1 - j`.
pub fn reorder_conjugate_interleave(grid: &PadeGrid) -> PadeGrid {
    let mut out = order_phase_monotone(grid);
    let n = out.n;
    for j in (2..=n / 2).step_by(2) {
        out.lengths.swap(j - 1, n - j);
    }
    out.ordering = GridOrdering::ConjugateInterleaved;
    out
}

/// Rows of the reference table: conjugate pairs as `(re, |im|)` followed by
/// the real element when `n` is odd.
const TABLE: [&[f64]; TABLE_MAX_N] = [
    &[1.00000000000000],
    &[0.50000000000000, 0.28867513459481],
    &[0.28468557688388, 0.27159985141630, 0.43062884623222],
    &[
        0.18313248053143,
        0.23132522602625,
        0.31686751946856,
        0.09488202514221,
    ],
    &[
        0.12803667831541,
        0.19668213834621,
        0.23485450871940,
        0.12209940763707,
        0.27421762593037,
    ],
    &[
        0.09489061789607,
        0.16944514819433,
        0.17914640739749,
        0.12594324946340,
        0.22596297470643,
        0.04614135671779,
    ],
    &[
        0.07338559568636,
        0.14811940741461,
        0.14065739395847,
        0.12154781833235,
        0.18538954553266,
        0.06776497788782,
        0.20113492964499,
    ],
    &[
        0.05861791492234,
        0.13119236974564,
        0.11325833004971,
        0.11445496413908,
        0.15337794771885,
        0.07709430353886,
        0.17474580730908,
        0.02713226173787,
    ],
    &[
        0.04802049907890,
        0.11752570488080,
        0.09316287173966,
        0.10679717990370,
        0.12840441052931,
        0.08014721079992,
        0.15100957026047,
        0.04281546509628,
        0.158805296783284,
    ],
    &[
        0.04014472910062,
        0.10630697796687,
        0.07802273616547,
        0.09940003581225,
        0.10881874816902,
        0.07996015060428,
        0.13078256453612,
        0.05163001172938,
        0.14223122202876,
        0.01782841382104,
    ],
    &[
        0.03412261657800,
        0.09695789626293,
        0.06634486381072,
        0.09256005182226,
        0.09329088025857,
        0.07811366645707,
        0.11386072467713,
        0.05628616844255,
        0.12678425930221,
        0.02942684799389,
        0.131193310746699,
    ],
    &[
        0.02940803944815,
        0.08906181395662,
        0.05715192456673,
        0.08635352530097,
        0.08082582076929,
        0.07545289071966,
        0.09976290741316,
        0.05839885662872,
        0.11301395814524,
        0.03687019624343,
        0.11983734965741,
        0.01259866487095,
    ],
    &[
        0.02564318775369,
        0.08231355321087,
        0.04978573946440,
        0.08076582096948,
        0.07069390925651,
        0.07243833050796,
        0.08799247146698,
        0.05894563008011,
        0.10097469339377,
        0.04152986688324,
        0.10902977699627,
        0.02144314210934,
        0.11176044333671,
    ],
    &[
        0.02258550311646,
        0.07648569373967,
        0.04379127631258,
        0.07574740948845,
        0.06236027779351,
        0.06932300610809,
        0.07811546938314,
        0.05852853926583,
        0.09053178744825,
        0.04431195125450,
        0.09911464460927,
        0.02760255210502,
        0.10350104133675,
        0.00937153174338,
    ],
    &[
        0.02006570730347,
        0.07140591920396,
        0.03884638966705,
        0.07123849065223,
        0.05542991160544,
        0.06624511011050,
        0.06977487505357,
        0.05752432367232,
        0.08149231310591,
        0.04581962272804,
        0.09018490369015,
        0.03183750267162,
        0.09553514496841,
        0.01630985840134,
        0.09734150921194,
    ],
    &[
        0.01796266496341,
        0.06694162366630,
        0.03471809507502,
        0.06717964470869,
        0.04960794930403,
        0.06327803486714,
        0.06268398209122,
        0.05617188543383,
        0.07365957371625,
        0.04645858465651,
        0.08221667350938,
        0.03468717833984,
        0.08808374597041,
        0.02141958057287,
        0.09106731537025,
        0.00724175169196,
    ],
];

/// Tabulated unit-interval lengths for `n`, expanded to all `n` elements.
pub fn table_lengths(n: usize) -> Result<Vec<Complex64>> {
    if n == 0 || n > TABLE_MAX_N {
        return Err(CfemError::domain(format!("no table row for n = {n}")));
    }
    let row = TABLE[n - 1];
    let mut out = Vec::with_capacity(n);
    for pair in row[..2 * (n / 2)].chunks(2) {
        out.push(Complex64::new(pair[0], pair[1]));
        out.push(Complex64::new(pair[0], -pair[1]));
    }
    if n % 2 == 1 {
        out.push(Complex64::new(row[n - 1], 0.0));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TableReport {
    pub n: usize,
    /// `(table entry, computed length, |computed - table| / |table|)`.
    pub entries: Vec<(Complex64, Complex64, f64)>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Tolerance on the per-element relative deviation from the table.
pub const TABLE_TOLERANCE: f64 = 1e-12;

pub fn validate_against_table(n: usize) -> Result<TableReport> {
    let table = table_lengths(n)?;
    let grid = element_lengths(n, 1.0)?;
    let mut remaining = grid.lengths.clone();
    let mut entries = Vec::with_capacity(n);
    for t in table {
        let (k, _) = remaining
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).norm().total_cmp(&(b.1 - t).norm()))
            .expect("same count");
        let l = remaining.swap_remove(k);
        entries.push((t, l, (l - t).norm() / t.norm()));
    }
    let max_deviation = entries.iter().map(|e| e.2).fold(0.0, f64::max);
    Ok(TableReport {
        n,
        entries,
        max_deviation,
        passed: max_deviation <= TABLE_TOLERANCE,
    })
}
