//! Runtime verification suites.
//!
//! Each suite draws seeded random instances, checks one invariant on each and
//! counts passes and failures. Failures are reported, never raised.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use varlp::conditions::{
    ainfty_search, apvar_search, b_function, chain31, chain45, operator_norm_estimate, rh_search,
    OperatorTag, TestFamily,
};
use varlp::decomp::{besicovitch_extract, build_cz_levels, cz_decompose, MarkedCube};
use varlp::maximal::{
    averaging_operator, dyadic_maximal_on_cube, hl_maximal, median_maximal, shift_domination_check,
    shifted_median_maximal, FamilyMember,
};
use varlp::modular::{check_modular_norm_sandwich, luxemburg_norm};
use varlp::{reference, CellMask, Cube, ExponentField, Grid, GridFunction, WeightedFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    /// Instance-count multiplier over the quick scale.
    fn scale(self) -> usize {
        match self {
            Self::Quick => 1,
            Self::Full => 20,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quick => "quick",
            Self::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub passed: u64,
    pub failed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub wall_time_secs: f64,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.ok() { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}", self.name)?;
        if let Some(l) = self.lambda {
            write!(f, " (lambda={l})")?;
        }
        write!(
            f,
            ": {} passed, {} failed ({:.2}s)",
            self.passed, self.failed, self.wall_time_secs
        )?;
        if let Some(msg) = &self.first_failure {
            write!(f, "; first failure: {msg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub level: Level,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
}

/// Median maximal operator under test in the level-set suite.
pub type MedianFn = fn(&GridFunction, f64) -> varlp::Result<GridFunction>;

/// Pass/fail counter for one suite.
struct Tally {
    name: &'static str,
    lambda: Option<f64>,
    passed: u64,
    failed: u64,
    first_failure: Option<String>,
    start: Instant,
}

impl Tally {
    fn new(name: &'static str, lambda: Option<f64>) -> Self {
        Self { name, lambda, passed: 0, failed: 0, first_failure: None, start: Instant::now() }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.first_failure.get_or_insert_with(msg);
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.into(),
            lambda: self.lambda,
            passed: self.passed,
            failed: self.failed,
            first_failure: self.first_failure,
            wall_time_secs: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Line or rectangle with at most `max_cells` cells.
pub fn random_grid(rng: &mut ChaCha8Rng, max_cells: usize, cell_side: f64) -> Grid {
    if rng.gen_bool(0.5) {
        Grid::new(vec![rng.gen_range(1..=max_cells)], cell_side).expect("valid extent")
    } else {
        let rows = rng.gen_range(1..=max_cells.min(16));
        let cols = rng.gen_range(1..=(max_cells / rows).max(1));
        Grid::new(vec![rows, cols], cell_side).expect("valid extent")
    }
}

/// Integers in `[-max, max]`, so sums and averages of small sets are exact.
pub fn int_function(rng: &mut ChaCha8Rng, grid: &Grid, max: i32) -> GridFunction {
    let v = (0..grid.cell_count()).map(|_| f64::from(rng.gen_range(-max..=max))).collect();
    GridFunction::new(grid, v).expect("finite")
}

pub fn real_function(rng: &mut ChaCha8Rng, grid: &Grid) -> GridFunction {
    let v = (0..grid.cell_count())
        .map(|_| match rng.gen_range(0..4) {
            0 => 0.0,
            1 => rng.gen_range(1e-3..1e-1),
            _ => rng.gen_range(-50.0..50.0),
        })
        .collect();
    GridFunction::new(grid, v).expect("finite")
}

pub fn random_exponent(rng: &mut ChaCha8Rng, grid: &Grid, p_max: f64) -> ExponentField {
    let v = (0..grid.cell_count())
        .map(|_| if rng.gen_bool(0.1) { 1.0 } else { rng.gen_range(1.0..=p_max) })
        .collect();
    ExponentField::new(grid, v).expect("valid exponents")
}

/// Largest dyadic cube at a random anchor.
fn random_dyadic(rng: &mut ChaCha8Rng, grid: &Grid) -> Cube {
    let side = 1usize << (usize::BITS - 1 - grid.max_side().leading_zeros());
    let side = side >> rng.gen_range(0..=side.trailing_zeros().min(1));
    let anchor = grid.extent().iter().map(|&n| rng.gen_range(0..=n - side)).collect();
    Cube::new(anchor, side)
}

/// Random pairwise disjoint cubes, proposed greedily.
fn disjoint_cubes(rng: &mut ChaCha8Rng, grid: &Grid) -> Vec<Cube> {
    let mut out: Vec<Cube> = Vec::new();
    for _ in 0..rng.gen_range(0..12) {
        let side = rng.gen_range(1..=grid.max_side());
        let anchor = grid.extent().iter().map(|&n| rng.gen_range(0..=n - side)).collect();
        let q = Cube::new(anchor, side);
        if out.iter().all(|c| !c.intersects(&q)) {
            out.push(q);
        }
    }
    out
}

fn exact_le(a: &[f64], b: &[f64], scale: f64) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| *x > y * scale)
}

pub fn norm_constant_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    let mut t = Tally::new("norm-constant-exponent", None);
    for i in 0..count {
        let q = [1.0, 1.5, 2.0, 4.0][i % 4];
        let h = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let g = random_grid(rng, 64, h);
        let f = real_function(rng, &g);
        let p = ExponentField::constant(&g, q).expect("valid");
        let norm = luxemburg_norm(&f, &p, &CellMask::full(&g), varlp::DEFAULT_TOL).expect("norm");
        let classical = (f.values().iter().map(|v| v.abs().powf(q)).sum::<f64>()
            * g.cell_measure())
        .powf(1.0 / q);
        let ok = if classical == 0.0 {
            norm == 0.0
        } else {
            (norm - classical).abs() <= 1e-10 * classical
        };
        t.check(ok, || format!("q={q}, h={h}: norm {norm} vs classical {classical}"));
    }
    t.finish()
}

pub fn sandwich_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    let mut t = Tally::new("modular-norm-sandwich", None);
    let mut branches = [0u64; 2];
    for i in 0..count {
        let g = random_grid(rng, 64, 1.0);
        let p = random_exponent(rng, &g, 8.0);
        let mut region = CellMask::empty(&g);
        for c in 0..g.cell_count() {
            if rng.gen_bool(0.6) {
                region.insert(c);
            }
        }
        if region.is_empty() {
            region.insert(rng.gen_range(0..g.cell_count()));
        }
        let f = real_function(rng, &g);
        let base = luxemburg_norm(&f, &p, &region, varlp::DEFAULT_TOL).expect("norm");
        // Alternate the target branch by rescaling.
        let target = if i % 2 == 0 { rng.gen_range(1.5..100.0) } else { rng.gen_range(0.01..0.9) };
        let f = if base > 0.0 { f.scale(target / base) } else { f };
        match check_modular_norm_sandwich(&f, &p, &region, 1e-10) {
            Ok(rep) => {
                branches[usize::from(rep.above_one)] += 1;
                t.check(rep.holds(), || format!("{rep:?}"));
            }
            Err(e) => t.check(false, || e.to_string()),
        }
    }
    t.check(count < 2 || branches.iter().all(|&b| b > 0), || {
        format!("branch coverage below/above one: {branches:?}")
    });
    t.finish()
}

/// Mismatching thresholds in `{m_λ f > α} = {M χ_{|f|>α} > λ}` over every
/// `α` in the value set of `|f|` and 0.
pub fn level_set_mismatches(f: &GridFunction, lambda: f64, median: MedianFn) -> usize {
    let Ok(m) = median(f, lambda) else {
        return usize::MAX;
    };
    let mut alphas: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    alphas.push(0.0);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    alphas
        .into_iter()
        .filter(|&alpha| {
            let chi = GridFunction::indicator(&f.abs().superlevel(alpha));
            m.superlevel(alpha) != hl_maximal(&chi).superlevel(lambda)
        })
        .count()
}

pub fn level_set_suite(
    rng: &mut ChaCha8Rng,
    count: usize,
    lambda: f64,
    median: MedianFn,
) -> SuiteResult {
    let mut t = Tally::new("level-set-identity", Some(lambda));
    for i in 0..count {
        let g = random_grid(rng, 64, 1.0);
        let f = if i % 2 == 0 { int_function(rng, &g, 5) } else { real_function(rng, &g) };
        let bad = level_set_mismatches(&f, lambda, median);
        t.check(bad == 0, || format!("{bad} mismatching thresholds on {:?}", g.extent()));
    }
    t.finish()
}

pub fn domination_suite(rng: &mut ChaCha8Rng, count: usize, lambda: f64) -> SuiteResult {
    let mut t = Tally::new("pointwise-dominations", Some(lambda));
    for _ in 0..count {
        let g = random_grid(rng, 64, 1.0);
        let f = int_function(rng, &g, 30);
        let mf = hl_maximal(&f);
        let m = median_maximal(&f, lambda).expect("valid lambda");
        let bad = exact_le(m.values(), mf.values(), 1.0 / lambda);
        t.check(bad.is_none(), || format!("m_lambda f > Mf/lambda at cell {bad:?}"));

        let cubes = disjoint_cubes(rng, &g);
        let fam = WeightedFamily::from_cubes(&g, cubes.clone()).expect("disjoint");
        let tf: Vec<f64> = averaging_operator(&f, &fam)
            .expect("same grid")
            .values()
            .iter()
            .map(|v| v.abs())
            .collect();
        let bad = exact_le(&tf, mf.values(), 1.0);
        t.check(bad.is_none(), || format!("|T f| > Mf at cell {bad:?}"));

        let members: Vec<FamilyMember> = cubes
            .into_iter()
            .map(|q| {
                let mut cells = g.cells_of(&q);
                cells.shuffle(rng);
                let keep = (lambda * cells.len() as f64).ceil() as usize;
                cells.truncate(keep.max(1));
                FamilyMember::with_subset(q, f64::from(rng.gen_range(1..=16)), cells)
            })
            .collect();
        let fam = WeightedFamily::new(&g, members).expect("disjoint");
        let full = fam.indicator_sum();
        let part = fam.subset_sum().expect("subsets");
        let avg = averaging_operator(&part, &fam).expect("same grid");
        let bad = exact_le(full.values(), avg.values(), 1.0 / lambda);
        t.check(bad.is_none(), || format!("family sum > T(sum on subsets)/lambda at {bad:?}"));
        let s = lambda * rng.gen_range(0.01..0.99);
        let med = median_maximal(&part, s).expect("valid");
        let bad = exact_le(full.values(), med.values(), 1.0);
        t.check(bad.is_none(), || format!("family sum > m_{s}(sum on subsets) at {bad:?}"));
    }
    t.finish()
}

pub fn shift_domination_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    let mut t = Tally::new("shifted-median-domination", None);
    for _ in 0..count {
        let g = random_grid(rng, 64, 1.0);
        let f = int_function(rng, &g, 8);
        let s = rng.gen_range(0.05..0.95);
        match shift_domination_check(&f, s, 0.5) {
            Ok(rep) => t.check(rep.violations == 0, || format!("{rep:?}")),
            Err(e) => t.check(false, || e.to_string()),
        }
    }
    t.finish()
}

pub fn fast_reference_suite(rng: &mut ChaCha8Rng, count: usize, lambdas: &[f64]) -> SuiteResult {
    let mut t = Tally::new("fast-vs-reference", None);
    for _ in 0..count {
        let g = random_grid(rng, 48, 1.0);
        let f = int_function(rng, &g, 10);
        t.check(hl_maximal(&f).values() == reference::hl_maximal(&f), || "maximal".into());
        for &l in lambdas {
            let fast = median_maximal(&f, l).expect("valid");
            t.check(fast.values() == reference::median_maximal(&f, l), || format!("median {l}"));
        }
        let (tau, r) = (rng.gen_range(0.01..0.99), rng.gen_range(0.05..0.999));
        let fast = shifted_median_maximal(&f, tau, r).expect("valid");
        t.check(fast.values() == reference::shifted_median_maximal(&f, tau, r), || {
            format!("shifted median tau={tau} r={r}")
        });
        let root = random_dyadic(rng, &g);
        let local = dyadic_maximal_on_cube(&f, &root).expect("dyadic");
        let brute = reference::dyadic_maximal(&g, &f, &root);
        let same = g.cells_of(&root).into_iter().zip(brute).all(|(c, b)| local.get(c) == Some(b));
        t.check(same, || format!("dyadic maximal on {root:?}"));
    }
    t.finish()
}

pub fn cz_suite(rng: &mut ChaCha8Rng, count: usize, lambda: f64) -> SuiteResult {
    let mut t = Tally::new("calderon-zygmund", Some(lambda));
    for _ in 0..count {
        let g = random_grid(rng, 64, 1.0);
        let v = int_function(rng, &g, 20).abs();
        let root = random_dyadic(rng, &g);
        let threshold = f64::from(rng.gen_range(1..60)) / 4.0;
        let cubes = cz_decompose(&v, &root, threshold).expect("valid input");
        let mut union = CellMask::empty(&g);
        for q in &cubes {
            union = union.union(&CellMask::from_cube(&g, q).expect("inside"));
        }
        let local = dyadic_maximal_on_cube(&v, &root).expect("dyadic");
        let brute = reference::dyadic_maximal(&g, &v, &root);
        let same = g.cells_of(&root).into_iter().zip(brute).all(|(c, b)| {
            let m = local.get(c).expect("in root");
            m == b && union.contains(c) == (m > threshold)
        });
        t.check(same, || format!("union vs dyadic superlevel on {root:?} at {threshold}"));

        let levels = build_cz_levels(&v, &root, lambda, 0..=4).expect("valid input");
        let sizes = levels
            .levels
            .iter()
            .flat_map(|l| &l.cubes)
            .all(|p| p.remainder.len() as f64 >= lambda * p.cube.cell_count() as f64);
        t.check(levels.fraction_holds && levels.nested && sizes, || {
            format!("levels on {root:?}: min fraction {}", levels.min_remainder_fraction)
        });
    }
    t.finish()
}

/// Random marked cubes with each mark in the cube's `r`-core.
pub fn random_marked(rng: &mut ChaCha8Rng, grid: &Grid, r: f64) -> Vec<MarkedCube> {
    let cubes = grid.all_cubes();
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(1..40) {
        let cube = cubes[rng.gen_range(0..cubes.len())].clone();
        let core = grid.core_cells(&cube, r).expect("inside").cells();
        if !core.is_empty() {
            out.push(MarkedCube { cell: core[rng.gen_range(0..core.len())], cube });
        }
    }
    out
}

pub fn extraction_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    let mut t = Tally::new("covering-extraction", None);
    for _ in 0..count {
        let g = random_grid(rng, 64, 1.0);
        let r = if rng.gen_bool(0.5) { 0.5 } else { rng.gen_range(0.1..0.95) };
        let points = random_marked(rng, &g, r);
        let ext = match besicovitch_extract(&g, &points, r) {
            Ok(e) => e,
            Err(e) => {
                t.check(false, || e.to_string());
                continue;
            }
        };
        let cover = ext.subcover();
        let covered = points.iter().all(|p| {
            let xy = g.coords(p.cell);
            cover.iter().any(|q| q.contains_coords(xy))
        });
        t.check(covered, || "a marked cell is not covered".into());
        let mut seen = vec![0usize; ext.selected.len()];
        let mut disjoint = true;
        for fam in &ext.subfamilies {
            for (i, &a) in fam.iter().enumerate() {
                seen[a] += 1;
                for &b in &fam[..i] {
                    disjoint &= !cover[a].intersects(cover[b]);
                }
            }
        }
        t.check(disjoint && seen.iter().all(|&s| s == 1), || "subfamilies overlap".into());
        t.check(besicovitch_extract(&g, &points, r).ok().as_ref() == Some(&ext), || {
            "rerun differs".into()
        });
    }
    t.finish()
}

pub fn chains_suite() -> SuiteResult {
    let mut t = Tally::new("constant-chains", None);
    match chain31(2.0, 1.0, 2.0, 2.0, 1.5) {
        Ok(c) => {
            t.check(c.k == 4.0 && c.epsilon == 1.0 / 3.0 && c.a == 16.0 && c.delta == 0.5, || {
                format!("{c:?}")
            });
            t.check((c.eta_identity() - 0.5).abs() <= 1e-12, || format!("{c:?}"));
        }
        Err(e) => t.check(false, || e.to_string()),
    }
    match chain45(0.5, 0.5, 1, 1.0, 1.0, 2.0, 2.0) {
        Ok(c) => {
            t.check(c.nu == 0.5 && c.t == 0.75 && c.r == 13.0 / 14.0 && c.gamma == 0.5, || {
                format!("{c:?}")
            });
            t.check(c.nu < c.t * c.r - (1.0 - c.r), || format!("{c:?}"));
        }
        Err(e) => t.check(false, || e.to_string()),
    }
    t.finish()
}

/// `b(Q) = 0` for constant exponents on every cube of the given grids.
pub fn b_constant_suite(grids: &[Grid], exponents: &[f64]) -> SuiteResult {
    let mut t = Tally::new("b-constant-exponent", None);
    for g in grids {
        for &q in exponents {
            let p = ExponentField::constant(g, q).expect("valid");
            for cube in g.all_cubes() {
                match b_function(&p, &cube, 2.0, 1.0) {
                    Ok(b) => t.check(b.b == 0.0 && b.t_q.is_none(), || format!("{cube:?}: {b:?}")),
                    Err(e) => t.check(false, || e.to_string()),
                }
            }
        }
    }
    t.finish()
}

/// The 𝒜∞ search on `p ≡ q` reaches `λ^{-1/q}` and never exceeds it.
pub fn ainfty_constant_suite(grids: &[Grid], lambda: f64, budget: u64, seed: u64) -> SuiteResult {
    let mut t = Tally::new("ainfty-constant-extremum", Some(lambda));
    for g in grids {
        for q in [1.5, 2.0, 3.0] {
            let p = ExponentField::constant(g, q).expect("valid");
            let exact = lambda.powf(-1.0 / q);
            match ainfty_search(&p, lambda, budget, seed) {
                Ok(rep) => t.check(
                    (rep.best_ratio - exact).abs() <= 1e-6 && rep.best_ratio <= exact + 1e-9,
                    || format!("q={q} on {:?}: {} vs {exact}", g.extent(), rep.best_ratio),
                ),
                Err(e) => t.check(false, || e.to_string()),
            }
        }
    }
    t.finish()
}

/// Every search's witness reproduces the reported ratio bit for bit.
pub fn witness_suite(grid: &Grid, budget: u64, seed: u64) -> SuiteResult {
    let mut t = Tally::new("witness-reevaluation", None);
    let n = grid.cell_count();
    let values = (0..n).map(|c| if 2 * c < n { 1.5 } else { 3.0 }).collect();
    let p = ExponentField::new(grid, values).expect("valid");
    let mut reports = vec![
        ainfty_search(&p, 0.5, budget, seed),
        apvar_search(&p, budget, seed),
        rh_search(&p, 2.0, budget, seed),
    ];
    for tag in [
        OperatorTag::Maximal,
        OperatorTag::Median { lambda: 0.5 },
        OperatorTag::ShiftedMedian { tau: 0.25, r: 0.5 },
        OperatorTag::AveragingUniform,
    ] {
        reports.push(operator_norm_estimate(tag, &p, TestFamily::All, budget, seed));
    }
    for rep in reports {
        match rep {
            Ok(rep) => {
                let again = rep.reevaluate(&p);
                t.check(again.as_ref().ok() == Some(&rep.best_ratio), || {
                    format!("{}: {} vs {again:?}", rep.condition, rep.best_ratio)
                });
            }
            Err(e) => t.check(false, || e.to_string()),
        }
    }
    t.finish()
}

/// Runs every suite; λ-dependent suites repeat once per entry of `lambdas`.
pub fn verify_suite(level: Level, lambdas: &[f64], seed: u64) -> VerifySummary {
    verify_with(level, lambdas, seed, median_maximal)
}

/// [`verify_suite`] with the median maximal operator replaced by `median`.
pub fn verify_with(level: Level, lambdas: &[f64], seed: u64, median: MedianFn) -> VerifySummary {
    let k = level.scale();
    let mut stream = 0u64;
    let mut rng = || {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        stream += 1;
        r
    };
    let mut suites =
        vec![norm_constant_suite(&mut rng(), 1000 * k), sandwich_suite(&mut rng(), 1000 * k)];
    for &l in lambdas {
        suites.push(level_set_suite(&mut rng(), 200 * k, l, median));
        suites.push(domination_suite(&mut rng(), 200 * k, l));
        suites.push(cz_suite(&mut rng(), 100 * k, l));
    }
    suites.push(shift_domination_suite(&mut rng(), 100 * k));
    suites.push(fast_reference_suite(&mut rng(), 50 * k, lambdas));
    suites.push(extraction_suite(&mut rng(), 100 * k));
    suites.push(chains_suite());
    let mut b_grids = vec![Grid::rect(8, 8).expect("valid")];
    if level == Level::Full {
        b_grids.push(Grid::line(64).expect("valid"));
    }
    suites.push(b_constant_suite(&b_grids, &[1.5, 2.0, 4.0]));
    let search_grids = match level {
        Level::Quick => vec![Grid::line(16).expect("valid")],
        Level::Full => vec![Grid::line(16).expect("valid"), Grid::rect(4, 4).expect("valid")],
    };
    for &l in lambdas {
        if l > 0.0 && l < 1.0 {
            suites.push(ainfty_constant_suite(&search_grids, l, 400 * k as u64, seed));
        }
    }
    suites.push(witness_suite(&Grid::line(16).expect("valid"), 200 * k as u64, seed));
    let all_passed = suites.iter().all(SuiteResult::ok);
    VerifySummary { level, seed, suites, all_passed }
}
