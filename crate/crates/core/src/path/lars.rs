use crate::covariance::{
    apply_threshold, min_eigenvalue_of, sample_covariance, CovMatrix, StandardizedDesign,
    ThresholdRule,
};
use crate::error::{Error, Result};

use super::factor::ActiveFactor;
use super::{support_of, Breakpoint, SolutionPath, Termination};

/// Schur pivots below this trigger an explicit eigenvalue check.
const PIVOT_CHECK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    /// Defaults to `8·min(n, p) + p`.
    pub max_steps: Option<usize>,
    /// Absolute λ at which to stop. Defaults to `1e-8·λ_max`.
    pub lambda_floor: Option<f64>,
    /// Stop once the active correlation magnitude falls to this level.
    pub tol: f64,
    /// The active block counts as singular when its smallest eigenvalue is
    /// at or below this level.
    pub eig_tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            max_steps: None,
            lambda_floor: None,
            tol: 1e-12,
            eig_tol: 1e-12,
        }
    }
}

/// Covariance-thresholded LARS on a standardized design.
pub fn ct_lars(
    design: &StandardizedDesign,
    rule: &ThresholdRule,
    opts: &PathOptions,
) -> Result<SolutionPath> {
    rule.validate()?;
    let cov_nu = apply_threshold(&sample_covariance(design), rule);
    ct_lars_cov(&cov_nu, &design.xty(), design.n(), *rule, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Add(usize),
    Drop(usize),
    Floor,
}

/// Covariance-thresholded LARS given `Σ̂_ν` and `Xᵀy/n` directly. `n` only
/// sets the default step budget.
pub fn ct_lars_cov(
    cov: &CovMatrix,
    xty: &[f64],
    n: usize,
    rule: ThresholdRule,
    opts: &PathOptions,
) -> Result<SolutionPath> {
    let p = cov.p();
    if xty.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: xty.len(),
        });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    let max_steps = opts.max_steps.unwrap_or(8 * n.min(p) + p);
    let lambda_max = xty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = opts.lambda_floor.unwrap_or(1e-8 * lambda_max);
    let tie_tol = 1e-12 * lambda_max.max(1.0);

    let mut path = SolutionPath {
        breakpoints: Vec::new(),
        termination: Termination::CorrelationExhausted,
        rule,
    };
    let mut beta = vec![0.0; p];

    if lambda_max <= opts.tol {
        path.breakpoints.push(Breakpoint {
            lambda: lambda_max,
            beta,
            active: Vec::new(),
            global: true,
        });
        return Ok(path);
    }

    let mut c = xty.to_vec();
    let mut c_hat = lambda_max;
    let mut in_active = vec![false; p];
    let mut factor = ActiveFactor::default();

    let entering: Vec<usize> = (0..p).filter(|&j| c[j].abs() >= c_hat - tie_tol).collect();
    path.breakpoints.push(Breakpoint {
        lambda: c_hat,
        global: is_global(xty, &beta, c_hat),
        beta: beta.clone(),
        active: entering.clone(),
    });
    match admit(cov, &mut factor, &mut in_active, &entering, opts) {
        Admit::Done => {}
        Admit::Stop => {
            path.termination = Termination::EigenvalueStop;
            return Ok(path);
        }
        Admit::Singular => {
            return Err(Error::SingularActiveSubmatrix {
                path: Box::new(path),
            })
        }
    }

    let mut just_dropped: Option<usize> = None;
    let mut steps = 0usize;
    loop {
        if steps >= max_steps {
            path.termination = Termination::MaxSteps;
            break;
        }
        steps += 1;

        // direction on the active set; a coefficient still at zero takes the
        // sign of its correlation, which is the sign it is about to acquire
        let active = factor.indices().to_vec();
        let signs: Vec<f64> = active
            .iter()
            .map(|&j| if beta[j] != 0.0 { beta[j].signum() } else { c[j].signum() })
            .collect();
        let gamma = factor.solve(&signs);
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::SingularActiveSubmatrix {
                path: Box::new(path),
            });
        }
        let mut a = vec![0.0; p];
        for (&j, &g) in active.iter().zip(&gamma) {
            let col = cov.as_matrix().column(j);
            for (ai, ci) in a.iter_mut().zip(col.iter()) {
                *ai += ci * g;
            }
        }

        let mut delta = f64::INFINITY;
        let mut event = Event::Floor;
        for (&j, &g) in active.iter().zip(&gamma) {
            if beta[j] == 0.0 {
                continue;
            }
            let d = -beta[j] / g;
            if d > 0.0 && d < delta {
                delta = d;
                event = Event::Drop(j);
            }
        }
        let excluded = just_dropped.take();
        for j in 0..p {
            if in_active[j] {
                continue;
            }
            let roots = [(c_hat - c[j]) / (1.0 - a[j]), (c_hat + c[j]) / (1.0 + a[j])];
            for (side, d) in [1.0, -1.0].into_iter().zip(roots) {
                // a just-dropped variable sits on its old boundary; only the
                // opposite side is a real event
                if Some(j) == excluded && side * c[j] >= 0.0 {
                    continue;
                }
                if d > 0.0 && d < delta {
                    delta = d;
                    event = Event::Add(j);
                }
            }
        }
        let to_floor = c_hat - floor;
        if delta >= to_floor {
            delta = to_floor.max(0.0);
            event = Event::Floor;
        }

        for (&j, &g) in active.iter().zip(&gamma) {
            beta[j] += delta * g;
        }
        if let Event::Drop(j) = event {
            beta[j] = 0.0;
        }
        refresh_correlations(cov, xty, &beta, &mut c);
        let lambda = active
            .iter()
            .filter(|&&j| Some(j) != drop_target(event))
            .map(|&j| c[j].abs())
            .fold(0.0f64, f64::max);
        c_hat = if lambda > 0.0 { lambda } else { (c_hat - delta).max(0.0) };

        let mut entering = Vec::new();
        match event {
            Event::Drop(j) => {
                in_active[j] = false;
                let keep: Vec<usize> = active.iter().copied().filter(|&i| i != j).collect();
                factor = match ActiveFactor::rebuild(cov, &keep) {
                    Some(f) => f,
                    None => {
                        return Err(Error::SingularActiveSubmatrix {
                            path: Box::new(path),
                        })
                    }
                };
                just_dropped = Some(j);
            }
            Event::Add(j) => {
                entering.push(j);
                for i in 0..p {
                    if !in_active[i] && i != j && Some(i) != excluded && c[i].abs() >= c_hat - tie_tol {
                        entering.push(i);
                    }
                }
                entering.sort_unstable();
            }
            Event::Floor => {}
        }

        let mut active_now: Vec<usize> = (0..p)
            .filter(|&i| in_active[i] || entering.contains(&i))
            .collect();
        active_now.sort_unstable();
        let bp = Breakpoint {
            lambda: c_hat,
            global: is_global(xty, &beta, c_hat),
            beta: beta.clone(),
            active: active_now,
        };
        match path.breakpoints.last_mut() {
            // zero-length step: fold it into the previous breakpoint
            Some(prev) if c_hat >= prev.lambda => {
                prev.active = bp.active;
                prev.beta = bp.beta;
                prev.global = bp.global;
            }
            _ => path.breakpoints.push(bp),
        }

        if c_hat <= opts.tol {
            path.termination = Termination::CorrelationExhausted;
            break;
        }
        if event == Event::Floor {
            path.termination = Termination::LambdaFloor;
            break;
        }
        match admit(cov, &mut factor, &mut in_active, &entering, opts) {
            Admit::Done => {}
            Admit::Stop => {
                path.termination = Termination::EigenvalueStop;
                break;
            }
            Admit::Singular => {
                return Err(Error::SingularActiveSubmatrix {
                    path: Box::new(path),
                })
            }
        }
    }
    Ok(path)
}

fn drop_target(event: Event) -> Option<usize> {
    match event {
        Event::Drop(j) => Some(j),
        _ => None,
    }
}

enum Admit {
    Done,
    /// The enlarged active block is no longer positive definite.
    Stop,
    /// Positive smallest eigenvalue but the factorization broke down anyway.
    Singular,
}

fn admit(
    cov: &CovMatrix,
    factor: &mut ActiveFactor,
    in_active: &mut [bool],
    entering: &[usize],
    opts: &PathOptions,
) -> Admit {
    for &j in entering {
        in_active[j] = true;
        let (d2, w) = factor.pivot_for(cov, j);
        if d2 > PIVOT_CHECK {
            factor.push_with(j, d2, w);
            continue;
        }
        let mut idx = factor.indices().to_vec();
        idx.push(j);
        if min_eigenvalue_of(cov.block(&idx, &idx)) <= opts.eig_tol {
            return Admit::Stop;
        }
        if d2 > 0.0 {
            factor.push_with(j, d2, w);
        } else {
            match ActiveFactor::rebuild(cov, &idx) {
                Some(f) => *factor = f,
                None => return Admit::Singular,
            }
        }
    }
    Admit::Done
}

fn refresh_correlations(cov: &CovMatrix, xty: &[f64], beta: &[f64], c: &mut [f64]) {
    c.copy_from_slice(xty);
    for (j, &b) in beta.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let col = cov.as_matrix().column(j);
        for (ci, s) in c.iter_mut().zip(col.iter()) {
            *ci -= s * b;
        }
    }
}

fn is_global(xty: &[f64], beta: &[f64], lambda: f64) -> bool {
    let support = support_of(beta);
    xty.iter()
        .enumerate()
        .all(|(j, r)| support.binary_search(&j).is_ok() || r.abs() < lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::standardize;
    use crate::path::{kkt_check, oracle_solve_cov, OracleOptions};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_design(n: usize, p: usize, seed: u64) -> StandardizedDesign {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: DMatrix<f64> = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut rng);
                2.0 * x[(i, 0)] - 1.5 * x[(i, p - 1)] + e
            })
            .collect();
        standardize(&x, &y).unwrap()
    }

    #[test]
    fn scalar_path_is_soft_threshold() {
        let cov = CovMatrix::identity(1);
        let path = ct_lars_cov(&cov, &[-0.7], 10, ThresholdRule::identity(), &PathOptions::default())
            .unwrap();
        assert_eq!(path.breakpoints[0].lambda, 0.7);
        assert_eq!(path.termination, Termination::LambdaFloor);
        for lam in [0.7, 0.5, 0.2, 0.01] {
            let b = path.coefficients_at(lam, false).unwrap();
            assert!((b[0] + (0.7 - lam)).abs() < 1e-14);
        }
    }

    #[test]
    fn complete_thresholding_is_ust() {
        let d = random_design(12, 30, 4);
        let path = ct_lars(&d, &ThresholdRule::complete(), &PathOptions::default()).unwrap();
        let r = d.xty();
        for k in 0..=20 {
            let lam = path.lambda_max() * k as f64 / 20.0;
            if lam < path.lambda_end() {
                continue;
            }
            let b = path.coefficients_at(lam, false).unwrap();
            for j in 0..30 {
                let want = r[j].signum() * (r[j].abs() - lam).max(0.0);
                assert!((b[j] - want).abs() < 1e-10, "j={j} lam={lam}");
            }
        }
        // saturation contrast: every variable enters although p > n
        assert_eq!(path.breakpoints.last().unwrap().active.len(), 30);
    }

    #[test]
    fn identity_rule_saturates_at_rank() {
        let d = random_design(10, 25, 8);
        let path = ct_lars(&d, &ThresholdRule::identity(), &PathOptions::default()).unwrap();
        // centering costs one degree of freedom
        for bp in &path.breakpoints {
            assert!(bp.support().len() <= 9);
        }
        let cov = sample_covariance(&d);
        for bp in &path.breakpoints {
            assert!(min_eigenvalue_of(cov.block(&bp.support(), &bp.support())) > 1e-12);
        }
        assert!(matches!(
            path.termination,
            Termination::EigenvalueStop | Termination::LambdaFloor
        ));
        for seed in 0..20 {
            let d = random_design(8, 20, 100 + seed);
            let path = ct_lars(&d, &ThresholdRule::identity(), &PathOptions::default()).unwrap();
            if path.termination == Termination::EigenvalueStop {
                let cov = sample_covariance(&d);
                let last = path.breakpoints.last().unwrap();
                assert!(min_eigenvalue_of(cov.block(&last.active, &last.active)) <= 1e-12);
                for bp in &path.breakpoints[..path.breakpoints.len() - 1] {
                    assert!(min_eigenvalue_of(cov.block(&bp.support(), &bp.support())) > 0.0);
                }
            }
        }
    }

    #[test]
    fn breakpoints_satisfy_kkt_and_structure() {
        for (seed, rule) in [
            (1, ThresholdRule::identity()),
            (2, ThresholdRule::hard(0.2)),
            (3, ThresholdRule::soft(0.15)),
            (5, ThresholdRule::adaptive(0.2, 1.0)),
        ] {
            let d = random_design(40, 12, seed);
            let cov = apply_threshold(&sample_covariance(&d), &rule);
            let xty = d.xty();
            let path = ct_lars(&d, &rule, &PathOptions::default()).unwrap();
            let first = &path.breakpoints[0];
            assert!(first.beta.iter().all(|b| *b == 0.0));
            assert_eq!(first.lambda, xty.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            for w in path.breakpoints.windows(2) {
                assert!(w[1].lambda < w[0].lambda);
            }
            for bp in &path.breakpoints {
                let rep = kkt_check(&bp.beta, bp.lambda, &cov, &xty, 1e-8);
                assert!(rep.pass, "{rule:?} {}", rep.worst_violation);
                assert!(bp.support().iter().all(|j| bp.active.contains(j)));
            }
        }
    }

    #[test]
    fn segments_are_linear_against_oracle() {
        let d = random_design(50, 8, 11);
        let rule = ThresholdRule::soft(0.1);
        let cov = apply_threshold(&sample_covariance(&d), &rule);
        assert!(min_eigenvalue_of(cov.as_matrix().clone()) > 0.0);
        let xty = d.xty();
        let path = ct_lars(&d, &rule, &PathOptions::default()).unwrap();
        for w in path.breakpoints.windows(2) {
            let mid = 0.5 * (w[0].lambda + w[1].lambda);
            let interp = path.coefficients_at(mid, false).unwrap();
            let exact = oracle_solve_cov(&cov, &xty, mid, &OracleOptions::default()).unwrap();
            for (a, b) in interp.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn drops_are_recorded() {
        // a classic configuration where one coefficient crosses zero
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.6, 0.9, 1.0, 0.3, 0.6, 0.3, 1.0]);
        let cov = CovMatrix::from_matrix(m).unwrap();
        let xty = [0.9, 0.95, 0.2];
        let path = ct_lars_cov(&cov, &xty, 100, ThresholdRule::identity(), &PathOptions::default())
            .unwrap();
        for bp in &path.breakpoints {
            assert!(kkt_check(&bp.beta, bp.lambda, &cov, &xty, 1e-10).pass);
        }
        for w in path.breakpoints.windows(2) {
            let mid = 0.5 * (w[0].lambda + w[1].lambda);
            let exact = oracle_solve_cov(&cov, &xty, mid, &OracleOptions::default()).unwrap();
            let interp = path.coefficients_at(mid, false).unwrap();
            for (a, b) in interp.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn dropped_variable_can_reenter_with_opposite_sign() {
        // full-rank designs: the path must reach the least-squares fit, so a
        // variable dropped late has to come back within the following step
        let mut reentries = 0;
        for seed in 0..40 {
            let d = random_design(20, 10, 100 + seed);
            let cov = sample_covariance(&d);
            let path = ct_lars(&d, &ThresholdRule::identity(), &PathOptions::default()).unwrap();
            assert_eq!(path.termination, Termination::LambdaFloor);
            for bp in &path.breakpoints {
                assert!(kkt_check(&bp.beta, bp.lambda, &cov, &d.xty(), 1e-8).pass, "seed {seed}");
            }
            assert_eq!(path.breakpoints.last().unwrap().support().len(), 10, "seed {seed}");
            for w in path.breakpoints.windows(2) {
                let flipped = w[0].beta.iter().zip(&w[1].beta).any(|(a, b)| a * b < 0.0);
                let dropped = w[0].support().iter().any(|j| w[1].beta[*j] == 0.0);
                if flipped || dropped {
                    reentries += 1;
                }
            }
        }
        assert!(reentries > 0);
    }

    #[test]
    fn zero_response_gives_single_breakpoint() {
        let cov = CovMatrix::identity(3);
        let path = ct_lars_cov(&cov, &[0.0; 3], 5, ThresholdRule::identity(), &PathOptions::default())
            .unwrap();
        assert_eq!(path.breakpoints.len(), 1);
        assert_eq!(path.termination, Termination::CorrelationExhausted);
    }

    #[test]
    fn max_steps_is_honoured() {
        let d = random_design(30, 10, 2);
        let opts = PathOptions {
            max_steps: Some(2),
            ..PathOptions::default()
        };
        let path = ct_lars(&d, &ThresholdRule::identity(), &opts).unwrap();
        assert_eq!(path.termination, Termination::MaxSteps);
        assert!(path.breakpoints.len() <= 3);
    }
}
