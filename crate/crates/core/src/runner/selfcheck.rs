use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::args::SelfcheckArgs;
use super::{num, Report};
use crate::ergodic::{commutator_identity_check, gauss_operator_kernel, moment_counting_kernel, NilSystem};
use crate::error::{Error, Result};
use crate::expsum::{gauss_sum_complete, nil_gauss_sum, SumMethod};
use crate::group::{alternating_word, d_form, moment_curve, GroupElement, GroupShape, LatticeElement, WordVariant};
use crate::rational::{enumerate_rationals, RationalSet, RationalVector};
use crate::variation::{variation, IndexedSequence};

struct Tally {
    name: &'static str,
    cases: usize,
    failures: usize,
    max_error: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failures: 0, max_error: 0.0 }
    }

    fn exact(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn close(&mut self, err: f64, tol: f64) {
        self.cases += 1;
        self.max_error = self.max_error.max(err);
        if !(err <= tol) {
            self.failures += 1;
        }
    }
}

fn random_element(rng: &mut ChaCha8Rng, shape: GroupShape, bound: i128) -> LatticeElement {
    let coords = (0..shape.len()).map(|_| rng.gen_range(-bound..=bound)).collect();
    GroupElement::new(shape, coords).expect("length matches the shape")
}

fn group_law(shape: GroupShape, trials: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Tally>> {
    let mut assoc = Tally::new("associativity");
    let mut ident = Tally::new("identity");
    let mut inv = Tally::new("inverse");
    let mut central = Tally::new("central_commutators");
    let mut dil = Tally::new("dilation_homomorphism");
    let mut curve = Tally::new("dilated_moment_curve");
    let e = GroupElement::identity(shape);
    for _ in 0..trials {
        let x = random_element(rng, shape, 50);
        let y = random_element(rng, shape, 50);
        let z = random_element(rng, shape, 50);
        assoc.exact(x.multiply(&y)?.multiply(&z)? == x.multiply(&y.multiply(&z)?)?);
        ident.exact(x.multiply(&e)? == x && e.multiply(&x)? == x);
        let xi = x.inverse()?;
        inv.exact(x.multiply(&xi)?.is_identity() && xi.multiply(&x)?.is_identity());
        let c = x.multiply(&y)?.multiply(&xi)?.multiply(&y.inverse()?)?;
        central.exact(c.first().iter().all(|v| *v == 0) && c.multiply(&z)? == z.multiply(&c)?);
        let lambda = rng.gen_range(1i128..=5);
        dil.exact(x.multiply(&y)?.dilate(lambda)? == x.dilate(lambda)?.multiply(&y.dilate(lambda)?)?);
        let n = rng.gen_range(-40i128..=40);
        curve.exact(moment_curve(n, shape)?.dilate(lambda)? == moment_curve(lambda * n, shape)?);
    }
    Ok(vec![assoc, ident, inv, central, dil, curve])
}

fn words(shape: GroupShape, trials: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new("word_closed_form");
    for _ in 0..trials {
        let r = rng.gen_range(1..=4);
        let x: Vec<i128> = (0..r).map(|_| rng.gen_range(-20..=20)).collect();
        let y: Vec<i128> = (0..r).map(|_| rng.gen_range(-20..=20)).collect();
        for v in [WordVariant::D, WordVariant::DTilde] {
            t.exact(d_form(&x, &y, v, shape)? == alternating_word(&x, &y, v, shape)?);
        }
    }
    Ok(t)
}

fn gauss_values() -> Result<Tally> {
    let mut t = Tally::new("gauss_sum_values");
    t.close(gauss_sum_complete(&RationalVector::new(vec![1, 0], 2)?)?.norm(), 1e-12);
    t.close((gauss_sum_complete(&RationalVector::new(vec![0, 1], 3)?)?.norm() - 3f64.powf(-0.5)).abs(), 1e-12);
    for p in [5i128, 7, 11] {
        t.close((gauss_sum_complete(&RationalVector::new(vec![0, 1], p)?)?.norm() - (p as f64).powf(-0.5)).abs(), 1e-9);
    }
    Ok(t)
}

fn nil_dp(shape: GroupShape) -> Result<Tally> {
    let mut t = Tally::new("nil_gauss_dp_vs_brute");
    let q_max = if shape.degree() <= 2 { 4 } else { 3 };
    for q in 1..=q_max {
        for a in enumerate_rationals(&RationalSet::DenominatorRange { m: shape.len(), q_lo: q, q_hi: q })? {
            for r in 1..=2 {
                let brute = nil_gauss_sum(shape, &a, r, WordVariant::D, SumMethod::Brute)?;
                let dp = nil_gauss_sum(shape, &a, r, WordVariant::D, SumMethod::Dp)?;
                t.close((brute - dp).norm(), 1e-12);
                t.close((dp.norm() - 1.0).max(0.0), 1e-12);
            }
        }
    }
    Ok(t)
}

fn v_kernel(shape: GroupShape) -> Result<Tally> {
    let mut t = Tally::new("v_kernel_closed_form");
    for q in 1..=12i128 {
        if (q as f64).powi(shape.len() as i32) > 2e5 {
            break;
        }
        let full = |m| RationalSet::FixedDenominator { m, q };
        let v = gauss_operator_kernel(shape, &full(shape.degree()), &full(shape.d_prime()), q)?;
        let count = moment_counting_kernel(shape, q)?;
        let err = v.dense().iter().zip(&count).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        t.close(err, 1e-10);
    }
    Ok(t)
}

fn commutators(shape: GroupShape, trials: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new("commutator_identity");
    let q = if shape.len() <= 6 { 3 } else { 2 };
    let sys = NilSystem::heisenberg_quotient(shape.degree(), q)?;
    let d = shape.degree();
    for _ in 0..trials.min(100) {
        let m: Vec<i128> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
        let n: Vec<i128> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
        t.exact(commutator_identity_check(&sys, &m, &n)?);
    }
    Ok(t)
}

fn variation_brute(v: &[f64], rho: f64) -> f64 {
    let n = v.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s: f64 = idx.windows(2).map(|w| (v[w[1]] - v[w[0]]).abs().powf(rho)).sum();
        best = best.max(s);
    }
    best.powf(1.0 / rho)
}

fn variation_dp(trials: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new("variation_dp_vs_enumeration");
    for _ in 0..trials.min(100) {
        let n = rng.gen_range(1..=10);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rho = [1.0, 1.5, 2.0, 3.0][rng.gen_range(0..4)];
        let dp = variation(&IndexedSequence::from_reals(&v), rho)?;
        t.close((dp - variation_brute(&v, rho)).abs(), 1e-12);
    }
    Ok(t)
}

pub(super) fn run(a: &SelfcheckArgs) -> Result<Report> {
    let shape = GroupShape::new(a.d)?;
    if a.d > 4 {
        return Err(Error::infeasible("the selfcheck covers d <= 4"));
    }
    if a.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut all = group_law(shape, a.trials, &mut rng)?;
    all.push(words(shape, a.trials, &mut rng)?);
    all.push(gauss_values()?);
    if shape.degree() >= 2 {
        all.push(nil_dp(shape)?);
        all.push(v_kernel(shape)?);
        all.push(commutators(shape, a.trials, &mut rng)?);
    }
    all.push(variation_dp(a.trials, &mut rng)?);
    let mut report = Report::new("selfcheck/1", a, &["check", "cases", "failures", "max_error"])?;
    for t in &all {
        report.rows.push(vec![json!(t.name), json!(t.cases), json!(t.failures), num(t.max_error)]);
    }
    let failures: usize = all.iter().map(|t| t.failures).sum();
    report.summary.insert("failures".into(), json!(failures));
    report.failed = failures > 0;
    Ok(report)
}
