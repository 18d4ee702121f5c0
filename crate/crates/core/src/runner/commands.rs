use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::args::*;
use super::{num, Report};
use crate::circle::{decompose_kernel, DecompositionMode, DecompositionParams, ProbeSet};
use crate::cutoff::Cutoff;
use crate::ergodic::{ergodic_average, Averaging, IntPolynomial, NilSystem, QuasiGeometry, SystemSpec};
use crate::error::{Error, Result};
use crate::expsum::{decay_fit, gauss_sum_complete, nil_gauss_sum, weyl_scan, SumMethod, Weight};
use crate::group::{GroupElement, GroupShape, WordVariant};
use crate::rational::{enumerate_rationals, RationalSet, RationalVector};
use crate::variation::{rademacher_menshov_rhs, IndexedSequence, Seminorm};

pub(super) fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Selfcheck(a) => super::selfcheck::run(a),
        Command::GaussScan(a) => gauss(a),
        Command::NilgaussScan(a) => nilgauss(a),
        Command::WeylScan(a) => weyl(a),
        Command::Decompose(a) => decompose(a),
        Command::ErgodicRun(a) => ergodic(a),
        Command::Variation(a) => variation(a),
        Command::QuasiGeometry(a) => quasi(a),
    }
}

fn is_prime(n: i64) -> bool {
    n >= 2 && (2..).take_while(|f| f * f <= n).all(|f| n % f != 0)
}

fn moduli(range: &IntRange, primes_only: bool) -> Result<Vec<i128>> {
    if range.lo < 1 {
        return Err(Error::invalid(format!("moduli must be >= 1, got {range}")));
    }
    let qs: Vec<i128> = range.values().filter(|q| !primes_only || is_prime(*q)).map(|q| q as i128).collect();
    if qs.is_empty() {
        return Err(Error::invalid(format!("no modulus left in {range}")));
    }
    Ok(qs)
}

fn numerators(a: &[i128]) -> Value {
    Value::String(a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
}

fn fit_summary(report: &mut Report, points: &[(f64, f64)]) {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    if let Ok(fit) = decay_fit(&pts) {
        report.summary.insert("decay_slope".into(), num(fit.slope));
        report.summary.insert("decay_intercept".into(), num(fit.intercept));
        report.summary.insert("fit_residual".into(), num(fit.residual));
    }
}

fn gauss(a: &GaussScanArgs) -> Result<Report> {
    if a.d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    let qs = moduli(&a.q, a.primes_only)?;
    let rows = qs
        .par_iter()
        .map(|&q| {
            let points = enumerate_rationals(&RationalSet::DenominatorRange { m: a.d, q_lo: q, q_hi: q })?;
            let chosen: Vec<&RationalVector> = if a.sample > 0 && a.sample < points.len() {
                let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ (q as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let mut v: Vec<&RationalVector> = points.choose_multiple(&mut rng, a.sample).collect();
                v.sort();
                v
            } else {
                points.iter().collect()
            };
            let mut best = (0.0f64, vec![0i128; a.d]);
            for p in &chosen {
                let s = gauss_sum_complete(p)?.norm();
                if s > best.0 + 1e-15 {
                    best = (s, p.numerators().to_vec());
                }
            }
            Ok((q, chosen.len(), best))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new("gauss-scan/1", a, &["q", "count", "max_abs", "q_pow_neg_half", "argmax"])?;
    let mut pts = Vec::new();
    for (q, count, (m, arg)) in rows {
        pts.push((q as f64, m));
        report.rows.push(vec![json!(q as i64), json!(count), num(m), num((q as f64).powf(-0.5)), numerators(&arg)]);
    }
    fit_summary(&mut report, &pts);
    report.plot = Some((0, vec![2, 3], true));
    Ok(report)
}

fn variant(v: VariantArg) -> WordVariant {
    match v {
        VariantArg::D => WordVariant::D,
        VariantArg::DTilde => WordVariant::DTilde,
    }
}

fn nilgauss(a: &NilgaussScanArgs) -> Result<Report> {
    let shape = GroupShape::new(a.d)?;
    if a.r == 0 {
        return Err(Error::invalid("r must be >= 1"));
    }
    let method = match a.method {
        MethodArg::Dp => SumMethod::Dp,
        MethodArg::Brute => SumMethod::Brute,
    };
    let qs = moduli(&a.q, false)?;
    let mut report = Report::new("nilgauss-scan/1", a, &["q", "count", "max_abs", "mean_abs", "argmax"])?;
    let mut pts = Vec::new();
    for q in qs {
        let points = enumerate_rationals(&RationalSet::DenominatorRange { m: shape.len(), q_lo: q, q_hi: q })?;
        let values = points
            .par_iter()
            .map(|p| nil_gauss_sum(shape, p, a.r, variant(a.variant), method).map(|g| g.norm()))
            .collect::<Result<Vec<f64>>>()?;
        let mut best = (0.0f64, 0usize);
        for (i, v) in values.iter().enumerate() {
            if *v > best.0 + 1e-15 {
                best = (*v, i);
            }
        }
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        let arg = points.get(best.1).map(|p| p.numerators().to_vec()).unwrap_or_default();
        if q >= 2 {
            pts.push((q as f64, best.0));
        }
        report.rows.push(vec![json!(q as i64), json!(points.len()), num(best.0), num(mean), numerators(&arg)]);
    }
    fit_summary(&mut report, &pts);
    report.plot = Some((0, vec![2, 3], true));
    Ok(report)
}

fn weyl(a: &WeylScanArgs) -> Result<Report> {
    let weight = match a.weight {
        WeightArg::Sharp => Weight::Sharp,
        WeightArg::Smooth => Weight::Smooth,
        WeightArg::SmoothPrime => {
            if !(a.tau > 1.0 && a.tau <= 2.0) {
                return Err(Error::invalid(format!("tau must lie in (1, 2], got {}", a.tau)));
            }
            Weight::SmoothPrime { tau: a.tau }
        }
    };
    if a.p.is_empty() {
        return Err(Error::invalid("the list of P is empty"));
    }
    let rows = a
        .p
        .par_iter()
        .map(|p| weyl_scan(weight, a.d, &[*p]).map(|mut v| v.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new("weyl-scan/1", a, &["p", "theta", "normalized", "weight"])?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.p as f64, r.normalized)).collect();
    for r in rows {
        report.rows.push(vec![json!(r.p), Value::String(r.theta.to_string()), num(r.normalized), Value::String(r.weight)]);
    }
    fit_summary(&mut report, &pts);
    report.plot = Some((0, vec![2], true));
    Ok(report)
}

fn decompose(a: &DecomposeArgs) -> Result<Report> {
    let params = DecompositionParams {
        d: a.d,
        tau: a.tau,
        delta: a.delta,
        delta_prime: a.delta_prime,
        big_d: a.big_d,
        k: a.k,
        q_cap: a.q_cap,
        noncentral_grid: a.noncentral_grid,
        central_grid: a.central_grid,
    };
    params.validate()?;
    let mode = match a.mode {
        ModeArg::Central => DecompositionMode::CentralStage,
        ModeArg::Noncentral => DecompositionMode::NoncentralStage,
        ModeArg::Full => DecompositionMode::Full,
    };
    let probes = ProbeSet::standard(&params, a.extra_probes, a.seed)?;
    let dec = decompose_kernel(&params, &mode, &probes)?;
    let mut report = Report::new("decompose/1", a, &["name", "l_support", "n_support", "max_abs", "probe_mass"])?;
    for c in &dec.report.components {
        report.rows.push(vec![Value::String(c.name.clone()), json!(c.l_support), json!(c.n_support), num(c.max_abs), num(c.probe_mass)]);
    }
    let r = &dec.report;
    report.summary.insert("reconstruction_residual".into(), num(r.reconstruction_residual));
    if let Some(v) = r.central_residual {
        report.summary.insert("central_residual".into(), num(v));
    }
    if let Some(v) = r.noncentral_residual {
        report.summary.insert("noncentral_residual".into(), num(v));
    }
    report.summary.insert("phi_one_on_support".into(), json!(r.phi_one_on_support));
    report.document = Some(serde_json::to_value(r).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(report)
}

fn parse_polys(text: &str) -> Result<Vec<IntPolynomial>> {
    text.split(';')
        .map(|p| {
            let mut c = vec![0i128];
            for t in p.split(',') {
                c.push(t.trim().parse().map_err(|e| Error::Parse(format!("polynomial coefficient {t:?}: {e}")))?);
            }
            IntPolynomial::new(c)
        })
        .collect()
}

fn system(a: &ErgodicRunArgs) -> Result<NilSystem> {
    let spec = match a.system {
        SystemArg::Cyclic => SystemSpec::Cyclic { m: a.m },
        SystemArg::HeisenbergQuotient => SystemSpec::HeisenbergQuotient { d: a.d, q: a.q },
        SystemArg::Custom => {
            let path = a.spec_file.as_ref().ok_or_else(|| Error::invalid("--system custom needs --spec-file"))?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
    };
    NilSystem::build(&spec)
}

fn ergodic(a: &ErgodicRunArgs) -> Result<Report> {
    let sys = system(a)?;
    let polys = match &a.polys {
        Some(t) => parse_polys(t)?,
        None => (1..=sys.arity()).map(IntPolynomial::monomial).collect(),
    };
    if a.log2_n_max > 24 {
        return Err(Error::infeasible(format!("2^{} scales are too many", a.log2_n_max)));
    }
    let rho = *a.rho.0.first().ok_or_else(|| Error::invalid("rho is empty"))?;
    let seminorm = Seminorm::from_rho(rho)?;
    let averaging = match a.averaging {
        AveragingArg::Rough => Averaging::Rough,
        AveragingArg::Smoothed => Averaging::Smoothed { cutoff: Cutoff::Chi },
        AveragingArg::Indicator => Averaging::Indicator,
    };
    let f: Vec<f64> = match a.f {
        FunctionArg::Delta => (0..sys.len()).map(|x| if x == 0 { 1.0 } else { 0.0 }).collect(),
        FunctionArg::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..sys.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
    };
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let f2 = l2(&f);
    let ratio = |v: &[f64]| if f2 > 0.0 { l2(v) / f2 } else { 0.0 };
    let mut report = Report::new("ergodic-run/1", a, &["n", "max_deviation", "l2_ratio", "maximal_ratio", "variation_ratio"])?;
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); sys.len()];
    for j in 0..=a.log2_n_max {
        let n = 1u64 << j;
        let avg = ergodic_average(&sys, &f, &polys, n, averaging)?;
        for (s, v) in series.iter_mut().zip(&avg) {
            s.push(*v);
        }
        let dev = avg.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        let sup: Vec<f64> = series.iter().map(|s| s.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
        let var = series.iter().map(|s| seminorm.eval(&IndexedSequence::from_reals(s))).collect::<Result<Vec<_>>>()?;
        report.rows.push(vec![json!(n), num(dev), num(ratio(&avg)), num(ratio(&sup)), num(ratio(&var))]);
    }
    report.summary.insert("points".into(), json!(sys.len()));
    report.summary.insert("mean".into(), num(mean));
    report.summary.insert("seminorm".into(), Value::String(seminorm.label()));
    report.plot = Some((0, vec![1], true));
    Ok(report)
}

fn read_values(path: &std::path::Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

fn variation(a: &VariationArgs) -> Result<Report> {
    let (values, m) = match &a.values_file {
        Some(p) => {
            let v = read_values(p)?;
            if v.len() < 2 {
                return Err(Error::invalid("the sequence needs at least two values"));
            }
            let m = (usize::BITS - 1 - (v.len() - 1).leading_zeros()) as u32;
            (v, m)
        }
        None => {
            if a.m > 20 {
                return Err(Error::infeasible(format!("2^{} terms are too many", a.m)));
            }
            let len = (1usize << a.m) + 1;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let v = match a.sequence {
                SequenceArg::RandomWalk => {
                    let mut acc = 0.0;
                    (0..len)
                        .map(|_| {
                            acc += rng.gen_range(-1.0..1.0);
                            acc
                        })
                        .collect()
                }
                SequenceArg::RandomSigns => (0..len).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect(),
                SequenceArg::Spike => (0..len).map(|i| if i == len / 2 { 1.0 } else { 0.0 }).collect(),
            };
            (v, a.m)
        }
    };
    let seq = IndexedSequence::from_reals(&values);
    let rhs = rademacher_menshov_rhs(&seq, a.j0, m)?;
    let window = seq.restrict(a.j0, 1i64 << m);
    let mut report = Report::new("variation/1", a, &["rho", "seminorm", "value", "rm_lhs", "rm_rhs"])?;
    for &rho in &a.rhos.0 {
        let s = Seminorm::from_rho(rho)?;
        report.rows.push(vec![num(rho), Value::String(s.label()), num(s.eval(&seq)?), num(s.eval(&window)?), num(rhs)]);
    }
    report.summary.insert("length".into(), json!(values.len()));
    report.summary.insert("m".into(), json!(m));
    Ok(report)
}

fn quasi(a: &QuasiGeometryArgs) -> Result<Report> {
    let shape = GroupShape::new(a.d)?;
    let geom = QuasiGeometry::from_scales(shape, a.delta, a.delta_prime, a.w, a.q)?;
    let center = match &a.center {
        Some(c) => GroupElement::new(shape, c.0.clone())?,
        None => GroupElement::<f64>::identity(shape),
    };
    let threshold = 2.0 * a.q as f64 * 2f64.powf(a.delta_prime * a.w as f64);
    let bound = 4f64.powi(shape.len() as i32);
    let mut report = Report::new("quasi-geometry/1", a, &["r", "count", "volume", "ratio", "above_threshold", "comparable"])?;
    for &r in &a.r.0 {
        let count = geom.ball_count(&center, r)?;
        let vol = geom.ball_volume(r);
        let ratio = count as f64 / vol;
        report.rows.push(vec![
            num(r),
            json!(count),
            num(vol),
            num(ratio),
            json!(r >= threshold),
            json!(ratio >= 1.0 / bound && ratio <= bound),
        ]);
    }
    report.summary.insert("threshold".into(), num(threshold));
    report.summary.insert("beta".into(), json!(geom.beta));
    report.plot = Some((0, vec![1, 2], true));
    Ok(report)
}

