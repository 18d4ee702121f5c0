//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use nilcircle::circle::fourier::scaled_radius;
use nilcircle::circle::{
    central_multipliers, decompose_kernel, noncentral_multipliers, DecompositionMode, DecompositionParams,
    MultiplierGrid, ProbeSet, Variable,
};
use nilcircle::cutoff::Cutoff;
use nilcircle::ergodic::{
    commutator_identity_check, ergodic_average, gauss_operator_kernel, group_maximal, moment_counting_kernel,
    Averaging, IntPolynomial, NilSystem, QuasiGeometry,
};
use nilcircle::expsum::{decay_fit, gauss_sum_complete, nil_gauss_sum, SumMethod};
use nilcircle::group::{
    alternating_word, d_form, jq_index, moment_curve, GroupShape, LatticeElement, RealElement, WordVariant,
};
use nilcircle::rational::{RationalSet, RationalVector};
use nilcircle::sparse::{ttstar_kernel, SparseFunction};
use nilcircle::variation::{rademacher_menshov, variation, IndexedSequence};
use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn elem(shape: GroupShape, rng: &mut ChaCha8Rng, bound: i128) -> LatticeElement {
    let coords = (0..shape.len()).map(|_| rng.gen_range(-bound..=bound)).collect();
    LatticeElement::new(shape, coords).unwrap()
}

fn group_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = 0;
    for d in 2..=4 {
        let s = GroupShape::new(d).map_err(e)?;
        let id = LatticeElement::identity(s);
        let dp = s.d_prime();
        for _ in 0..10_000 {
            let (x, y, z) = (elem(s, &mut rng, 1000), elem(s, &mut rng, 1000), elem(s, &mut rng, 1000));
            let xy = x.multiply(&y).map_err(e)?;
            ensure(xy.multiply(&z).map_err(e)? == x.multiply(&y.multiply(&z).map_err(e)?).map_err(e)?, || {
                format!("associativity fails at d={d}: {x:?} {y:?} {z:?}")
            })?;
            ensure(x.multiply(&id).map_err(e)? == x && id.multiply(&x).map_err(e)? == x, || {
                format!("identity fails at {x:?}")
            })?;
            let xi = x.inverse().map_err(e)?;
            ensure(x.multiply(&xi).map_err(e)?.is_identity() && xi.multiply(&x).map_err(e)?.is_identity(), || {
                format!("inverse fails at {x:?}")
            })?;
            let mut c = vec![0i128; s.len()];
            for v in c[s.degree()..].iter_mut() {
                *v = rng.gen_range(-1000..=1000);
            }
            let c = LatticeElement::new(s, c).map_err(e)?;
            ensure(c.multiply(&x).map_err(e)? == x.multiply(&c).map_err(e)?, || {
                format!("central element {c:?} does not commute with {x:?}")
            })?;
            // commutators land in the centre
            let comm = xi.multiply(&y.inverse().map_err(e)?).map_err(e)?.multiply(&xy).map_err(e)?;
            ensure(comm.coords()[..d].iter().all(|v| *v == 0), || format!("commutator {comm:?} not central"))?;
            ensure(dp == s.len() - d, || "bad d'".into())?;
            let lam = rng.gen_range(1i128..=9);
            let (xs, ys) = (elem(s, &mut rng, 50), elem(s, &mut rng, 50));
            ensure(
                xs.multiply(&ys).map_err(e)?.dilate(lam).map_err(e)?
                    == xs.dilate(lam).map_err(e)?.multiply(&ys.dilate(lam).map_err(e)?).map_err(e)?,
                || format!("dilation by {lam} is not a homomorphism at d={d}"),
            )?;
            let n = rng.gen_range(-100i128..=100);
            ensure(
                moment_curve(n, s).map_err(e)?.dilate(lam).map_err(e)? == moment_curve(lam * n, s).map_err(e)?,
                || format!("dilated moment curve fails at n={n}, lambda={lam}"),
            )?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases x 6 identities exact, d in {{2,3,4}}"))
}

fn word_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..1000 {
        let d = 2 + i % 2;
        let r = 1 + rng.gen_range(0..4);
        let s = GroupShape::new(d).map_err(e)?;
        let x: Vec<i128> = (0..r).map(|_| rng.gen_range(-40..=40)).collect();
        let y: Vec<i128> = (0..r).map(|_| rng.gen_range(-40..=40)).collect();
        for v in [WordVariant::D, WordVariant::DTilde] {
            let closed = d_form(&x, &y, v, s).map_err(e)?;
            let word = alternating_word(&x, &y, v, s).map_err(e)?;
            ensure(closed == word, || format!("{v:?} differs at x={x:?} y={y:?}: {closed:?} vs {word:?}"))?;
        }
    }
    Ok("1000 tuples, r <= 4, d in {2,3}, both variants exact".into())
}

fn random_kernel(s: GroupShape, rng: &mut ChaCha8Rng, size: usize) -> SparseFunction<Complex64> {
    let mut m = BTreeMap::new();
    while m.len() < size {
        m.insert(elem(s, rng, 3), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    let total: f64 = m.values().map(|v| v.norm()).sum();
    SparseFunction::from_entries(s, m.into_iter().map(|(k, v)| (k, v / total))).unwrap()
}

type Dense = BTreeMap<LatticeElement, Complex64>;

// (f * K)(x) = sum_y f(y^{-1} x) K(y): mass at z moves to y z
fn apply_t(f: &Dense, k: &SparseFunction<Complex64>) -> Dense {
    let mut out = Dense::new();
    for (z, fv) in f {
        for (y, kv) in k.iter() {
            *out.entry(y.multiply(z).unwrap()).or_default() += fv * kv;
        }
    }
    out
}

// (S^* g)(z) = sum_y conj(L(y)) g(y z): mass at w moves to y^{-1} w
fn apply_s_star(g: &Dense, l: &SparseFunction<Complex64>) -> Dense {
    let mut out = Dense::new();
    for (w, gv) in g {
        for (y, lv) in l.iter() {
            *out.entry(y.inverse().unwrap().multiply(w).unwrap()).or_default() += lv.conj() * gv;
        }
    }
    out
}

fn ttstar() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = GroupShape::new(2).map_err(e)?;
    let mut worst = 0.0f64;
    for (r, size) in [(1usize, 20usize), (2, 12), (3, 6)] {
        for _ in 0..3 {
            let ls: Vec<_> = (0..r).map(|_| random_kernel(s, &mut rng, size)).collect();
            let ks: Vec<_> = (0..r).map(|_| random_kernel(s, &mut rng, size)).collect();
            let f: Dense = random_kernel(s, &mut rng, 8).iter().map(|(k, v)| (k.clone(), *v)).collect();
            let mut lhs = f.clone();
            for j in (0..r).rev() {
                lhs = apply_s_star(&apply_t(&lhs, &ks[j]), &ls[j]);
            }
            let a = ttstar_kernel(&ls, &ks).map_err(e)?;
            let rhs = apply_t(&f, &a);
            for key in lhs.keys().chain(rhs.keys()) {
                let diff = lhs.get(key).copied().unwrap_or_default() - rhs.get(key).copied().unwrap_or_default();
                worst = worst.max(diff.norm());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    Ok(format!("r in 1..=3, supports <= 20, max deviation {worst:.1e}"))
}

fn product_residual(target_l: &[f64], target_n: &[f64], parts: &[(&[f64], &[f64])]) -> f64 {
    let mut worst = 0.0f64;
    for (i, tl) in target_l.iter().enumerate() {
        for (j, tn) in target_n.iter().enumerate() {
            let sum: f64 = parts.iter().map(|(l, n)| l[i] * n[j]).sum();
            worst = worst.max((tl * tn - sum).abs());
        }
    }
    worst
}

fn partition(grids: &[MultiplierGrid]) -> f64 {
    let refs: Vec<&MultiplierGrid> = grids.iter().collect();
    MultiplierGrid::partition_residual(&refs)
}

fn decomposition() -> Outcome {
    let mut worst_pt = 0.0f64;
    let mut worst_part = 0.0f64;
    for k in 5..=9 {
        let params = DecompositionParams { k, ..Default::default() };
        let probes = ProbeSet::standard(&params, 32, k as u64).map_err(e)?;
        let dec = decompose_kernel(&params, &DecompositionMode::Full, &probes).map_err(e)?;
        let by_name: BTreeMap<&str, _> = dec.components.iter().map(|c| (c.name.as_str(), c)).collect();
        let kk = by_name["K_k"];
        let mut central: Vec<(&[f64], &[f64])> = vec![(&by_name["K_k^c"].l, &by_name["K_k^c"].n)];
        let ss: Vec<u32> = params.s_range().collect();
        for s in &ss {
            let c = by_name[format!("K_k,{s}").as_str()];
            central.push((&c.l, &c.n));
        }
        worst_pt = worst_pt.max(product_residual(&kk.l, &kk.n, &central));
        // the non-central stage splits phi^(1) L_k, the Fourier form of L_k
        let weights = Variable::NonCentral.weights(params.shape());
        let phi1 = Cutoff::EtaLeq { tau: params.tau, a: params.delta * k as f64 };
        for s in &ss {
            let ks = by_name[format!("K_k,{s}").as_str()];
            let lf: Vec<f64> = ks
                .l
                .iter()
                .zip(&probes.g1)
                .map(|(l, g)| l * phi1.eval(scaled_radius(params.tau, k, &weights, g)))
                .collect();
            let parts: Vec<(&[f64], &[f64])> = dec
                .components
                .iter()
                .filter(|c| {
                    c.name == format!("G^low_k,{s}")
                        || c.name == format!("G^c_k,{s}")
                        || c.name.starts_with(&format!("G_k,{s},"))
                })
                .map(|c| (c.l.as_slice(), c.n.as_slice()))
                .collect();
            ensure(parts.len() >= 2, || format!("missing non-central pieces for s={s}"))?;
            worst_pt = worst_pt.max(product_residual(&lf, &ks.n, &parts));
        }
        worst_part = worst_part.max(partition(&central_multipliers(&params).map_err(e)?));
        for s in &ss {
            worst_part = worst_part.max(partition(&noncentral_multipliers(&params, *s).map_err(e)?));
        }
    }
    ensure(worst_pt <= 1e-9, || format!("pointwise residual {worst_pt:e} > 1e-9"))?;
    ensure(worst_part <= 1e-12, || format!("partition residual {worst_part:e} > 1e-12"))?;
    Ok(format!("k in 5..=9, pointwise residual {worst_pt:.1e}, partition residual {worst_part:.1e}"))
}

fn primes(lo: i128, hi: i128) -> Vec<i128> {
    (lo..=hi).filter(|&p| p >= 2 && (2..p).take_while(|i| i * i <= p).all(|i| p % i != 0)).collect()
}

fn gauss_direct(a1: i128, a2: i128, q: i128) -> f64 {
    let s: Complex64 = (0..q)
        .map(|n| {
            let ph = ((a1 * n + a2 * n * n) % q) as f64 / q as f64;
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ph)
        })
        .sum();
    s.norm() / q as f64
}

fn gauss_sums() -> Outcome {
    let s1 = gauss_sum_complete(&RationalVector::new(vec![1, 0], 2).map_err(e)?).map_err(e)?;
    ensure(s1.norm() <= 1e-9, || format!("S((1,0)/2) = {s1}"))?;
    let s2 = gauss_sum_complete(&RationalVector::new(vec![0, 1], 3).map_err(e)?).map_err(e)?;
    ensure((s2.norm() - 3f64.powf(-0.5)).abs() <= 1e-9, || format!("|S((0,1)/3)| = {}", s2.norm()))?;
    let mut points = Vec::new();
    for p in primes(3, 97) {
        let mut lib = 0.0f64;
        let mut oracle = 0.0f64;
        for a1 in 0..p {
            for a2 in 0..p {
                if a1 == 0 && a2 == 0 {
                    continue;
                }
                let v = gauss_sum_complete(&RationalVector::new(vec![a1, a2], p).map_err(e)?).map_err(e)?;
                lib = lib.max(v.norm());
                oracle = oracle.max(gauss_direct(a1, a2, p));
            }
        }
        let want = (p as f64).powf(-0.5);
        ensure((lib - want).abs() <= 1e-6 && (oracle - want).abs() <= 1e-6, || {
            format!("p={p}: max |S| = {lib}, direct {oracle}, expected {want}")
        })?;
        points.push((p as f64, lib));
    }
    let fit = decay_fit(&points).map_err(e)?;
    ensure((fit.slope + 0.5).abs() <= 0.02, || format!("decay slope {}", fit.slope))?;
    Ok(format!("exact small cases, 24 primes matched to p^-1/2, slope {:.4}", fit.slope))
}

fn reduced(q: i128, d: usize) -> Vec<Vec<i128>> {
    let mut out = Vec::new();
    let total = (q as usize).pow(d as u32);
    for idx in 0..total {
        let mut v = Vec::with_capacity(d);
        let mut t = idx;
        for _ in 0..d {
            v.push((t % q as usize) as i128);
            t /= q as usize;
        }
        if v.iter().fold(q, |g, x| g.gcd(x)) == 1 {
            out.push(v);
        }
    }
    out
}

fn nil_brute(s: GroupShape, a: &[i128], q: i128, r: usize, variant: WordVariant) -> Complex64 {
    let total = (q as usize).pow(2 * r as u32);
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in 0..total {
        let mut t = idx;
        let mut digits = Vec::with_capacity(2 * r);
        for _ in 0..2 * r {
            digits.push((t % q as usize) as i128);
            t /= q as usize;
        }
        let w = alternating_word(&digits[..r], &digits[r..], variant, s).unwrap();
        let ph: i128 = w.coords().iter().zip(a).map(|(c, x)| (c * x).rem_euclid(q)).sum::<i128>() % q;
        acc += Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ph as f64 / q as f64);
    }
    acc / (q as f64).powi(2 * r as i32)
}

fn nil_gauss() -> Outcome {
    let s = GroupShape::new(2).map_err(e)?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for q in 2..=5 {
        for r in 1..=2 {
            for a in reduced(q, s.len()) {
                let rv = RationalVector::new(a.clone(), q).map_err(e)?;
                for v in [WordVariant::D, WordVariant::DTilde] {
                    let dp = nil_gauss_sum(s, &rv, r, v, SumMethod::Dp).map_err(e)?;
                    let br = nil_brute(s, &a, q, r, v);
                    worst = worst.max((dp - br).norm());
                    checked += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("DP vs brute {worst:e}"))?;
    let mut slopes = Vec::new();
    for r in 1..=2 {
        let mut points = Vec::new();
        for q in 2..=20 {
            let mut best = 0.0f64;
            for a in reduced(q, s.len()) {
                let g = nil_gauss_sum(s, &RationalVector::new(a, q).map_err(e)?, r, WordVariant::D, SumMethod::Dp)
                    .map_err(e)?
                    .norm();
                ensure(g <= 1.0 + 1e-12, || format!("|G| = {g} > 1 at q={q}"))?;
                best = best.max(g);
            }
            points.push((q as f64, best));
        }
        let fit = decay_fit(&points).map_err(e)?;
        ensure(fit.slope < 0.0, || format!("slope {} for r={r} is not negative", fit.slope))?;
        slopes.push(format!("r={r}: {:.3}", fit.slope));
    }
    Ok(format!("{checked} DP/brute pairs to {worst:.1e}, |G| <= 1, slopes {}", slopes.join(", ")))
}

fn variation_brute(a: &[f64], rho: f64) -> f64 {
    let n = a.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s: f64 = idx.windows(2).map(|w| (a[w[1]] - a[w[0]]).abs().powf(rho)).sum();
        best = best.max(s);
    }
    best.powf(1.0 / rho)
}

fn variation_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rho = [1.0, 1.5, 2.0, 3.0, 7.5][rng.gen_range(0..5)];
        let dp = variation(&IndexedSequence::from_reals(&a), rho).map_err(e)?;
        let br = variation_brute(&a, rho);
        worst = worst.max((dp - br).abs() / br.max(1.0));
    }
    ensure(worst <= 1e-12, || format!("DP vs enumeration {worst:e}"))?;
    let rhos = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, 32.0];
    for _ in 0..1000 {
        let m = rng.gen_range(1..=6u32);
        let len = (1usize << m) + 1;
        let vals: Vec<Complex64> =
            (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let seq = IndexedSequence::new((0..len as i64).collect(), vals).map_err(e)?;
        let j0 = rng.gen_range(0..(1i64 << m));
        let mut prev = f64::INFINITY;
        for rho in rhos {
            let (lhs, rhs) = rademacher_menshov(&seq, j0, m, rho).map_err(e)?;
            if rho >= 2.0 {
                ensure(lhs <= rhs * (1.0 + 1e-12), || format!("RM fails: {lhs} > {rhs}, rho={rho}, m={m}"))?;
            }
            ensure(lhs <= prev * (1.0 + 1e-12), || format!("V^rho increased in rho at rho={rho}"))?;
            prev = lhs;
        }
    }
    Ok(format!("200 sequences exact to {worst:.1e}, RM and rho-monotonicity on 1000 sequences"))
}

fn v_kernel() -> Outcome {
    let mut worst = 0.0f64;
    let mut slow = 0.0f64;
    let full = |m, q| RationalSet::FixedDenominator { m, q };
    for d in 2..=3 {
        let s = GroupShape::new(d).map_err(e)?;
        for q in 1..=12i128 {
            let t = Instant::now();
            let spectral = gauss_operator_kernel(s, &full(d, q), &full(s.d_prime(), q), q)
                .map_err(e)?
                .dense();
            let mut counting = vec![0.0; spectral.len()];
            for n in 0..q {
                counting[jq_index(&moment_curve(n, s).map_err(e)?, q)] += 1.0 / q as f64;
            }
            let lib = moment_counting_kernel(s, q).map_err(e)?;
            for ((a, b), c) in spectral.iter().zip(&counting).zip(&lib) {
                worst = worst.max((a - b).norm()).max((c - b).abs());
            }
            slow = slow.max(t.elapsed().as_secs_f64());
        }
    }
    ensure(worst <= 1e-10, || format!("spectral vs counting {worst:e}"))?;
    Ok(format!("Q <= 12, d in {{2,3}}, max deviation {worst:.1e}, slowest case {slow:.2} s"))
}

fn ergodic_demo() -> Outcome {
    let sys = NilSystem::cyclic(101).map_err(e)?;
    let mut f = vec![0.0; 101];
    f[0] = 1.0;
    let n = 1u64 << 14;
    let avg = ergodic_average(&sys, &f, &[IntPolynomial::monomial(1)], n, Averaging::Rough).map_err(e)?;
    let mut worst = 0.0f64;
    for (x, v) in avg.iter().enumerate() {
        worst = worst.max((v - 1.0 / 101.0).abs());
        // direct count of n in [-N, N] with x + n = 0 mod 101
        let hits = (-(n as i64)..=n as i64).filter(|m| (x as i64 + m).rem_euclid(101) == 0).count();
        let want = hits as f64 / (2 * n + 1) as f64;
        ensure((v - want).abs() <= 1e-12, || format!("A_N f({x}) = {v}, direct count gives {want}"))?;
    }
    ensure(worst < 0.02, || format!("deviation {worst}"))?;
    let hq = NilSystem::heisenberg_quotient(2, 3).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let m: Vec<i128> = (0..hq.arity()).map(|_| rng.gen_range(-3..=3)).collect();
        let nn: Vec<i128> = (0..hq.arity()).map(|_| rng.gen_range(-3..=3)).collect();
        ensure(commutator_identity_check(&hq, &m, &nn).map_err(e)?, || {
            format!("commutator identity fails at m={m:?} n={nn:?}")
        })?;
    }
    Ok(format!("deviation {worst:.2e} at N=2^14, 100 commutator pairs exact"))
}

fn maximal_growth() -> Outcome {
    let s = GroupShape::new(2).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let box5: Vec<LatticeElement> = (-2..=2)
        .flat_map(|a| (-2..=2).flat_map(move |b| (-2..=2).map(move |c| vec![a, b, c])))
        .map(|c| LatticeElement::new(s, c).unwrap())
        .collect();
    let (mut r6, mut r12) = (0.0, 0.0);
    for _ in 0..20 {
        let f = SparseFunction::from_entries(s, box5.iter().map(|x| (x.clone(), rng.gen_range(-1.0..1.0))))
            .map_err(e)?;
        for (kmax, acc) in [(6, &mut r6), (12, &mut r12)] {
            let scales: Vec<f64> = (0..=kmax).map(|k| 2f64.powi(k)).collect();
            *acc += group_maximal(&f, &scales, None, 2.0).map_err(e)?.0.sup_ratio / 20.0;
        }
    }
    let growth = r12 / r6 - 1.0;
    ensure(growth < 0.05, || format!("mean ratio {r6:.4} -> {r12:.4}, growth {:.2}%", 100.0 * growth))?;
    Ok(format!("mean ratio {r6:.4} (K=6) -> {r12:.4} (K=12), growth {:.2}%", 100.0 * growth))
}

fn quasi_geometry() -> Outcome {
    let s = GroupShape::new(2).map_err(e)?;
    let geo = QuasiGeometry::new(s, vec![1.0; 3], 1).map_err(e)?;
    let origin = RealElement::identity(s);
    let count = geo.ball_count(&origin, 2.0).map_err(e)?;
    // brute force: q(y^{-1}) < 2 needs |y1| < 2, |y2| < 4, |c| < 8 + |y1 y2|
    let mut brute = 0u64;
    for a in -2i128..=2 {
        for b in -4i128..=4 {
            for c in -20i128..=20 {
                let inv = LatticeElement::new(s, vec![a, b, c]).unwrap().inverse().unwrap();
                let norm = inv
                    .coords()
                    .iter()
                    .zip([1.0, 2.0, 3.0])
                    .map(|(v, w)| (*v as f64).abs().powf(1.0 / w))
                    .fold(0.0, f64::max);
                brute += (norm < 2.0) as u64;
            }
        }
    }
    ensure(count == 315 && brute == 315, || format!("ball count {count}, brute force {brute}"))?;
    let (lo, hi) = (4f64.powi(-3), 4f64.powi(3));
    let mut range = (f64::INFINITY, 0.0f64);
    for (q, w) in [(1i128, 0u32), (2, 0), (3, 0), (1, 4), (2, 4), (2, 8)] {
        let geo = QuasiGeometry::from_scales(s, 0.4, 0.6, w, q).map_err(e)?;
        let r0 = 2.0 * q as f64 * 2f64.powf(0.6 * w as f64);
        for step in 0..6 {
            let r = r0 * 2f64.powf(step as f64 * 0.5);
            let center = RealElement::new(s, vec![0.5 * step as f64, -1.0, 3.0]).map_err(e)?;
            let ratio = geo.ball_count(&center, r).map_err(e)? as f64 / geo.ball_volume(r);
            ensure((lo..=hi).contains(&ratio), || format!("ratio {ratio} at Q={q}, w={w}, r={r}"))?;
            range = (range.0.min(ratio), range.1.max(ratio));
        }
    }
    Ok(format!("315 exact, comparability ratios in [{:.3}, {:.3}]", range.0, range.1))
}

fn cli_determinism() -> Outcome {
    let run = || -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_nilcircle"))
            .args(["gauss-scan", "--d", "2", "--q", "3..60", "--sample", "10", "--seed", "17", "--format", "csv"])
            .output()
            .map_err(e)?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        Ok(out.stdout)
    };
    let (a, b) = (run()?, run()?);
    ensure(!a.is_empty() && a == b, || "gauss-scan output differs between runs".into())?;
    Ok(format!("two seeded gauss-scan runs byte-identical ({} bytes)", a.len()))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 12] = [
        ("group law suite", 5.0, group_law),
        ("word closed forms", 5.0, word_forms),
        ("TT* kernel identity", 10.0, ttstar),
        ("circle-method reconstruction", 60.0, decomposition),
        ("Gauss sums", 30.0, gauss_sums),
        ("nilpotent Gauss sums", 120.0, nil_gauss),
        ("variation seminorm", 30.0, variation_checks),
        ("moment counting kernel", 10.0, v_kernel),
        ("ergodic averages", 30.0, ergodic_demo),
        ("maximal function growth", 120.0, maximal_growth),
        ("quasi-geometry", 10.0, quasi_geometry),
        ("CLI determinism", f64::INFINITY, cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        let timing = if limit.is_finite() { format!("{secs:.2} s, limit {limit} s") } else { format!("{secs:.2} s") };
        let (ok, detail) = match outcome {
            Ok(d) if secs < *limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        failed += (!ok) as usize;
        println!("{} {:>2} {name}: {detail} ({timing})", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
