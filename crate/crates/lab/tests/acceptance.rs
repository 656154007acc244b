//! Acceptance gate: eleven quantitative checks, one pass/fail line each.
//! Tolerances are pinned in this file, never configured from outside.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! for passing criteria as well.

use std::process::Command;
use std::time::{Duration, Instant};

use outerlab_core::kernels::{herglotz_kernel, kernel_diff_bound_check, poisson_lq_scaling};
use outerlab_core::modulus::{CircleModulus, ModulusProfile};
use outerlab_core::oscillation::{
    balance_exponents, ball_drop_exponent, fit_loglog, mean_oscillation,
    sharpness_weight_exponent,
};
use outerlab_core::outer::{BallOuterEvaluator, DiscOuterEvaluator};
use outerlab_core::sampler::Sampler;
use outerlab_core::sphere::{cap_measure_exact, sample_interior, sample_sphere};
use outerlab_core::C64;
use outerlab::config::SuiteConfig;
use outerlab::report::Verdict;
use outerlab::scenario::run_scenario;

const SEED: u64 = 0xacce;

fn sampler(stream: u64) -> Sampler {
    Sampler::new(SEED, stream)
}

type Check = (&'static str, fn() -> Result<String, String>);

#[test]
fn acceptance_criteria() {
    let checks: [Check; 11] = [
        ("disc outer closed form", c01_disc_closed_form),
        ("ball outer lift consistency", c02_ball_lift),
        ("reproducing identity", c03_reproducing_identity),
        ("ball measure scaling", c04_measure_scaling),
        ("poisson lq growth", c05_poisson_growth),
        ("kernel difference stability", c06_kernel_stability),
        ("smoothness drop desk check", c07_drop_desk_check),
        ("exponent algebra", c08_exponent_algebra),
        ("oscillation oracle", c09_oscillation_oracle),
        ("negative control", c10_negative_control),
        ("suite determinism", c11_determinism),
    ];
    let mut failures = 0usize;
    for (i, (label, check)) in checks.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                println!("criterion {:02} {label}: PASS ({detail}; {secs:.2} s)", i + 1)
            }
            Err(detail) => {
                failures += 1;
                println!("criterion {:02} {label}: FAIL ({detail}; {secs:.2} s)", i + 1)
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}

/// 1. Pure power-cusp moduli evaluate to (1 - z)^beta at interior points,
/// and the smooth modulus e^(cos t) — which has no closed-form shortcut and
/// runs the full quadrature — evaluates to e^z; both to 1e-6 with 2^12
/// nodes, in under a second.
fn c01_disc_closed_form() -> Result<String, String> {
    let budget = Duration::from_secs(1);
    let started = Instant::now();
    let mut s = sampler(1);
    let mut worst = 0.0f64;
    for &beta in &[0.25, 0.5, 1.0] {
        let psi = CircleModulus::power_cusp(beta).map_err(|e| e.to_string())?;
        let g = DiscOuterEvaluator::new(&psi, 1 << 12, 1e-12).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let z = sample_interior(1, 0.95, &mut s)[0];
            let got = g.eval(z).map_err(|e| e.to_string())?;
            let want = ((C64::new(1.0, 0.0) - z).ln() * beta).exp();
            worst = worst.max((got - want).norm());
        }
    }
    let smooth = CircleModulus::custom(cosine_log_modulus);
    let g = DiscOuterEvaluator::new(&smooth, 1 << 12, 1e-12).map_err(|e| e.to_string())?;
    let mut worst_quad = 0.0f64;
    for _ in 0..20 {
        let z = sample_interior(1, 0.95, &mut s)[0];
        let got = g.eval(z).map_err(|e| e.to_string())?;
        worst_quad = worst_quad.max((got - z.exp()).norm());
    }
    if worst > 1e-6 || worst_quad > 1e-6 {
        return Err(format!(
            "max |error| {worst:.3e} (cusps) / {worst_quad:.3e} (quadrature) above 1e-6"
        ));
    }
    if started.elapsed() > budget {
        return Err(format!("runtime {:?} above 1 s", started.elapsed()));
    }
    Ok(format!(
        "cusp error {worst:.1e}, quadrature error {worst_quad:.1e} over 80 points"
    ))
}

fn cosine_log_modulus(t: f64) -> f64 {
    t.cos()
}

/// 2. Monte-Carlo ball outer of the lifted modulus |1 - zeta_1|^beta
/// matches the closed-form lift exponent beta * Log(1 - z_1) within 3
/// standard errors of its estimate, 1e5 draws per point, 10 points,
/// under 30 s.
fn c02_ball_lift() -> Result<String, String> {
    let budget = Duration::from_secs(30);
    let started = Instant::now();
    let beta = 0.5;
    let psi = CircleModulus::power_cusp(beta).map_err(|e| e.to_string())?;
    let phi = ModulusProfile::lifted(psi, 2, 1 << 12, 1e-12).map_err(|e| e.to_string())?;
    let ev = BallOuterEvaluator::new(&phi, 100_000, sampler(2)).map_err(|e| e.to_string())?;
    let mut s = sampler(0x22);
    let mut worst_pull = 0.0f64;
    for _ in 0..10 {
        let z = sample_interior(2, 0.8, &mut s);
        let got = ev.eval_detailed(&z).map_err(|e| e.to_string())?;
        let want = (C64::new(1.0, 0.0) - z[0]).ln() * beta;
        let pull = (got.exponent - want).norm() / got.exponent_se.max(1e-12);
        worst_pull = worst_pull.max(pull);
    }
    if worst_pull > 3.0 {
        return Err(format!("worst |exponent error| = {worst_pull:.2} standard errors"));
    }
    if started.elapsed() > budget {
        return Err(format!("runtime {:?} above 30 s", started.elapsed()));
    }
    Ok(format!("worst exponent pull {worst_pull:.2} se"))
}

/// 3. The Herglotz combination 2C - 1 integrates to 1 over the sphere:
/// Monte-Carlo mean within 3 standard errors at 10 interior points for
/// n in {1, 2, 3}.
fn c03_reproducing_identity() -> Result<String, String> {
    let mut s = sampler(3);
    let draws = 40_000;
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        for _ in 0..10 {
            let z = sample_interior(n, 0.7, &mut s);
            let mut acc = C64::new(0.0, 0.0);
            let mut acc2 = 0.0f64;
            for _ in 0..draws {
                let xi = sample_sphere(n, &mut s);
                let v = herglotz_kernel(&z, &xi).map_err(|e| e.to_string())?;
                acc += v;
                acc2 += v.norm_sqr();
            }
            let mean = acc / draws as f64;
            let var = (acc2 / draws as f64 - mean.norm_sqr()).max(0.0);
            let se = (var / draws as f64).sqrt();
            let pull = (mean - C64::new(1.0, 0.0)).norm() / se.max(1e-12);
            worst = worst.max(pull);
        }
    }
    if worst > 3.0 {
        return Err(format!("worst |mean - 1| = {worst:.2} standard errors"));
    }
    Ok(format!("worst pull {worst:.2} se over 30 points"))
}

/// 4. sigma(Q_r) scales like r^n: fitted exponent within 5% of n. Budgets
/// grow with n because shell hits at depth r ~ 2^-k thin out like r^n;
/// the exact cap measure cross-checks one radius per dimension.
fn c04_measure_scaling() -> Result<String, String> {
    let budget = Duration::from_secs(60);
    let started = Instant::now();
    let cases: [(usize, usize, std::ops::RangeInclusive<i32>); 3] = [
        (1, 1_000_000, 3..=10),
        (2, 4_000_000, 3..=7),
        (3, 40_000_000, 3..=6),
    ];
    let mut detail = String::new();
    for (n, samples, levels) in cases {
        let mut s = sampler(4 + n as u64);
        let radii: Vec<f64> = levels.clone().map(|k| (0.5f64).powi(k)).collect();
        let mut hits = vec![0u64; radii.len()];
        for _ in 0..samples {
            let xi = sample_sphere(n, &mut s);
            let d = (C64::new(1.0, 0.0) - xi.coords()[0]).norm();
            for (h, &r) in hits.iter_mut().zip(&radii) {
                if d <= r {
                    *h += 1;
                }
            }
        }
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = hits
            .iter()
            .map(|&h| ((h.max(1)) as f64 / samples as f64).ln())
            .collect();
        let fit = fit_loglog(&xs, &ys).map_err(|e| e.to_string())?;
        let rel = (fit.slope - n as f64).abs() / n as f64;
        if rel > 0.05 {
            return Err(format!("n={n}: slope {:.4} off by {:.1}%", fit.slope, rel * 100.0));
        }
        // Dual route at one mid radius: hit fraction vs the closed-form
        // cap measure, within 4 binomial standard errors.
        let probe = 1; // second radius, k = 4
        let frac = hits[probe] as f64 / samples as f64;
        let exact = cap_measure_exact(n, radii[probe]).map_err(|e| e.to_string())?;
        let se = (frac * (1.0 - frac) / samples as f64).sqrt();
        if (frac - exact).abs() > 4.0 * se {
            return Err(format!(
                "n={n}: hit fraction {frac:.3e} vs exact cap measure {exact:.3e} (se {se:.1e})"
            ));
        }
        detail.push_str(&format!("n={n}: slope {:.3}; ", fit.slope));
    }
    if started.elapsed() > budget {
        return Err(format!("runtime {:?} above 1 min", started.elapsed()));
    }
    Ok(detail.trim_end_matches("; ").to_string())
}

/// 5. ||P_r||_q^q grows like (1 - r)^-(q-1): fitted exponent within 5%
/// for q in {1.5, 2, 3} on radii 1 - 2^-k, k = 8..14.
fn c05_poisson_growth() -> Result<String, String> {
    let radii: Vec<f64> = (8..=14).map(|k| 1.0 - (0.5f64).powi(k)).collect();
    let mut detail = String::new();
    for &q in &[1.5, 2.0, 3.0] {
        let scaling = poisson_lq_scaling(q, &radii).map_err(|e| e.to_string())?;
        let want = q - 1.0;
        let rel = (scaling.fit.slope - want).abs() / want;
        if rel > 0.05 {
            return Err(format!(
                "q={q}: slope {:.4} vs {want} off by {:.1}%",
                scaling.fit.slope,
                rel * 100.0
            ));
        }
        detail.push_str(&format!("q={q}: slope {:.3}; ", scaling.fit.slope));
    }
    Ok(detail.trim_end_matches("; ").to_string())
}

/// 6. The kernel difference constant is stable within a factor 2 across
/// j in 1..5 and l in {2^-6, 2^-8, 2^-10} at n = 2, judged on the mean at
/// the 1/2-Holder normalization |diff| d^(n+1/2) / sqrt(l). The plain
/// d^(n+1) / l normalization is asserted to drift like sqrt(d/l) so the
/// correction stays measured rather than hidden.
fn c06_kernel_stability() -> Result<String, String> {
    let base = sampler(6);
    let mut flat_hi = f64::MIN;
    let mut flat_lo = f64::MAX;
    let mut drifts = Vec::new();
    for &lev in &[6, 8, 10] {
        let l = (0.5f64).powi(lev);
        let mut plain_first = 0.0;
        let mut plain_last = 0.0;
        for j in 1..=5u32 {
            let mut sub = base.substream((u64::from(j) << 8) | lev as u64);
            let stat =
                kernel_diff_bound_check(2, l, j, 4_000, &mut sub).map_err(|e| e.to_string())?;
            flat_hi = flat_hi.max(stat.holder_ratio_mean);
            flat_lo = flat_lo.min(stat.holder_ratio_mean);
            if j == 1 {
                plain_first = stat.ratio_mean;
            }
            if j == 5 {
                plain_last = stat.ratio_mean;
            }
        }
        drifts.push(plain_last / plain_first);
    }
    let spread = flat_hi / flat_lo;
    if spread > 2.0 {
        return Err(format!("holder-mean constant spread {spread:.3} above 2"));
    }
    for d in &drifts {
        if !(2.0f64.powf(1.5)..2.0f64.powf(2.5)).contains(d) {
            return Err(format!(
                "plain-mean drift {d:.3} outside [2^1.5, 2^2.5]: tangential term not reproduced"
            ));
        }
    }
    Ok(format!(
        "holder-mean spread {spread:.3} over 15 cells; plain drift {:.2}x over 4 octaves",
        drifts.iter().sum::<f64>() / drifts.len() as f64
    ))
}

/// 7. Desk check of the smoothness drop: the default disc scenario with a
/// 0.5-Holder modulus and the n = 2 ball analogue both measure at least
/// the predicted exponent minus (halfwidth + 0.03), in under 5 min each.
fn c07_drop_desk_check() -> Result<String, String> {
    let cfg = SuiteConfig::load(Some("builtin:default")).map_err(|e| e.to_string())?;
    let mut detail = String::new();
    for name in ["disc-holder-drop", "ball-slice-drop"] {
        let budget = Duration::from_secs(300);
        let started = Instant::now();
        let s = cfg.scenario(name).map_err(|e| e.to_string())?;
        let report =
            run_scenario(s, cfg.suite.seed, cfg.suite.tolerance).map_err(|e| e.to_string())?;
        if report.verdict != Verdict::Consistent {
            return Err(format!("{name}: verdict {:?}", report.verdict));
        }
        let floor = report.predicted - (report.halfwidth + 0.03);
        if !(report.measured >= floor) {
            return Err(format!(
                "{name}: measured {:.4} below predicted - slack {floor:.4}",
                report.measured
            ));
        }
        if started.elapsed() > budget {
            return Err(format!("{name}: runtime {:?} above 5 min", started.elapsed()));
        }
        detail.push_str(&format!(
            "{name}: measured {:.3} >= {:.3}; ",
            report.measured, floor
        ));
    }
    Ok(detail.trim_end_matches("; ").to_string())
}

/// 8. Exponent algebra on 1000 random triples: the drop formula agrees
/// with its dual route to 1e-12, the balance point is exactly alpha/2,
/// and the sharpness weight exponent stays above -1 with both routes
/// agreeing to 1e-12.
fn c08_exponent_algebra() -> Result<String, String> {
    let mut s = sampler(8);
    for _ in 0..1000 {
        let alpha = s.uniform_in(1e-6, 1.0);
        let p = s.uniform_in(1.0 + 1e-6, 64.0);
        let n = 1 + (s.uniform_in(0.0, 6.0) as usize).min(5);
        let direct = ball_drop_exponent(alpha, p, n).map_err(|e| e.to_string())?;
        let q = p / (p - 1.0);
        let dual = alpha / (n as f64 + 1.0 - n as f64 / q);
        if (direct - dual).abs() > 1e-12 {
            return Err(format!(
                "drop exponent routes disagree: {direct} vs {dual} at (a={alpha}, p={p}, n={n})"
            ));
        }
        let bal = balance_exponents(alpha).map_err(|e| e.to_string())?;
        if bal.gamma != alpha / 2.0 {
            return Err(format!("balance gamma {} != alpha/2 at alpha={alpha}", bal.gamma));
        }
        let n2 = 2 + (s.uniform_in(0.0, 3.0) as usize).min(2);
        let p2 = s.uniform_in(n2 as f64 + 1e-3, 64.0);
        let eps = s.uniform_in(1e-6, 1.0);
        let w = sharpness_weight_exponent(p2, n2, eps).map_err(|e| e.to_string())?;
        let closed = (n2 * n2) as f64 * eps / (p2 + n2 as f64 * eps) - 1.0;
        if (w - closed).abs() > 1e-12 {
            return Err(format!(
                "weight exponent routes disagree: {w} vs {closed} at (p={p2}, n={n2}, e={eps})"
            ));
        }
        if !(w > -1.0) {
            return Err(format!("weight exponent {w} not above -1"));
        }
    }
    Ok("1000 random triples, routes agree to 1e-12".to_string())
}

/// 9. The geometric-median oscillation matches brute-force pivot-grid
/// minimization within 1e-6 relative on 1000 small instances, and is
/// exactly translation/scaling equivariant.
fn c09_oscillation_oracle() -> Result<String, String> {
    let mut s = sampler(9);
    let mut worst_rel = 0.0f64;
    for _ in 0..1000 {
        let count = 2 + (s.uniform_in(0.0, 11.0) as usize).min(10);
        let values: Vec<C64> = (0..count)
            .map(|_| C64::new(s.uniform_in(-1.0, 1.0), s.uniform_in(-1.0, 1.0)))
            .collect();
        let got = mean_oscillation(&values).map_err(|e| e.to_string())?;
        let brute = brute_force_nu(&values);
        let scale = brute.max(1e-9);
        let rel = (got.nu - brute).abs() / scale;
        worst_rel = worst_rel.max(rel);
        if rel > 1e-6 {
            return Err(format!(
                "nu {:.9e} vs brute {brute:.9e}: relative gap {rel:.2e}",
                got.nu
            ));
        }
    }
    // Equivariance: nu(a v + b) = |a| nu(v), checked on fresh instances.
    for _ in 0..100 {
        let values: Vec<C64> = (0..8)
            .map(|_| C64::new(s.uniform_in(-1.0, 1.0), s.uniform_in(-1.0, 1.0)))
            .collect();
        let a = C64::new(s.uniform_in(0.2, 2.0), s.uniform_in(-1.0, 1.0));
        let b = C64::new(s.uniform_in(-5.0, 5.0), s.uniform_in(-5.0, 5.0));
        let moved: Vec<C64> = values.iter().map(|&v| v * a + b).collect();
        let base = mean_oscillation(&values).map_err(|e| e.to_string())?;
        let shifted = mean_oscillation(&moved).map_err(|e| e.to_string())?;
        let want = base.nu * a.norm();
        if (shifted.nu - want).abs() > 1e-9 * want.max(1e-9) {
            return Err(format!("equivariance broke: {} vs {want}", shifted.nu));
        }
    }
    Ok(format!("worst relative gap {worst_rel:.1e} over 1000 instances"))
}

/// Brute-force mean-oscillation oracle: zooming pivot grid, independent of
/// the Weiszfeld route.
fn brute_force_nu(values: &[C64]) -> f64 {
    let mut lo_re = f64::MAX;
    let mut hi_re = f64::MIN;
    let mut lo_im = f64::MAX;
    let mut hi_im = f64::MIN;
    for v in values {
        lo_re = lo_re.min(v.re);
        hi_re = hi_re.max(v.re);
        lo_im = lo_im.min(v.im);
        hi_im = hi_im.max(v.im);
    }
    let mut center = C64::new((lo_re + hi_re) / 2.0, (lo_im + hi_im) / 2.0);
    let mut span = ((hi_re - lo_re).max(hi_im - lo_im) / 2.0).max(1e-12);
    let mut best = f64::MAX;
    for _ in 0..6 {
        let grid = 33i32;
        let mut best_here = center;
        for i in -grid..=grid {
            for k in -grid..=grid {
                let c = C64::new(
                    center.re + span * i as f64 / grid as f64,
                    center.im + span * k as f64 / grid as f64,
                );
                let nu = values.iter().map(|v| (*v - c).norm()).sum::<f64>()
                    / values.len() as f64;
                if nu < best {
                    best = nu;
                    best_here = c;
                }
            }
        }
        center = best_here;
        span /= 8.0;
    }
    best
}

/// 10. The built-in wrong-prediction control must report a violation and
/// exit nonzero.
fn c10_negative_control() -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_outerlab"))
        .args(["suite", "--config", "builtin:negative-control"])
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    if out.status.code() != Some(1) {
        return Err(format!("exit code {:?}, want 1", out.status.code()));
    }
    if !stdout.contains("violation") || !stdout.contains("wrong-prediction-control") {
        return Err(format!("stdout missing violation row: {stdout}"));
    }
    Ok("verdict violation, exit code 1".to_string())
}

/// 11. The default suite's CSV is byte-identical across reruns and across
/// --threads values.
fn c11_determinism() -> Result<String, String> {
    let run = |extra: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_outerlab"))
            .arg("suite")
            .args(extra)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "suite exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(out.stdout)
    };
    let a = run(&[])?;
    let b = run(&[])?;
    if a != b {
        return Err("reruns differ byte for byte".to_string());
    }
    let t1 = run(&["--threads", "1"])?;
    let t4 = run(&["--threads", "4"])?;
    if t1 != t4 || t1 != a {
        return Err("outputs differ across --threads values".to_string());
    }
    Ok(format!("4 runs, {} identical bytes each", a.len()))
}
