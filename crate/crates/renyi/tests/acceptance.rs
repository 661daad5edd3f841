//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::time::Instant;

use renyi::bounds::small_deviation_floor;
use renyi::bounds::{spb_feedback, spb_product, tradeoff_channel, CodeParams};
use renyi::capacity::{solve_capacity, DEFAULT_TOL};
use renyi::channels::{gallager_e0, product_channel, renyi_information, DiscreteChannel};
use renyi::exponents::{
    haroutunian_solve, sphere_packing_exponent, ExponentCurve, HaroutunianOptions, OrderGrid,
};
use renyi::measures::divergence_slices;
use renyi::oracle::{
    berry_variable, exact_small_deviation, feedback_channel, feedback_check, run_suite,
    sandwich_check, FeedbackStrategy, Suite,
};
use renyi::poisson::{poisson_capacity, poisson_spb, PoissonChannelSpec};
use renyi::sampling::{random_channel, random_prior, substream};
use renyi::Order;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ord(a: f64) -> Order {
    Order::new(a).unwrap()
}

fn cap(a: f64, w: &DiscreteChannel) -> f64 {
    solve_capacity(ord(a), w, DEFAULT_TOL).unwrap().value
}

fn minimax() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let mut rng = substream(SEED, i);
        let (x, y) = (2 + (i as usize % 4), 2 + (i as usize / 4 % 4));
        let w = random_channel(&mut rng, x, y);
        for a in [0.3, 0.5, 0.9, 1.0, 1.5, 3.0] {
            worst = worst.max(solve_capacity(ord(a), &w, DEFAULT_TOL).unwrap().duality_gap);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && secs < 60.0,
        format!("worst gap {worst:.3e} (tol 1e-8), {secs:.2}s (limit 60s)"),
    )
}

fn additivity() -> Outcome {
    let mut worst_add: f64 = 0.0;
    let mut worst_cap = f64::INFINITY;
    for i in 0..20 {
        let mut rng = substream(SEED + 1, i);
        let w = random_channel(&mut rng, 2, 2 + (i as usize % 2));
        let v = random_channel(&mut rng, 2, 2 + (i as usize / 2 % 2));
        let joint = product_channel(&[w.clone(), v.clone()]).unwrap();
        let parts = [w.clone(), v.clone()];
        for a in [0.5, 1.0, 2.0] {
            let (sw, sv) = (
                solve_capacity(ord(a), &w, DEFAULT_TOL).unwrap(),
                solve_capacity(ord(a), &v, DEFAULT_TOL).unwrap(),
            );
            worst_add = worst_add.max((cap(a, &joint) - sw.value - sv.value).abs());
            let center: Vec<f64> = sv
                .center
                .weights()
                .iter()
                .flat_map(|qv| sw.center.weights().iter().map(move |qw| qw * qv))
                .collect();
            for s in 0..100 {
                let strat =
                    FeedbackStrategy::random(&mut substream(SEED + 2, i * 1000 + s), 4, &parts);
                let ch = feedback_channel(&strat, &parts).unwrap();
                for m in 0..4 {
                    let dv = divergence_slices(a, ch.row(m), &center).to_f64();
                    worst_cap = worst_cap.min(sw.value + sv.value - dv);
                }
            }
        }
    }
    outcome(
        worst_add <= 2e-7 && worst_cap >= -1e-8,
        format!("worst |C(W⊗V)-C(W)-C(V)| {worst_add:.3e} (tol 2e-7); worst feedback cap slack {worst_cap:.3e} (tol -1e-8)"),
    )
}

fn divergence_suites() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [
        Suite::Pinsker,
        Suite::Shiryaev,
        Suite::Dpi,
        Suite::OrderMonotonicity,
        Suite::Convexity,
    ] {
        let r = run_suite(s, 10_000, SEED).unwrap();
        let ok = r.violations == 0 && r.worst_slack >= -1e-10;
        pass &= ok;
        parts.push(format!("{} {:.2e}", r.suite, r.worst_slack));
    }
    outcome(
        pass,
        format!("10^4 instances each, worst slack: {}", parts.join(", ")),
    )
}

fn e0_bridge() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let mut rng = substream(SEED + 3, i);
        let w = random_channel(&mut rng, 2 + (i as usize % 4), 2 + (i as usize / 4 % 4));
        let p = random_prior(&mut rng, w.input_size());
        for rho in [-0.5, 0.25, 1.0, 3.0] {
            let lhs = rho * renyi_information(ord(1.0 / (1.0 + rho)), &p, &w).unwrap();
            worst = worst.max((lhs - gallager_e0(rho, &p, &w).unwrap()).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("worst |rho I - E0| {worst:.3e} (tol 1e-12)"),
    )
}

fn exact_oracles() -> Outcome {
    let moment = run_suite(Suite::Moment, 1000, SEED).unwrap();
    let taylor = run_suite(Suite::Taylor, 1000, SEED).unwrap();
    let mut berry_violations = 0;
    let mut berry_worst = f64::INFINITY;
    let mut berry_cases = 0;
    for family in 0..3 {
        for n in 1..=10u64 {
            for i in 0..20 {
                let mut rng = substream(SEED + 4, family as u64 * 10_000 + n * 100 + i);
                let vars: Vec<_> = (0..n).map(|_| berry_variable(&mut rng, family)).collect();
                let slack =
                    exact_small_deviation(&vars, 3.0).unwrap() - small_deviation_floor(n).unwrap();
                berry_worst = berry_worst.min(slack);
                berry_violations += (slack < 0.0) as u64;
                berry_cases += 1;
            }
        }
    }
    outcome(
        moment.violations == 0 && taylor.violations == 0 && berry_violations == 0,
        format!(
            "moment {} viol (worst {:.2e}), taylor {} viol (worst {:.2e}), berry {} viol over {} exhaustive sums (worst {:.2e})",
            moment.violations, moment.worst_slack, taylor.violations, taylor.worst_slack, berry_violations, berry_cases, berry_worst
        ),
    )
}

fn sandwich() -> Outcome {
    let start = Instant::now();
    let rows = sandwich_check(&[3, 4, 5], &[4, 8], 10_000, SEED).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = rows.iter().all(|r| r.slack() >= -1e-12);
    let binding: usize = rows.iter().map(|r| r.outer_lemmas.len()).sum();
    let worst = rows.iter().map(|r| r.slack()).fold(f64::INFINITY, f64::min);
    outcome(
        ok && secs < 300.0,
        format!("{} configs, {binding} binding outer reports, worst slack {worst:.3e}, {secs:.2}s (limit 300s)", rows.len()),
    )
}

/// ℓ_i = ⌊n/κ⌋ + 1 for the first n mod κ blocks, else ⌊n/κ⌋; t_i = Σ_{j≤i} ℓ_j.
fn plan_formula(n: u64, kappa: u64) -> (Vec<u64>, Vec<u64>) {
    let ell: Vec<u64> = (1..=kappa)
        .map(|i| n / kappa + u64::from(i <= n % kappa))
        .collect();
    let t = (1..=kappa as usize)
        .map(|i| ell[..i].iter().sum())
        .collect();
    (ell, t)
}

fn feedback() -> Outcome {
    let rows = feedback_check(&[2, 3, 4], 1000, SEED).unwrap();
    let sound = rows.iter().all(|r| !r.binding || r.bound <= r.min_error);
    let binding = rows.iter().filter(|r| r.binding).count();
    let mut plans_ok = true;
    let mut rng = substream(SEED + 5, 0);
    use rand::RngExt;
    for _ in 0..50 {
        let n: u64 = rng.random_range(2..500);
        let kappa: u64 = rng.random_range(1..n);
        plans_ok &= renyi::bounds::subblock_plan(n, kappa).unwrap() == plan_formula(n, kappa);
    }
    let note = if binding == 0 {
        " (soundness vacuous: the hypothesis fails at every n <= 4)"
    } else {
        ""
    };
    outcome(
        sound && plans_ok,
        format!("{} configs x 1000 strategies, {binding} binding{note}; 50 subblock plans match: {plans_ok}", rows.len()),
    )
}

fn tradeoff() -> Outcome {
    let mut channels = vec![DiscreteChannel::bsc(0.1).unwrap()];
    for i in 0..10 {
        channels.push(random_channel(&mut substream(SEED + 6, i), 3, 3));
    }
    let mut worst = f64::INFINITY;
    for w in &channels {
        let r = tradeoff_channel(w, cap(0.5, w), 0.05).unwrap();
        for c in &r.inputs {
            worst = worst.min(c.center_slack).min(c.channel_slack);
        }
        for c in &r.caps {
            worst = worst.min(c.slack);
        }
    }
    outcome(
        worst >= 0.0,
        format!("{} channels, worst slack {worst:.3e}", channels.len()),
    )
}

fn slot_capacity(a: f64, floor: f64, ceiling: f64, duration: f64, slots: u32) -> f64 {
    let dt = duration / slots as f64;
    let row = |l: f64| vec![(-l * dt).exp(), -(-l * dt).exp_m1()];
    let w = DiscreteChannel::new(vec![row(floor), row(ceiling)]).unwrap();
    slots as f64 * cap(a, &w)
}

fn poisson() -> Outcome {
    let (t, b) = (3.0, 2.0);
    let free = PoissonChannelSpec::free(t, 0.0, b).unwrap();
    let c1 = poisson_capacity(Order::ONE, &free).unwrap();
    let ch = poisson_capacity(Order::HALF, &free).unwrap();
    let closed =
        (c1 - b * t / std::f64::consts::E).abs() <= 1e-9 && (ch - b * t / 4.0).abs() <= 1e-9;
    let (a, segs) = (0.5, [(1.0, 2.0), (2.5, 4.0), (3.0, 0.5)]);
    let prof = PoissonChannelSpec::with_profile(3.0, a, 4.0, segs.to_vec()).unwrap();
    let mut start = 0.0;
    let mut integral = 0.0;
    for (end, g) in segs {
        integral += 0.25 * (end - start) * (f64::sqrt(g) - f64::sqrt(a)).powi(2);
        start = end;
    }
    let identity = (poisson_capacity(Order::HALF, &prof).unwrap() - integral).abs() <= 1e-9;

    let mut monotone = true;
    let mut trend = Vec::new();
    for (alpha, floor, ceiling) in [(1.0, 0.0, 2.0), (0.5, 0.0, 2.0), (1.0, 0.5, 3.0)] {
        let exact = poisson_capacity(
            ord(alpha),
            &PoissonChannelSpec::free(1.0, floor, ceiling).unwrap(),
        )
        .unwrap();
        let vals: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&k| slot_capacity(alpha, floor, ceiling, 1.0, k))
            .collect();
        monotone &=
            vals.windows(2).all(|v| v[1] >= v[0] - 1e-9) && vals.iter().all(|&v| v <= exact + 1e-9);
        trend.push(format!("{:.4}->{:.4}/{exact:.4}", vals[0], vals[3]));
    }

    let mut constants_ok = true;
    for (tt, aa, bb, phi) in [
        (64.0, 0.0, 1.0, 0.5),
        (40.0, 0.2, 1.7, 0.3),
        (200.0, 1.0, 3.0, 0.8),
    ] {
        let spec = PoissonChannelSpec::free(tt, aa, bb).unwrap();
        let d = (bb - aa) * tt;
        let params =
            CodeParams::from_log_ratio(poisson_capacity(ord(0.9), &spec).unwrap(), 1).unwrap();
        let r = poisson_spb(&params, &spec, ord(phi)).unwrap();
        let c_phi = poisson_capacity(ord(phi), &spec).unwrap();
        let threshold = c_phi + 1.75 / (phi * (1.0 - phi)) + 12.2 / (1.0 - phi) * d.ln();
        let prefactor = -(1.0 / phi) * (16f64.ln() + 2.0 + 1.05 / phi + 26.0 * d.ln());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1.0);
        constants_ok &= close(r.constants["rate_threshold"], threshold)
            && close(r.constants["ln_prefactor"], prefactor)
            && close(
                r.constants["c_one"],
                poisson_capacity(Order::ONE, &spec).unwrap(),
            );
    }
    outcome(
        closed && identity && monotone && constants_ok,
        format!(
            "closed forms {closed}, sqrt identity {identity}, discretization monotone {monotone} [{}], bound constants {constants_ok}",
            trend.join(", ")
        ),
    )
}

fn haroutunian() -> Outcome {
    let esp = |w: &DiscreteChannel, r: f64| {
        let curve = ExponentCurve::for_channel(w, &OrderGrid::default(), DEFAULT_TOL).unwrap();
        sphere_packing_exponent(r, &curve, DEFAULT_TOL)
            .unwrap()
            .value
            .to_f64()
    };
    let h = DiscreteChannel::haroutunian();
    let rh = cap(0.5, &h);
    let opts = HaroutunianOptions::default();
    let gap = haroutunian_solve(rh, &h, &opts).unwrap().value - esp(&h, rh);
    let bsc = DiscreteChannel::bsc(0.1).unwrap();
    let rb = cap(0.5, &bsc);
    let diff = (haroutunian_solve(rb, &bsc, &opts).unwrap().value - esp(&bsc, rb)).abs();
    let wide = HaroutunianOptions { cap: 8, ..opts };
    let trend: Vec<f64> = (1..=3)
        .map(|n| {
            let wn = product_channel(&vec![h.clone(); n]).unwrap();
            haroutunian_solve(n as f64 * rh, &wn, &wide).unwrap().value / n as f64
        })
        .collect();
    let nonincreasing = trend.windows(2).all(|v| v[1] <= v[0] + 1e-7);
    outcome(
        gap >= 1e-3 && diff <= 1e-4 && nonincreasing,
        format!(
            "E_h-E_sp on [[.5,.5],[0,1]] {gap:.4e} (>= 1e-3); |E_h-E_sp| on BSC(0.1) {diff:.3e} (<= 1e-4); (1/n)E_h(nR) {:.6} {:.6} {:.6}",
            trend[0], trend[1], trend[2]
        ),
    )
}

fn trends() -> Outcome {
    let w = DiscreteChannel::bsc(0.1).unwrap();
    let ns = [16u64, 64, 256];
    let product: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let params = CodeParams::from_log_ratio(n as f64 * cap(0.7, &w), n).unwrap();
            let kappa = (n as f64).ln().ceil();
            let r = spb_product(
                &params,
                &vec![w.clone(); n as usize],
                Order::HALF,
                1.0 / n as f64,
                kappa,
            )
            .unwrap();
            r.constants["ln_prefactor"].abs() / n as f64
        })
        .collect();
    let (a0, a1) = (0.3, 0.6);
    let feedback: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let params = CodeParams::from_log_ratio(n as f64 * cap(0.5, &w), n).unwrap();
            let kappa = (n as f64).powf(0.75).floor() as u64;
            let probe = spb_feedback(&params, &w, kappa, 1e-3, (a0, a1)).unwrap();
            let eps = a0 * (1.0 - probe.constants["theta"]) / (n as f64).powf(0.25);
            let r = spb_feedback(&params, &w, kappa, eps, (a0, a1)).unwrap();
            r.constants["ln_prefactor"].abs() / n as f64
        })
        .collect();
    let dec = |v: &[f64]| v.windows(2).all(|x| x[1] < x[0]);
    outcome(
        dec(&product) && dec(&feedback),
        format!(
            "|ln prefactor|/n product {:.4} {:.4} {:.4}; feedback {:.4} {:.4} {:.4}",
            product[0], product[1], product[2], feedback[0], feedback[1], feedback[2]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("minimax certificates", minimax),
        ("additivity and feedback cap", additivity),
        ("divergence suites", divergence_suites),
        ("E0 bridge", e0_bridge),
        ("exact inequality oracles", exact_oracles),
        ("sandwich", sandwich),
        ("feedback soundness", feedback),
        ("tradeoff certificates", tradeoff),
        ("Poisson closed forms", poisson),
        ("Haroutunian comparison", haroutunian),
        ("prefactor trends", trends),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        failed += (!o.pass) as usize;
        println!(
            "[{}] {:>2}. {name}: {} ({:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
