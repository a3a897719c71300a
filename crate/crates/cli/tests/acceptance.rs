//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so every criterion reports even when an earlier one fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lov_core::analysis::{
    check_axiom, delta, delta_threshold, identity_wire_sides, lambda_commute_check, random_circuit, random_lopp,
    random_rewrite, random_state, random_tmn, sector_unitarity, AxiomId, RandomCircuitConfig,
};
use lov_core::euler::{solve_e2_lhs, solve_e2_rhs, solve_e3, E3Lhs, E3Rhs};
use lov_core::fock::{eval_circuit, DualFockVector, EvalConfig, FockVector, Occupation};
use lov_core::gallery::{self, BELL_SUCCESS, CZ_SUCCESS};
use lov_core::rewrite::{nf_equal, normalize, normalize_with, NormalizeOptions};
use lov_core::synthesis::{synthesize_triangle, triangle_to_circuit, Split};
use lov_core::unitary::{bs_matrix, matrix_of, random_unitary, UnitaryMatrix};
use lov_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

const BITS: [[bool; 2]; 4] = [[false, false], [false, true], [true, false], [true, true]];

fn cz_postselection() -> Verdict {
    let start = Instant::now();
    let c = gallery::cz_heralded();
    let cfg = EvalConfig::default();
    let mut amps = Vec::new();
    for bits in BITS {
        let out = eval_circuit(&c, &FockVector::basis(gallery::dual_rail(&bits)), &cfg).map_err(|e| e.to_string())?;
        amps.push(out.get(&gallery::dual_rail(&bits)));
    }
    let elapsed = start.elapsed();
    let want = CZ_SUCCESS.sqrt();
    for (a, bits) in amps.iter().zip(BITS) {
        ensure((a.norm() - want).abs() < 1e-9, || {
            format!("|amp({bits:?})| = {} vs {want}", a.norm())
        })?;
    }
    let global = amps[0] / amps[0].norm();
    for (k, a) in amps.iter().enumerate() {
        let sign = if k == 3 { -1.0 } else { 1.0 };
        let rel = a / global;
        ensure((rel - Complex64::new(sign * want, 0.0)).norm() < 1e-9, || {
            format!("relative amp {k} = {rel}")
        })?;
    }
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("|amp| = {:.12}, sign(11) = -1, {elapsed:.2?}", amps[0].norm()))
}

fn cz_equivalence() -> Verdict {
    let start = Instant::now();
    let a = normalize(&gallery::cz_heralded()).map_err(|e| e.to_string())?;
    let b = normalize(&gallery::cz_heralded_embedded()).map_err(|e| e.to_string())?;
    ensure(nf_equal(&a, &b), || "normal forms differ".into())?;
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let out = Command::new(env!("CARGO_BIN_EXE_lov"))
        .arg("equiv")
        .arg(data.join("cz_left.lov"))
        .arg(data.join("cz_right.lov"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || {
        format!("lov equiv exited with {:?}", out.status.code())
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("nf_equal, `lov equiv` exit 0, {elapsed:.2?}"))
}

fn bell_generator() -> Verdict {
    let out = eval_circuit(
        &gallery::bell_generator(),
        &FockVector::basis([1, 0, 1, 0, 0, 0]),
        &EvalConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    // Post-select one photon per dual-rail pair.
    let logical: Vec<Complex64> = BITS.iter().map(|b| out.get(&gallery::dual_rail(b))).collect();
    let p: f64 = logical.iter().map(|z| z.norm_sqr()).sum();
    ensure(logical[1].norm() < 1e-9 && logical[2].norm() < 1e-9, || {
        format!("odd-parity terms {logical:?}")
    })?;
    ensure((logical[0] - logical[3]).norm() < 1e-9, || {
        format!("unequal terms {logical:?}")
    })?;
    ensure((p - BELL_SUCCESS).abs() < 1e-9, || format!("probability {p}"))?;
    Ok(format!("probability {p:.12}"))
}

fn synthesis_round_trip() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=8 {
        for seed in 0..100 {
            let u = random_unitary(n, 1000 * n as u64 + seed);
            let t = synthesize_triangle(&u).map_err(|e| e.to_string())?;
            ensure(
                t.bs_slots() == n * (n - 1) / 2 && t.phase_slots() == n * (n + 1) / 2,
                || format!("n={n}: {} bs, {} phase slots", t.bs_slots(), t.phase_slots()),
            )?;
            let back = matrix_of(&triangle_to_circuit(&t).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            worst = worst.max(back.max_diff(&u));
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-9, || format!("residual {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("max residual {worst:.1e}, {elapsed:.2?}"))
}

fn diag_phase(a: f64, b: f64) -> UnitaryMatrix {
    let z = Complex64::new(0.0, 0.0);
    UnitaryMatrix::from_rows(&[
        vec![Complex64::from_polar(1.0, a), z],
        vec![z, Complex64::from_polar(1.0, b)],
    ])
    .expect("square")
}

fn euler_solvers() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for seed in 0..1000 {
        let u = random_unitary(2, seed);
        let l = solve_e2_lhs(&u).map_err(|e| e.to_string())?;
        let r = solve_e2_rhs(&u).map_err(|e| e.to_string())?;
        worst = worst.max(l.matrix().max_diff(&u)).max(r.matrix().max_diff(&u));
        let g = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        let u3 = E3Lhs(g).matrix();
        let (l3, r3) = solve_e3(&u3).map_err(|e| e.to_string())?;
        worst = worst.max(l3.matrix().max_diff(&u3)).max(r3.matrix().max_diff(&u3));
    }
    ensure(worst < 1e-10, || format!("random residual {worst:e}"))?;

    let mut degenerate = 0.0f64;
    for theta in [0.0, FRAC_PI_2, PI] {
        let u = diag_phase(0.3, 2.0)
            .multiply(&bs_matrix(theta))
            .expect("2x2")
            .multiply(&diag_phase(0.0, 0.7))
            .expect("2x2");
        let l = solve_e2_lhs(&u).map_err(|e| e.to_string())?;
        let r = solve_e2_rhs(&u).map_err(|e| e.to_string())?;
        ensure(l.0.iter().chain(&r.0).all(|x| x.is_finite()), || {
            format!("theta={theta}: {l:?} {r:?}")
        })?;
        degenerate = degenerate.max(l.matrix().max_diff(&u)).max(r.matrix().max_diff(&u));
    }
    for mid in [0.0, PI] {
        for u in [E3Lhs([0.4, mid, 1.3]).matrix(), E3Rhs([0.4, mid, 1.3]).matrix()] {
            let (l, r) = solve_e3(&u).map_err(|e| e.to_string())?;
            ensure(l.0.iter().chain(&r.0).all(|x| x.is_finite()), || format!("{l:?} {r:?}"))?;
            degenerate = degenerate.max(l.matrix().max_diff(&u)).max(r.matrix().max_diff(&u));
        }
    }
    ensure(degenerate < 1e-8, || format!("degenerate residual {degenerate:e}"))?;
    Ok(format!("random {worst:.1e}, degenerate {degenerate:.1e}"))
}

fn axiom_soundness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = (0.0f64, "");
    for id in AxiomId::ALL {
        for _ in 0..50 {
            let r = check_axiom(id, &mut rng, 4).map_err(|e| format!("{}: {e}", id.name()))?;
            if r > worst.0 {
                worst = (r, id.name());
            }
        }
    }
    ensure(worst.0 < 1e-9, || format!("{} residual {:e}", worst.1, worst.0))?;
    Ok(format!(
        "{} axioms x 50, max residual {:.1e}",
        AxiomId::ALL.len(),
        worst.0
    ))
}

fn termination() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = RandomCircuitConfig::default();
    let opts = NormalizeOptions {
        step_limit: 100_000,
        check_steps: false,
    };
    let (mut max_steps, mut max_time) = (0, Duration::ZERO);
    for case in 0..200 {
        let c = random_circuit(&mut rng, &cfg);
        let start = Instant::now();
        let mut steps = 0;
        let mut rise = None;
        normalize_with(&c, &opts, |s| {
            steps += 1;
            if rise.is_none() && s.after >= s.before {
                rise = Some(s.to_string());
            }
        })
        .map_err(|e| format!("case {case}: {e}"))?;
        let elapsed = start.elapsed();
        ensure(rise.is_none(), || {
            format!("case {case}: rank did not drop at {}", rise.clone().unwrap_or_default())
        })?;
        ensure(elapsed < Duration::from_secs(10), || {
            format!("case {case}: took {elapsed:?}")
        })?;
        max_steps = max_steps.max(steps);
        max_time = max_time.max(elapsed);
    }
    Ok(format!("200 circuits, max {max_steps} steps, slowest {max_time:.2?}"))
}

fn uniqueness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = RandomCircuitConfig::default();
    let mut applied = 0;
    for case in 0..200 {
        let c = random_circuit(&mut rng, &cfg);
        let mut mutated = c.clone();
        for _ in 0..rng.gen_range(1..=10) {
            if let Some((_, next)) = random_rewrite(&mutated, &mut rng) {
                mutated = next;
                applied += 1;
            }
        }
        let a = normalize(&c).map_err(|e| format!("case {case}: {e}"))?;
        let b = normalize(&mutated).map_err(|e| format!("case {case}: {e}"))?;
        ensure(nf_equal(&a, &b), || format!("case {case}: normal forms differ"))?;
    }
    Ok(format!("200 circuits, {applied} axiom applications"))
}

fn delta_threshold_pattern() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut leak_max, mut entry_min) = (0.0f64, f64::INFINITY);
    for k in 0..20 {
        let (n, m) = [(1, 1), (1, 2), (2, 1), (2, 2)][k % 4];
        let split = Split {
            n,
            n_aux: m,
            m,
            m_aux: n,
        };
        let t = random_tmn(&mut rng, split).map_err(|e| e.to_string())?;
        for tvec in Occupation::boxed(n, 3) {
            for s in Occupation::boxed(m, 3) {
                let d = delta(&t, split, &s, &tvec, 3 * n as u32).map_err(|e| e.to_string())?;
                let (entry, leak) = delta_threshold(&d, &s, &tvec);
                leak_max = leak_max.max(leak);
                entry_min = entry_min.min(entry.norm());
            }
        }
    }
    ensure(leak_max < 1e-10, || format!("leak {leak_max:e}"))?;
    ensure(entry_min > 1e-8, || format!("smallest (t,s) entry {entry_min:e}"))?;
    Ok(format!("max leak {leak_max:.1e}, min entry {entry_min:.1e}"))
}

fn sectors_and_lambda() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut sector = 0.0f64;
    for photons in 0..=8 {
        for _ in 0..10 {
            sector = sector.max(sector_unitarity(rng.gen_range(-7.0..7.0), photons));
        }
    }
    ensure(sector < 1e-12, || format!("sector deviation {sector:e}"))?;
    let mut lambda = 0.0f64;
    for _ in 0..50 {
        let modes = rng.gen_range(1..=3);
        let gens = rng.gen_range(1..=10);
        let d = random_lopp(&mut rng, modes, gens);
        let u = Occupation((0..modes).map(|_| rng.gen_range(0..=3)).collect());
        lambda = lambda.max(lambda_commute_check(&d, &u, 3).map_err(|e| e.to_string())?);
    }
    ensure(lambda < 1e-9, || format!("lambda residual {lambda:e}"))?;
    Ok(format!("sector {sector:.1e}, lambda {lambda:.1e}"))
}

fn sum_of_diagrams() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut checked) = (0.0f64, 0);
    while checked < 50 {
        let (n, n_aux, m_aux) = (rng.gen_range(1..=2), rng.gen_range(0..=2), rng.gen_range(0..=2));
        if n + n_aux <= m_aux {
            continue;
        }
        let f = random_state(&mut rng, n_aux + 1, 4, 2);
        let g = DualFockVector::from_coefficients(random_state(&mut rng, m_aux + 1, 4, 2));
        let d = random_lopp(&mut rng, n + n_aux, 8);
        let (whole, parts) = identity_wire_sides(&f, &d, &g, 3).map_err(|e| e.to_string())?;
        worst = worst.max(whole.max_diff(&parts).map_err(|e| e.to_string())?);
        checked += 1;
    }
    ensure(worst < 1e-10, || format!("difference {worst:e}"))?;
    Ok(format!("50 pairs, max difference {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("cz post-selection", cz_postselection),
        ("cz layouts equivalent", cz_equivalence),
        ("bell generator", bell_generator),
        ("triangle synthesis round trip", synthesis_round_trip),
        ("euler solvers", euler_solvers),
        ("axiom soundness", axiom_soundness),
        ("termination", termination),
        ("uniqueness", uniqueness),
        ("delta threshold", delta_threshold_pattern),
        ("sector unitarity and lambda", sectors_and_lambda),
        ("sum of diagrams", sum_of_diagrams),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let verdict = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
