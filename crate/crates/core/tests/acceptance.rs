//! Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

use std::io::Write;

use num_complex::Complex64;
use qexch::codes::{builtin_code, Code};
use qexch::errors::{apply_error, exchange_as_pauli_sum, make_error_set, parse_error_classes, ErrorOp, ErrorSet};
use qexch::field::{rational, ExactScalar};
use qexch::klcheck::{
    binomial, check_kl, d_matrix, general_n_identities, gram_blocks, span_dimension, span_dimension_via_gram,
    span_report, Condition,
};
use qexch::qstate::{PauliAxis, Permutation, StateVector};
use qexch::recovery::{build_recovery, logical_grid, roundtrip_fidelity};
use qexch::search::{
    bounds_min_qubits, dualphase_feasibility, search_perm_invariant, BoundModel, SearchOptions, SupportPattern,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn int(v: i64, m: u64) -> ExactScalar {
    ExactScalar::from_int(v, m)
}

fn exch9() -> Code {
    builtin_code("exch9").unwrap()
}

fn full_set(n: usize) -> ErrorSet {
    make_error_set(n, &parse_error_classes("pauli,exchange").unwrap()).unwrap()
}

fn pauli(axis: PauliAxis, k: usize) -> ErrorOp {
    ErrorOp::pauli(axis, k).unwrap()
}

fn normalization() -> Outcome {
    for w in exch9().words() {
        let norm = w.state.norm_sqr();
        ensure(norm == int(4, 28), || format!("<{0}|{0}> = {norm}", w.label))?;
    }
    Ok(())
}

fn phase_condition() -> Outcome {
    for w in exch9().words() {
        for k in 1..=9 {
            let v = w.state.inner(&w.state.apply_pauli(PauliAxis::Z, k).unwrap()).unwrap();
            ensure(v.is_zero(), || format!("<{0}|Z_{k} {0}> = {v}", w.label))?;
        }
    }
    Ok(())
}

fn pair_gram(code: &Code, a: PauliAxis, b: PauliAxis, expect: impl Fn(usize, usize) -> ExactScalar) -> Outcome {
    for w in code.words() {
        for k in 1..=9 {
            for l in 1..=9 {
                let lhs = pauli(a, k).apply(&w.state).unwrap();
                let rhs = pauli(b, l).apply(&w.state).unwrap();
                let v = lhs.inner(&rhs).unwrap();
                let e = expect(k, l);
                ensure(v == e, || {
                    format!("<{}_{k} {}|{}_{l} {}> = {v}, expected {e}", a.symbol(), w.label, b.symbol(), w.label)
                })?;
            }
        }
    }
    Ok(())
}

fn z_gram() -> Outcome {
    pair_gram(&exch9(), PauliAxis::Z, PauliAxis::Z, |k, l| int(1 + 3 * i64::from(k == l), 28))
}

fn x_gram() -> Outcome {
    let code = exch9();
    let three_halves = ExactScalar::from_rational(rational(3, 2), 28);
    pair_gram(&code, PauliAxis::X, PauliAxis::X, |k, l| if k == l { int(4, 28) } else { three_halves.clone() })?;
    pair_gram(&code, PauliAxis::Y, PauliAxis::X, |_, _| int(0, 28))?;
    pair_gram(&code, PauliAxis::Y, PauliAxis::Z, |_, _| int(0, 28))
}

fn block_entries(labels: &[String], prefix: char) -> Vec<usize> {
    labels.iter().enumerate().filter(|(_, l)| l.starts_with(prefix)).map(|(p, _)| p).collect()
}

fn d_matrix_structure() -> Outcome {
    let errors = full_set(9);
    ensure(errors.len() == 64, || format!("error set has {} elements", errors.len()))?;
    let gram = gram_blocks(&exch9(), &errors).unwrap();
    let report = check_kl(&gram, Condition::Degenerate);
    ensure(report.passed, || format!("degenerate check fails with {} witnesses", report.witnesses.len()))?;
    let d = d_matrix(&gram).unwrap();
    let labels = errors.labels();
    let sizes: Vec<usize> = d.blocks().iter().map(Vec::len).collect();
    ensure(sizes == [37, 9, 9, 9], || format!("block sizes {sizes:?}"))?;
    for &p in &d.blocks()[0] {
        for &q in &d.blocks()[0] {
            ensure(d.entry(p, q) == &int(4, 28), || format!("D_0[{},{}] = {}", labels[p], labels[q], d.entry(p, q)))?;
        }
    }
    let three_halves = ExactScalar::from_rational(rational(3, 2), 28);
    for (prefix, off) in [('X', three_halves.clone()), ('Y', three_halves), ('Z', int(1, 28))] {
        let idx = block_entries(&labels, prefix);
        ensure(d.blocks().contains(&idx), || format!("{prefix} errors do not form a block"))?;
        for &p in &idx {
            for &q in &idx {
                let want = if p == q { int(4, 28) } else { off.clone() };
                ensure(d.entry(p, q) == &want, || {
                    format!("D_{prefix}[{},{}] = {}", labels[p], labels[q], d.entry(p, q))
                })?;
            }
        }
    }
    ensure(d.rank() == 28, || format!("exact rank {}", d.rank()))?;
    // oracle: numerical rank of the same matrix
    ensure(d.float_rank(1e-8) == 28, || format!("float rank {}", d.float_rank(1e-8)))
}

/// `Σ_{s ∈ weight κ} (−1)^{s_1 + s_2}` by enumerating bit strings.
fn brute_zz(n: usize, kappa: usize) -> i64 {
    let (m1, m2) = (1u32 << (n - 1), 1u32 << (n - 2));
    (0u32..1 << n)
        .filter(|s| s.count_ones() as usize == kappa)
        .map(|s| if ((s & m1 != 0) as u32 + (s & m2 != 0) as u32).is_multiple_of(2) { 1 } else { -1 })
        .sum()
}

/// Pairs `(s, t)` of weight-κ strings with `X_1 s = X_2 t`.
fn brute_xx(n: usize, kappa: usize) -> u64 {
    let (m1, m2) = (1u32 << (n - 1), 1u32 << (n - 2));
    let strings: Vec<u32> = (0u32..1 << n).filter(|s| s.count_ones() as usize == kappa).collect();
    let mut count = 0;
    for &s in &strings {
        for &t in &strings {
            if s ^ m1 == t ^ m2 {
                count += 1;
            }
        }
    }
    count
}

fn general_n() -> Outcome {
    for n in 2..=10usize {
        for kappa in 1..n {
            let id = general_n_identities(n, kappa).unwrap();
            let zz = brute_zz(n, kappa);
            ensure(id.z_offdiagonal == rational(zz, 1), || {
                format!("n={n} κ={kappa}: Z closed form {} vs {zz}", id.z_offdiagonal)
            })?;
            let xx = brute_xx(n, kappa);
            ensure(id.x_overlap_count == xx, || {
                format!("n={n} κ={kappa}: X closed form {} vs {xx}", id.x_overlap_count)
            })?;
            // the same entries through the exact state machinery
            let s = StateVector::perm_sum(n, kappa, &ExactScalar::one(1)).unwrap();
            let z = s.apply_pauli(PauliAxis::Z, 1).unwrap().inner(&s.apply_pauli(PauliAxis::Z, 2).unwrap()).unwrap();
            let x = s.apply_pauli(PauliAxis::X, 1).unwrap().inner(&s.apply_pauli(PauliAxis::X, 2).unwrap()).unwrap();
            ensure(z == int(zz, 1) && x == int(xx as i64, 1), || format!("n={n} κ={kappa}: state Gram {z}, {x}"))?;
        }
    }
    Ok(())
}

fn shor_failure() -> Outcome {
    let shor = builtin_code("shor9").unwrap();
    let e34 = ErrorOp::exchange(3, 4).unwrap();
    let image = e34.apply(&shor.words()[0].state).unwrap();
    let printed = ["000000000", "001011111", "110100111", "111111000"]
        .iter()
        .map(|b| StateVector::basis(b).unwrap())
        .reduce(|a, b| a.add(&b).unwrap())
        .unwrap();
    ensure(image == printed, || format!("E_34 c_0 = {image}"))?;

    let errors = ErrorSet::with_identity(9, vec![ErrorOp::z(7), ErrorOp::z(8), ErrorOp::z(9), e34]).unwrap();
    let report = check_kl(&gram_blocks(&shor, &errors).unwrap(), Condition::Degenerate);
    ensure(!report.passed, || "degenerate check passes".into())?;
    let e = errors.index_of("E_34").unwrap();
    let z: Vec<usize> = (7..=9).map(|k| errors.index_of(&format!("Z_{k}")).unwrap()).collect();
    ensure(report.witnesses.iter().any(|w| (w.p == e && z.contains(&w.q)) || (w.q == e && z.contains(&w.p))), || {
        "no witness pairs E_34 with Z_7..Z_9".into()
    })?;
    for (j, k) in [(1, 2), (1, 3), (2, 3), (4, 5), (4, 6), (5, 6), (7, 8), (7, 9), (8, 9)] {
        let op = ErrorOp::exchange(j, k).unwrap();
        for w in shor.words() {
            ensure(op.apply(&w.state).unwrap() == w.state, || format!("{} moves {}", op.label(), w.label))?;
        }
    }
    Ok(())
}

fn random_scalar(rng: &mut ChaCha8Rng) -> ExactScalar {
    let mut r = || rational(rng.random_range(-4..=4), rng.random_range(1..=3));
    ExactScalar::gaussian(r(), r(), 1)
}

fn exchange_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..1000 {
        let n = rng.random_range(2..=10usize);
        let terms: Vec<(u32, ExactScalar)> =
            (0..rng.random_range(1..=8)).map(|_| (rng.random_range(0..1u32 << n), random_scalar(&mut rng))).collect();
        let state = StateVector::from_terms(n, 1, terms).unwrap();
        let j = rng.random_range(1..n);
        let k = rng.random_range(j + 1..=n);
        let direct = apply_error(&ErrorOp::exchange(j, k).unwrap(), &state).unwrap();
        let via_paulis = exchange_as_pauli_sum(j, k, &state).unwrap();
        ensure(direct == via_paulis, || format!("trial {trial}: E_{j}{k} differs from the Pauli sum on {state}"))?;
    }
    Ok(())
}

fn permutation_invariance() -> Outcome {
    let code = exch9();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let perm = Permutation::random(9, &mut rng);
        for w in code.words() {
            ensure(w.state.apply_permutation(&perm).unwrap() == w.state, || format!("{perm} moves {}", w.label))?;
        }
    }
    Ok(())
}

fn recovery() -> Outcome {
    let errors = full_set(9);
    let plan = build_recovery(&exch9(), &errors).map_err(|e| e.to_string())?;
    ensure(plan.syndromes().len() == 28, || format!("{} syndromes", plan.syndromes().len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut states = logical_grid();
    for _ in 0..20 {
        let a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let b = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let size = (a.norm_sqr() + b.norm_sqr()).sqrt();
        states.push((a / size, b / size));
    }
    for op in errors.ops() {
        for &(alpha, beta) in &states {
            let f = roundtrip_fidelity(&plan, op, alpha, beta).map_err(|e| e.to_string())?;
            ensure((f - 1.0).abs() <= 1e-9, || format!("{} at ({alpha}, {beta}): fidelity {f}", op.label()))?;
        }
    }
    for _ in 0..20 {
        let perm = Permutation::random(9, &mut rng);
        let axis = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z][rng.random_range(0..3)];
        let op = ErrorOp::compose(&ErrorOp::permutation(perm), &pauli(axis, rng.random_range(1..=9)));
        let (alpha, beta) = states[rng.random_range(0..states.len())];
        let f = roundtrip_fidelity(&plan, &op, alpha, beta).map_err(|e| e.to_string())?;
        ensure((f - 1.0).abs() <= 1e-9, || format!("{}: fidelity {f}", op.label()))?;
    }
    Ok(())
}

fn bounds() -> Outcome {
    let got: Vec<u64> = BoundModel::ALL.iter().map(|&m| bounds_min_qubits(m).n).collect();
    ensure(got == [5, 7, 10, 9], || format!("{got:?}"))
}

fn infeasible_pattern() -> Outcome {
    let bad = SupportPattern::parse_list(9, "0,3/6,9").unwrap().remove(0);
    let report = dualphase_feasibility(&bad).map_err(|e| e.to_string())?;
    ensure(!report.feasible, || "{0,3}/{6,9} reported feasible".into())?;
    ensure(report.contributions.iter().all(|&(_, c)| c > 0), || format!("contributions {:?}", report.contributions))?;
    ensure(report.contributions == [(0, 1), (3, binomial(8, 3) as i64 - binomial(8, 2) as i64)], || {
        format!("contributions {:?}", report.contributions)
    })?;
    let good = SupportPattern::parse_list(9, "0,6/3,9").unwrap().remove(0);
    let report = dualphase_feasibility(&good).map_err(|e| e.to_string())?;
    let ratio = report.witness_ratio(6, 0);
    ensure(report.feasible && ratio == Some(rational(1, 28)), || format!("witness ratio {ratio:?}"))
}

fn search_regression() -> Outcome {
    let options = SearchOptions::new(50, 1);
    let nine = full_set(9);
    let patterns = SupportPattern::parse_list(9, "0,6/3,9").unwrap();
    let report = search_perm_invariant(&nine, &patterns, "pauli,exchange", options).map_err(|e| e.to_string())?;
    let best = &report.results[0];
    ensure(best.residual <= 1e-9, || format!("n=9 residual {:e}", best.residual))?;
    ensure((best.word0[&6].abs() - 1.0 / 28f64.sqrt()).abs() < 1e-6, || format!("n=9 coefficients {:?}", best.word0))?;

    let five = full_set(5);
    let report = search_perm_invariant(&five, &SupportPattern::all_dual(5), "pauli,exchange", options)
        .map_err(|e| e.to_string())?;
    let floor = report.best_residual().unwrap();
    ensure(floor > 0.0 && !report.found_code(), || format!("n=5 floor {floor:e}"))?;
    let text = report.to_text();
    ensure(text.contains("evidence") && text.contains("not a proof"), || "n=5 report lacks the evidence wording".into())
}

fn span() -> Outcome {
    let code = exch9();
    let errors = full_set(9);
    let gram = gram_blocks(&code, &errors).unwrap();
    let by_elimination = span_dimension(&code, &errors).unwrap();
    let by_gram = span_dimension_via_gram(&gram);
    ensure(by_elimination == by_gram, || format!("elimination {by_elimination} vs Gram rank {by_gram}"))?;
    let report = span_report(&code, &errors, &gram).unwrap();
    ensure(report.published == Some(54), || "no published reference attached".into())?;
    ensure(report.words_times_rank == Some(56), || format!("2 rank(D) = {:?}", report.words_times_rank))?;
    let notes = report.notes.join(" ");
    ensure(notes.contains("54") && notes.contains("56"), || format!("notes do not flag the comparison: {notes}"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 14] = [
        ("normalization", normalization),
        ("phase condition", phase_condition),
        ("Z-Gram", z_gram),
        ("X-Gram", x_gram),
        ("D matrix", d_matrix_structure),
        ("general-n oracles", general_n),
        ("Shor failure", shor_failure),
        ("exchange identity", exchange_identity),
        ("permutation invariance", permutation_invariance),
        ("recovery", recovery),
        ("bounds", bounds),
        ("infeasible pattern", infeasible_pattern),
        ("search regression", search_regression),
        ("span dimension", span),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => writeln!(out, "criterion {:>2} {name}: PASS", i + 1).unwrap(),
            Err(why) => {
                writeln!(out, "criterion {:>2} {name}: FAIL ({why})", i + 1).unwrap();
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
