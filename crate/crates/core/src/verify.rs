//! Machine-checkable invariant suites across all modules, consumed by the
//! command-line `verify` subcommand. Each entry reports its residual and the
//! pinned threshold; exact integer/rational identities report 0.0 or 1.0.

use num_bigint::BigUint;
use serde::Serialize;

use crate::algebra::{
    eye, gt_contraction, gt_transposition, max_abs_diff, solve_intertwiner, CMat,
};
use crate::bratteli::{BratteliDiagram, PathIndexer};
use crate::circuits::{simulate_vs_povm, synth_resource_prep, Encoding};
use crate::error::Result;
use crate::measurements::{dilated_pvm, g_epr_ppbt, generic_povm, pgm_bruteforce, pgm_gt};
use crate::partitions::{branch_ratio, branch_ratio_dims, enumerate_partitions, sym_dim};
use crate::protocols::{protocol_summary, FDistribution, ProtocolKind, ResourceKind};

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub d_max: usize,
    pub guard: usize,
    /// Perturb the probabilistic-protocol deformation before the exactness
    /// check; used as a self-test that failures are detected and named.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 4,
            d_max: 3,
            guard: crate::algebra::DEFAULT_DIM_GUARD,
            inject_fault: false,
        }
    }
}

fn entry(out: &mut Vec<InvariantReport>, name: &str, residual: f64, threshold: f64) {
    out.push(InvariantReport {
        name: name.to_string(),
        residual,
        threshold,
        pass: residual <= threshold,
    });
}

pub fn run_all(config: &VerifyConfig) -> Result<Vec<InvariantReport>> {
    let mut out = Vec::new();
    let channel_guard = 1usize << 21;

    // partitions: branching identity and content-product identity, exact.
    let mut exact_ok = true;
    for size in 0..=9usize {
        for lam in enumerate_partitions(size, size.max(1)) {
            let lhs = BigUint::from(size as u64 + 1) * sym_dim(&lam);
            let rhs: BigUint = lam
                .addable_cells(None)
                .into_iter()
                .map(|a| sym_dim(&lam.with_cell(a).unwrap()))
                .sum();
            exact_ok &= lhs == rhs;
            for a in lam.addable_cells(None) {
                exact_ok &= branch_ratio(&lam, a).unwrap() == branch_ratio_dims(&lam, a).unwrap();
            }
        }
    }
    entry(&mut out, "partitions/branching-and-kosuda-exact", if exact_ok { 0.0 } else { 1.0 }, 0.0);

    // bratteli: dimension identity and Yamanouchi round trip.
    let mut dim_ok = true;
    let mut word_ok = true;
    for n in 1..=config.n_max.max(2) {
        for d in 2..=config.d_max {
            let b = BratteliDiagram::build(n, d, false)?;
            let idx = PathIndexer::new(&b);
            let mut total = BigUint::from(0u32);
            for (leaf, label) in b.leaves().iter().enumerate() {
                total += BigUint::from(idx.dim(leaf)) * label.weyl_dim();
                for p in idx.paths(leaf) {
                    let w = b.to_yamanouchi(p)?;
                    word_ok &= &b.from_yamanouchi(&w)? == p;
                }
            }
            dim_ok &= total == BigUint::from(d).pow((n + 1) as u32);
        }
    }
    entry(&mut out, "bratteli/schur-weyl-dimension", if dim_ok { 0.0 } else { 1.0 }, 0.0);
    entry(&mut out, "bratteli/yamanouchi-roundtrip", if word_ok { 0.0 } else { 1.0 }, 0.0);

    // algebra: Coxeter/contraction relations per block.
    let mut coxeter = 0.0f64;
    for n in 2..=config.n_max.max(2) {
        for d in 2..=config.d_max {
            let b = BratteliDiagram::build(n, d, false)?;
            let idx = PathIndexer::new(&b);
            for leaf in 0..b.leaves().len() {
                let dim = idx.dim(leaf);
                let gens: Vec<CMat> = (1..n)
                    .map(|i| gt_transposition(&b, &idx, leaf, i).unwrap())
                    .collect();
                for (i, g) in gens.iter().enumerate() {
                    coxeter = coxeter.max(max_abs_diff(&g.dot(g), &eye(dim)));
                    if i + 1 < gens.len() {
                        let h = &gens[i + 1];
                        coxeter =
                            coxeter.max(max_abs_diff(&g.dot(h).dot(g), &h.dot(g).dot(h)));
                    }
                }
                let sn = gt_contraction(&b, &idx, leaf)?;
                coxeter = coxeter.max(max_abs_diff(&sn.dot(&sn), &sn.mapv(|z| z * d as f64)));
            }
        }
    }
    entry(&mut out, "algebra/coxeter-and-contraction", coxeter, 1e-12);

    // algebra: intertwiner residual on the small cells.
    let mut intertwiner = 0.0f64;
    for (n, d) in [(2usize, 2usize), (3, 2), (2, 3)] {
        if n > config.n_max || d > config.d_max {
            continue;
        }
        let schur = solve_intertwiner(n, d, config.guard)?;
        let b = BratteliDiagram::build(n, d, false)?;
        let idx = PathIndexer::new(&b);
        let gens: Vec<usize> = (1..=n).collect();
        intertwiner =
            intertwiner.max(crate::algebra::verify_blocks(&schur, &b, &idx, &gens)?);
    }
    entry(&mut out, "algebra/intertwiner-blocks", intertwiner, 1e-10);

    // measurements: POVM axioms across constructions.
    let mut axiom = 0.0f64;
    for (n, d) in [(2usize, 2usize), (3, 2), (2, 3)] {
        if n > config.n_max || d > config.d_max {
            continue;
        }
        let brute = pgm_bruteforce(n, d, config.guard)?;
        let (min_eig, comp) = brute.axioms()?;
        axiom = axiom.max((-min_eig).max(0.0)).max(comp);
        let b = BratteliDiagram::build(n, d, false)?;
        let idx = PathIndexer::new(&b);
        let (min_eig, comp) = pgm_gt(&b, &idx)?.axioms()?;
        axiom = axiom.max((-min_eig).max(0.0)).max(comp);
        let (min_eig, comp) = generic_povm(&b, &idx, &g_epr_ppbt(n, d))?.axioms()?;
        axiom = axiom.max((-min_eig).max(0.0)).max(comp);
        let bd = BratteliDiagram::build(n, d, true)?;
        let idxd = PathIndexer::new(&bd);
        let (min_eig, comp) = dilated_pvm(&bd, &idxd)?.axioms()?;
        axiom = axiom.max((-min_eig).max(0.0)).max(comp);
    }
    entry(&mut out, "measurements/povm-axioms", axiom, 1e-10);

    // measurements: GT PGM equals the computational-basis oracle.
    let mut oracle = 0.0f64;
    for (n, d) in [(2usize, 2usize), (3, 2)] {
        if n > config.n_max || d > config.d_max {
            continue;
        }
        let schur = solve_intertwiner(n, d, config.guard)?;
        let b = BratteliDiagram::build(n, d, false)?;
        let idx = PathIndexer::new(&b);
        let gt = pgm_gt(&b, &idx)?;
        let brute = pgm_bruteforce(n, d, config.guard)?;
        for k in 0..=n {
            oracle = oracle.max(max_abs_diff(&schur.block_to_dense(&gt.outcomes[k]), &brute.outcomes[k]));
        }
    }
    entry(&mut out, "measurements/pgm-oracle-equivalence", oracle, 1e-10);

    // protocols: probabilistic-protocol exactness F = p (optionally with the
    // injected fault on the deformation).
    let mut exactness = 0.0f64;
    for (n, d) in [(2usize, 2usize), (3, 2)] {
        if n > config.n_max || d > config.d_max {
            continue;
        }
        if config.inject_fault {
            // Perturb one deformation value; the resulting measurement is a
            // valid POVM but no longer the exact probabilistic one.
            let mut g = g_epr_ppbt(n, d);
            if let Some(v) = g.wedge.values_mut().find(|v| **v > 0.5) {
                *v *= 0.9;
            }
            let schur = solve_intertwiner(n, d, config.guard)?;
            let b = BratteliDiagram::build(n, d, false)?;
            let idx = PathIndexer::new(&b);
            let povm =
                crate::measurements::block_povm_to_dense(&schur, &generic_povm(&b, &idx, &g)?);
            let resource = crate::protocols::epr_resource(n, d);
            let f = crate::protocols::entanglement_fidelity(&resource, &povm, channel_guard)?;
            let p = crate::protocols::success_probability(&resource, &povm, channel_guard)?;
            exactness = exactness.max((f - p).abs());
        } else {
            let row = protocol_summary(
                ProtocolKind::Ppbt,
                ResourceKind::Epr,
                n,
                d,
                config.guard,
                channel_guard,
            )?;
            exactness = exactness.max((row.fidelity - row.success).abs());
        }
    }
    entry(&mut out, "protocols/ppbt-exactness", exactness, 1e-10);

    // protocols: EPR isotypic overlaps.
    let mut overlap = 0.0f64;
    for n in 1..=config.n_max.min(4) {
        for d in 2..=config.d_max.min(3) {
            let s = crate::protocols::epr_resource(n, d);
            for mu in enumerate_partitions(n, d) {
                let p = crate::protocols::isotypic_projector(&mu, n, d)?;
                let got = crate::protocols::isotypic_overlap(&s, &p);
                let expect = crate::partitions::sym_dim_f64(&mu)
                    * crate::partitions::weyl_dim_f64(&mu, d)
                    / (d as f64).powi(n as i32);
                overlap = overlap.max((got - expect).abs());
            }
        }
    }
    entry(&mut out, "protocols/epr-isotypic-overlaps", overlap, 1e-10);

    // circuits: simulated distributions against the exact POVM.
    let mut tv = 0.0f64;
    for encoding in [Encoding::Standard, Encoding::Yamanouchi] {
        let report = simulate_vs_povm(2, 2, encoding, false, false, 5, 23, config.guard)?;
        tv = tv.max(report.max_tv_distance);
    }
    entry(&mut out, "circuits/measurement-vs-povm", tv, 1e-7);

    // circuits: resource-prep closed form.
    let mut prep = 0.0f64;
    for (n, d) in [(3usize, 2usize), (4, 2)] {
        if n > config.n_max + 1 {
            continue;
        }
        let f = FDistribution::epr(n, d);
        prep = prep.max(synth_resource_prep(n, d, &f)?.verify_closed_form()?);
    }
    entry(&mut out, "circuits/resource-prep-closed-form", prep, 1e-10);

    Ok(out)
}
