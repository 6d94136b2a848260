//! The optimal PBT measurements: the standard pretty good measurement in the
//! computational basis (the oracle for everything downstream), its
//! Gelfand-Tsetlin block form, the projective dilation on the extended
//! Bratteli diagram, generic G-deformed POVMs, and the two-outcome Naimark
//! dilation of a G-deformed PVM.

use std::collections::BTreeMap;

use ndarray::Array1;
use num_rational::BigRational;

use crate::algebra::{
    dagger, eigh_hermitian, eye, gt_pi, max_abs_diff, pi_computational, psd_inv_sqrt,
    rho_computational, sigma_computational, BlockOperator, CMat,
};
use crate::bratteli::{BratteliDiagram, Path, PathIndexer};
use crate::error::{Error, Result};
use crate::partitions::{branch_ratio, rational_to_f64, Cell, Partition};

/// Eigenvalues of `ρ` on its support are integers ≥ 1, so anything below
/// this threshold is an exact zero of the generalized inverse.
pub const RHO_SUPPORT_THRESHOLD: f64 = 1e-9;

/// A POVM in the computational basis. `outcomes[0]` is the failure operator
/// `E_0`; `outcomes[k]` for `k ∈ [n]` point at ports.
#[derive(Clone, Debug)]
pub struct DensePovm {
    pub outcomes: Vec<CMat>,
}

/// A POVM in block form over the leaves of a Bratteli diagram, same outcome
/// indexing as [`DensePovm`].
#[derive(Clone, Debug)]
pub struct BlockPovm {
    pub outcomes: Vec<BlockOperator>,
}

impl DensePovm {
    pub fn num_ports(&self) -> usize {
        self.outcomes.len() - 1
    }

    /// (most negative eigenvalue over all outcomes, completeness residual).
    pub fn axioms(&self) -> Result<(f64, f64)> {
        let dim = self.outcomes[0].nrows();
        let mut min_eig = f64::INFINITY;
        let mut total = CMat::zeros((dim, dim));
        for e in &self.outcomes {
            let (vals, _) = eigh_hermitian(e)?;
            min_eig = min_eig.min(vals.iter().copied().fold(f64::INFINITY, f64::min));
            total += e;
        }
        Ok((min_eig, max_abs_diff(&total, &eye(dim))))
    }

    /// Redistribute the failure operator uniformly over the port outcomes
    /// (the deterministic-protocol convention). `E_0` becomes zero.
    pub fn redistribute_failure(&self) -> DensePovm {
        let n = self.num_ports();
        let share = self.outcomes[0].mapv(|z| z / n as f64);
        let mut outcomes = Vec::with_capacity(n + 1);
        outcomes.push(CMat::zeros(self.outcomes[0].dim()));
        for k in 1..=n {
            outcomes.push(&self.outcomes[k] + &share);
        }
        DensePovm { outcomes }
    }
}

impl BlockPovm {
    pub fn num_ports(&self) -> usize {
        self.outcomes.len() - 1
    }

    pub fn axioms(&self) -> Result<(f64, f64)> {
        let mut min_eig = f64::INFINITY;
        let mut completeness = 0.0f64;
        let leaves = self.outcomes[0].blocks.len();
        for leaf in 0..leaves {
            let dim = self.outcomes[0].blocks[leaf].nrows();
            let mut total = CMat::zeros((dim, dim));
            for outcome in &self.outcomes {
                let block = &outcome.blocks[leaf];
                if block.nrows() > 0 {
                    let (vals, _) = eigh_hermitian(block)?;
                    min_eig = min_eig.min(vals.iter().copied().fold(f64::INFINITY, f64::min));
                }
                total += block;
            }
            completeness = completeness.max(max_abs_diff(&total, &eye(dim)));
        }
        Ok((min_eig, completeness))
    }
}

/// The standard PGM `E_k = ρ^{-1/2} ρ_k ρ^{-1/2}` with
/// `ρ_k = π^k σ_n π^{-k}`, in the computational basis. This is the oracle
/// every other construction is checked against.
pub fn pgm_bruteforce(n: usize, d: usize, guard: usize) -> Result<DensePovm> {
    let dim = d
        .checked_pow((n + 1) as u32)
        .filter(|&v| v <= guard)
        .ok_or(Error::GuardExceeded {
            required: d.saturating_pow((n + 1) as u32),
            guard,
        })?;
    let pi = pi_computational(n, d)?;
    let pi_dag = dagger(&pi);
    let sigma_n = sigma_computational(n, n, d)?;
    let rho = rho_computational(n, d)?;
    let rho_inv_sqrt = psd_inv_sqrt(&rho, RHO_SUPPORT_THRESHOLD)?;

    let mut outcomes = vec![CMat::zeros((dim, dim))];
    let mut rho_k = sigma_n;
    let mut sum = CMat::zeros((dim, dim));
    for _ in 1..=n {
        rho_k = pi.dot(&rho_k).dot(&pi_dag);
        let e = rho_inv_sqrt.dot(&rho_k).dot(&rho_inv_sqrt);
        sum += &e;
        outcomes.push(e);
    }
    outcomes[0] = eye(dim) - sum;
    Ok(DensePovm { outcomes })
}

/// Amplitudes of the (possibly dilated) `w`-vector of `λ`: pairs
/// `(a, √(d_{λ∪a} / (n d_λ)))` over the addable cells, row order. With
/// `dilated` the unrestricted addable set is used and the vector has unit
/// norm; otherwise the norm defect is `d_{λ∪(d+1,1)} / (n d_λ)` whenever
/// `λ_d > 0`.
pub fn w_amplitudes(lambda: &Partition, n: usize, d: usize, dilated: bool) -> Vec<(Cell, f64)> {
    debug_assert_eq!(lambda.size() + 1, n);
    let limit = if dilated { None } else { Some(d) };
    lambda
        .addable_cells(limit)
        .into_iter()
        .map(|a| {
            let eta = branch_ratio(lambda, a).expect("addable cell");
            (a, rational_to_f64(&eta).sqrt())
        })
        .collect()
}

/// Exact squared norm of the undilated `w`-vector of `λ`.
pub fn w_norm_sq_exact(lambda: &Partition, d: usize) -> BigRational {
    lambda
        .addable_cells(Some(d))
        .into_iter()
        .map(|a| branch_ratio(lambda, a).expect("addable cell"))
        .sum()
}

fn w_projector_block(
    diagram: &BratteliDiagram,
    indexer: &PathIndexer,
    leaf: usize,
    dilated: bool,
) -> CMat {
    let n = diagram.n();
    let paths = indexer.paths(leaf);
    let dim = paths.len();
    let mut block = CMat::zeros((dim, dim));
    let label = diagram.leaf(leaf);
    if label.is_boxed() {
        return block;
    }
    let lam = &label.left;
    let lam_idx = diagram
        .vertex_index(n - 1, lam)
        .expect("λ is a level n-1 vertex");
    let amps: BTreeMap<Cell, f64> = w_amplitudes(lam, n, diagram.d(), dilated)
        .into_iter()
        .collect();
    for (t, path) in paths.iter().enumerate() {
        if path.vertices[n - 1] != lam_idx {
            continue;
        }
        let a = diagram.branch_cell(path).expect("wedge leaf");
        let Some(&wa) = amps.get(&a) else { continue };
        for (t2, path2) in paths.iter().enumerate() {
            if path2.vertices[n - 1] != lam_idx || path.vertices[..n] != path2.vertices[..n] {
                continue;
            }
            let a2 = diagram.branch_cell(path2).expect("wedge leaf");
            let Some(&wa2) = amps.get(&a2) else { continue };
            block[[t2, t]] = crate::algebra::c(wa * wa2);
        }
    }
    block
}

fn covariant_family(
    diagram: &BratteliDiagram,
    indexer: &PathIndexer,
    base: Vec<CMat>,
) -> Result<Vec<BlockOperator>> {
    let n = diagram.n();
    let leaves = diagram.leaves().len();
    // outcomes[k] for k = 1..=n; k = n is the base itself (π^n = 1).
    let mut per_leaf_conjugates: Vec<Vec<CMat>> = Vec::with_capacity(leaves);
    for leaf in 0..leaves {
        let pi = gt_pi(diagram, indexer, leaf)?;
        let pi_dag = dagger(&pi);
        let mut conjugates = Vec::with_capacity(n);
        let mut current = base[leaf].clone();
        for _ in 1..=n {
            current = pi.dot(&current).dot(&pi_dag);
            conjugates.push(current.clone());
        }
        per_leaf_conjugates.push(conjugates);
    }
    let mut outcomes = Vec::with_capacity(n);
    for k in 1..=n {
        let blocks = (0..leaves)
            .map(|leaf| per_leaf_conjugates[leaf][k - 1].clone())
            .collect();
        outcomes.push(BlockOperator { blocks });
    }
    Ok(outcomes)
}

/// The standard PGM in the Gelfand-Tsetlin basis of the undilated diagram:
/// `E_n = Σ_S |w_{S,λ}⟩⟨w_{S,λ}|` on `(λ,empty)` leaves, zero on boxed
/// leaves, `E_k = π^k E_n π^{-k}`, and `E_0 = I - Σ_k E_k` (identity on the
/// boxed leaves, zero elsewhere).
pub fn pgm_gt(diagram: &BratteliDiagram, indexer: &PathIndexer) -> Result<BlockPovm> {
    if diagram.is_dilated() {
        return Err(Error::InvalidArgument(
            "pgm_gt expects the undilated diagram; use dilated_pvm instead".into(),
        ));
    }
    let leaves = diagram.leaves().len();
    let base: Vec<CMat> = (0..leaves)
        .map(|leaf| w_projector_block(diagram, indexer, leaf, false))
        .collect();
    let ports = covariant_family(diagram, indexer, base)?;
    let mut e0 = BlockOperator::identity(indexer, leaves);
    for outcome in &ports {
        for (leaf, block) in outcome.blocks.iter().enumerate() {
            e0.blocks[leaf] = &e0.blocks[leaf] - block;
        }
    }
    let mut outcomes = vec![e0];
    outcomes.extend(ports);
    Ok(BlockPovm { outcomes })
}

/// The Naimark-dilated PVM on the extended diagram:
/// `Π_n = Σ_S |w̃_{S,λ}⟩⟨w̃_{S,λ}|`, `Π_k = π^k Π_n π^{-k}`, and
/// `Π_0 = I - Σ_k Π_k` (identity on boxed leaves, zero on the dilated
/// `(λ,empty)` blocks).
pub fn dilated_pvm(diagram: &BratteliDiagram, indexer: &PathIndexer) -> Result<BlockPovm> {
    if !diagram.is_dilated() {
        return Err(Error::InvalidArgument(
            "dilated_pvm expects the dilated diagram".into(),
        ));
    }
    let leaves = diagram.leaves().len();
    let base: Vec<CMat> = (0..leaves)
        .map(|leaf| w_projector_block(diagram, indexer, leaf, true))
        .collect();
    let ports = covariant_family(diagram, indexer, base)?;
    let mut pi0 = BlockOperator::identity(indexer, leaves);
    for outcome in &ports {
        for (leaf, block) in outcome.blocks.iter().enumerate() {
            pi0.blocks[leaf] = &pi0.blocks[leaf] - block;
        }
    }
    let mut outcomes = vec![pi0];
    outcomes.extend(ports);
    Ok(BlockPovm { outcomes })
}

/// Map an undilated path to its vertex-index representation in the dilated
/// diagram (the embedding is by partition identity at every level).
pub fn embed_path(
    undilated: &BratteliDiagram,
    dilated: &BratteliDiagram,
    path: &Path,
) -> Path {
    let vertices = path
        .vertices
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            dilated
                .vertex_index(k, undilated.vertex(k, v))
                .expect("undilated vertices embed")
        })
        .collect();
    let leaf = dilated
        .leaf_index(undilated.leaf(path.leaf))
        .expect("leaves coincide");
    Path { vertices, leaf }
}

/// Diagonal deformation `G`: a value in `[0, 1]` per `(λ, a)` with
/// `a ∈ AC_d(λ)` on the `(λ,empty)` sector, plus an optional scalar per boxed
/// leaf (`G` commutes with the subalgebra of permutations, so it is scalar
/// there). Dilated-only branches always carry `G = 0`.
#[derive(Clone, Debug, Default)]
pub struct GDiag {
    pub wedge: BTreeMap<(Partition, Cell), f64>,
    pub boxed: BTreeMap<Partition, f64>,
}

impl GDiag {
    pub fn validate(&self) -> Result<()> {
        for (&(ref lam, a), &g) in &self.wedge {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::InvalidArgument(format!(
                    "G value {g} for ({lam}, ({},{})) outside [0,1]",
                    a.row, a.col
                )));
            }
        }
        for (mu, &g) in &self.boxed {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::InvalidArgument(format!(
                    "G value {g} for boxed {mu} outside [0,1]"
                )));
            }
        }
        Ok(())
    }

    /// Value on the wedge branch `(λ, a)`; dilated branches give 0.
    pub fn wedge_value(&self, lambda: &Partition, a: Cell, d: usize) -> Result<f64> {
        if a.row == d + 1 {
            return Ok(0.0);
        }
        self.wedge
            .get(&(lambda.clone(), a))
            .copied()
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "G has no value for ({lambda}, ({},{}))",
                    a.row, a.col
                ))
            })
    }

    pub fn boxed_value(&self, mu: &Partition) -> f64 {
        self.boxed.get(mu).copied().unwrap_or(0.0)
    }

    /// Diagonal of `ψ(G)` on one leaf, in path-index order. Works on both
    /// the undilated and dilated diagram.
    pub fn leaf_diagonal(
        &self,
        diagram: &BratteliDiagram,
        indexer: &PathIndexer,
        leaf: usize,
    ) -> Result<Array1<f64>> {
        let label = diagram.leaf(leaf);
        let dim = indexer.dim(leaf);
        if label.is_boxed() {
            return Ok(Array1::from_elem(dim, self.boxed_value(&label.left)));
        }
        let mut diag = Array1::zeros(dim);
        for (t, path) in indexer.paths(leaf).iter().enumerate() {
            let a = diagram.branch_cell(path).expect("wedge leaf");
            diag[t] = self.wedge_value(&label.left, a, diagram.d())?;
        }
        Ok(diag)
    }

    /// The all-ones deformation on the wedge sector (reduces `E*` to the
    /// plain PGM).
    pub fn ones(n: usize, d: usize) -> Self {
        let mut wedge = BTreeMap::new();
        for lam in crate::partitions::enumerate_partitions(n - 1, d) {
            for a in lam.addable_cells(Some(d)) {
                wedge.insert((lam.clone(), a), 1.0);
            }
        }
        GDiag { wedge, boxed: BTreeMap::new() }
    }
}

/// Exact value of the EPR-resource probabilistic-protocol deformation,
/// `G_{λ,a} = (d + cont(a)) / (d + λ_1)`.
pub fn g_epr_value(lambda: &Partition, a: Cell, d: usize) -> BigRational {
    use num_bigint::BigInt;
    BigRational::new(
        BigInt::from(d as i64 + a.content()),
        BigInt::from(d as i64 + lambda.row(1) as i64),
    )
}

/// The EPR-resource probabilistic-protocol deformation as a [`GDiag`]
/// (zero on the boxed sector).
pub fn g_epr_ppbt(n: usize, d: usize) -> GDiag {
    let mut wedge = BTreeMap::new();
    for lam in crate::partitions::enumerate_partitions(n - 1, d) {
        for a in lam.addable_cells(Some(d)) {
            wedge.insert((lam.clone(), a), rational_to_f64(&g_epr_value(&lam, a, d)));
        }
    }
    GDiag { wedge, boxed: BTreeMap::new() }
}

/// The generic deformed POVM on the undilated diagram:
/// `E*_k = √G E_k √G` on `(λ,empty)` blocks, `ψ(G)/n` per port outcome on
/// boxed blocks (the split is fidelity-irrelevant; only the sum is fixed),
/// and `E*_0 = I - ψ(G)` everywhere.
pub fn generic_povm(
    diagram: &BratteliDiagram,
    indexer: &PathIndexer,
    g: &GDiag,
) -> Result<BlockPovm> {
    g.validate()?;
    let n = diagram.n();
    let pgm = pgm_gt(diagram, indexer)?;
    let leaves = diagram.leaves().len();
    let mut outcomes: Vec<BlockOperator> = (0..=n)
        .map(|_| BlockOperator::zeros(indexer, leaves))
        .collect();
    for leaf in 0..leaves {
        let label = diagram.leaf(leaf);
        let dim = indexer.dim(leaf);
        let diag = g.leaf_diagonal(diagram, indexer, leaf)?;
        if label.is_boxed() {
            let gval = g.boxed_value(&label.left);
            for k in 1..=n {
                outcomes[k].blocks[leaf] = eye(dim).mapv(|z| z * (gval / n as f64));
            }
            outcomes[0].blocks[leaf] = eye(dim).mapv(|z| z * (1.0 - gval));
        } else {
            let sqrt_g: Vec<f64> = diag.iter().map(|&v| v.sqrt()).collect();
            for k in 1..=n {
                let base = &pgm.outcomes[k].blocks[leaf];
                let mut scaled = base.clone();
                for t in 0..dim {
                    for t2 in 0..dim {
                        scaled[[t, t2]] *= sqrt_g[t] * sqrt_g[t2];
                    }
                }
                outcomes[k].blocks[leaf] = scaled;
            }
            let mut e0 = CMat::zeros((dim, dim));
            for t in 0..dim {
                e0[[t, t]] = crate::algebra::c(1.0 - diag[t]);
            }
            outcomes[0].blocks[leaf] = e0;
        }
    }
    Ok(BlockPovm { outcomes })
}

/// JSON dump of per-leaf block spectra and norms, for golden-file tests.
pub fn spectra_json(diagram: &BratteliDiagram, povm: &BlockPovm) -> Result<String> {
    #[derive(serde::Serialize)]
    struct LeafSpectrum {
        leaf: String,
        outcome: usize,
        eigenvalues: Vec<f64>,
        frobenius_norm: f64,
    }
    let mut entries = Vec::new();
    for (k, outcome) in povm.outcomes.iter().enumerate() {
        for (leaf, block) in outcome.blocks.iter().enumerate() {
            let (vals, _) = eigh_hermitian(block)?;
            let rounded: Vec<f64> = vals.iter().map(|v| (v * 1e12).round() / 1e12).collect();
            let norm = block.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            entries.push(LeafSpectrum {
                leaf: diagram.leaf(leaf).to_string(),
                outcome: k,
                eigenvalues: rounded,
                frobenius_norm: (norm * 1e12).round() / 1e12,
            });
        }
    }
    Ok(serde_json::to_string_pretty(&entries).expect("spectra serialize"))
}

/// Pull a block POVM back to the computational basis through the solved
/// intertwiner.
pub fn block_povm_to_dense(
    schur: &crate::algebra::SchurIntertwiner,
    povm: &BlockPovm,
) -> DensePovm {
    DensePovm {
        outcomes: povm
            .outcomes
            .iter()
            .map(|o| schur.block_to_dense(o))
            .collect(),
    }
}

/// Two-outcome Naimark dilation of a G-deformed PVM on one block: given the
/// diagonal of `G` and projectors `Π_1..Π_n` resolving the identity, returns
/// `n+1` projectors on the doubled space with
/// `⟨0ψ| Π̂_k |0ψ⟩ = ⟨ψ| √G Π_k √G |ψ⟩` and `Π̂_0` completing the identity.
pub fn naimark_two_outcome(g: &Array1<f64>, projectors: &[CMat]) -> Result<Vec<CMat>> {
    let dim = g.len();
    if projectors.is_empty() {
        return Err(Error::InvalidArgument("empty PVM".into()));
    }
    let mut total = CMat::zeros((dim, dim));
    for p in projectors {
        if p.dim() != (dim, dim) {
            return Err(Error::InvalidArgument("projector dimension mismatch".into()));
        }
        if max_abs_diff(&p.dot(p), p) > 1e-10 || max_abs_diff(&dagger(p), p) > 1e-10 {
            return Err(Error::InvalidArgument("input is not projective".into()));
        }
        total += p;
    }
    if max_abs_diff(&total, &eye(dim)) > 1e-10 {
        return Err(Error::InvalidArgument(
            "projectors do not resolve the identity".into(),
        ));
    }
    if g.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidArgument("G diagonal outside [0,1]".into()));
    }

    // U = [[√G, -√(1-G)], [√(1-G), √G]]; √ entrywise on the diagonal.
    let mut u = CMat::zeros((2 * dim, 2 * dim));
    for i in 0..dim {
        let sg = g[i].sqrt();
        let sc = (1.0 - g[i]).sqrt();
        u[[i, i]] = crate::algebra::c(sg);
        u[[i, dim + i]] = crate::algebra::c(-sc);
        u[[dim + i, i]] = crate::algebra::c(sc);
        u[[dim + i, dim + i]] = crate::algebra::c(sg);
    }
    let u_dag = dagger(&u);

    let mut out = Vec::with_capacity(projectors.len() + 1);
    // Π̂_0 = U (0 ⊕ I) U†.
    let mut lower = CMat::zeros((2 * dim, 2 * dim));
    for i in 0..dim {
        lower[[dim + i, dim + i]] = crate::algebra::c(1.0);
    }
    out.push(u.dot(&lower).dot(&u_dag));
    for p in projectors {
        let mut upper = CMat::zeros((2 * dim, 2 * dim));
        for i in 0..dim {
            for j in 0..dim {
                upper[[i, j]] = p[[i, j]];
            }
        }
        out.push(u.dot(&upper).dot(&u_dag));
    }
    Ok(out)
}
