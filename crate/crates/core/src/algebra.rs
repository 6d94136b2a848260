//! Matrix realizations of the partially transposed permutation algebra on
//! `n+1` qudits: the computational-basis action of its generators, the
//! Gelfand-Tsetlin block action per irrep, the charge operator `ρ` and its
//! spectrum, and a numerically solved mixed-Schur intertwiner with
//! verification.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::bratteli::{BratteliDiagram, Path, PathIndexer};
use crate::error::{Error, Result};
use crate::partitions::{weyl_dim_f64, Partition};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

/// Default cap on the computational-space dimension `d^{n+1}` for dense work.
pub const DEFAULT_DIM_GUARD: usize = 20_000;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(dim: usize) -> CMat {
    Array2::eye(dim)
}

pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij.norm() == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix (ascending eigenvalues,
/// eigenvectors as columns). The backend diagonalizes the column-major view
/// of the buffer, i.e. `conj(m)`, so the eigenvectors come back conjugated.
pub fn eigh_hermitian(m: &CMat) -> Result<(Array1<f64>, CMat)> {
    let (vals, vecs) = m.eigh(UPLO::Lower)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Matrix square root of a positive semi-definite matrix. Eigenvalues below
/// `-neg_tol` are an error; small negatives are clamped to zero.
pub fn psd_sqrt(m: &CMat, neg_tol: f64) -> Result<CMat> {
    let (vals, vecs) = eigh_hermitian(m)?;
    if let Some(v) = vals.iter().find(|&&v| v < -neg_tol) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not PSD: eigenvalue {v}"
        )));
    }
    let sq = Array2::from_diag(&vals.mapv(|v| c(v.max(0.0).sqrt())));
    Ok(vecs.dot(&sq).dot(&dagger(&vecs)))
}

/// Generalized inverse square root: eigenvalues above `threshold` are
/// inverted, the rest are treated as exact zeros. The threshold is safe for
/// `ρ`, whose nonzero eigenvalues are integers ≥ 1.
pub fn psd_inv_sqrt(m: &CMat, threshold: f64) -> Result<CMat> {
    let (vals, vecs) = eigh_hermitian(m)?;
    let inv = Array2::from_diag(&vals.mapv(|v| {
        if v > threshold {
            c(1.0 / v.sqrt())
        } else {
            c(0.0)
        }
    }));
    Ok(vecs.dot(&inv).dot(&dagger(&vecs)))
}

fn digits_of(mut x: usize, n_digits: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; n_digits];
    for i in (0..n_digits).rev() {
        out[i] = x % d;
        x /= d;
    }
    out
}

fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Generator `σ_i` of the algebra on `(C^d)^{⊗(n+1)}` in the computational
/// basis: a transposition of qudits `i, i+1` for `i < n`, and for `i = n` the
/// contraction projecting qudits `n, n+1` onto the un-normalized maximally
/// entangled state.
pub fn sigma_computational(i: usize, n: usize, d: usize) -> Result<CMat> {
    if i < 1 || i > n {
        return Err(Error::IndexOutOfRange {
            index: i,
            what: "generator index",
            range: format!("1..={n}"),
        });
    }
    let nq = n + 1;
    let dim = d.pow(nq as u32);
    let mut m = CMat::zeros((dim, dim));
    if i < n {
        for x in 0..dim {
            let mut digits = digits_of(x, nq, d);
            digits.swap(i - 1, i);
            m[[index_of(&digits, d), x]] = c(1.0);
        }
    } else {
        for x in 0..dim {
            let digits = digits_of(x, nq, d);
            if digits[n - 1] != digits[n] {
                continue;
            }
            for k in 0..d {
                let mut out = digits.clone();
                out[n - 1] = k;
                out[n] = k;
                m[[index_of(&out, d), x]] += c(1.0);
            }
        }
    }
    Ok(m)
}

/// Permutation matrix on `(C^d)^{⊗m}` with `m = perm.len()`, 0-based images:
/// the content of qudit `j` is sent to position `perm[j]`.
pub fn permutation_matrix(perm: &[usize], d: usize) -> CMat {
    let m_qudits = perm.len();
    let dim = d.pow(m_qudits as u32);
    let mut m = CMat::zeros((dim, dim));
    for x in 0..dim {
        let digits = digits_of(x, m_qudits, d);
        let mut out = digits.clone();
        for j in 0..m_qudits {
            out[perm[j]] = digits[j];
        }
        m[[index_of(&out, d), x]] = c(1.0);
    }
    m
}

/// Permutation of the first `n` qudits (the last qudit stays put), given as
/// 0-based images: qudit `j` is sent to position `perm[j]`.
pub fn permutation_operator(perm: &[usize], n: usize, d: usize) -> CMat {
    assert_eq!(perm.len(), n);
    let mut extended = perm.to_vec();
    extended.push(n);
    permutation_matrix(&extended, d)
}

/// The cyclic shift `π = σ_1 σ_2 … σ_{n-1}` in the computational basis.
pub fn pi_computational(n: usize, d: usize) -> Result<CMat> {
    let dim = d.pow((n + 1) as u32);
    let mut m = eye(dim);
    for i in (1..n).rev() {
        // rightmost factor acts first
        m = sigma_computational(i, n, d)?.dot(&m);
    }
    Ok(m)
}

/// Jucys-Murphy element `J_k = Σ_{i<k} (i k)` of the symmetric group on the
/// first `n` qudits, `2 ≤ k ≤ n`.
pub fn jucys_murphy(k: usize, n: usize, d: usize) -> Result<CMat> {
    if k < 2 || k > n {
        return Err(Error::IndexOutOfRange {
            index: k,
            what: "Jucys-Murphy index",
            range: format!("2..={n}"),
        });
    }
    let dim = d.pow((n + 1) as u32);
    let mut m = CMat::zeros((dim, dim));
    for i in 1..k {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i - 1, k - 1);
        m = m + permutation_operator(&perm, n, d);
    }
    Ok(m)
}

/// The charge operator `ρ = Σ_k π^k σ_n π^{-k}` in the computational basis.
pub fn rho_computational(n: usize, d: usize) -> Result<CMat> {
    let pi = pi_computational(n, d)?;
    let pi_dag = dagger(&pi);
    let sigma_n = sigma_computational(n, n, d)?;
    let dim = sigma_n.nrows();
    let mut rho = CMat::zeros((dim, dim));
    let mut conj = sigma_n;
    for _ in 0..n {
        conj = pi.dot(&conj).dot(&pi_dag);
        rho += &conj;
    }
    Ok(rho)
}

/// Block form of an operator: one dense matrix per leaf of a diagram, in the
/// leaf enumeration order and the path-indexer basis.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub blocks: Vec<CMat>,
}

impl BlockOperator {
    pub fn zeros(indexer: &PathIndexer, num_leaves: usize) -> Self {
        let blocks = (0..num_leaves)
            .map(|l| CMat::zeros((indexer.dim(l), indexer.dim(l))))
            .collect();
        BlockOperator { blocks }
    }

    pub fn identity(indexer: &PathIndexer, num_leaves: usize) -> Self {
        let blocks = (0..num_leaves).map(|l| eye(indexer.dim(l))).collect();
        BlockOperator { blocks }
    }

    pub fn max_abs_diff(&self, other: &BlockOperator) -> f64 {
        self.blocks
            .iter()
            .zip(other.blocks.iter())
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }
}

fn other_intermediate(
    diagram: &BratteliDiagram,
    path: &Path,
    i: usize,
) -> Option<usize> {
    let mu = path.vertices[i - 1];
    let kappa = path.vertices[i];
    let nu = path.vertices[i + 1];
    diagram
        .children(i - 1, mu)
        .iter()
        .copied()
        .find(|&kp| kp != kappa && diagram.has_edge(i, kp, nu))
}

/// GT matrix of transposition `σ_i` (`1 ≤ i ≤ n-1`) on the paths of `leaf`.
/// Diagonal entries are `1/r_i(T)`; where `σ_i T` stays inside the diagram
/// the off-diagonal is `√(1 - 1/r_i(T)²)`. Works on dilated diagrams too.
pub fn gt_transposition(
    diagram: &BratteliDiagram,
    indexer: &PathIndexer,
    leaf: usize,
    i: usize,
) -> Result<CMat> {
    let n = diagram.n();
    if i < 1 || i + 1 > n {
        return Err(Error::IndexOutOfRange {
            index: i,
            what: "transposition index",
            range: format!("1..={}", n.saturating_sub(1)),
        });
    }
    let paths = indexer.paths(leaf);
    let dim = paths.len();
    let mut m = CMat::zeros((dim, dim));
    for (t, path) in paths.iter().enumerate() {
        let r = diagram.axial_distance(path, i)? as f64;
        m[[t, t]] = c(1.0 / r);
        match other_intermediate(diagram, path, i) {
            Some(kp) => {
                let mut verts = path.vertices.clone();
                verts[i] = kp;
                let t2 = indexer
                    .position(leaf, &verts)
                    .expect("partner path is in the indexer");
                m[[t2, t]] = c((1.0 - 1.0 / (r * r)).sqrt());
            }
            None => {
                // Degenerate Young-Yamanouchi case: the partner leaves the
                // diagram, which forces |r| = 1.
                assert!(
                    r.abs() == 1.0,
                    "missing partner with |r| = {} != 1",
                    r.abs()
                );
            }
        }
    }
    Ok(m)
}

/// GT matrix of the contraction `σ_n` on the paths of `leaf`: zero on boxed
/// leaves, `Σ_S |v_{S,λ}⟩⟨v_{S,λ}|` with `⟨…λ∪a'…|σ_n|…λ∪a…⟩ =
/// √(m_{λ∪a} m_{λ∪a'}) / m_λ` on `(λ,empty)` leaves. Defined on the
/// undilated diagram only.
pub fn gt_contraction(
    diagram: &BratteliDiagram,
    indexer: &PathIndexer,
    leaf: usize,
) -> Result<CMat> {
    if diagram.is_dilated() {
        return Err(Error::InvalidArgument(
            "the contraction's GT action is defined on the undilated diagram".into(),
        ));
    }
    let paths = indexer.paths(leaf);
    let dim = paths.len();
    let mut m = CMat::zeros((dim, dim));
    let label = diagram.leaf(leaf);
    if label.is_boxed() {
        return Ok(m);
    }
    let d = diagram.d();
    let n = diagram.n();
    let m_lam = weyl_dim_f64(&label.left, d);
    // σ_n is supported on paths whose prefix S ends at λ itself; all other
    // paths of the irrep are annihilated.
    let lam_idx = diagram
        .vertex_index(n - 1, &label.left)
        .expect("λ is a level n-1 vertex");
    for (t, path) in paths.iter().enumerate() {
        if path.vertices[n - 1] != lam_idx {
            continue;
        }
        let nu = diagram.path_partition(path, n);
        let m_nu = weyl_dim_f64(nu, d);
        for (t2, path2) in paths.iter().enumerate() {
            if path2.vertices[n - 1] != lam_idx || path.vertices[..n] != path2.vertices[..n] {
                continue;
            }
            let nu2 = diagram.path_partition(path2, n);
            let m_nu2 = weyl_dim_f64(nu2, d);
            m[[t2, t]] = c((m_nu * m_nu2).sqrt() / m_lam);
        }
    }
    Ok(m)
}

/// GT matrix of any generator.
pub fn gt_generator(
    diagram: &BratteliDiagram,
    indexer: &PathIndexer,
    leaf: usize,
    i: usize,
) -> Result<CMat> {
    if i == diagram.n() {
        gt_contraction(diagram, indexer, leaf)
    } else {
        gt_transposition(diagram, indexer, leaf, i)
    }
}

/// GT matrix of the cyclic shift `π = σ_1 ⋯ σ_{n-1}` (identity for n = 1).
pub fn gt_pi(diagram: &BratteliDiagram, indexer: &PathIndexer, leaf: usize) -> Result<CMat> {
    let n = diagram.n();
    let mut m = eye(indexer.dim(leaf));
    for i in (1..n).rev() {
        m = gt_transposition(diagram, indexer, leaf, i)?.dot(&m);
    }
    Ok(m)
}

/// Diagonal GT block of `ρ`: entry `d + cont(a)` on the path
/// `S ∘ (λ∪a) ∘ (λ,empty)`, zero on boxed leaves. On dilated-only paths the
/// uniform formula gives `d + cont((d+1,1)) = 0`, which keeps them outside
/// the support.
pub fn rho_block(diagram: &BratteliDiagram, indexer: &PathIndexer, leaf: usize) -> CMat {
    let paths = indexer.paths(leaf);
    let dim = paths.len();
    let mut m = CMat::zeros((dim, dim));
    if diagram.leaf(leaf).is_boxed() {
        return m;
    }
    let d = diagram.d() as i64;
    for (t, path) in paths.iter().enumerate() {
        let a = diagram.branch_cell(path).expect("wedge leaf");
        m[[t, t]] = c((d + a.content()) as f64);
    }
    m
}

/// GT label of one intertwiner row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GtLabel {
    pub leaf: usize,
    pub path: usize,
    pub mult: usize,
}

/// Numerically solved mixed-Schur intertwiner. `u` is unitary; rows are
/// labelled `(leaf, path, multiplicity)` with multiplicity fastest, and
/// `u σ u†` is block diagonal `⊕_Λ ψ_Λ(σ) ⊗ I_{m_Λ}` for every algebra
/// element `σ`.
#[derive(Clone, Debug)]
pub struct SchurIntertwiner {
    pub n: usize,
    pub d: usize,
    pub u: CMat,
    pub labels: Vec<GtLabel>,
    pub path_dims: Vec<usize>,
    pub mult_dims: Vec<usize>,
    row_offsets: Vec<usize>,
}

impl SchurIntertwiner {
    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn row_offset(&self, leaf: usize) -> usize {
        self.row_offsets[leaf]
    }

    /// Row index of the GT label `(leaf, path, mult)`.
    pub fn row(&self, leaf: usize, path: usize, mult: usize) -> usize {
        self.row_offsets[leaf] + path * self.mult_dims[leaf] + mult
    }

    /// Expand a block operator to the full GT-ordered space as
    /// `⊕_Λ ψ_Λ ⊗ I_{m_Λ}`.
    pub fn block_expand(&self, op: &BlockOperator) -> CMat {
        let dim = self.dim();
        let mut out = CMat::zeros((dim, dim));
        for (leaf, block) in op.blocks.iter().enumerate() {
            let m = self.mult_dims[leaf];
            let off = self.row_offsets[leaf];
            for t in 0..block.nrows() {
                for t2 in 0..block.ncols() {
                    let v = block[[t, t2]];
                    if v.norm() == 0.0 {
                        continue;
                    }
                    for j in 0..m {
                        out[[off + t * m + j, off + t2 * m + j]] = v;
                    }
                }
            }
        }
        out
    }

    /// Pull a block operator back to the computational basis:
    /// `U† (⊕_Λ ψ_Λ ⊗ I) U`.
    pub fn block_to_dense(&self, op: &BlockOperator) -> CMat {
        let expanded = self.block_expand(op);
        dagger(&self.u).dot(&expanded).dot(&self.u)
    }

    /// Conjugate a computational-basis operator into the GT-ordered basis.
    pub fn conjugate(&self, dense: &CMat) -> CMat {
        self.u.dot(dense).dot(&dagger(&self.u))
    }

    /// Conjugate into the GT basis and average each leaf block over the
    /// multiplicity space. Returns the blocks and the largest deviation of
    /// the conjugated matrix from the exact `⊕ ψ ⊗ I` structure.
    pub fn extract_blocks(&self, dense: &CMat) -> (BlockOperator, f64) {
        let conj = self.conjugate(dense);
        let mut blocks = Vec::with_capacity(self.path_dims.len());
        for leaf in 0..self.path_dims.len() {
            let dl = self.path_dims[leaf];
            let m = self.mult_dims[leaf];
            let off = self.row_offsets[leaf];
            let mut block = CMat::zeros((dl, dl));
            for t in 0..dl {
                for t2 in 0..dl {
                    let mut acc = Complex64::default();
                    for j in 0..m {
                        acc += conj[[off + t * m + j, off + t2 * m + j]];
                    }
                    block[[t, t2]] = acc / c(m as f64);
                }
            }
            blocks.push(block);
        }
        let op = BlockOperator { blocks };
        let residual = max_abs_diff(&conj, &self.block_expand(&op));
        (op, residual)
    }
}

/// Joint eigenspaces of a family of commuting Hermitian operators with
/// integer spectra. Returns (eigenvalue string, orthonormal basis columns).
fn joint_integer_eigenspaces(ops: &[CMat]) -> Result<Vec<(Vec<i64>, CMat)>> {
    let dim = ops.first().map(|m| m.nrows()).unwrap_or(0);
    let mut spaces: Vec<(Vec<i64>, CMat)> = vec![(Vec::new(), eye(dim))];
    for op in ops {
        let mut next = Vec::new();
        for (string, basis) in spaces {
            let compressed = dagger(&basis).dot(op).dot(&basis);
            let (vals, vecs) = eigh_hermitian(&compressed)?;
            let ints: Vec<i64> = vals
                .iter()
                .map(|&v| {
                    let r = v.round();
                    if (v - r).abs() > 1e-7 {
                        Err(Error::Solver(format!(
                            "expected integer eigenvalue, got {v}"
                        )))
                    } else {
                        Ok(r as i64)
                    }
                })
                .collect::<Result<_>>()?;
            let mut start = 0;
            while start < ints.len() {
                let mut end = start + 1;
                while end < ints.len() && ints[end] == ints[start] {
                    end += 1;
                }
                let cols = vecs.slice_axis(Axis(1), ndarray::Slice::from(start..end));
                let sub = basis.dot(&cols.to_owned());
                let mut s = string.clone();
                s.push(ints[start]);
                next.push((s, sub));
                start = end;
            }
        }
        spaces = next;
    }
    Ok(spaces)
}

fn project_onto(basis: &CMat, v: &CVec) -> CVec {
    let coeffs = dagger(basis).dot(v);
    basis.dot(&coeffs)
}

fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve for the mixed-Schur intertwiner by simultaneously diagonalizing the
/// Jucys-Murphy family `J_2, …, J_n` together with `ρ`, identifying each
/// joint eigenvalue string with a Bratteli path, and transporting a fixed
/// multiplicity basis along GT generator moves.
pub fn solve_intertwiner(n: usize, d: usize, guard: usize) -> Result<SchurIntertwiner> {
    let dim = d
        .checked_pow((n + 1) as u32)
        .filter(|&v| v <= guard)
        .ok_or(Error::GuardExceeded {
            required: d.pow((n + 1) as u32),
            guard,
        })?;

    let diagram = BratteliDiagram::build(n, d, false)?;
    let indexer = PathIndexer::new(&diagram);

    // Joint eigenspaces of the GT subalgebra generators.
    let mut ops = Vec::new();
    for k in 2..=n {
        ops.push(jucys_murphy(k, n, d)?);
    }
    ops.push(rho_computational(n, d)?);
    let spaces = joint_integer_eigenspaces(&ops)?;

    // Expected eigenvalue string per path: JM contents then the ρ charge.
    let mut space_of_string: std::collections::HashMap<Vec<i64>, CMat> =
        spaces.into_iter().collect();
    let num_leaves = diagram.leaves().len();
    let mut mult_basis: Vec<Vec<Option<Vec<CVec>>>> = (0..num_leaves)
        .map(|l| vec![None; indexer.dim(l)])
        .collect();
    let mut eigenbasis: Vec<Vec<CMat>> = Vec::with_capacity(num_leaves);

    for leaf in 0..num_leaves {
        let label = diagram.leaf(leaf);
        let m_expected = label.weyl_dim().to_usize().unwrap();
        let mut per_path = Vec::with_capacity(indexer.dim(leaf));
        for path in indexer.paths(leaf) {
            let mut string = Vec::with_capacity(n);
            for k in 2..=n {
                string.push(diagram.content_at(path, k)?);
            }
            let charge = match diagram.branch_cell(path) {
                Some(a) => d as i64 + a.content(),
                None => 0,
            };
            string.push(charge);
            let basis = space_of_string.remove(&string).ok_or_else(|| {
                Error::Solver(format!("no eigenspace for string {string:?}"))
            })?;
            if basis.ncols() != m_expected {
                return Err(Error::Solver(format!(
                    "eigenspace of {string:?} has dim {}, expected m = {m_expected}",
                    basis.ncols()
                )));
            }
            per_path.push(basis);
        }
        eigenbasis.push(per_path);
    }
    if !space_of_string.is_empty() {
        return Err(Error::Solver("unmatched joint eigenspaces remain".into()));
    }

    // Cache the computational generators used for transport.
    let mut sigma: Vec<CMat> = Vec::with_capacity(n);
    for i in 1..=n {
        sigma.push(sigma_computational(i, n, d)?);
    }

    for leaf in 0..num_leaves {
        let paths = indexer.paths(leaf);
        let dl = paths.len();
        // Reference basis at the first path, sign-fixed for determinism.
        let mut reference: Vec<CVec> = Vec::new();
        let b0 = &eigenbasis[leaf][0];
        for jcol in 0..b0.ncols() {
            let mut v: CVec = b0.index_axis(Axis(1), jcol).to_owned();
            if let Some(z) = v.iter().find(|z| z.norm() > 1e-8) {
                let phase = z / z.norm();
                v.mapv_inplace(|x| x * phase.conj());
            }
            reference.push(v);
        }
        mult_basis[leaf][0] = Some(reference);

        // GT matrices provide the transport coefficients.
        let mut gens: Vec<(usize, CMat)> = Vec::new();
        for i in 1..n {
            gens.push((i, gt_transposition(&diagram, &indexer, leaf, i)?));
        }
        if !diagram.leaf(leaf).is_boxed() {
            gens.push((n, gt_contraction(&diagram, &indexer, leaf)?));
        }

        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(t) = queue.pop_front() {
            let current = mult_basis[leaf][t].clone().unwrap();
            for (i, gmat) in &gens {
                for t2 in 0..dl {
                    if t2 == t || mult_basis[leaf][t2].is_some() {
                        continue;
                    }
                    let coeff = gmat[[t2, t]];
                    if coeff.norm() < 1e-9 {
                        continue;
                    }
                    let target_basis = &eigenbasis[leaf][t2];
                    let transported: Vec<CVec> = current
                        .iter()
                        .map(|v| {
                            let moved = sigma[i - 1].dot(v);
                            let mut w = project_onto(target_basis, &moved);
                            w.mapv_inplace(|x| x / coeff);
                            let norm = vec_norm(&w);
                            assert!(
                                (norm - 1.0).abs() < 1e-6,
                                "transport drift: |w| = {norm}"
                            );
                            w.mapv_inplace(|x| x / c(norm));
                            w
                        })
                        .collect();
                    mult_basis[leaf][t2] = Some(transported);
                    queue.push_back(t2);
                }
            }
        }
        if mult_basis[leaf].iter().any(Option::is_none) {
            return Err(Error::Solver(format!(
                "path graph of leaf {} is not connected under GT moves",
                diagram.leaf(leaf)
            )));
        }
    }

    // Assemble U: row (leaf, path, mult) holds the conjugated basis vector.
    let mut path_dims = Vec::with_capacity(num_leaves);
    let mut mult_dims = Vec::with_capacity(num_leaves);
    let mut row_offsets = Vec::with_capacity(num_leaves);
    let mut offset = 0usize;
    for leaf in 0..num_leaves {
        let dl = indexer.dim(leaf);
        let ml = diagram.leaf(leaf).weyl_dim().to_usize().unwrap();
        path_dims.push(dl);
        mult_dims.push(ml);
        row_offsets.push(offset);
        offset += dl * ml;
    }
    if offset != dim {
        return Err(Error::Solver(format!(
            "GT dimension {offset} does not match d^(n+1) = {dim}"
        )));
    }
    let mut u = CMat::zeros((dim, dim));
    let mut labels = Vec::with_capacity(dim);
    for leaf in 0..num_leaves {
        for (t, _) in indexer.paths(leaf).iter().enumerate() {
            let vecs = mult_basis[leaf][t].as_ref().unwrap();
            for (j, v) in vecs.iter().enumerate() {
                let row = row_offsets[leaf] + t * mult_dims[leaf] + j;
                for (col, z) in v.iter().enumerate() {
                    u[[row, col]] = z.conj();
                }
                labels.push(GtLabel { leaf, path: t, mult: j });
            }
        }
    }

    let schur = SchurIntertwiner {
        n,
        d,
        u,
        labels,
        path_dims,
        mult_dims,
        row_offsets,
    };

    // Isometry and intertwining checks.
    let unitary_residual = max_abs_diff(&schur.u.dot(&dagger(&schur.u)), &eye(dim));
    if unitary_residual > 1e-10 {
        return Err(Error::Solver(format!(
            "intertwiner is not unitary: residual {unitary_residual:e}"
        )));
    }
    let residual = verify_blocks(&schur, &diagram, &indexer, &(1..=n).collect::<Vec<_>>())?;
    if residual > 1e-10 {
        return Err(Error::Solver(format!(
            "intertwiner residual {residual:e} exceeds 1e-10"
        )));
    }
    Ok(schur)
}

/// Max-norm residual `‖U σ_i U† − ⊕_Λ ψ_Λ(σ_i) ⊗ I_{m_Λ}‖` over the given
/// generator indices.
pub fn verify_blocks(
    schur: &SchurIntertwiner,
    diagram: &BratteliDiagram,
    indexer: &PathIndexer,
    generators: &[usize],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &i in generators {
        let dense = sigma_computational(i, schur.n, schur.d)?;
        let conj = schur.conjugate(&dense);
        let blocks: Vec<CMat> = (0..diagram.leaves().len())
            .map(|leaf| gt_generator(diagram, indexer, leaf, i))
            .collect::<Result<_>>()?;
        let expanded = schur.block_expand(&BlockOperator { blocks });
        worst = worst.max(max_abs_diff(&conj, &expanded));
    }
    Ok(worst)
}

/// Exact statement of `n (d_λ/m_λ)(m_{λ∪a}/d_{λ∪a}) = d + cont(a)` as
/// rationals; zero when `λ∪a` has more than `d` rows.
pub fn content_ratio_lhs(lambda: &Partition, a: crate::partitions::Cell, d: usize) -> Result<BigRational> {
    use num_bigint::BigInt;
    let mu = lambda.with_cell(a)?;
    let n = BigInt::from(lambda.size() as u64 + 1);
    let num = n
        * BigInt::from(crate::partitions::sym_dim(lambda))
        * BigInt::from(crate::partitions::weyl_dim(&mu, d));
    let den = BigInt::from(crate::partitions::weyl_dim(lambda, d))
        * BigInt::from(crate::partitions::sym_dim(&mu));
    Ok(BigRational::new(num, den))
}
