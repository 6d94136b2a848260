//! The PBT channel and its figures of merit, plus resource states: EPR pairs
//! and the optimized states built from an isotypic weight distribution. Holds
//! the probabilistic-protocol closed-form distribution and the deterministic
//! protocol's variational optimizer.

use ndarray::Array2;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::{c, dagger, eigh_hermitian, eye, psd_sqrt, CMat, CVec};
use crate::bratteli::BratteliDiagram;
use crate::error::{Error, Result};
use crate::measurements::DensePovm;
use crate::partitions::{
    enumerate_partitions, rational_to_f64, sym_dim_f64, weyl_dim, weyl_dim_f64, Cell, Partition,
};

/// Default guard on the joint dimension `d^{2n+1}` of channel evaluations.
pub const DEFAULT_CHANNEL_GUARD: usize = 1 << 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Provenance {
    Epr,
    OptimizedPpbt,
    OptimizedDpbt,
    CustomF,
}

/// A shared resource state on `2n` qudits, A-half then B-half, unit norm.
#[derive(Clone, Debug)]
pub struct ResourceState {
    pub n: usize,
    pub d: usize,
    pub vec: CVec,
    pub provenance: Provenance,
}

/// Isotypic weights `f_μ ≥ 0` over `μ ⊢_d n`, summing to one. Kept in the
/// global partition order.
#[derive(Clone, Debug)]
pub struct FDistribution {
    pub n: usize,
    pub d: usize,
    pub weights: Vec<(Partition, f64)>,
}

impl FDistribution {
    pub fn new(n: usize, d: usize, weights: Vec<(Partition, f64)>) -> Result<Self> {
        let expected = enumerate_partitions(n, d);
        if weights.len() != expected.len()
            || weights.iter().zip(&expected).any(|((p, _), q)| p != q)
        {
            return Err(Error::InvalidArgument(
                "f-distribution must cover exactly the partitions of n with at most d rows".into(),
            ));
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if weights.iter().any(|&(_, w)| w < -1e-12) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "f-distribution must be a probability vector (sum = {total})"
            )));
        }
        Ok(FDistribution { n, d, weights })
    }

    pub fn get(&self, mu: &Partition) -> f64 {
        self.weights
            .iter()
            .find(|(p, _)| p == mu)
            .map(|&(_, w)| w)
            .unwrap_or(0.0)
    }

    /// The EPR weights `f_μ = d_μ m_μ / d^n`.
    pub fn epr(n: usize, d: usize) -> Self {
        let dn = (d as f64).powi(n as i32);
        let weights = enumerate_partitions(n, d)
            .into_iter()
            .map(|mu| {
                let w = sym_dim_f64(&mu) * weyl_dim_f64(&mu, d) / dn;
                (mu, w)
            })
            .collect();
        FDistribution { n, d, weights }
    }
}

/// `n` EPR pairs, `⊗_i |Φ+⟩_{A_i B_i}`.
pub fn epr_resource(n: usize, d: usize) -> ResourceState {
    let dn = d.pow(n as u32);
    let amp = c(1.0 / (dn as f64).sqrt());
    let mut vec = CVec::zeros(dn * dn);
    for x in 0..dn {
        vec[x * dn + x] = amp;
    }
    ResourceState { n, d, vec, provenance: Provenance::Epr }
}

fn adjacent_word(perm: &[usize]) -> Vec<usize> {
    let mut p = perm.to_vec();
    let mut word = Vec::new();
    loop {
        let mut done = true;
        for i in 0..p.len().saturating_sub(1) {
            if p[i] > p[i + 1] {
                p.swap(i, i + 1);
                word.push(i + 1); // 1-based transposition index
                done = false;
            }
        }
        if done {
            break;
        }
    }
    word
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn heap(k: usize, arr: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(arr.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, arr, out);
            if k.is_multiple_of(2) {
                arr.swap(i, k - 1);
            } else {
                arr.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut current, &mut out);
    out
}

/// Irreducible characters of `S_n` via traces of Gelfand-Tsetlin matrices.
fn character_table_row(mu: &Partition, d: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    let n = mu.size();
    let diagram = BratteliDiagram::build(n, d.max(mu.num_rows()).max(2), false)?;
    let v = diagram
        .vertex_index(n, mu)
        .ok_or_else(|| Error::InvalidArgument(format!("{mu} is not a vertex")))?;
    let prefixes = diagram.paths_to(n, v)?;
    let dim = prefixes.len();
    let pos: std::collections::HashMap<Vec<usize>, usize> = prefixes
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();

    // GT matrices of the adjacent transpositions on the standard tableaux.
    let mut gens: Vec<CMat> = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let mut m = CMat::zeros((dim, dim));
        for (t, prefix) in prefixes.iter().enumerate() {
            let path = crate::bratteli::Path { vertices: prefix.clone(), leaf: 0 };
            let c1 = diagram.content_at(&path, i)?;
            let c2 = diagram.content_at(&path, i + 1)?;
            let r = (c2 - c1) as f64;
            m[[t, t]] = c(1.0 / r);
            let mu_v = prefix[i - 1];
            let nu_v = prefix[i + 1];
            if let Some(kp) = diagram
                .children(i - 1, mu_v)
                .iter()
                .copied()
                .find(|&kp| kp != prefix[i] && diagram.has_edge(i, kp, nu_v))
            {
                let mut v2 = prefix.clone();
                v2[i] = kp;
                let t2 = pos[&v2];
                m[[t2, t]] = c((1.0 - 1.0 / (r * r)).sqrt());
            }
        }
        gens.push(m);
    }

    let mut table = Vec::new();
    for perm in all_permutations(n) {
        let word = adjacent_word(&perm);
        let mut rep = eye(dim);
        for &i in &word {
            rep = gens[i - 1].dot(&rep);
        }
        let chi: Complex64 = (0..dim).map(|i| rep[[i, i]]).sum();
        table.push((perm, chi.re));
    }
    Ok(table)
}

/// Isotypic projector `P_μ = (d_μ / n!) Σ_σ χ_μ(σ) R(σ)` of the symmetric
/// group acting on `(C^d)^{⊗n}` by qudit permutation.
pub fn isotypic_projector(mu: &Partition, n: usize, d: usize) -> Result<CMat> {
    if mu.size() != n {
        return Err(Error::InvalidArgument(format!("{mu} is not a partition of {n}")));
    }
    let dim = d.pow(n as u32);
    let table = character_table_row(mu, d)?;
    let d_mu = sym_dim_f64(mu);
    let n_fact: f64 = (1..=n).product::<usize>() as f64;
    let scale = d_mu / n_fact;
    let mut p = CMat::zeros((dim, dim));
    for (perm, chi) in table {
        if chi.abs() < 1e-14 {
            continue;
        }
        let weight = c(scale * chi);
        // R(σ) is a permutation matrix; accumulate it entry-wise.
        for x in 0..dim {
            let digits = digits_of(x, n, d);
            let mut out = digits.clone();
            for j in 0..n {
                out[perm[j]] = digits[j];
            }
            p[[index_of(&out, d), x]] += weight;
        }
    }
    Ok(p)
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

/// Squared overlap `‖(P_μ ⊗ I)|Ψ⟩‖²` of a resource state with the μ-isotypic
/// component of its A-half.
pub fn isotypic_overlap(state: &ResourceState, projector: &CMat) -> f64 {
    let dn = state.d.pow(state.n as u32);
    // Reshape the state as an A × B matrix and hit the A index.
    let m = Array2::from_shape_fn((dn, dn), |(a, b)| state.vec[a * dn + b]);
    let pm = projector.dot(&m);
    pm.iter().map(|z| z.norm_sqr()).sum()
}

/// The optimized resource state `(X_A ⊗ I)|Φ+⟩^{⊗n}` with
/// `X = Σ_μ √(f_μ d^n / (d_μ m_μ)) P_μ`; its isotypic overlaps equal `f_μ`.
pub fn optimized_resource(
    n: usize,
    d: usize,
    f: &FDistribution,
    provenance: Provenance,
) -> Result<ResourceState> {
    if f.n != n || f.d != d {
        return Err(Error::InvalidArgument("f-distribution shape mismatch".into()));
    }
    let dn = d.pow(n as u32);
    let mut x = CMat::zeros((dn, dn));
    for (mu, w) in &f.weights {
        if *w == 0.0 {
            continue;
        }
        if weyl_dim(mu, d).is_zero() {
            return Err(Error::InvalidArgument(format!(
                "f assigns weight to {mu} whose multiplicity vanishes at d = {d}"
            )));
        }
        let coeff = (w * dn as f64 / (sym_dim_f64(mu) * weyl_dim_f64(mu, d))).sqrt();
        let p = isotypic_projector(mu, n, d)?;
        x = x + p.mapv(|z| z * coeff);
    }
    let epr = epr_resource(n, d);
    let m = Array2::from_shape_fn((dn, dn), |(a, b)| epr.vec[a * dn + b]);
    let xm = x.dot(&m);
    let mut vec = CVec::zeros(dn * dn);
    for a in 0..dn {
        for b in 0..dn {
            vec[a * dn + b] = xm[[a, b]];
        }
    }
    let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Solver(format!(
            "optimized resource state has norm {norm}, expected 1"
        )));
    }
    vec.mapv_inplace(|z| z / norm);
    Ok(ResourceState { n, d, vec, provenance })
}

/// Exact probabilistic-protocol weights `f_ν = m_ν² / Σ_χ m_χ²`.
pub fn ppbt_f_exact(n: usize, d: usize) -> Vec<(Partition, BigRational)> {
    let parts = enumerate_partitions(n, d);
    let z: BigInt = parts
        .iter()
        .map(|p| {
            let m = BigInt::from(weyl_dim(p, d));
            &m * &m
        })
        .sum();
    parts
        .into_iter()
        .map(|p| {
            let m = BigInt::from(weyl_dim(&p, d));
            let f = BigRational::new(&m * &m, z.clone());
            (p, f)
        })
        .collect()
}

pub fn ppbt_f(n: usize, d: usize) -> FDistribution {
    let weights = ppbt_f_exact(n, d)
        .into_iter()
        .map(|(p, f)| (p, rational_to_f64(&f)))
        .collect();
    FDistribution { n, d, weights }
}

/// Exact squared preparation amplitude
/// `(f_{ν∪a}/f_ν)(d_ν/d_{ν∪a}) = ((d+cont(a))/(d²+k)) · m_{ν∪a}/m_ν` with
/// `k = |ν|`, for the probabilistic-protocol weights.
pub fn prep_amplitude(nu: &Partition, a: Cell, d: usize) -> Result<BigRational> {
    if !nu.addable_cells(Some(d)).contains(&a) {
        return Err(Error::NotAddable {
            row: a.row,
            col: a.col,
            partition: nu.to_string(),
        });
    }
    let k = nu.size() as i64;
    let first = BigRational::new(
        BigInt::from(d as i64 + a.content()),
        BigInt::from((d * d) as i64 + k),
    );
    // m_{ν∪a}/m_ν = Π_{i≠r} (ν_r - ν_i + i - r + 1)/(ν_r - ν_i + i - r).
    let r = a.row as i64;
    let mut ratio = BigRational::one();
    for i in 1..=(d as i64) {
        if i == r {
            continue;
        }
        let base = nu.row(a.row) as i64 - nu.row(i as usize) as i64 + i - r;
        ratio *= BigRational::new(BigInt::from(base + 1), BigInt::from(base));
    }
    Ok(first * ratio)
}

/// The deterministic-protocol weight optimizer: maximize
/// `Σ_λ (Σ_{a} √f_{λ∪a})²` over the probability simplex. Substituting
/// `x_μ = √f_μ` turns the objective into `xᵀ M x` with
/// `M = Σ_λ v_λ v_λᵀ`, so the maximizer is the squared principal
/// eigenvector. Returns the distribution and the achieved objective.
pub fn dpbt_f(n: usize, d: usize) -> Result<(FDistribution, f64)> {
    let mus = enumerate_partitions(n, d);
    let index: std::collections::HashMap<&Partition, usize> =
        mus.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let dim = mus.len();
    let mut m = Array2::<f64>::zeros((dim, dim));
    for lam in enumerate_partitions(n - 1, d) {
        let members: Vec<usize> = lam
            .addable_cells(Some(d))
            .into_iter()
            .map(|a| index[&lam.with_cell(a).unwrap()])
            .collect();
        for &i in &members {
            for &j in &members {
                m[[i, j]] += 1.0;
            }
        }
    }
    let mc = m.mapv(c);
    let (vals, vecs) = eigh_hermitian(&mc)?;
    let top = vals.len() - 1;
    let objective = vals[top];
    let mut x: Vec<f64> = (0..dim).map(|i| vecs[[i, top]].re).collect();
    let total: f64 = x.iter().sum();
    if total < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    // Perron-Frobenius: the principal eigenvector is nonnegative.
    if x.iter().any(|&v| v < -1e-9) {
        return Err(Error::Solver("principal eigenvector has negative entries".into()));
    }
    let norm: f64 = x.iter().map(|v| v * v).sum();
    let weights = mus
        .into_iter()
        .zip(x)
        .map(|(p, v)| (p, (v * v / norm).max(0.0)))
        .collect();
    Ok((FDistribution { n, d, weights }, objective))
}

/// Objective `Σ_λ (Σ_a √f_{λ∪a})²` of the deterministic-protocol program.
pub fn dpbt_objective(f: &FDistribution) -> f64 {
    let mut total = 0.0;
    for lam in enumerate_partitions(f.n - 1, f.d) {
        let s: f64 = lam
            .addable_cells(Some(f.d))
            .into_iter()
            .map(|a| f.get(&lam.with_cell(a).unwrap()).max(0.0).sqrt())
            .sum();
        total += s * s;
    }
    total
}

/// Conditional output of the channel per port plus outcome probabilities.
#[derive(Clone, Debug)]
pub struct ChannelOutput {
    /// `probs[0]` aborts; `probs[k]` for `k ∈ [n]` is the probability of
    /// pointing at port `k`.
    pub probs: Vec<f64>,
    /// Unnormalized conditional states on port `B_k`, `k ∈ [n]`.
    pub port_outputs: Vec<CMat>,
}

/// Apply the teleportation channel: measure `(A^n, input)` with the POVM and
/// trace everything except the indicated port. The input may be mixed; it is
/// split into pure branches internally.
pub fn channel_apply(
    resource: &ResourceState,
    povm: &DensePovm,
    rho_in: &CMat,
    guard: usize,
) -> Result<ChannelOutput> {
    let n = resource.n;
    let d = resource.d;
    let dn = d.pow(n as u32);
    let total_dim = dn * dn * d;
    if total_dim > guard {
        return Err(Error::GuardExceeded { required: total_dim, guard });
    }
    if rho_in.dim() != (d, d) {
        return Err(Error::InvalidArgument("input state must be d × d".into()));
    }
    let (pvals, pvecs) = eigh_hermitian(rho_in)?;
    if pvals.iter().any(|&p| p < -1e-10) {
        return Err(Error::InvalidArgument("input state is not PSD".into()));
    }

    let sqrt_e: Vec<CMat> = povm
        .outcomes
        .iter()
        .map(|e| psd_sqrt(e, 1e-9))
        .collect::<Result<_>>()?;

    let mut probs = vec![0.0; povm.outcomes.len()];
    let mut port_outputs = vec![CMat::zeros((d, d)); n];

    for branch in 0..d {
        let weight = pvals[branch].max(0.0);
        if weight < 1e-15 {
            continue;
        }
        // Joint pure state on [A^n, input, B^n]; A^n and the input are
        // adjacent so the Kraus operators act on the leading factor.
        let mut joint = CVec::zeros(dn * d * dn);
        for a in 0..dn {
            for b in 0..dn {
                if resource.vec[a * dn + b].norm() == 0.0 {
                    continue;
                }
                for t in 0..d {
                    joint[(a * d + t) * dn + b] += resource.vec[a * dn + b] * pvecs[[t, branch]];
                }
            }
        }
        for (k, ek) in sqrt_e.iter().enumerate() {
            // w = (√E_k ⊗ I_B) joint, taking the (A^n, input) index as rows.
            let jm = Array2::from_shape_fn((dn * d, dn), |(at, b)| joint[at * dn + b]);
            let w = ek.dot(&jm);
            let p: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            probs[k] += weight * p;
            if k >= 1 {
                // Partial trace down to port B_k (0-based digit k-1 of b).
                let out = &mut port_outputs[k - 1];
                for at in 0..dn * d {
                    for b in 0..dn {
                        let digits = digits_of(b, n, d);
                        for b2digit in 0..d {
                            let mut dig2 = digits.clone();
                            dig2[k - 1] = b2digit;
                            let b2 = index_of(&dig2, d);
                            out[[digits[k - 1], b2digit]] +=
                                c(weight) * w[[at, b]] * w[[at, b2]].conj();
                        }
                    }
                }
            }
        }
    }
    Ok(ChannelOutput { probs, port_outputs })
}

/// Entanglement fidelity `F = Tr[Φ+ (N ⊗ I)(Φ+)]`, evaluated on the joint
/// pure state without forming density matrices: disjoint supports let the
/// Kraus square drop out, `F_k = ⟨u_k| E_k ⊗ I |u_k⟩` with `u_k` the
/// projection of the input onto the maximally entangled `(B_k, R)` pair.
pub fn entanglement_fidelity(
    resource: &ResourceState,
    povm: &DensePovm,
    guard: usize,
) -> Result<f64> {
    let n = resource.n;
    let d = resource.d;
    let dn = d.pow(n as u32);
    let joint_dim = dn * dn * d * d;
    if joint_dim > guard {
        return Err(Error::GuardExceeded { required: joint_dim, guard });
    }
    let dn1 = dn / d.pow(0u32); // d^n
    let _ = dn1;
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();

    let mut fidelity = 0.0;
    for k in 1..=n {
        // u_k[(a,t), b'] = Σ_β (1/√d) Ψ[a, b(β at k-1, b' rest)] δ_{t=β}/√d
        // where the input side is Φ+_{ÃR}: in[(a,t,b,r)] = Ψ[a,b] δ_{t,r}/√d.
        // Projecting (B_k, R) on Φ+ forces β = r = t up to the 1/√d weights.
        let bp_dim = d.pow((n - 1) as u32);
        let mut u = Array2::<Complex64>::zeros((dn * d, bp_dim));
        for a in 0..dn {
            for b in 0..dn {
                let amp = resource.vec[a * dn + b];
                if amp.norm() == 0.0 {
                    continue;
                }
                let digits = digits_of(b, n, d);
                let beta = digits[k - 1];
                let mut rest = digits.clone();
                rest.remove(k - 1);
                let bp = index_of(&rest, d);
                // t = r = β with weight 1/√d (from Φ+_{ÃR}) · 1/√d (projector).
                u[[a * d + beta, bp]] += amp * inv_sqrt_d * inv_sqrt_d;
            }
        }
        let eu = povm.outcomes[k].dot(&u);
        let contrib: f64 = u
            .iter()
            .zip(eu.iter())
            .map(|(x, y)| (x.conj() * y).re)
            .sum();
        fidelity += contrib;
    }
    Ok(fidelity)
}

/// Average success probability `p = Tr N(I/d) = (1/d) Σ_k Tr[E_k (ψ_A ⊆ I)]`
/// where `ψ_A` is the reduced state of the resource on Alice's ports.
pub fn success_probability(
    resource: &ResourceState,
    povm: &DensePovm,
    guard: usize,
) -> Result<f64> {
    let n = resource.n;
    let d = resource.d;
    let dn = d.pow(n as u32);
    if dn * dn > guard {
        return Err(Error::GuardExceeded { required: dn * dn, guard });
    }
    // ψ_A = Tr_B |Ψ⟩⟨Ψ|.
    let m = Array2::from_shape_fn((dn, dn), |(a, b)| resource.vec[a * dn + b]);
    let psi_a = m.dot(&dagger(&m));
    let mut p = 0.0;
    for k in 1..=n {
        let e = &povm.outcomes[k];
        let mut tr = 0.0;
        for a in 0..dn {
            for a2 in 0..dn {
                if psi_a[[a2, a]].norm() == 0.0 {
                    continue;
                }
                let mut diag_sum = Complex64::default();
                for t in 0..d {
                    diag_sum += e[[a * d + t, a2 * d + t]];
                }
                tr += (diag_sum * psi_a[[a2, a]]).re;
            }
        }
        p += tr / d as f64;
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ProtocolKind {
    /// Deterministic protocol: the abort outcome is redistributed uniformly
    /// over the ports, so the channel is trace-preserving.
    Dpbt,
    /// Probabilistic protocol: outcome 0 aborts.
    Ppbt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ResourceKind {
    Epr,
    Optimized,
}

/// One row of the protocol summary table.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SummaryRow {
    pub protocol: ProtocolKind,
    pub resource: ResourceKind,
    pub n: usize,
    pub d: usize,
    pub fidelity: f64,
    pub success: f64,
    pub ratio: f64,
    /// Objective of the deterministic weight program when an optimized
    /// resource was used.
    pub objective: Option<f64>,
}

/// Evaluate one protocol/resource cell: build the resource state and the
/// optimal measurement for that cell, then compute the entanglement fidelity
/// and average success probability.
///
/// Measurement per cell: the redistributed standard PGM for the
/// deterministic protocol (both resources), the deformed POVM `E*` for the
/// probabilistic protocol on EPR pairs, and the plain PGM (abort kept) for
/// the probabilistic protocol on the optimized resource.
pub fn protocol_summary(
    protocol: ProtocolKind,
    resource_kind: ResourceKind,
    n: usize,
    d: usize,
    dim_guard: usize,
    channel_guard: usize,
) -> Result<SummaryRow> {
    let mut objective = None;
    let resource = match (protocol, resource_kind) {
        (_, ResourceKind::Epr) => epr_resource(n, d),
        (ProtocolKind::Dpbt, ResourceKind::Optimized) => {
            let (f, obj) = dpbt_f(n, d)?;
            objective = Some(obj);
            optimized_resource(n, d, &f, Provenance::OptimizedDpbt)?
        }
        (ProtocolKind::Ppbt, ResourceKind::Optimized) => {
            optimized_resource(n, d, &ppbt_f(n, d), Provenance::OptimizedPpbt)?
        }
    };
    let povm = match (protocol, resource_kind) {
        (ProtocolKind::Dpbt, _) => {
            crate::measurements::pgm_bruteforce(n, d, dim_guard)?.redistribute_failure()
        }
        (ProtocolKind::Ppbt, ResourceKind::Epr) => {
            let schur = crate::algebra::solve_intertwiner(n, d, dim_guard)?;
            let bu = BratteliDiagram::build(n, d, false)?;
            let idx = crate::bratteli::PathIndexer::new(&bu);
            let g = crate::measurements::g_epr_ppbt(n, d);
            let block = crate::measurements::generic_povm(&bu, &idx, &g)?;
            crate::measurements::block_povm_to_dense(&schur, &block)
        }
        (ProtocolKind::Ppbt, ResourceKind::Optimized) => {
            crate::measurements::pgm_bruteforce(n, d, dim_guard)?
        }
    };
    let fidelity = entanglement_fidelity(&resource, &povm, channel_guard)?;
    let success = success_probability(&resource, &povm, channel_guard)?;
    Ok(SummaryRow {
        protocol,
        resource: resource_kind,
        n,
        d,
        fidelity,
        success,
        ratio: fidelity / success,
        objective,
    })
}

/// Generate a Haar-like random unitary from the eigenvectors of a random
/// Hermitian matrix (used by equivariance spot checks and the CLI).
pub fn random_unitary(dim: usize, rng: &mut impl rand::Rng) -> Result<CMat> {
    let mut h = CMat::zeros((dim, dim));
    for i in 0..dim {
        for j in i..dim {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            h[[i, j]] = z;
            h[[j, i]] = z.conj();
        }
    }
    let (_, vecs) = eigh_hermitian(&h)?;
    Ok(vecs)
}

impl FDistribution {
    /// Build from explicit (partition, weight) pairs; missing partitions get
    /// weight zero.
    pub fn from_custom(n: usize, d: usize, pairs: &[(Partition, f64)]) -> Result<Self> {
        let mut weights: Vec<(Partition, f64)> = enumerate_partitions(n, d)
            .into_iter()
            .map(|p| (p, 0.0))
            .collect();
        for (p, w) in pairs {
            match weights.iter_mut().find(|(q, _)| q == p) {
                Some(slot) => slot.1 = *w,
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "{p} is not a partition of {n} with at most {d} rows"
                    )))
                }
            }
        }
        FDistribution::new(n, d, weights)
    }
}
