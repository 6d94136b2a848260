//! Register layouts and per-irrep caches shared by synthesis and simulation.

use ndarray::Array2;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::bratteli::{BratteliDiagram, PathIndexer};
use crate::error::{Error, Result};
use crate::measurements::{w_amplitudes, GDiag};
use crate::partitions::{Cell, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Encoding {
    Standard,
    Yamanouchi,
}

impl std::str::FromStr for Encoding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "std" => Ok(Encoding::Standard),
            "yamanouchi" | "yam" => Ok(Encoding::Yamanouchi),
            other => Err(Error::InvalidArgument(format!("unknown encoding {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegisterKind {
    PathVertex { level: usize },
    Yamanouchi { pos: usize },
    Irrep,
    Multiplicity,
    PhaseAncilla,
    DilationQubit,
    Work,
    Location,
}

#[derive(Clone, Debug, Serialize)]
pub struct Register {
    pub name: String,
    pub kind: RegisterKind,
    pub dim: usize,
}

/// Cached data for one `(λ, empty)` leaf of the dilated diagram.
#[derive(Clone, Debug)]
pub struct WedgeInfo {
    pub lam: Partition,
    /// Index of λ at level n-1 of the dilated diagram (`None` when n = 2 and
    /// the level is the trivial `(1)`).
    pub lam_level_idx: usize,
    /// Branch cells `a ∈ AC(λ)` in row order; the d-bounded prefix comes
    /// first, the dilated `(d+1, 1)` cell (when present) is last.
    pub branch_cells: Vec<Cell>,
    /// Level-n vertex index per branch.
    pub branch_vertices: Vec<usize>,
    /// Number of d-bounded branches (`AC_d(λ)`).
    pub undilated_len: usize,
    /// Deformation value per branch (zero on the dilated branch).
    pub g_values: Vec<f64>,
    pub w_dilated: Array2<f64>,
    pub w_undilated: Array2<f64>,
    pub w_gweighted: Option<Array2<f64>>,
}

/// Everything a measurement circuit needs at simulation time: the dilated
/// diagram, its path basis, register layout and per-leaf caches.
#[derive(Clone, Debug)]
pub struct MeasurementContext {
    pub n: usize,
    pub d: usize,
    pub encoding: Encoding,
    pub diagram: BratteliDiagram,
    pub paths: PathIndexer,
    pub deformed: bool,
    pub wedge: Vec<Option<WedgeInfo>>,
    pub registers: Vec<Register>,
    pub strides: Vec<usize>,
    pub total_dim: usize,
    pub reg_mult: usize,
    /// `reg_t[k]` for levels 2..=n (standard encoding).
    pub reg_t: Vec<Option<usize>>,
    /// `reg_y[pos]` for positions 2..=n+1 (Yamanouchi encoding).
    pub reg_y: Vec<Option<usize>>,
    pub reg_lam: usize,
    pub reg_loc: Option<usize>,
    pub reg_wu: Option<usize>,
    pub reg_q: Option<usize>,
    pub reg_p: usize,
}

/// Build the Givens cascade sending `e_0` to the unit vector `target`
/// (entries nonnegative). Column 0 of the result equals `target`.
pub(crate) fn column_prep_unitary(target: &[f64]) -> Array2<f64> {
    let m = target.len();
    let mut u = Array2::eye(m);
    // Tail norms r_j = sqrt(Σ_{l ≥ j} w_l²).
    let mut tail = vec![0.0f64; m + 1];
    for j in (0..m).rev() {
        tail[j] = tail[j + 1] + target[j] * target[j];
    }
    let tails: Vec<f64> = tail.iter().map(|v| v.sqrt()).collect();
    for j in 1..m {
        // Rotation on coordinates (j-1, j) sending e_{j-1} to
        // (w_{j-1}/r_{j-1}) e_{j-1} + (r_j/r_{j-1}) e_j.
        if tails[j - 1] < 1e-15 {
            continue;
        }
        let c = target[j - 1] / tails[j - 1];
        let s = tails[j] / tails[j - 1];
        let mut g = Array2::eye(m);
        g[[j - 1, j - 1]] = c;
        g[[j, j - 1]] = s;
        g[[j - 1, j]] = -s;
        g[[j, j]] = c;
        u = g.dot(&u);
    }
    u
}

impl MeasurementContext {
    pub fn new(
        n: usize,
        d: usize,
        encoding: Encoding,
        g: Option<&GDiag>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(
                "measurement circuits need n >= 2".into(),
            ));
        }
        let diagram = BratteliDiagram::build(n, d, true)?;
        let paths = PathIndexer::new(&diagram);
        if let Some(g) = g {
            g.validate()?;
            // The circuit realizes deformations supported on the wedge
            // sector only; boxed components abort with certainty.
            if g.boxed.values().any(|&v| v != 0.0) {
                return Err(Error::InvalidArgument(
                    "circuit deformations must vanish on the boxed sector".into(),
                ));
            }
        }

        let mut wedge = Vec::with_capacity(diagram.leaves().len());
        for leaf in diagram.leaves() {
            if leaf.is_boxed() {
                wedge.push(None);
                continue;
            }
            let lam = leaf.left.clone();
            let lam_level_idx = diagram
                .vertex_index(n - 1, &lam)
                .expect("λ is a level n-1 vertex");
            let amps = w_amplitudes(&lam, n, d, true);
            let branch_cells: Vec<Cell> = amps.iter().map(|&(a, _)| a).collect();
            let branch_vertices: Vec<usize> = branch_cells
                .iter()
                .map(|&a| {
                    diagram
                        .vertex_index(n, &lam.with_cell(a).unwrap())
                        .expect("branch vertex exists in dilated diagram")
                })
                .collect();
            let undilated_len = branch_cells.iter().filter(|a| a.row <= d).count();
            let w_dil: Vec<f64> = amps.iter().map(|&(_, w)| w).collect();
            let w_und_raw = &w_dil[..undilated_len];
            let und_norm: f64 = w_und_raw.iter().map(|w| w * w).sum::<f64>().sqrt();
            let w_und: Vec<f64> = w_und_raw.iter().map(|w| w / und_norm).collect();

            let g_values: Vec<f64> = match g {
                Some(g) => branch_cells
                    .iter()
                    .map(|&a| g.wedge_value(&lam, a, d))
                    .collect::<Result<_>>()?,
                None => vec![1.0; branch_cells.len()],
            };
            let w_gweighted = if g.is_some() {
                let weighted: Vec<f64> = (0..undilated_len)
                    .map(|j| (g_values[j] * w_dil[j] * w_dil[j]).sqrt())
                    .collect();
                let norm: f64 = weighted.iter().map(|w| w * w).sum::<f64>().sqrt();
                if norm < 1e-12 {
                    None
                } else {
                    let target: Vec<f64> = weighted.iter().map(|w| w / norm).collect();
                    Some(column_prep_unitary(&target))
                }
            } else {
                None
            };

            wedge.push(Some(WedgeInfo {
                lam,
                lam_level_idx,
                branch_cells,
                branch_vertices,
                undilated_len,
                g_values,
                w_dilated: column_prep_unitary(&w_dil),
                w_undilated: column_prep_unitary(&w_und),
                w_gweighted,
            }));
        }

        let m_max = diagram
            .leaves()
            .iter()
            .map(|l| l.weyl_dim().to_usize().unwrap())
            .max()
            .unwrap_or(1);

        let mut registers = Vec::new();
        let push = |regs: &mut Vec<Register>, name: String, kind: RegisterKind, dim: usize| {
            regs.push(Register { name, kind, dim });
            regs.len() - 1
        };
        let reg_mult = push(
            &mut registers,
            "M".into(),
            RegisterKind::Multiplicity,
            m_max,
        );
        let mut reg_t = vec![None; n + 1];
        let mut reg_y = vec![None; n + 2];
        let mut reg_loc = None;
        let mut reg_wu = None;
        match encoding {
            Encoding::Standard => {
                for k in 2..=n {
                    let id = push(
                        &mut registers,
                        format!("T{k}"),
                        RegisterKind::PathVertex { level: k },
                        diagram.level(k).len(),
                    );
                    reg_t[k] = Some(id);
                }
            }
            Encoding::Yamanouchi => {
                for pos in 2..=(n + 1) {
                    let id = push(
                        &mut registers,
                        format!("y{pos}"),
                        RegisterKind::Yamanouchi { pos },
                        d + 1,
                    );
                    reg_y[pos] = Some(id);
                }
            }
        }
        let reg_lam = push(
            &mut registers,
            "Lam".into(),
            RegisterKind::Irrep,
            diagram.leaves().len(),
        );
        if encoding == Encoding::Yamanouchi {
            reg_loc = Some(push(
                &mut registers,
                "loc".into(),
                RegisterKind::Location,
                n + 1,
            ));
            let wu_dim = (0..=n).map(|k| diagram.level(k).len()).max().unwrap();
            reg_wu = Some(push(&mut registers, "WU".into(), RegisterKind::Work, wu_dim));
        }
        let reg_q = if g.is_some() {
            Some(push(
                &mut registers,
                "Q".into(),
                RegisterKind::DilationQubit,
                2,
            ))
        } else {
            None
        };
        let reg_p = push(
            &mut registers,
            "P".into(),
            RegisterKind::PhaseAncilla,
            n + 1,
        );

        let mut strides = vec![0usize; registers.len()];
        let mut acc = 1usize;
        for (i, r) in registers.iter().enumerate().rev() {
            strides[i] = acc;
            acc = acc.checked_mul(r.dim).ok_or(Error::GuardExceeded {
                required: usize::MAX,
                guard: usize::MAX,
            })?;
        }

        Ok(MeasurementContext {
            n,
            d,
            encoding,
            diagram,
            paths,
            deformed: g.is_some(),
            wedge,
            registers,
            strides,
            total_dim: acc,
            reg_mult,
            reg_t,
            reg_y,
            reg_lam,
            reg_loc,
            reg_wu,
            reg_q,
            reg_p,
        })
    }

    pub fn index_of(&self, values: &[usize]) -> usize {
        values
            .iter()
            .zip(&self.strides)
            .map(|(v, s)| v * s)
            .sum()
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.registers.len()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = idx / s;
            idx %= s;
        }
        out
    }

    /// Partition at a path level given decoded register values (standard
    /// encoding); levels 0 and 1 are the implicit `empty` and `(1)`.
    pub fn level_value(&self, values: &[usize], k: usize) -> Option<usize> {
        if k <= 1 {
            return Some(0);
        }
        let id = self.reg_t[k]?;
        let v = values[id];
        if v < self.diagram.level(k).len() {
            Some(v)
        } else {
            None
        }
    }
}
