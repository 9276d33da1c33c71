use rand::Rng;
use serde::Serialize;

use super::graph::{find_non_edge, CliqueInstance};
use super::vertex::Vertex;
use crate::error::{Error, Result};
use crate::ffield::{PointSpace, PrimeField};
use crate::lintest::{FunctionTable, MAX_TABLE_POINTS};

/// How each point of `F_q^{k^2}` received its value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FillLog {
    /// Points of `var(T)`, set from the clique.
    pub from_clique: usize,
    /// Phase-two points that are multiples of a point of `var(T)`.
    pub from_var_multiple: usize,
    /// Phase-two points that are multiples of an earlier phase-two point.
    pub from_fill_multiple: usize,
    pub random: usize,
}

/// The function `Gamma : F_q^{k^2} -> F_q^l` decoded from a clique.
#[derive(Debug, Clone)]
pub struct GammaTable {
    pub table: FunctionTable,
    /// Indices of `var(T)`, ascending.
    pub var: Vec<usize>,
    pub log: FillLog,
}

/// Builds `Gamma` from a clique `T` in two phases.
///
/// Phase one copies the vertex values on `var(T)`. Phase two sweeps the
/// remaining points in index order; a point that is a multiple of a point of
/// `var(T)` inherits the scaled value, else one that is a multiple of an
/// earlier swept point does, else it gets a fresh uniform value.
pub fn build_gamma<R: Rng + ?Sized>(clique: &[Vertex], inst: &CliqueInstance, rng: &mut R) -> Result<GammaTable> {
    if clique.is_empty() {
        return Err(Error::Refused("the clique is empty".into()));
    }
    if let Some((a, b, types)) = find_non_edge(clique, inst)? {
        return Err(Error::Refused(format!(
            "vertices {a} and {b} of the set are not adjacent (non-edge types {:?})",
            types.types()
        )));
    }
    let p = inst.params();
    let field = inst.field();
    let space = PointSpace::new(field, p.k * p.k, MAX_TABLE_POINTS)?;
    let mut values: Vec<Option<Vec<u64>>> = vec![None; space.size()];
    let mut log = FillLog::default();
    for v in clique {
        for (point, value) in v.assignment(field) {
            let idx = space.index_of(&point);
            match &values[idx] {
                None => values[idx] = Some(value),
                Some(existing) if *existing != value => {
                    return Err(Error::PropertyViolation(format!(
                        "clique vertices disagree at point {point:?}"
                    )));
                }
                Some(_) => {}
            }
        }
    }
    let var: Vec<usize> = (0..space.size()).filter(|&i| values[i].is_some()).collect();
    log.from_clique = var.len();
    let in_var: Vec<bool> = values.iter().map(Option::is_some).collect();
    for idx in 0..space.size() {
        if in_var[idx] {
            continue;
        }
        let value = inherit(&space, field, idx, &values, |j| in_var[j])
            .inspect(|_| log.from_var_multiple += 1)
            .or_else(|| {
                inherit(&space, field, idx, &values, |j| !in_var[j] && j < idx).inspect(|_| log.from_fill_multiple += 1)
            })
            .unwrap_or_else(|| {
                log.random += 1;
                (0..p.ell).map(|_| field.random(rng)).collect()
            });
        values[idx] = Some(value);
    }
    let flat: Vec<u64> = values.into_iter().flat_map(|v| v.expect("all points filled")).collect();
    let table = FunctionTable::new(field, p.k * p.k, p.ell, flat)?;
    if let Some((gamma, alpha)) = table.scalar_violation() {
        return Err(Error::PropertyViolation(format!(
            "Gamma is not scalar respecting: Gamma({gamma} * {:?}) != {gamma} * Gamma({:?})",
            space.point(alpha),
            space.point(alpha)
        )));
    }
    Ok(GammaTable {
        table: table.into_scalar_respecting()?,
        var,
        log,
    })
}

/// `gamma * value(alpha')` for the first `alpha'` on the line through
/// `idx` (taking multiples `c * idx` for `c = 1, 2, ...`, and any point at
/// all when `idx` is the origin) that satisfies `eligible`.
fn inherit(
    space: &PointSpace,
    field: PrimeField,
    idx: usize,
    values: &[Option<Vec<u64>>],
    eligible: impl Fn(usize) -> bool,
) -> Option<Vec<u64>> {
    if idx == 0 {
        return (0..space.size())
            .find(|&j| eligible(j) && values[j].is_some())
            .map(|_| vec![0; values.iter().flatten().next().map_or(0, Vec::len)]);
    }
    (1..field.modulus()).find_map(|c| {
        let j = space.scale_index(c, idx);
        if !eligible(j) {
            return None;
        }
        // idx = c^{-1} * j
        let back = field.inv(c).expect("nonzero");
        values[j]
            .as_ref()
            .map(|val| val.iter().map(|&t| field.mul(back, t)).collect())
    })
}
