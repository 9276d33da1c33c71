//! k-Vector-Sum instances over `F_q^m`: generation, brute-force deciding,
//! the target-vector variant and `r`-sumsets.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::ffield::{FieldVector, PrimeField};
use crate::rng::sha256_hex;

/// Default cap on brute-force enumeration work.
pub const DEFAULT_ENUM_BUDGET: u128 = 1 << 26;

const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub generator: String,
}

/// Evidence that an instance was decided NO by exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsatCertificate {
    /// Size of the tuple space that was searched.
    pub tuples: u128,
    /// Fingerprint of the instance the search ran on.
    pub instance_hash: String,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VecSumInstance {
    field: PrimeField,
    m: usize,
    collections: Vec<Vec<FieldVector>>,
    planted: Option<Vec<usize>>,
    provenance: Provenance,
    certificate: Option<UnsatCertificate>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    q: u64,
    k: usize,
    m: usize,
    collections: Vec<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted: Option<Vec<usize>>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<UnsatCertificate>,
}

impl VecSumInstance {
    pub fn new(field: PrimeField, m: usize, collections: Vec<Vec<FieldVector>>) -> Result<Self> {
        if collections.is_empty() {
            return Err(Error::contract("an instance needs at least one collection"));
        }
        for (i, c) in collections.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::contract(format!("collection {i} is empty")));
            }
            for v in c {
                if v.field() != field {
                    return Err(Error::ModulusMismatch {
                        left: field.modulus(),
                        right: v.field().modulus(),
                    });
                }
                if v.dim() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: v.dim(),
                    });
                }
            }
        }
        Ok(Self {
            field,
            m,
            collections,
            planted: None,
            provenance: Provenance {
                seed: None,
                generator: "manual".into(),
            },
            certificate: None,
        })
    }

    pub fn from_residues(field: PrimeField, m: usize, collections: &[Vec<Vec<u64>>]) -> Result<Self> {
        Self::new(
            field,
            m,
            collections
                .iter()
                .map(|c| c.iter().map(|v| FieldVector::new(field, v.clone())).collect())
                .collect(),
        )
    }

    /// Records a witness; fails unless the indexed vectors sum to zero.
    pub fn with_planted(mut self, planted: Vec<usize>) -> Result<Self> {
        if !self.is_witness(&planted) {
            return Err(Error::contract("planted tuple does not sum to zero"));
        }
        self.planted = Some(planted);
        Ok(self)
    }

    pub fn with_provenance(mut self, seed: Option<u64>, generator: &str) -> Self {
        self.provenance = Provenance {
            seed,
            generator: generator.into(),
        };
        self
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn k(&self) -> usize {
        self.collections.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn collections(&self) -> &[Vec<FieldVector>] {
        &self.collections
    }

    pub fn collection(&self, i: usize) -> &[FieldVector] {
        &self.collections[i]
    }

    pub fn planted(&self) -> Option<&[usize]> {
        self.planted.as_deref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn certificate(&self) -> Option<&UnsatCertificate> {
        self.certificate.as_ref()
    }

    /// Total number of vectors across collections.
    pub fn size(&self) -> usize {
        self.collections.iter().map(Vec::len).sum()
    }

    /// `prod |U_i|`.
    pub fn tuple_count(&self) -> u128 {
        self.collections
            .iter()
            .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
            .unwrap_or(u128::MAX)
    }

    /// The vectors picked by an index tuple.
    pub fn tuple(&self, indices: &[usize]) -> Result<Vec<&FieldVector>> {
        if indices.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: indices.len(),
            });
        }
        indices
            .iter()
            .zip(&self.collections)
            .map(|(&i, c)| {
                c.get(i)
                    .ok_or_else(|| Error::contract(format!("index {i} out of range")))
            })
            .collect()
    }

    pub fn is_witness(&self, indices: &[usize]) -> bool {
        match self.tuple(indices) {
            Ok(vs) => {
                let mut acc = FieldVector::zeros(self.field, self.m);
                for v in vs {
                    acc.add_scaled(1, v).expect("validated shapes");
                }
                acc.is_zero()
            }
            Err(_) => false,
        }
    }

    /// SHA-256 over the canonical JSON of `(q, m, collections)`.
    pub fn fingerprint(&self) -> String {
        let body = serde_json::json!({
            "q": self.field.modulus(),
            "m": self.m,
            "collections": self.residues(),
        });
        sha256_hex(body.to_string().as_bytes())
    }

    fn residues(&self) -> Vec<Vec<Vec<u64>>> {
        self.collections
            .iter()
            .map(|c| c.iter().map(|v| v.entries().to_vec()).collect())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&InstanceFile {
            version: INSTANCE_FORMAT_VERSION,
            q: self.field.modulus(),
            k: self.k(),
            m: self.m,
            collections: self.residues(),
            planted: self.planted.clone(),
            seed: self.provenance.seed,
            generator: self.provenance.generator.clone(),
            certificate: self.certificate.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != INSTANCE_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported instance version {}", file.version)));
        }
        if file.collections.len() != file.k {
            return Err(Error::Parse(format!(
                "k = {} but {} collections given",
                file.k,
                file.collections.len()
            )));
        }
        if file.collections.iter().flatten().flatten().any(|&x| x >= file.q) {
            return Err(Error::Parse("residue outside [0, q)".into()));
        }
        let field = PrimeField::new(file.q)?;
        let mut inst =
            Self::from_residues(field, file.m, &file.collections)?.with_provenance(file.seed, &file.generator);
        if let Some(p) = file.planted {
            inst = inst.with_planted(p)?;
        }
        if let Some(c) = file.certificate {
            if c.instance_hash != inst.fingerprint() {
                return Err(Error::Parse("certificate does not match the instance".into()));
            }
            inst.certificate = Some(c);
        }
        Ok(inst)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Uniform collections of size `n` with one zero-sum tuple planted at random
/// positions; the last planted vector is minus the sum of the others.
pub fn generate_planted<R: Rng + ?Sized>(
    rng: &mut R,
    field: PrimeField,
    k: usize,
    m: usize,
    n: usize,
) -> Result<VecSumInstance> {
    if n == 0 || k == 0 {
        return Err(Error::contract("need k >= 1 and at least one vector per collection"));
    }
    let mut collections: Vec<Vec<FieldVector>> = (0..k)
        .map(|_| (0..n).map(|_| FieldVector::random(field, m, rng)).collect())
        .collect();
    let mut sum = FieldVector::zeros(field, m);
    let mut planted = Vec::with_capacity(k);
    for (i, c) in collections.iter_mut().enumerate() {
        let pos = rng.random_range(0..n);
        let v = if i + 1 < k {
            FieldVector::random(field, m, rng)
        } else {
            sum.neg()
        };
        sum.add_scaled(1, &v)?;
        c[pos] = v;
        planted.push(pos);
    }
    VecSumInstance::new(field, m, collections)?.with_planted(planted)
}

/// Uniform instances, resampled until exhaustive search certifies NO.
pub fn generate_unsat<R: Rng + ?Sized>(
    rng: &mut R,
    field: PrimeField,
    k: usize,
    m: usize,
    n: usize,
    max_retries: usize,
    budget: u128,
) -> Result<VecSumInstance> {
    if n == 0 || k == 0 {
        return Err(Error::contract("need k >= 1 and at least one vector per collection"));
    }
    check_budget("brute-force decide", (n as u128).saturating_pow(k as u32), budget)?;
    for attempt in 1..=max_retries {
        let collections = (0..k)
            .map(|_| (0..n).map(|_| FieldVector::random(field, m, rng)).collect())
            .collect();
        let mut inst = VecSumInstance::new(field, m, collections)?;
        if let Decision::No { tuples } = brute_force_decide(&inst, budget)? {
            inst.certificate = Some(UnsatCertificate {
                tuples,
                instance_hash: inst.fingerprint(),
                attempts: attempt,
            });
            return Ok(inst);
        }
    }
    Err(Error::RetriesExhausted {
        attempts: max_retries,
        reason: format!(
            "every sampled instance (q={}, k={k}, m={m}, n={n}) had a zero-sum tuple",
            field.modulus()
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum Decision {
    Yes { witness: Vec<usize> },
    No { tuples: u128 },
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes { .. })
    }
}

/// Exhaustive decision. A YES answer carries the lexicographically first
/// witness index tuple.
pub fn brute_force_decide(inst: &VecSumInstance, budget: u128) -> Result<Decision> {
    let tuples = inst.tuple_count();
    check_budget("brute-force decide", tuples, budget)?;
    let k = inst.k();
    let field = inst.field();
    let last = inst.collection(k - 1);
    let mut first_index: HashMap<&[u64], usize> = HashMap::with_capacity(last.len());
    for (j, v) in last.iter().enumerate() {
        first_index.entry(v.entries()).or_insert(j);
    }
    if k == 1 {
        let zero = vec![0; inst.m()];
        return Ok(match first_index.get(zero.as_slice()) {
            Some(&j) => Decision::Yes { witness: vec![j] },
            None => Decision::No { tuples },
        });
    }
    let prefix_sizes: Vec<usize> = inst.collections()[..k - 1].iter().map(Vec::len).collect();
    let found = (0..prefix_sizes[0]).into_par_iter().find_map_first(|i0| {
        let mut idx = vec![0usize; k - 1];
        idx[0] = i0;
        loop {
            let mut sum = vec![0u64; inst.m()];
            for (c, &i) in idx.iter().enumerate() {
                for (s, &x) in sum.iter_mut().zip(inst.collection(c)[i].entries()) {
                    *s = field.add(*s, x);
                }
            }
            let need: Vec<u64> = sum.iter().map(|&s| field.neg(s)).collect();
            if let Some(&j) = first_index.get(need.as_slice()) {
                let mut w = idx.clone();
                w.push(j);
                return Some(w);
            }
            // advance the odometer over positions 1..k-1
            let mut pos = k - 2;
            loop {
                if pos == 0 {
                    return None;
                }
                idx[pos] += 1;
                if idx[pos] < prefix_sizes[pos] {
                    break;
                }
                idx[pos] = 0;
                pos -= 1;
            }
        }
    });
    Ok(match found {
        Some(witness) => Decision::Yes { witness },
        None => Decision::No { tuples },
    })
}

/// The instance "some tuple sums to `target`" rewritten as a zero-sum
/// instance by appending the collection `{-target}`.
pub fn from_target_variant(inst: &VecSumInstance, target: &FieldVector) -> Result<VecSumInstance> {
    if target.dim() != inst.m() {
        return Err(Error::DimensionMismatch {
            expected: inst.m(),
            found: target.dim(),
        });
    }
    let mut collections = inst.collections().to_vec();
    collections.push(vec![target.neg()]);
    Ok(VecSumInstance::new(inst.field(), inst.m(), collections)?
        .with_provenance(inst.provenance().seed, "target-variant"))
}

/// `m = ceil(c_m * k^2 * log2 n)`, at least 1.
pub fn paper_dimension(k: usize, n: usize, c_m: f64) -> usize {
    let n = n.max(2) as f64;
    ((c_m * (k * k) as f64 * n.log2()).ceil() as usize).max(1)
}

/// The `r`-sumset `{sum_{i<=r} gamma_i b_i : gamma_i in F_q, b_i in B}`.
#[derive(Debug, Clone)]
pub struct SumsetView {
    r: usize,
    elements: Vec<FieldVector>,
    members: HashSet<Vec<u64>>,
}

impl SumsetView {
    pub fn order(&self) -> usize {
        self.r
    }

    /// Elements in lexicographic order.
    pub fn elements(&self) -> &[FieldVector] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, v: &FieldVector) -> bool {
        self.members.contains(v.entries())
    }
}

pub fn enumerate_sumset(field: PrimeField, basis: &[FieldVector], r: usize, cap: u128) -> Result<SumsetView> {
    let dim = basis
        .first()
        .map(FieldVector::dim)
        .ok_or_else(|| Error::contract("sumset of an empty collection"))?;
    if let Some(v) = basis.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    let step = field.modulus() as u128 * basis.len() as u128;
    let required = step.checked_pow(r as u32).unwrap_or(u128::MAX);
    check_budget("sumset enumeration", required, cap)?;

    let mut members: HashSet<Vec<u64>> = HashSet::from([vec![0; dim]]);
    for _ in 0..r {
        let mut next = members.clone();
        for s in &members {
            for b in basis {
                for gamma in 1..field.modulus() {
                    let v: Vec<u64> = s
                        .iter()
                        .zip(b.entries())
                        .map(|(&x, &y)| field.add(x, field.mul(gamma, y)))
                        .collect();
                    next.insert(v);
                }
            }
        }
        members = next;
    }
    let mut sorted: Vec<Vec<u64>> = members.iter().cloned().collect();
    sorted.sort_unstable();
    Ok(SumsetView {
        r,
        elements: sorted.into_iter().map(|v| FieldVector::new(field, v)).collect(),
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn inst(q: u64, cols: &[&[&[u64]]]) -> VecSumInstance {
        let m = cols[0][0].len();
        let raw: Vec<Vec<Vec<u64>>> = cols.iter().map(|c| c.iter().map(|v| v.to_vec()).collect()).collect();
        VecSumInstance::from_residues(f(q), m, &raw).unwrap()
    }

    #[test]
    fn decide_examples() {
        let yes = inst(3, &[&[&[1]], &[&[2]]]);
        assert_eq!(
            brute_force_decide(&yes, DEFAULT_ENUM_BUDGET).unwrap(),
            Decision::Yes { witness: vec![0, 0] }
        );
        let no = inst(3, &[&[&[1]], &[&[1]]]);
        assert_eq!(
            brute_force_decide(&no, DEFAULT_ENUM_BUDGET).unwrap(),
            Decision::No { tuples: 1 }
        );
    }

    #[test]
    fn first_witness_is_lexicographic() {
        let i = inst(5, &[&[&[1], &[2], &[3]], &[&[1], &[1], &[4], &[3]], &[&[0], &[2]]]);
        // (0,2,0): 1+4+0, (0,0,?) needs 3, (0,1,?) needs 3, (0,2,0) ok
        assert_eq!(
            brute_force_decide(&i, DEFAULT_ENUM_BUDGET).unwrap(),
            Decision::Yes { witness: vec![0, 2, 0] }
        );
        assert!(brute_force_decide(&i, 10).unwrap_err().is_budget());
    }

    #[test]
    fn planted_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = generate_planted(&mut rng, f(3), 2, 2, 4).unwrap();
        assert!(p.is_witness(p.planted().unwrap()));
        assert!(brute_force_decide(&p, DEFAULT_ENUM_BUDGET).unwrap().is_yes());
        let single = generate_planted(&mut rng, f(7), 1, 3, 5).unwrap();
        assert!(single.collection(0).iter().any(FieldVector::is_zero));
        assert!(generate_planted(&mut rng, f(7), 2, 3, 0).is_err());
    }

    #[test]
    fn unsat_generation_and_failure() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let no = generate_unsat(&mut rng, f(5), 2, 3, 4, 50, DEFAULT_ENUM_BUDGET).unwrap();
        let cert = no.certificate().unwrap();
        assert_eq!(cert.tuples, 16);
        assert_eq!(cert.instance_hash, no.fingerprint());
        assert!(!brute_force_decide(&no, DEFAULT_ENUM_BUDGET).unwrap().is_yes());
        // q^m = 3 <= n^k = 25: zero-sum tuples are all but certain
        let err = generate_unsat(&mut rng, f(3), 2, 1, 5, 5, DEFAULT_ENUM_BUDGET).unwrap_err();
        assert!(matches!(err, Error::RetriesExhausted { attempts: 5, .. }));
    }

    #[test]
    fn target_variant_examples() {
        let i = inst(3, &[&[&[1]]]);
        let t = FieldVector::new(f(3), vec![1]);
        let conv = from_target_variant(&i, &t).unwrap();
        assert_eq!(conv.k(), 2);
        assert!(brute_force_decide(&conv, DEFAULT_ENUM_BUDGET).unwrap().is_yes());
        let zero = from_target_variant(&i, &FieldVector::zeros(f(3), 1)).unwrap();
        assert!(zero.collection(1)[0].is_zero());
        assert!(!brute_force_decide(&zero, DEFAULT_ENUM_BUDGET).unwrap().is_yes());
        assert!(from_target_variant(&i, &FieldVector::zeros(f(3), 2)).is_err());
    }

    #[test]
    fn sumset_examples() {
        let zero = enumerate_sumset(f(5), &[FieldVector::zeros(f(5), 2)], 3, 1 << 20).unwrap();
        assert_eq!(zero.len(), 1);
        let b = vec![FieldVector::new(f(5), vec![1, 2]), FieldVector::new(f(5), vec![0, 3])];
        let one = enumerate_sumset(f(5), &b, 1, 1 << 20).unwrap();
        let mut expected: HashSet<Vec<u64>> = HashSet::new();
        for v in &b {
            for g in 0..5 {
                expected.insert(v.scale(g).into_entries());
            }
        }
        assert_eq!(one.len(), expected.len());
        assert!(one.elements().iter().all(|v| expected.contains(v.entries())));
        let e = vec![FieldVector::unit(f(3), 2, 0), FieldVector::unit(f(3), 2, 1)];
        assert_eq!(enumerate_sumset(f(3), &e, 2, 1 << 20).unwrap().len(), 9);
        let err = enumerate_sumset(f(3), &e, 20, 1 << 20).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = generate_planted(&mut rng, f(5), 3, 2, 3)
            .unwrap()
            .with_provenance(Some(3), "planted");
        let text = p.to_json().unwrap();
        assert!(text.starts_with("{\"version\":1,\"q\":5,\"k\":3,\"m\":2,\"collections\":[[["));
        assert_eq!(VecSumInstance::from_json(&text).unwrap(), p);
        let no = generate_unsat(&mut rng, f(5), 2, 3, 3, 20, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(VecSumInstance::from_json(&no.to_json().unwrap()).unwrap(), no);
        let bad = r#"{"version":1,"q":5,"k":2,"m":1,"collections":[[[1]]]}"#;
        assert!(VecSumInstance::from_json(bad).is_err());
        let bad_plant = r#"{"version":1,"q":5,"k":2,"m":1,"collections":[[[1]],[[1]]],"planted":[0,0]}"#;
        assert!(VecSumInstance::from_json(bad_plant).is_err());
    }

    #[test]
    fn paper_dimension_rounds_up() {
        assert_eq!(paper_dimension(2, 8, 1.0), 12);
        assert_eq!(paper_dimension(1, 3, 1.0), 2);
        assert_eq!(paper_dimension(3, 1, 0.5), 5);
    }
}
